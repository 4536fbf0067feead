#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "wntk/types.hpp"

namespace wntk {

struct Dataset {
  Matrix x;                 // n x d0
  std::vector<int> y;       // dense class indices in [0, class_count)
  int class_count = 0;
  std::vector<std::string> feature_names;
  std::vector<std::string> class_names;  // class_names[k] is the original label text
  std::string provenance;

  std::size_t size() const noexcept { return y.size(); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(x.cols()); }
};

struct CsvSchema {
  // Label column by header name; empty means "last column".
  std::string label_column;
  char delimiter = ',';
  bool header = true;
};

// Numeric features, string labels mapped to classes in first-appearance order.
// Throws ParseError (with 1-based row/column) or EmptyDataset.
Dataset load_csv(const std::string& path, const CsvSchema& schema = {});
// Header row, features, then the label column (original label text).
void write_csv(const std::string& path, const Dataset& d);

class Standardizer {
 public:
  // Statistics from the given rows only (population standard deviation).
  static Standardizer fit(const Matrix& x, const std::vector<std::size_t>& rows);

  Matrix transform(const Matrix& x) const;
  Matrix inverse_transform(const Matrix& z) const;

  const Vector& mean() const noexcept { return mean_; }
  const Vector& scale() const noexcept { return scale_; }
  // True where the feature was constant on the fitting rows (scale forced to 1).
  const std::vector<bool>& constant() const noexcept { return constant_; }

 private:
  Vector mean_;
  Vector scale_;
  std::vector<bool> constant_;
};

std::pair<Standardizer, Matrix> standardize_fit_transform(const Matrix& x, const std::vector<std::size_t>& train_rows);

struct FoldPlan {
  std::vector<std::vector<std::size_t>> folds;
  std::uint64_t seed = 0;

  std::size_t k() const noexcept { return folds.size(); }
  // Rows of every fold except `fold`, in fold order.
  std::vector<std::size_t> train_rows(std::size_t fold) const;
};

// Seeded shuffle, then contiguous folds; the first n % k folds get one extra row.
FoldPlan kfold_split(std::size_t n, std::size_t k, std::uint64_t seed);

struct TrainValSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
};

// Validation size round(r * n) after a seeded shuffle of `indices`.
TrainValSplit train_val_split(const std::vector<std::size_t>& indices, double r, std::uint64_t seed);

Matrix take_rows(const Matrix& x, const std::vector<std::size_t>& rows);
std::vector<int> take(const std::vector<int>& y, const std::vector<std::size_t>& rows);

// Synthetic regression data: n points uniform on the unit sphere in R^dim with
// targets from a fixed random sum of sinusoids (|y| of order one).
struct RegressionData {
  Matrix x;
  Vector y;
};
RegressionData sphere_regression(std::size_t n, std::size_t dim, std::uint64_t seed,
                                 std::uint64_t function_seed = 7);
// Evaluates the same target function as sphere_regression for a given function seed.
Vector smooth_target(const Matrix& x, std::uint64_t function_seed);

// Gaussian blobs, one per class, centred on scaled random directions.
Dataset gaussian_blobs(std::size_t n, std::size_t dim, int classes, double separation, std::uint64_t seed);

}  // namespace wntk
