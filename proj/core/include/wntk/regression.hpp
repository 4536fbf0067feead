#pragma once

#include <optional>
#include <string>
#include <vector>

#include "wntk/types.hpp"

namespace wntk {

enum class Factorization { cholesky, symmetric_eigen };

// Ridge system (A + ridge I) alpha = Y, solved once and kept for further solves.
class KernelRegressor {
 public:
  const Matrix& train_kernel() const noexcept { return kernel_; }
  const Matrix& targets() const noexcept { return targets_; }
  double ridge() const noexcept { return ridge_; }
  const Matrix& coefficients() const noexcept { return alpha_; }
  Factorization factorization() const noexcept { return kind_; }
  Eigen::Index size() const noexcept { return kernel_.rows(); }

  bool has_initial_outputs() const noexcept { return initial_outputs_.has_value(); }
  const Matrix& initial_outputs() const;

  // (A + ridge I)^{-1} rhs with the stored factorization.
  Matrix solve(const Matrix& rhs) const;

 private:
  friend KernelRegressor fit_krr(const Matrix&, const Matrix&, double, std::optional<Matrix>);
  friend Matrix predict_scores_with_initial_correction(const KernelRegressor&, const Matrix&, const Matrix&);

  Matrix kernel_;
  Matrix targets_;
  double ridge_ = 0.0;
  Matrix alpha_;
  Factorization kind_ = Factorization::cholesky;
  Eigen::LLT<Matrix> llt_;
  Matrix eigvecs_;
  Vector inv_eigvals_;  // pseudo-inverse spectrum for the eigen fallback
  std::optional<Matrix> initial_outputs_;
  Matrix initial_coeffs_;  // (A + ridge I)^{-1} f0(X)
};

// Cholesky first; falls back to a symmetric eigendecomposition (eigenvalues below
// 1e-12 max|eig| are dropped) for indefinite or singular systems. Throws SingularKernel
// if the residual still exceeds 1e-8 ||Y||.
KernelRegressor fit_krr(const Matrix& kernel, const Matrix& targets, double ridge,
                        std::optional<Matrix> initial_outputs = std::nullopt);

// Scores plus decoded labels. One score column decodes by sign (>= 0 is class 1, else
// class 0); several columns decode by argmax with ties to the lowest index.
struct Prediction {
  Matrix scores;
  std::vector<int> labels;
};

std::vector<int> decode_labels(const Matrix& scores);
Prediction predict(const KernelRegressor& r, const Matrix& cross_kernel);
Matrix predict_scores_with_initial_correction(const KernelRegressor& r, const Matrix& cross_kernel,
                                              const Matrix& initial_test_outputs);
// scores = K_* alpha + (f0_test - K_* (A + ridge I)^{-1} f0(X)).
Prediction predict_with_initial_correction(const KernelRegressor& r, const Matrix& cross_kernel,
                                           const Matrix& initial_test_outputs);

double score_accuracy(const Prediction& p, const std::vector<int>& truth);

// Two classes -> one column with class 0 = -1, class 1 = +1; more -> one-hot columns.
Matrix encode_labels(const std::vector<int>& labels, int class_count);

// JSON round trip. The file stores the training system; loading refits it and checks
// that the kernel hash and coefficients match.
void save_regressor(const std::string& path, const KernelRegressor& r);
KernelRegressor load_regressor(const std::string& path);

}  // namespace wntk
