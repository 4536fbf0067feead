#include "wntk/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_map>

#include "wntk/errors.hpp"

namespace wntk {
namespace {

std::vector<std::string> split_line(const std::string& line, char delim) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, delim)) cells.push_back(cell);
  if (!line.empty() && line.back() == delim) cells.emplace_back();
  return cells;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

Dataset load_csv(const std::string& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");

  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header;
  std::string line;
  long line_no = 0;
  std::vector<long> line_numbers;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto cells = split_line(line, schema.delimiter);
    for (auto& c : cells) c = trim(c);
    if (schema.header && header.empty()) {
      header = std::move(cells);
      continue;
    }
    rows.push_back(std::move(cells));
    line_numbers.push_back(line_no);
  }
  if (rows.empty()) throw EmptyDataset("'" + path + "' has no data rows");

  const std::size_t cols = schema.header ? header.size() : rows.front().size();
  if (cols < 2) throw ParseError("need at least one feature column and a label column", 1, -1);
  std::size_t label_col = cols - 1;
  if (!schema.label_column.empty()) {
    if (!schema.header) throw ConfigError("a named label column requires a header row");
    const auto it = std::find(header.begin(), header.end(), schema.label_column);
    if (it == header.end()) throw ParseError("label column '" + schema.label_column + "' not found", 1, -1);
    label_col = static_cast<std::size_t>(it - header.begin());
  }

  Dataset d;
  d.provenance = path;
  for (std::size_t c = 0; c < cols; ++c) {
    if (c == label_col) continue;
    d.feature_names.push_back(schema.header ? header[c] : "x" + std::to_string(c));
  }
  d.x.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols - 1));
  std::unordered_map<std::string, int> classes;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& cells = rows[r];
    const long row_no = line_numbers[r];
    if (cells.size() != cols)
      throw ParseError("row " + std::to_string(row_no) + " has " + std::to_string(cells.size()) +
                           " cells, expected " + std::to_string(cols),
                       row_no, -1);
    Eigen::Index fc = 0;
    for (std::size_t c = 0; c < cols; ++c) {
      const std::string& cell = cells[c];
      const long col_no = static_cast<long>(c) + 1;
      if (cell.empty())
        throw ParseError("missing value at row " + std::to_string(row_no) + ", column " + std::to_string(col_no),
                         row_no, col_no);
      if (c == label_col) {
        auto [it, inserted] = classes.try_emplace(cell, static_cast<int>(classes.size()));
        if (inserted) d.class_names.push_back(cell);
        d.y.push_back(it->second);
        continue;
      }
      double v = 0.0;
      std::size_t used = 0;
      try {
        v = std::stod(cell, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != cell.size() || !std::isfinite(v))
        throw ParseError("non-numeric value '" + cell + "' at row " + std::to_string(row_no) + ", column " +
                             std::to_string(col_no),
                         row_no, col_no);
      d.x(static_cast<Eigen::Index>(r), fc++) = v;
    }
  }
  d.class_count = static_cast<int>(classes.size());
  if (d.size() < 2) throw EmptyDataset("'" + path + "' needs at least two rows");
  return d;
}

void write_csv(const std::string& path, const Dataset& d) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << std::setprecision(17);
  for (std::size_t c = 0; c < d.dim(); ++c)
    out << (c < d.feature_names.size() ? d.feature_names[c] : "x" + std::to_string(c)) << ',';
  out << "label\n";
  for (std::size_t i = 0; i < d.size(); ++i) {
    for (std::size_t c = 0; c < d.dim(); ++c) out << d.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) << ',';
    const int y = d.y[i];
    out << (static_cast<std::size_t>(y) < d.class_names.size() ? d.class_names[y] : std::to_string(y)) << '\n';
  }
  if (!out) throw IoError("dataset write failed");
}

Standardizer Standardizer::fit(const Matrix& x, const std::vector<std::size_t>& rows) {
  if (rows.empty()) throw ConfigError("EmptyTrainSplit: standardizer needs at least one row");
  Standardizer s;
  const Eigen::Index d = x.cols();
  s.mean_ = Vector::Zero(d);
  s.scale_ = Vector::Ones(d);
  s.constant_.assign(static_cast<std::size_t>(d), false);
  const double n = static_cast<double>(rows.size());
  for (std::size_t r : rows) s.mean_ += x.row(static_cast<Eigen::Index>(r)).transpose();
  s.mean_ /= n;
  Vector var = Vector::Zero(d);
  for (std::size_t r : rows) var += (x.row(static_cast<Eigen::Index>(r)).transpose() - s.mean_).array().square().matrix();
  var /= n;
  for (Eigen::Index c = 0; c < d; ++c) {
    const double sd = std::sqrt(var(c));
    // Rounding in the mean can leave a constant column with a tiny non-zero spread.
    if (!(sd > 1e-12 * std::max(1.0, std::abs(s.mean_(c))))) {
      s.constant_[static_cast<std::size_t>(c)] = true;
    } else {
      s.scale_(c) = sd;
    }
  }
  return s;
}

Matrix Standardizer::transform(const Matrix& x) const {
  if (x.cols() != mean_.size()) throw ConfigError("standardizer: column count mismatch");
  Matrix z = x.rowwise() - mean_.transpose();
  for (Eigen::Index c = 0; c < z.cols(); ++c) z.col(c) /= scale_(c);
  return z;
}

Matrix Standardizer::inverse_transform(const Matrix& z) const {
  if (z.cols() != mean_.size()) throw ConfigError("standardizer: column count mismatch");
  Matrix x = z;
  for (Eigen::Index c = 0; c < x.cols(); ++c) x.col(c) *= scale_(c);
  return x.rowwise() + mean_.transpose();
}

std::pair<Standardizer, Matrix> standardize_fit_transform(const Matrix& x, const std::vector<std::size_t>& train_rows) {
  Standardizer s = Standardizer::fit(x, train_rows);
  Matrix z = s.transform(x);
  return {std::move(s), std::move(z)};
}

std::vector<std::size_t> FoldPlan::train_rows(std::size_t fold) const {
  std::vector<std::size_t> rows;
  for (std::size_t f = 0; f < folds.size(); ++f)
    if (f != fold) rows.insert(rows.end(), folds[f].begin(), folds[f].end());
  return rows;
}

FoldPlan kfold_split(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k < 2 || k > n) throw ConfigError("kfold_split: need 2 <= k <= n");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  FoldPlan plan;
  plan.seed = seed;
  std::size_t pos = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t size = n / k + (f < n % k ? 1 : 0);
    plan.folds.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(pos),
                            order.begin() + static_cast<std::ptrdiff_t>(pos + size));
    pos += size;
  }
  return plan;
}

TrainValSplit train_val_split(const std::vector<std::size_t>& indices, double r, std::uint64_t seed) {
  if (!(r > 0.0 && r < 1.0)) throw ConfigError("train_val_split: ratio must lie in (0, 1)");
  const std::size_t n = indices.size();
  const auto val_size = static_cast<std::size_t>(std::llround(r * static_cast<double>(n)));
  if (val_size == 0 || val_size >= n)
    throw ConfigError("train_val_split: ratio leaves an empty train or validation side");
  std::vector<std::size_t> order = indices;
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  TrainValSplit s;
  s.val.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(val_size));
  s.train.assign(order.begin() + static_cast<std::ptrdiff_t>(val_size), order.end());
  return s;
}

Matrix take_rows(const Matrix& x, const std::vector<std::size_t>& rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i)
    out.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(rows[i]));
  return out;
}

std::vector<int> take(const std::vector<int>& y, const std::vector<std::size_t>& rows) {
  std::vector<int> out;
  out.reserve(rows.size());
  for (std::size_t r : rows) out.push_back(y.at(r));
  return out;
}

namespace {
constexpr int kTargetTerms = 4;
}

Vector smooth_target(const Matrix& x, std::uint64_t function_seed) {
  std::mt19937_64 rng(function_seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * 3.14159265358979323846);
  Vector y = Vector::Zero(x.rows());
  for (int k = 0; k < kTargetTerms; ++k) {
    Vector omega(x.cols());
    for (Eigen::Index c = 0; c < x.cols(); ++c) omega(c) = 2.0 * normal(rng);
    const double amp = normal(rng) / std::sqrt(static_cast<double>(kTargetTerms));
    const double ph = phase(rng);
    y += amp * (x * omega).unaryExpr([ph](double t) { return std::sin(t + ph); });
  }
  return y;
}

RegressionData sphere_regression(std::size_t n, std::size_t dim, std::uint64_t seed, std::uint64_t function_seed) {
  if (n < 1 || dim < 1) throw ConfigError("sphere_regression: n and dim must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index c = 0; c < x.cols(); ++c) x(i, c) = normal(rng);
    x.row(i).normalize();
  }
  return {x, smooth_target(x, function_seed)};
}

Dataset gaussian_blobs(std::size_t n, std::size_t dim, int classes, double separation, std::uint64_t seed) {
  if (classes < 2 || n < static_cast<std::size_t>(classes) || dim < 1) throw ConfigError("gaussian_blobs: bad sizes");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix centres(classes, static_cast<Eigen::Index>(dim));
  for (int k = 0; k < classes; ++k) {
    for (Eigen::Index c = 0; c < centres.cols(); ++c) centres(k, c) = normal(rng);
    centres.row(k) *= separation / centres.row(k).norm();
  }
  Dataset d;
  d.class_count = classes;
  d.provenance = "synthetic:blobs";
  d.x.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
  for (std::size_t c = 0; c < dim; ++c) d.feature_names.push_back("x" + std::to_string(c));
  for (int k = 0; k < classes; ++k) d.class_names.push_back("c" + std::to_string(k));
  for (std::size_t i = 0; i < n; ++i) {
    const int k = static_cast<int>(i % static_cast<std::size_t>(classes));
    for (Eigen::Index c = 0; c < d.x.cols(); ++c)
      d.x(static_cast<Eigen::Index>(i), c) = centres(k, c) + normal(rng);
    d.y.push_back(k);
  }
  return d;
}

}  // namespace wntk
