#include "wntk/regression.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <nlohmann/json.hpp>

#include "wntk/errors.hpp"
#include "wntk/kernel_io.hpp"

namespace wntk {
namespace {

constexpr double kResidualTol = 1e-8;
constexpr double kEigenFloor = 1e-12;

double residual_ratio(const Matrix& system, const Matrix& alpha, const Matrix& rhs) {
  const double scale = rhs.norm();
  const double res = (system * alpha - rhs).norm();
  if (scale == 0.0) return res;
  return res / scale;
}

}  // namespace

const Matrix& KernelRegressor::initial_outputs() const {
  if (!initial_outputs_) throw MissingInitialOutputs("regressor was fitted without initial outputs");
  return *initial_outputs_;
}

Matrix KernelRegressor::solve(const Matrix& rhs) const {
  if (rhs.rows() != size()) throw ConfigError("solve: right-hand side has the wrong row count");
  if (kind_ == Factorization::cholesky) return llt_.solve(rhs);
  return eigvecs_ * (inv_eigvals_.asDiagonal() * (eigvecs_.transpose() * rhs));
}

KernelRegressor fit_krr(const Matrix& kernel, const Matrix& targets, double ridge,
                        std::optional<Matrix> initial_outputs) {
  if (kernel.rows() != kernel.cols()) throw ConfigError("fit_krr: kernel must be square");
  if (targets.rows() != kernel.rows()) throw ConfigError("fit_krr: targets must have one row per sample");
  if (!(ridge >= 0.0) || !std::isfinite(ridge)) throw ConfigError("fit_krr: ridge must be finite and >= 0");
  if (!kernel.allFinite() || !targets.allFinite()) throw NumericalDivergence("fit_krr: non-finite input");
  if (initial_outputs && (initial_outputs->rows() != targets.rows() || initial_outputs->cols() != targets.cols()))
    throw ConfigError("fit_krr: initial outputs must match the target shape");

  KernelRegressor r;
  r.kernel_ = kernel;
  r.targets_ = targets;
  r.ridge_ = ridge;
  Matrix system = kernel;
  system.diagonal().array() += ridge;

  r.llt_.compute(system);
  bool ok = r.llt_.info() == Eigen::Success;
  if (ok) {
    r.kind_ = Factorization::cholesky;
    r.alpha_ = r.llt_.solve(targets);
    ok = r.alpha_.allFinite() && residual_ratio(system, r.alpha_, targets) < kResidualTol;
  }
  if (!ok) {
    r.kind_ = Factorization::symmetric_eigen;
    Eigen::SelfAdjointEigenSolver<Matrix> eig(system);
    if (eig.info() != Eigen::Success) throw SingularKernel("fit_krr: eigendecomposition failed");
    const Vector& ev = eig.eigenvalues();
    const double floor = kEigenFloor * ev.cwiseAbs().maxCoeff();
    r.inv_eigvals_ = ev.unaryExpr([floor](double e) { return std::abs(e) > floor ? 1.0 / e : 0.0; });
    r.eigvecs_ = eig.eigenvectors();
    r.alpha_ = r.solve(targets);
    const double ratio = residual_ratio(system, r.alpha_, targets);
    if (!(ratio < kResidualTol)) {
      std::ostringstream msg;
      msg << "fit_krr: residual " << ratio << " exceeds tolerance after eigen fallback";
      throw SingularKernel(msg.str());
    }
  }
  if (initial_outputs) {
    r.initial_coeffs_ = r.solve(*initial_outputs);
    r.initial_outputs_ = std::move(initial_outputs);
  }
  return r;
}

std::vector<int> decode_labels(const Matrix& scores) {
  std::vector<int> labels(scores.rows());
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    if (scores.cols() == 1) {
      labels[i] = scores(i, 0) >= 0.0 ? 1 : 0;
    } else {
      Eigen::Index best = 0;
      for (Eigen::Index c = 1; c < scores.cols(); ++c)
        if (scores(i, c) > scores(i, best)) best = c;
      labels[i] = static_cast<int>(best);
    }
  }
  return labels;
}

Prediction predict(const KernelRegressor& r, const Matrix& cross_kernel) {
  if (cross_kernel.cols() != r.size()) throw ConfigError("predict: cross kernel column count must equal training size");
  Prediction p;
  p.scores = cross_kernel * r.coefficients();
  p.labels = decode_labels(p.scores);
  return p;
}

Matrix predict_scores_with_initial_correction(const KernelRegressor& r, const Matrix& cross_kernel,
                                              const Matrix& initial_test_outputs) {
  if (!r.has_initial_outputs()) throw MissingInitialOutputs("regressor was fitted without initial outputs");
  if (cross_kernel.cols() != r.size()) throw ConfigError("predict: cross kernel column count must equal training size");
  if (initial_test_outputs.rows() != cross_kernel.rows() || initial_test_outputs.cols() != r.coefficients().cols())
    throw ConfigError("predict: initial test outputs have the wrong shape");
  return cross_kernel * r.coefficients() + (initial_test_outputs - cross_kernel * r.initial_coeffs_);
}

Prediction predict_with_initial_correction(const KernelRegressor& r, const Matrix& cross_kernel,
                                           const Matrix& initial_test_outputs) {
  Prediction p;
  p.scores = predict_scores_with_initial_correction(r, cross_kernel, initial_test_outputs);
  p.labels = decode_labels(p.scores);
  return p;
}

double score_accuracy(const Prediction& p, const std::vector<int>& truth) {
  if (truth.size() != p.labels.size()) throw ConfigError("score_accuracy: length mismatch");
  if (truth.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hits += p.labels[i] == truth[i];
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

Matrix encode_labels(const std::vector<int>& labels, int class_count) {
  if (class_count < 2) throw ConfigError("encode_labels: need at least two classes");
  const Eigen::Index n = static_cast<Eigen::Index>(labels.size());
  if (class_count == 2) {
    Matrix y(n, 1);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (labels[i] < 0 || labels[i] > 1) throw ConfigError("encode_labels: label out of range");
      y(i, 0) = labels[i] == 1 ? 1.0 : -1.0;
    }
    return y;
  }
  Matrix y = Matrix::Zero(n, class_count);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (labels[i] < 0 || labels[i] >= class_count) throw ConfigError("encode_labels: label out of range");
    y(i, labels[i]) = 1.0;
  }
  return y;
}

namespace {

nlohmann::json matrix_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix json_matrix(const nlohmann::json& j) {
  const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
  const Eigen::Index cols = rows ? static_cast<Eigen::Index>(j.at(0).size()) : 0;
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (static_cast<Eigen::Index>(j.at(r).size()) != cols) throw ParseError("ragged matrix in regressor file");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = j.at(r).at(c).get<double>();
  }
  return m;
}

std::string hex(std::uint64_t v) {
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << v;
  return s.str();
}

}  // namespace

void save_regressor(const std::string& path, const KernelRegressor& r) {
  nlohmann::json j;
  j["schema"] = "wntk.regressor/1";
  j["kernel_hash"] = hex(io::kernel_hash(r.train_kernel()));
  j["ridge"] = r.ridge();
  j["factorization"] = r.factorization() == Factorization::cholesky ? "cholesky" : "symmetric_eigen";
  j["train_kernel"] = matrix_json(r.train_kernel());
  j["targets"] = matrix_json(r.targets());
  j["alpha"] = matrix_json(r.coefficients());
  if (r.has_initial_outputs()) j["initial_outputs"] = matrix_json(r.initial_outputs());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << j.dump(1) << '\n';
  if (!out) throw IoError("regressor write failed");
}

KernelRegressor load_regressor(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
    if (j.at("schema") != "wntk.regressor/1") throw ParseError("unknown regressor schema");
    const Matrix kernel = json_matrix(j.at("train_kernel"));
    if (j.at("kernel_hash").get<std::string>() != hex(io::kernel_hash(kernel)))
      throw ParseError("regressor kernel hash mismatch");
    std::optional<Matrix> f0;
    if (j.contains("initial_outputs")) f0 = json_matrix(j.at("initial_outputs"));
    KernelRegressor r = fit_krr(kernel, json_matrix(j.at("targets")), j.at("ridge").get<double>(), std::move(f0));
    if (r.coefficients() != json_matrix(j.at("alpha"))) throw ParseError("regressor coefficients do not reproduce");
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("regressor file: ") + e.what());
  }
}

}  // namespace wntk
