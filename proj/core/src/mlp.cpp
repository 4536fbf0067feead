#include "wntk/mlp.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "wntk/errors.hpp"

namespace wntk {

const char* to_string(Parameterization p) {
  return p == Parameterization::ntk ? "ntk" : "standard";
}

Parameterization parameterization_from_name(const std::string& name) {
  if (name == "ntk") return Parameterization::ntk;
  if (name == "standard") return Parameterization::standard;
  throw ConfigError("unknown parameterization '" + name + "'");
}

std::size_t Mlp::parameter_count() const noexcept {
  std::size_t p = 0;
  for (const auto& w : weights) p += static_cast<std::size_t>(w.size());
  return p;
}

double Mlp::layer_scale(std::size_t layer) const {
  if (parameterization == Parameterization::standard) return 1.0;
  return 1.0 / std::sqrt(static_cast<double>(widths.at(layer - 1)));
}

void Mlp::validate() const {
  if (widths.size() < 2) throw ConfigError("Mlp: need at least input and output widths");
  if (widths.back() != 1) throw ConfigError("Mlp: output width must be 1");
  if (weights.size() + 1 != widths.size()) throw ConfigError("Mlp: weight count does not match widths");
  for (std::size_t l = 0; l < weights.size(); ++l) {
    if (static_cast<std::size_t>(weights[l].rows()) != widths[l + 1] ||
        static_cast<std::size_t>(weights[l].cols()) != widths[l])
      throw ConfigError("Mlp: weight matrix " + std::to_string(l + 1) + " has the wrong shape");
  }
  if (!(output_scale > 0.0) || !std::isfinite(output_scale)) throw ConfigError("Mlp: output_scale must be positive");
}

std::vector<std::size_t> equal_widths(std::size_t input_dim, std::size_t width, std::size_t depth) {
  if (depth < 1) throw ConfigError("depth must be >= 1");
  std::vector<std::size_t> w(depth + 1, width);
  w.front() = input_dim;
  w.back() = 1;
  return w;
}

Mlp init_mlp(std::vector<std::size_t> widths, const InitOptions& options, std::uint64_t seed) {
  for (std::size_t w : widths)
    if (w == 0) throw ConfigError("init_mlp: widths must be positive");
  if (widths.size() < 2 || widths.back() != 1) throw ConfigError("init_mlp: need widths (d0, ..., 1)");
  if (!(options.sigma_w > 0.0)) throw ConfigError("init_mlp: sigma_w must be positive");

  Mlp m;
  m.widths = std::move(widths);
  m.parameterization = options.parameterization;
  m.activation = options.activation;
  m.output_scale = options.output_scale;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t l = 1; l < m.widths.size(); ++l) {
    const double stddev = m.parameterization == Parameterization::ntk
                              ? 1.0
                              : options.sigma_w / std::sqrt(static_cast<double>(m.widths[l - 1]));
    Matrix w(m.widths[l], m.widths[l - 1]);
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = stddev * normal(rng);
    m.weights.push_back(std::move(w));
  }
  m.validate();
  return m;
}

namespace {

void check_input(const Mlp& m, const Matrix& x) {
  if (static_cast<std::size_t>(x.cols()) != m.widths.front())
    throw ConfigError("input has " + std::to_string(x.cols()) + " columns, network expects " +
                      std::to_string(m.widths.front()));
}

Matrix apply(const ActivationKind& act, const Matrix& h) {
  if (act.is_relu()) return h.cwiseMax(0.0);
  return h.unaryExpr([&act](double u) { return act(u); });
}

Matrix apply_derivative(const ActivationKind& act, const Matrix& h) {
  if (act.is_relu()) return (h.array() > 0.0).cast<double>().matrix();
  return h.unaryExpr([&act](double u) { return act.derivative(u); });
}

}  // namespace

Vector forward(const Mlp& m, const Matrix& x) {
  check_input(m, x);
  Matrix g = x;
  for (std::size_t l = 1; l <= m.depth(); ++l) {
    Matrix h = m.layer_scale(l) * (g * m.weights[l - 1].transpose());
    g = l < m.depth() ? apply(m.activation, h) : std::move(h);
  }
  return m.output_scale * g.col(0);
}

Backprop backprop(const Mlp& m, const Matrix& x) {
  check_input(m, x);
  const std::size_t depth = m.depth();
  Backprop b;
  b.inputs.reserve(depth);
  b.scales.reserve(depth);
  std::vector<Matrix> pre;
  pre.reserve(depth);

  Matrix g = x;
  for (std::size_t l = 1; l <= depth; ++l) {
    b.scales.push_back(m.layer_scale(l));
    Matrix h = b.scales.back() * (g * m.weights[l - 1].transpose());
    b.inputs.push_back(std::move(g));
    if (l < depth) g = apply(m.activation, h);
    pre.push_back(std::move(h));
  }
  b.output = m.output_scale * pre.back().col(0);

  b.deltas.resize(depth);
  b.deltas[depth - 1] = Matrix::Constant(x.rows(), 1, m.output_scale);
  for (std::size_t l = depth; l >= 2; --l) {
    Matrix back = b.scales[l - 1] * (b.deltas[l - 1] * m.weights[l - 1]);
    b.deltas[l - 2] = back.cwiseProduct(apply_derivative(m.activation, pre[l - 2]));
  }
  return b;
}

JacobianMatrix jacobian(const Mlp& m, const Matrix& x) {
  const Backprop b = backprop(m, x);
  JacobianMatrix j;
  j.values.resize(x.rows(), static_cast<Eigen::Index>(m.parameter_count()));
  Eigen::Index offset = 0;
  for (std::size_t l = 1; l <= m.depth(); ++l) {
    const Matrix& delta = b.deltas[l - 1];
    const Matrix& in = b.inputs[l - 1];
    const Eigen::Index rows = delta.cols();
    const Eigen::Index cols = in.cols();
    for (Eigen::Index i = 0; i < x.rows(); ++i)
      for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c)
          j.values(i, offset + r * cols + c) = b.scales[l - 1] * delta(i, r) * in(i, c);
    j.layer_spans.push_back({l, offset, offset + rows * cols});
    offset += rows * cols;
  }
  return j;
}

namespace {

void check_spans(const JacobianMatrix& a, const JacobianMatrix& b) {
  if (a.layer_spans.size() != b.layer_spans.size()) throw ConfigError("Jacobian layer spans differ");
  for (std::size_t i = 0; i < a.layer_spans.size(); ++i) {
    const auto& s = a.layer_spans[i];
    const auto& t = b.layer_spans[i];
    if (s.layer != t.layer || s.begin != t.begin || s.end != t.end)
      throw ConfigError("Jacobian layer spans differ");
  }
  if (a.values.cols() != b.values.cols()) throw ConfigError("Jacobian parameter counts differ");
}

}  // namespace

LayerKernelStack empirical_layer_kernels(const JacobianMatrix& j1, const JacobianMatrix& j2) {
  check_spans(j1, j2);
  std::vector<Matrix> theta;
  for (const auto& span : j1.layer_spans) {
    const Eigen::Index width = span.end - span.begin;
    theta.push_back(j1.values.middleCols(span.begin, width) *
                    j2.values.middleCols(span.begin, width).transpose());
  }
  return LayerKernelStack(std::move(theta));
}

Matrix empirical_wntk(const JacobianMatrix& j1, const JacobianMatrix& j2, const LayerWeights& w) {
  check_spans(j1, j2);
  if (w.size() != j1.layer_spans.size()) throw ConfigError("empirical_wntk: weight count does not match depth");
  return wntk_weighted_sum(empirical_layer_kernels(j1, j2), w);
}

LayerKernelStack empirical_layer_kernels(const Backprop& b1, const Backprop& b2) {
  if (b1.deltas.size() != b2.deltas.size()) throw ConfigError("empirical_layer_kernels: depth mismatch");
  std::vector<Matrix> theta;
  for (std::size_t l = 0; l < b1.deltas.size(); ++l) {
    const double s2 = b1.scales[l] * b1.scales[l];
    Matrix dd = b1.deltas[l] * b2.deltas[l].transpose();
    Matrix gg = b1.inputs[l] * b2.inputs[l].transpose();
    theta.push_back(s2 * dd.cwiseProduct(gg));
  }
  return LayerKernelStack(std::move(theta));
}

LayerKernelStack empirical_layer_kernels(const Mlp& m, const Matrix& x1, const Matrix& x2) {
  const Backprop b1 = backprop(m, x1);
  if (&x1 == &x2) return empirical_layer_kernels(b1, b1);
  return empirical_layer_kernels(b1, backprop(m, x2));
}

void PerParameterRates::validate(std::size_t depth) const {
  if (layer_rates.size() != depth) throw ConfigError("rates: one rate per layer required");
  if (!(base_rate >= 0.0) || !std::isfinite(base_rate)) throw ConfigError("rates: base rate must be finite and >= 0");
}

double squared_loss(const Vector& output, const Vector& y) {
  return 0.5 * (output - y).squaredNorm();
}

namespace {

// In-place adjusted step; returns the loss at the pre-step parameters. No step is
// taken when that loss is already <= stop_loss.
double step_in_place(Mlp& m, const Matrix& x, const Vector& y, const PerParameterRates& rates,
                     double stop_loss = -std::numeric_limits<double>::infinity()) {
  if (y.size() != x.rows()) throw ConfigError("targets and inputs disagree on sample count");
  const Backprop b = backprop(m, x);
  const Vector residual = b.output - y;
  const double loss = 0.5 * residual.squaredNorm();
  if (!std::isfinite(loss)) throw NumericalDivergence("non-finite training loss");
  if (loss <= stop_loss) return loss;
  for (std::size_t l = 1; l <= m.depth(); ++l) {
    Matrix grad = b.scales[l - 1] *
                  ((b.deltas[l - 1].array().colwise() * residual.array()).matrix().transpose() *
                   b.inputs[l - 1]);
    if (!grad.allFinite()) throw NumericalDivergence("non-finite gradient at layer " + std::to_string(l));
    m.weights[l - 1] -= (rates.base_rate * rates.layer_rates[l - 1]) * grad;
  }
  return loss;
}

}  // namespace

Mlp adjusted_gd_step(const Mlp& m, const Matrix& x, const Vector& y, const PerParameterRates& rates) {
  rates.validate(m.depth());
  Mlp next = m;
  step_in_place(next, x, y, rates);
  return next;
}

TrainResult train_adjusted_gd(Mlp m, const Matrix& x, const Vector& y, const PerParameterRates& rates,
                              std::size_t steps, double stop_loss) {
  if (steps < 1) throw ConfigError("train_adjusted_gd: steps must be >= 1");
  rates.validate(m.depth());
  const double threshold = std::isfinite(stop_loss) ? stop_loss : -std::numeric_limits<double>::infinity();
  TrainResult result;
  for (std::size_t k = 0; k < steps; ++k) {
    const double loss = step_in_place(m, x, y, rates, threshold);
    result.loss_trace.push_back(loss);
    if (loss <= threshold) {
      result.network = std::move(m);
      return result;
    }
    ++result.steps_taken;
  }
  const double final_loss = squared_loss(forward(m, x), y);
  if (!std::isfinite(final_loss)) throw NumericalDivergence("non-finite training loss");
  result.loss_trace.push_back(final_loss);
  result.network = std::move(m);
  return result;
}

namespace {

Matrix take_rows(const Matrix& x, const std::vector<std::size_t>& rows) {
  Matrix out(rows.size(), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(i) = x.row(rows[i]);
  return out;
}

Vector take(const Vector& y, const std::vector<std::size_t>& rows) {
  Vector out(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) out(i) = y(rows[i]);
  return out;
}

double sign_accuracy(const Vector& scores, const Vector& y) {
  std::size_t hits = 0;
  for (Eigen::Index i = 0; i < scores.size(); ++i) {
    const double label = scores(i) >= 0.0 ? 1.0 : -1.0;
    if ((label > 0.0) == (y(i) > 0.0)) ++hits;
  }
  return scores.size() == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(scores.size());
}

}  // namespace

PretrainResult pretrain_to_threshold(const Mlp& m, const Matrix& x, const Vector& y,
                                     const std::vector<std::size_t>& train_rows,
                                     const std::vector<std::size_t>& val_rows,
                                     const PretrainConfig& cfg) {
  if (!(cfg.threshold > 0.5 && cfg.threshold < 1.0)) throw ConfigError("pretrain threshold must lie in (0.5, 1)");
  if (train_rows.empty() || val_rows.empty()) throw ConfigError("pretrain needs non-empty train and validation rows");
  const Matrix xt = take_rows(x, train_rows);
  const Vector yt = take(y, train_rows);
  const Matrix xv = take_rows(x, val_rows);
  const Vector yv = take(y, val_rows);
  const PerParameterRates rates{LayerWeights::ones(m.depth()), cfg.rate};

  PretrainResult best{m, 0, sign_accuracy(forward(m, xv), yv), false};
  if (best.validation_accuracy >= cfg.threshold) {
    best.threshold_reached = true;
    return best;
  }
  Mlp current = m;
  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    step_in_place(current, xt, yt, rates);
    const double acc = sign_accuracy(forward(current, xv), yv);
    if (acc > best.validation_accuracy) best = {current, epoch, acc, false};
    if (acc >= cfg.threshold) return {std::move(current), epoch, acc, true};
  }
  return best;
}

}  // namespace wntk
