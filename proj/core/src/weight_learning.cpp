#include "wntk/weight_learning.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>

#include "wntk/data.hpp"
#include "wntk/errors.hpp"
#include "wntk/regression.hpp"

namespace wntk {

void WeightProblem::validate() const {
  if (train.depth() == 0 || train.depth() != cross.depth()) throw ConfigError("weight problem: stack depths differ");
  if (train.rows() != train.cols()) throw ConfigError("weight problem: train stack must be square");
  if (cross.cols() != train.rows()) throw ConfigError("weight problem: cross stack columns must match train size");
  if (y_train.rows() != train.rows() || y_val.rows() != cross.rows() || y_train.cols() != y_val.cols())
    throw ConfigError("weight problem: target shapes do not match the stacks");
  if (!(ridge >= 0.0)) throw ConfigError("weight problem: ridge must be >= 0");
}

WeightGradient layer_weight_gradient(const WeightProblem& p, const LayerWeights& w) {
  p.validate();
  if (w.size() != p.train.depth()) throw ConfigError("layer_weight_gradient: weight count does not match depth");
  const Matrix a_train = wntk_weighted_sum(p.train, w);
  const Matrix a_cross = wntk_weighted_sum(p.cross, w);
  const KernelRegressor reg = fit_krr(a_train, p.y_train, p.ridge);
  const Matrix& alpha = reg.coefficients();

  WeightGradient g;
  g.prediction = a_cross * alpha;
  g.derivative.reserve(w.size());
  for (std::size_t l = 1; l <= w.size(); ++l)
    g.derivative.push_back(p.cross[l] * alpha - a_cross * reg.solve(p.train[l] * alpha));
  return g;
}

double validation_loss(const WeightProblem& p, const LayerWeights& w) {
  p.validate();
  const KernelRegressor reg = fit_krr(wntk_weighted_sum(p.train, w), p.y_train, p.ridge);
  return (predict(reg, wntk_weighted_sum(p.cross, w)).scores - p.y_val).squaredNorm();
}

Vector validation_loss_gradient(const WeightProblem& p, const LayerWeights& w) {
  const WeightGradient g = layer_weight_gradient(p, w);
  const Matrix residual = g.prediction - p.y_val;
  Vector delta(static_cast<Eigen::Index>(w.size()));
  for (std::size_t l = 0; l < w.size(); ++l)
    delta(static_cast<Eigen::Index>(l)) = 2.0 * residual.cwiseProduct(g.derivative[l]).sum();
  return delta;
}

Vector finite_diff_weight_gradient(const WeightProblem& p, const LayerWeights& w, double h) {
  if (!(h >= 1e-7 && h <= 1e-3)) throw ConfigError("finite_diff_weight_gradient: step must lie in [1e-7, 1e-3]");
  Vector g(static_cast<Eigen::Index>(w.size()));
  for (std::size_t l = 0; l < w.size(); ++l) {
    LayerWeights up = w;
    LayerWeights down = w;
    up[l] += h;
    down[l] -= h;
    g(static_cast<Eigen::Index>(l)) = (validation_loss(p, up) - validation_loss(p, down)) / (2.0 * h);
  }
  return g;
}

void WeightLearnerConfig::validate(std::size_t n, std::size_t depth) const {
  if (init.size() != depth) throw ConfigError("weight learner: init weights must have one entry per layer");
  if (!(eta_w >= 0.0) || !std::isfinite(eta_w)) throw ConfigError("weight learner: eta_w must be finite and >= 0");
  if (!(ratio > 0.0 && ratio < 1.0)) throw ConfigError("weight learner: ratio must lie in (0, 1)");
  if (!(ridge >= 0.0)) throw ConfigError("weight learner: ridge must be >= 0");
  if (max_iters < 1) throw ConfigError("weight learner: max_iters must be >= 1");
  if (patience < 1) throw ConfigError("weight learner: patience must be >= 1");
  if (!(tol >= 0.0)) throw ConfigError("weight learner: tol must be >= 0");
  const double nv = std::round(ratio * static_cast<double>(n));
  if (nv < 1.0 || static_cast<double>(n) - nv < static_cast<double>(depth))
    throw ConfigError("weight learner: ratio leaves too few validation or training rows");
}

void WeightTrace::write_records(std::ostream& out) const {
  const std::size_t depth = final_weights.size();
  out << "iteration";
  for (std::size_t l = 1; l <= depth; ++l) out << ",w" << l;
  out << ",val_loss,grad_norm\n";
  out << std::setprecision(17);
  for (std::size_t k = 0; k < iterations.size(); ++k) {
    const auto& it = iterations[k];
    out << k;
    for (double v : it.weights.values()) out << ',' << v;
    out << ',' << it.val_loss << ',' << it.gradient.norm() << '\n';
  }
}

WeightProblem make_weight_problem(const LayerKernelStack& stack, const Matrix& y,
                                  const std::vector<std::size_t>& train, const std::vector<std::size_t>& val,
                                  double ridge) {
  WeightProblem p;
  p.train = stack.select(train, train);
  p.cross = stack.select(val, train);
  p.y_train = take_rows(y, train);
  p.y_val = take_rows(y, val);
  p.ridge = ridge;
  return p;
}

WeightTrace algorithm1_update_loop(const LayerKernelStack& stack, const Matrix& y, const WeightLearnerConfig& cfg) {
  const std::size_t n = static_cast<std::size_t>(stack.rows());
  if (stack.rows() != stack.cols()) throw ConfigError("algorithm1: stack must be square over all samples");
  if (y.rows() != stack.rows()) throw ConfigError("algorithm1: targets must have one row per sample");
  cfg.validate(n, stack.depth());

  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), 0);
  std::mt19937_64 split_stream(cfg.seed);
  const std::uint64_t fixed_seed = split_stream();

  WeightTrace trace;
  LayerWeights weights = cfg.init;
  LayerWeights previous = cfg.init;
  Vector previous_grad;
  double eta = cfg.eta_w;
  double best = std::numeric_limits<double>::infinity();
  std::size_t stall = 0;

  for (std::size_t iter = 0; iter < cfg.max_iters; ++iter) {
    const std::uint64_t split_seed = cfg.resample_each_iter ? split_stream() : fixed_seed;
    const TrainValSplit split = train_val_split(all, cfg.ratio, split_seed);
    const WeightProblem problem = make_weight_problem(stack, y, split.train, split.val, cfg.ridge);

    WeightGradient g;
    try {
      g = layer_weight_gradient(problem, weights);
    } catch (const SingularKernel&) {
      if (trace.step_halved || iter == 0) {
        trace.aborted = true;
        break;
      }
      // Redo the last update with half the step and retry this split.
      trace.step_halved = true;
      eta *= 0.5;
      for (std::size_t l = 0; l < weights.size(); ++l)
        weights[l] = previous[l] - eta * previous_grad(static_cast<Eigen::Index>(l));
      trace.iterations.back().weights = weights;
      try {
        g = layer_weight_gradient(problem, weights);
      } catch (const SingularKernel&) {
        trace.aborted = true;
        break;
      }
    }

    const Matrix residual = g.prediction - problem.y_val;
    const double loss = residual.squaredNorm();
    Vector delta(static_cast<Eigen::Index>(weights.size()));
    for (std::size_t l = 0; l < weights.size(); ++l)
      delta(static_cast<Eigen::Index>(l)) = 2.0 * residual.cwiseProduct(g.derivative[l]).sum();

    previous = weights;
    previous_grad = delta;
    if (eta != 0.0) {
      for (std::size_t l = 0; l < weights.size(); ++l) weights[l] -= eta * delta(static_cast<Eigen::Index>(l));
    }
    trace.iterations.push_back({weights, loss, delta});

    if (loss < best - cfg.tol) {
      best = loss;
      stall = 0;
    } else if (++stall >= cfg.patience) {
      break;
    }
  }
  trace.final_weights = weights;
  return trace;
}

}  // namespace wntk
