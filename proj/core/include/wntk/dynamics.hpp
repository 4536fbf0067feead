#pragma once

#include <cstdint>
#include <vector>

#include "wntk/analytic_kernels.hpp"
#include "wntk/mlp.hpp"

namespace wntk {

// How the step size is derived from eta0 for a given network.
enum class RateRule {
  absolute,              // eta = eta0
  inverse_width,         // eta = eta0 / d (standard parameterisation, stability sweep)
  fraction_of_critical,  // eta = eta0 * min(eta_critical(A0), 1 / lambda_max(A0))
};

// Width sweep over synthetic sphere data (n training points plus held-out probes).
struct SweepConfig {
  std::vector<std::size_t> widths;  // strictly increasing hidden widths
  std::size_t seeds = 5;
  std::size_t steps = 200;
  double eta0 = 1.0;
  RateRule rate_rule = RateRule::absolute;
  // Layer-wise rates a_l; empty selects the plain NTK case (all ones, unweighted sum).
  std::vector<double> rates;
  std::size_t depth = 3;
  std::size_t n = 16;
  std::size_t probes = 8;
  std::size_t input_dim = 8;
  Parameterization parameterization = Parameterization::ntk;
  ActivationKind activation = ActivationKind::relu();
  double kappa = 1.0;
  double sigma_w = 1.0;
  std::size_t checkpoint_every = 10;
  double stop_loss = 0.0;  // equivalence sweep: train until loss < stop_loss or steps
  std::uint64_t seed = 0;
  std::uint64_t data_seed = 1;

  void validate() const;
  LayerWeights layer_rates() const;
  bool ntk_case() const noexcept { return rates.empty(); }
};

SweepConfig default_stability_config();
SweepConfig default_lazy_config();
SweepConfig default_equivalence_config();

// 2 / (lambda_min + lambda_max); throws NonPositiveDefinite when lambda_min <= 0.
double estimate_eta_critical(const Matrix& kernel);

struct LinearizedTrace {
  std::vector<Vector> train;   // f_lin_k(X), k = 0..steps
  std::vector<Vector> probe;   // f_lin_k(P)
  double eta = 0.0;
  double eta_limit = 0.0;      // 2 / lambda_max(A0)
  bool diverging = false;      // eta > eta_limit; iterates are still produced
};

// Discrete linearised dynamics around theta0 with frozen Jacobian:
//   theta_{k+1} = theta_k - eta (a (.) J0^T)(f_lin_k(X) - Y),
// evaluated in function space through the weighted kernel A0.
LinearizedTrace linearized_iterate(const Mlp& m0, const Matrix& x, const Vector& y, const PerParameterRates& rates,
                                   std::size_t steps, const Matrix& probes);

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  bool valid = false;
};

// Least squares of log(value) on log(width) over positive values.
SlopeFit fit_loglog(const std::vector<std::size_t>& widths, const std::vector<double>& values);

struct StabilityCell {
  std::size_t width = 0;
  std::size_t seed = 0;
  std::vector<std::size_t> checkpoints;
  std::vector<double> drift;  // eta ||A0 - At||_F at each checkpoint
  double terminal_drift = 0.0;
  bool diverged = false;
};

struct StabilityReport {
  std::vector<StabilityCell> cells;
  std::vector<std::size_t> widths;
  std::vector<double> median_drift;
  SlopeFit fit;
  double eta_critical_ratio = 0.0;  // eta_critical(eta A0) at the largest width, seed 0; must exceed 1
};

// Standard parameterisation with eta = eta0 / d. Drift is measured on the step operator
// eta A_t, which is O(1) in width and unchanged when eta0 and the rates trade a factor.
StabilityReport verify_stability(const SweepConfig& cfg);

struct LazyCell {
  std::size_t width = 0;
  std::size_t seed = 0;
  std::vector<std::size_t> checkpoints;
  std::vector<double> train_gap;  // sup over training points of |f - f_lin|
  std::vector<double> probe_gap;  // sup over probe points
  double terminal_gap = 0.0;      // max of both at the last step
  bool diverged = false;
};

struct LazyReport {
  std::vector<LazyCell> cells;
  std::vector<std::size_t> widths;
  std::vector<double> median_gap;
  SlopeFit fit;
};

LazyReport verify_lazy(const SweepConfig& cfg);

struct EquivalenceCell {
  std::size_t width = 0;
  std::size_t seed = 0;
  std::size_t steps_taken = 0;
  double final_loss = 0.0;
  bool converged = false;
  std::vector<double> ridge_gaps;  // sup |f_NN(P) - corrected kernel prediction| per ridge
  double gap = 0.0;                // at the smallest ridge that factorised
  double uncorrected_gap = 0.0;    // same without the initial-output correction
  double correction_size = 0.0;    // sup |corrected - uncorrected| on probes
  double eta = 0.0;
  bool diverged = false;
};

struct EquivalenceReport {
  std::vector<EquivalenceCell> cells;
  std::vector<std::size_t> widths;
  std::vector<double> ridge_schedule;
  std::vector<double> median_gap;
  SlopeFit fit;
};

EquivalenceReport verify_equivalence(const SweepConfig& cfg, const std::vector<double>& ridge_schedule = {1e-4, 1e-6, 0.0});

struct LipschitzReport {
  std::vector<std::size_t> widths;
  std::vector<double> max_ratio;  // per width: max of d^{-1/2} ||dJ||_F / ||d theta||
  double spread = 0.0;            // max / min of max_ratio
};

// Random perturbations inside B(theta0, radius d^{-1/2}) of standard-parameterised nets.
LipschitzReport jacobian_lipschitz_probe(std::size_t input_dim, std::size_t depth,
                                         const std::vector<std::size_t>& widths, double radius,
                                         std::size_t seeds, std::size_t directions = 4,
                                         const ActivationKind& activation = ActivationKind::relu(),
                                         std::size_t n = 8);

// d^{-1/2} ||J(theta0 + delta) - J(theta0)||_F / ||delta||, from the outer-product
// structure of each layer's Jacobian block. Zero perturbation gives 0.
double jacobian_change_ratio(const Mlp& m0, const Mlp& m1, const Matrix& x);

}  // namespace wntk
