#include "wntk/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "wntk/data.hpp"
#include "wntk/errors.hpp"
#include "wntk/regression.hpp"

namespace wntk {

void SweepConfig::validate() const {
  if (widths.empty()) throw ConfigError("sweep needs at least one width");
  for (std::size_t i = 0; i < widths.size(); ++i) {
    if (widths[i] == 0) throw ConfigError("sweep widths must be positive");
    if (i > 0 && widths[i] <= widths[i - 1]) throw ConfigError("sweep widths must be strictly increasing");
  }
  if (seeds == 0) throw ConfigError("sweep needs at least one seed");
  if (!(eta0 > 0.0) || !std::isfinite(eta0)) throw ConfigError("eta0 must be positive and finite");
  if (depth == 0) throw ConfigError("depth must be >= 1");
  if (!rates.empty() && rates.size() != depth) throw ConfigError("rate count does not match depth");
  for (double a : rates)
    if (!(a > 0.0) || !std::isfinite(a)) throw ConfigError("layer rates must be positive and finite");
  if (n < 2) throw ConfigError("sweep needs at least two training points");
  if (input_dim == 0) throw ConfigError("input dimension must be positive");
  if (!(kappa > 0.0) || !std::isfinite(kappa)) throw ConfigError("kappa must be positive and finite");
  if (!(sigma_w > 0.0)) throw ConfigError("sigma_w must be positive");
  if (checkpoint_every == 0) throw ConfigError("checkpoint interval must be positive");
  if (stop_loss < 0.0) throw ConfigError("stop loss must be non-negative");
}

LayerWeights SweepConfig::layer_rates() const {
  return rates.empty() ? LayerWeights::ones(depth) : LayerWeights(rates);
}

SweepConfig default_stability_config() {
  SweepConfig c;
  c.widths = {64, 128, 256, 512, 1024};
  c.seeds = 5;
  c.steps = 200;
  c.eta0 = 3.0;
  c.rate_rule = RateRule::inverse_width;
  c.depth = 3;
  c.n = 16;
  c.parameterization = Parameterization::standard;
  return c;
}

SweepConfig default_lazy_config() {
  SweepConfig c;
  c.widths = {128, 512, 2048};
  c.seeds = 5;
  c.steps = 200;
  c.eta0 = 0.5;
  c.rate_rule = RateRule::fraction_of_critical;
  c.depth = 3;
  c.n = 16;
  c.parameterization = Parameterization::ntk;
  return c;
}

SweepConfig default_equivalence_config() {
  SweepConfig c;
  c.widths = {256, 1024, 4096};
  c.seeds = 5;
  c.steps = 20000;
  c.eta0 = 0.01;
  c.rate_rule = RateRule::fraction_of_critical;
  c.depth = 2;
  c.n = 20;
  c.parameterization = Parameterization::ntk;
  c.kappa = 1e-2;
  c.stop_loss = 1e-8;
  return c;
}

double estimate_eta_critical(const Matrix& kernel) {
  if (kernel.rows() != kernel.cols() || kernel.rows() == 0) throw ConfigError("eta_critical needs a square kernel");
  const double asym = (kernel - kernel.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-10 * std::max(1.0, kernel.cwiseAbs().maxCoeff())) throw ConfigError("eta_critical needs a symmetric kernel");
  Eigen::SelfAdjointEigenSolver<Matrix> eig(kernel, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) throw NonPositiveDefinite("eigensolver failed");
  const double lo = eig.eigenvalues()(0);
  const double hi = eig.eigenvalues()(eig.eigenvalues().size() - 1);
  if (!(lo > 0.0)) throw NonPositiveDefinite("kernel has a non-positive eigenvalue");
  return 2.0 / (lo + hi);
}

namespace {

double lambda_max(const Matrix& kernel) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(kernel, Eigen::EigenvaluesOnly);
  return eig.eigenvalues()(eig.eigenvalues().size() - 1);
}

LinearizedTrace linear_trace(const Matrix& a_xx, const Matrix& a_px, const Vector& f0x, const Vector& f0p,
                             const Vector& y, double eta, std::size_t steps) {
  LinearizedTrace t;
  t.eta = eta;
  const double top = lambda_max(a_xx);
  t.eta_limit = top > 0.0 ? 2.0 / top : std::numeric_limits<double>::infinity();
  t.diverging = eta > t.eta_limit;
  t.train.reserve(steps + 1);
  t.probe.reserve(steps + 1);
  t.train.push_back(f0x);
  t.probe.push_back(f0p);
  for (std::size_t k = 0; k < steps; ++k) {
    const Vector r = t.train.back() - y;
    t.train.push_back(t.train.back() - eta * (a_xx * r));
    t.probe.push_back(t.probe.back() - eta * (a_px * r));
  }
  return t;
}

std::uint64_t cell_seed(std::uint64_t base, std::size_t width, std::size_t s) {
  std::seed_seq seq{static_cast<std::uint32_t>(base), static_cast<std::uint32_t>(base >> 32),
                    static_cast<std::uint32_t>(width), static_cast<std::uint32_t>(s)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

struct SweepData {
  Matrix x;
  Vector y;
  Matrix probes;
  Matrix all;  // x stacked over probes
};

SweepData sweep_data(const SweepConfig& cfg) {
  const RegressionData d = sphere_regression(cfg.n + cfg.probes, cfg.input_dim, cfg.data_seed);
  SweepData s;
  s.all = d.x;
  s.x = d.x.topRows(cfg.n);
  s.y = d.y.head(cfg.n);
  s.probes = d.x.bottomRows(cfg.probes);
  return s;
}

Mlp make_net(const SweepConfig& cfg, std::size_t width, std::size_t s) {
  InitOptions o;
  o.parameterization = cfg.parameterization;
  o.activation = cfg.activation;
  o.output_scale = cfg.kappa;
  o.sigma_w = cfg.sigma_w;
  return init_mlp(equal_widths(cfg.input_dim, width, cfg.depth), o, cell_seed(cfg.seed, width, s));
}

Matrix weighted(const LayerKernelStack& k, const SweepConfig& cfg) {
  return cfg.ntk_case() ? k.sum() : wntk_weighted_sum(k, LayerWeights(cfg.rates));
}

double step_rate(const SweepConfig& cfg, const Mlp& m, const Matrix& a_xx) {
  switch (cfg.rate_rule) {
    case RateRule::absolute:
      return cfg.eta0;
    case RateRule::inverse_width:
      return cfg.eta0 / static_cast<double>(m.hidden_width());
    case RateRule::fraction_of_critical: {
      const double bound = std::min(estimate_eta_critical(a_xx), 1.0 / lambda_max(a_xx));
      return cfg.eta0 * bound;
    }
  }
  return cfg.eta0;
}

PerParameterRates rates_for(const SweepConfig& cfg, double eta) {
  PerParameterRates r;
  r.layer_rates = cfg.layer_rates();
  r.base_rate = eta;
  return r;
}

double median(std::vector<double> v) {
  v.erase(std::remove_if(v.begin(), v.end(), [](double x) { return !std::isfinite(x); }), v.end());
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 == 1 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

double sup_gap(const Vector& a, const Vector& b) { return a.size() == 0 ? 0.0 : (a - b).cwiseAbs().maxCoeff(); }

// Advances training to `target` steps in chunks, returning the network.
Mlp advance(Mlp m, const SweepData& d, const PerParameterRates& rates, std::size_t from, std::size_t target) {
  if (target <= from) return m;
  return train_adjusted_gd(std::move(m), d.x, d.y, rates, target - from).network;
}

std::vector<std::size_t> checkpoints(const SweepConfig& cfg) {
  std::vector<std::size_t> c{0};
  for (std::size_t t = cfg.checkpoint_every; t < cfg.steps; t += cfg.checkpoint_every) c.push_back(t);
  if (cfg.steps > 0) c.push_back(cfg.steps);
  return c;
}

constexpr double kMaxDivergedFraction = 0.2;

// Medians per width over non-diverged cells; the fit is dropped when any width has too
// many diverged cells.
template <class Cell, class Metric>
void summarise(const std::vector<Cell>& cells, const std::vector<std::size_t>& widths, Metric metric,
               std::vector<double>& medians, SlopeFit& fit) {
  bool too_many = false;
  for (std::size_t w : widths) {
    std::vector<double> vals;
    std::size_t total = 0, bad = 0;
    for (const auto& c : cells) {
      if (c.width != w) continue;
      ++total;
      if (c.diverged) {
        ++bad;
        continue;
      }
      vals.push_back(metric(c));
    }
    if (total > 0 && static_cast<double>(bad) >= kMaxDivergedFraction * static_cast<double>(total)) {
      if (bad > 0) too_many = true;
    }
    medians.push_back(median(vals));
  }
  fit = fit_loglog(widths, medians);
  if (too_many) fit.valid = false;
}

}  // namespace

LinearizedTrace linearized_iterate(const Mlp& m0, const Matrix& x, const Vector& y, const PerParameterRates& rates,
                                   std::size_t steps, const Matrix& probes) {
  m0.validate();
  rates.validate(m0.depth());
  if (y.size() != x.rows()) throw ConfigError("targets and inputs disagree on sample count");
  if (probes.rows() > 0 && probes.cols() != x.cols()) throw ConfigError("probe dimension does not match inputs");
  Matrix all(x.rows() + probes.rows(), x.cols());
  all << x, probes;
  const Eigen::Index n = x.rows();
  const Eigen::Index p = probes.rows();
  const Matrix a = wntk_weighted_sum(empirical_layer_kernels(m0, all, all), rates.layer_rates);
  const Vector f0 = forward(m0, all);
  return linear_trace(a.topLeftCorner(n, n), a.bottomLeftCorner(p, n), f0.head(n), f0.tail(p), y, rates.base_rate,
                      steps);
}

SlopeFit fit_loglog(const std::vector<std::size_t>& widths, const std::vector<double>& values) {
  if (widths.size() != values.size()) throw ConfigError("fit_loglog: size mismatch");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < widths.size(); ++i) {
    if (!(values[i] > 0.0) || !std::isfinite(values[i])) continue;
    lx.push_back(std::log(static_cast<double>(widths[i])));
    ly.push_back(std::log(values[i]));
  }
  SlopeFit fit;
  fit.slope = std::numeric_limits<double>::quiet_NaN();
  fit.intercept = std::numeric_limits<double>::quiet_NaN();
  if (lx.size() < 2 || lx.size() != widths.size()) return fit;
  const double k = static_cast<double>(lx.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= k;
  my /= k;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.valid = std::isfinite(fit.slope);
  return fit;
}

StabilityReport verify_stability(const SweepConfig& cfg) {
  cfg.validate();
  const SweepData d = sweep_data(cfg);
  const std::vector<std::size_t> marks = checkpoints(cfg);
  StabilityReport rep;
  rep.widths = cfg.widths;

  {
    const Mlp m = make_net(cfg, cfg.widths.back(), 0);
    const Matrix a0 = weighted(empirical_layer_kernels(m, d.x, d.x), cfg);
    const double eta = step_rate(cfg, m, a0);
    rep.eta_critical_ratio = estimate_eta_critical(eta * a0);
    if (!(rep.eta_critical_ratio > 1.0))
      throw ConfigError("eta0 is not below eta_critical at the largest width (ratio " +
                        std::to_string(rep.eta_critical_ratio) + ")");
  }

  for (std::size_t w : cfg.widths) {
    for (std::size_t s = 0; s < cfg.seeds; ++s) {
      StabilityCell cell;
      cell.width = w;
      cell.seed = s;
      Mlp m = make_net(cfg, w, s);
      const Matrix a0 = weighted(empirical_layer_kernels(m, d.x, d.x), cfg);
      const double eta = step_rate(cfg, m, a0);
      const PerParameterRates rates = rates_for(cfg, eta);
      std::size_t at = 0;
      try {
        for (std::size_t t : marks) {
          m = advance(std::move(m), d, rates, at, t);
          at = t;
          const double drift =
              t == 0 ? 0.0 : (eta * a0 - eta * weighted(empirical_layer_kernels(m, d.x, d.x), cfg)).norm();
          if (!std::isfinite(drift)) throw NumericalDivergence("non-finite kernel drift");
          cell.checkpoints.push_back(t);
          cell.drift.push_back(drift);
        }
        cell.terminal_drift = cell.drift.back();
      } catch (const NumericalDivergence&) {
        cell.diverged = true;
        cell.terminal_drift = std::numeric_limits<double>::quiet_NaN();
      }
      rep.cells.push_back(std::move(cell));
    }
  }
  summarise(rep.cells, rep.widths, [](const StabilityCell& c) { return c.terminal_drift; }, rep.median_drift,
            rep.fit);
  return rep;
}

LazyReport verify_lazy(const SweepConfig& cfg) {
  cfg.validate();
  const SweepData d = sweep_data(cfg);
  const std::vector<std::size_t> marks = checkpoints(cfg);
  const Eigen::Index n = d.x.rows();
  const Eigen::Index p = d.probes.rows();
  LazyReport rep;
  rep.widths = cfg.widths;
  for (std::size_t w : cfg.widths) {
    for (std::size_t s = 0; s < cfg.seeds; ++s) {
      LazyCell cell;
      cell.width = w;
      cell.seed = s;
      Mlp m = make_net(cfg, w, s);
      const Matrix a = weighted(empirical_layer_kernels(m, d.all, d.all), cfg);
      const Matrix a_xx = a.topLeftCorner(n, n);
      const double eta = step_rate(cfg, m, a_xx);
      const Vector f0 = forward(m, d.all);
      const LinearizedTrace lin = linear_trace(a_xx, a.bottomLeftCorner(p, n), f0.head(n), f0.tail(p), d.y, eta,
                                               cfg.steps);
      cell.diverged = lin.diverging;
      const PerParameterRates rates = rates_for(cfg, eta);
      std::size_t at = 0;
      try {
        for (std::size_t t : marks) {
          m = advance(std::move(m), d, rates, at, t);
          at = t;
          const Vector f = forward(m, d.all);
          if (!f.allFinite()) throw NumericalDivergence("non-finite network output");
          cell.checkpoints.push_back(t);
          cell.train_gap.push_back(sup_gap(f.head(n), lin.train[t]));
          cell.probe_gap.push_back(sup_gap(f.tail(p), lin.probe[t]));
        }
        cell.terminal_gap = std::max(cell.train_gap.back(), cell.probe_gap.back());
      } catch (const NumericalDivergence&) {
        cell.diverged = true;
      }
      if (cell.diverged) cell.terminal_gap = std::numeric_limits<double>::quiet_NaN();
      rep.cells.push_back(std::move(cell));
    }
  }
  summarise(rep.cells, rep.widths, [](const LazyCell& c) { return c.terminal_gap; }, rep.median_gap, rep.fit);
  return rep;
}

EquivalenceReport verify_equivalence(const SweepConfig& cfg, const std::vector<double>& ridge_schedule) {
  cfg.validate();
  if (ridge_schedule.empty()) throw ConfigError("ridge schedule must not be empty");
  for (double r : ridge_schedule)
    if (!(r >= 0.0)) throw ConfigError("ridge values must be non-negative");
  if (cfg.probes == 0) throw ConfigError("equivalence sweep needs probe points");
  const SweepData d = sweep_data(cfg);
  const Eigen::Index n = d.x.rows();
  const Eigen::Index p = d.probes.rows();
  const double stop = cfg.stop_loss > 0.0 ? cfg.stop_loss : std::numeric_limits<double>::infinity();
  EquivalenceReport rep;
  rep.widths = cfg.widths;
  rep.ridge_schedule = ridge_schedule;
  for (std::size_t w : cfg.widths) {
    for (std::size_t s = 0; s < cfg.seeds; ++s) {
      EquivalenceCell cell;
      cell.width = w;
      cell.seed = s;
      const Mlp m0 = make_net(cfg, w, s);
      const Matrix a = weighted(empirical_layer_kernels(m0, d.all, d.all), cfg);
      const Matrix a_xx = a.topLeftCorner(n, n);
      const Matrix a_px = a.bottomLeftCorner(p, n);
      const Vector f0 = forward(m0, d.all);
      cell.eta = step_rate(cfg, m0, a_xx);
      try {
        TrainResult tr = train_adjusted_gd(m0, d.x, d.y, rates_for(cfg, cell.eta), std::max<std::size_t>(cfg.steps, 1),
                                           stop);
        cell.steps_taken = tr.steps_taken;
        cell.final_loss = tr.loss_trace.back();
        cell.converged = cell.final_loss <= cfg.stop_loss;
        const Vector nn = forward(tr.network, d.probes);
        const Matrix f0x = f0.head(n);
        const Matrix f0p = f0.tail(p);
        for (double ridge : ridge_schedule) {
          double gap = std::numeric_limits<double>::quiet_NaN();
          try {
            const KernelRegressor r = fit_krr(a_xx, d.y, ridge, f0x);
            const Matrix corrected = predict_scores_with_initial_correction(r, a_px, f0p);
            gap = sup_gap(nn, corrected.col(0));
            const Vector plain = a_px * r.coefficients().col(0);
            cell.uncorrected_gap = sup_gap(nn, plain);
            cell.correction_size = sup_gap(corrected.col(0), plain);
          } catch (const SingularKernel&) {
          }
          cell.ridge_gaps.push_back(gap);
        }
        cell.gap = std::numeric_limits<double>::quiet_NaN();
        for (double g : cell.ridge_gaps)
          if (std::isfinite(g)) cell.gap = g;
      } catch (const NumericalDivergence&) {
        cell.diverged = true;
        cell.gap = std::numeric_limits<double>::quiet_NaN();
      }
      rep.cells.push_back(std::move(cell));
    }
  }
  summarise(rep.cells, rep.widths, [](const EquivalenceCell& c) { return c.gap; }, rep.median_gap, rep.fit);
  return rep;
}

double jacobian_change_ratio(const Mlp& m0, const Mlp& m1, const Matrix& x) {
  if (m0.widths != m1.widths) throw ConfigError("networks differ in shape");
  double dtheta2 = 0.0;
  for (std::size_t l = 0; l < m0.depth(); ++l) dtheta2 += (m1.weights[l] - m0.weights[l]).squaredNorm();
  if (dtheta2 == 0.0) return 0.0;
  const Backprop b0 = backprop(m0, x);
  const Backprop b1 = backprop(m1, x);
  double dj2 = 0.0;
  for (std::size_t l = 0; l < m0.depth(); ++l) {
    const Matrix a = b1.deltas[l] - b0.deltas[l];
    const Matrix b = b1.inputs[l] - b0.inputs[l];
    const Vector na = a.rowwise().squaredNorm();
    const Vector ng = b1.inputs[l].rowwise().squaredNorm();
    const Vector nd = b0.deltas[l].rowwise().squaredNorm();
    const Vector nb = b.rowwise().squaredNorm();
    const Vector ad = (a.array() * b0.deltas[l].array()).rowwise().sum();
    const Vector gb = (b1.inputs[l].array() * b.array()).rowwise().sum();
    const double s = b0.scales[l];
    const double block = (na.array() * ng.array() + nd.array() * nb.array() + 2.0 * ad.array() * gb.array()).sum();
    dj2 += s * s * std::max(block, 0.0);
  }
  const double d = static_cast<double>(m0.hidden_width());
  return std::sqrt(dj2) / std::sqrt(dtheta2) / std::sqrt(d);
}

LipschitzReport jacobian_lipschitz_probe(std::size_t input_dim, std::size_t depth,
                                         const std::vector<std::size_t>& widths, double radius, std::size_t seeds,
                                         std::size_t directions, const ActivationKind& activation, std::size_t n) {
  if (!(radius > 0.0)) throw ConfigError("ball radius must be positive");
  if (seeds == 0 || directions == 0) throw ConfigError("probe needs seeds and directions");
  SweepConfig cfg;
  cfg.widths = widths;
  cfg.depth = depth;
  cfg.input_dim = input_dim;
  cfg.n = n;
  cfg.probes = 0;
  cfg.seeds = seeds;
  cfg.activation = activation;
  cfg.parameterization = Parameterization::standard;
  cfg.validate();
  const Matrix x = sphere_regression(n, input_dim, cfg.data_seed).x;
  LipschitzReport rep;
  rep.widths = widths;
  for (std::size_t w : widths) {
    double best = 0.0;
    for (std::size_t s = 0; s < seeds; ++s) {
      const Mlp m0 = make_net(cfg, w, s);
      std::mt19937_64 rng(cell_seed(cfg.seed ^ 0x5DEECE66DULL, w, s));
      std::normal_distribution<double> normal;
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      for (std::size_t k = 0; k < directions; ++k) {
        Mlp m1 = m0;
        double norm2 = 0.0;
        std::vector<Matrix> dir;
        for (const auto& W : m0.weights) {
          Matrix dw(W.rows(), W.cols());
          for (Eigen::Index i = 0; i < dw.size(); ++i) dw.data()[i] = normal(rng);
          norm2 += dw.squaredNorm();
          dir.push_back(std::move(dw));
        }
        const double len = radius / std::sqrt(static_cast<double>(w)) * (1.0 - unit(rng));
        const double scale = len / std::sqrt(norm2);
        for (std::size_t l = 0; l < dir.size(); ++l) m1.weights[l] += scale * dir[l];
        best = std::max(best, jacobian_change_ratio(m0, m1, x));
      }
    }
    rep.max_ratio.push_back(best);
  }
  const auto [lo, hi] = std::minmax_element(rep.max_ratio.begin(), rep.max_ratio.end());
  rep.spread = *lo > 0.0 ? *hi / *lo : std::numeric_limits<double>::infinity();
  return rep;
}

}  // namespace wntk
