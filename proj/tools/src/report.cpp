#include "report.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "wntk/errors.hpp"

namespace wntk::cli {

namespace {

json real(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json reals(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(real(x));
  return a;
}

json reals(const Vector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(real(v(i)));
  return a;
}

const char* rule_name(RateRule r) {
  switch (r) {
    case RateRule::absolute: return "absolute";
    case RateRule::inverse_width: return "inverse_width";
    case RateRule::fraction_of_critical: return "fraction_of_critical";
  }
  return "absolute";
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  return out;
}

}  // namespace

json report_header(const RunConfig& cfg) {
  json j;
  j["schema"] = kSchema;
  j["command"] = cfg.subcommand;
  j["config"] = cfg.echo();
  return j;
}

json to_json(const SweepConfig& c) {
  json j;
  j["widths"] = c.widths;
  j["seeds"] = c.seeds;
  j["steps"] = c.steps;
  j["eta0"] = c.eta0;
  j["rate_rule"] = rule_name(c.rate_rule);
  j["rates"] = c.layer_rates().values();
  j["ntk_case"] = c.ntk_case();
  j["depth"] = c.depth;
  j["n"] = c.n;
  j["probes"] = c.probes;
  j["input_dim"] = c.input_dim;
  j["parameterization"] = to_string(c.parameterization);
  j["activation"] = c.activation.name();
  j["kappa"] = c.kappa;
  j["sigma_w"] = c.sigma_w;
  j["checkpoint_every"] = c.checkpoint_every;
  j["stop_loss"] = c.stop_loss;
  j["seed"] = c.seed;
  j["data_seed"] = c.data_seed;
  return j;
}

json to_json(const SlopeFit& f) {
  json j;
  j["slope"] = real(f.slope);
  j["intercept"] = real(f.intercept);
  j["valid"] = f.valid;
  return j;
}

json to_json(const StabilityReport& r) {
  json j;
  json cells = json::array();
  for (const auto& c : r.cells) {
    json e;
    e["width"] = c.width;
    e["seed"] = c.seed;
    e["diverged"] = c.diverged;
    e["checkpoints"] = c.checkpoints;
    e["drift"] = reals(c.drift);
    e["terminal_drift"] = real(c.terminal_drift);
    cells.push_back(std::move(e));
  }
  j["cells"] = std::move(cells);
  j["widths"] = r.widths;
  j["median_drift"] = reals(r.median_drift);
  j["fit"] = to_json(r.fit);
  j["eta_critical_ratio"] = real(r.eta_critical_ratio);
  return j;
}

json to_json(const LazyReport& r) {
  json j;
  json cells = json::array();
  for (const auto& c : r.cells) {
    json e;
    e["width"] = c.width;
    e["seed"] = c.seed;
    e["diverged"] = c.diverged;
    e["checkpoints"] = c.checkpoints;
    e["train_gap"] = reals(c.train_gap);
    e["probe_gap"] = reals(c.probe_gap);
    e["terminal_gap"] = real(c.terminal_gap);
    cells.push_back(std::move(e));
  }
  j["cells"] = std::move(cells);
  j["widths"] = r.widths;
  j["median_gap"] = reals(r.median_gap);
  j["fit"] = to_json(r.fit);
  return j;
}

json to_json(const EquivalenceReport& r) {
  json j;
  json cells = json::array();
  for (const auto& c : r.cells) {
    json e;
    e["width"] = c.width;
    e["seed"] = c.seed;
    e["eta"] = real(c.eta);
    e["steps_taken"] = c.steps_taken;
    e["final_loss"] = real(c.final_loss);
    e["converged"] = c.converged;
    e["diverged"] = c.diverged;
    e["ridge_gaps"] = reals(c.ridge_gaps);
    e["gap"] = real(c.gap);
    e["uncorrected_gap"] = real(c.uncorrected_gap);
    e["correction_size"] = real(c.correction_size);
    cells.push_back(std::move(e));
  }
  j["cells"] = std::move(cells);
  j["widths"] = r.widths;
  j["ridge_schedule"] = r.ridge_schedule;
  j["median_gap"] = reals(r.median_gap);
  j["fit"] = to_json(r.fit);
  return j;
}

json to_json(const WeightTrace& t) {
  json j;
  json its = json::array();
  for (std::size_t k = 0; k < t.iterations.size(); ++k) {
    const auto& it = t.iterations[k];
    json e;
    e["iteration"] = k;
    e["weights"] = reals(it.weights.values());
    e["val_loss"] = real(it.val_loss);
    e["gradient"] = reals(it.gradient);
    its.push_back(std::move(e));
  }
  j["iterations"] = std::move(its);
  j["final_weights"] = reals(t.final_weights.values());
  j["step_halved"] = t.step_halved;
  j["aborted"] = t.aborted;
  return j;
}

void write_json(const std::string& path, const json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path);
}

void write_plot_csv(const std::string& path, const std::string& metric, const std::vector<std::size_t>& widths,
                    const std::vector<double>& values) {
  auto out = open_out(path);
  out << "width," << metric << '\n' << std::setprecision(17);
  for (std::size_t i = 0; i < widths.size(); ++i) out << widths[i] << ',' << values[i] << '\n';
  if (!out) throw IoError("write failed: " + path);
}

void write_text(const std::string& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace wntk::cli
