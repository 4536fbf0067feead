#include "commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "report.hpp"
#include "wntk/analytic_kernels.hpp"
#include "wntk/dynamics.hpp"
#include "wntk/errors.hpp"
#include "wntk/kernel_io.hpp"
#include "wntk/regression.hpp"
#include "wntk/weight_learning.hpp"

namespace wntk::cli {

namespace {

namespace fs = std::filesystem;

constexpr std::size_t kDefaultDepth = 3;
constexpr double kDefaultRidge = 0.1;
constexpr std::size_t kDefaultWeightIters = 50;

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string prepare_out(const RunConfig& cfg) {
  const std::string dir = resolve_out_dir(cfg.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir + ": " + ec.message());
  return dir;
}

std::string join(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

// Wall time lives in its own file so the report stays byte-identical across runs.
void write_timing(const std::string& dir, const RunConfig& cfg, const Stopwatch& sw) {
  json t;
  t["schema"] = "wntk.timing/1";
  t["command"] = cfg.subcommand;
  t["wall_seconds"] = sw.seconds();
  write_json(join(dir, cfg.subcommand + "_timing.json"), t);
}

Dataset load_single(const RunConfig& cfg, bool& from_csv) {
  if (cfg.data.size() > 1) throw ConfigError(cfg.subcommand + " takes a single --data file");
  if (!cfg.data.empty() && !cfg.synthetic.empty()) throw ConfigError("--data and --synthetic are exclusive");
  from_csv = !cfg.data.empty();
  if (from_csv) return load_csv(cfg.data.front());
  if (cfg.synthetic.empty()) throw ConfigError(cfg.subcommand + " needs --data or --synthetic");
  return make_synthetic(parse_synthetic(cfg.synthetic), cfg.seed);
}

NetworkShape shape_for(const RunConfig& cfg, std::size_t dim) {
  NetworkShape s;
  s.input_dim = dim;
  s.depth = cfg.depth.value_or(kDefaultDepth);
  s.activation = ActivationKind::from_name(cfg.activation);
  s.validate();
  return s;
}

std::optional<LayerWeights> weights_for(const RunConfig& cfg, std::size_t depth) {
  if (cfg.weights.empty()) return std::nullopt;
  if (cfg.weights.size() != depth)
    throw ConfigError("--weights needs " + std::to_string(depth) + " values, got " + std::to_string(cfg.weights.size()));
  return LayerWeights(cfg.weights);
}

Matrix combine(const LayerKernelStack& s, const std::optional<LayerWeights>& w) {
  return w ? wntk_weighted_sum(s, *w) : s.sum();
}

Matrix block(const Matrix& k, const std::vector<std::size_t>& rows, const std::vector<std::size_t>& cols) {
  Matrix out(rows.size(), cols.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j) out(i, j) = k(rows[i], cols[j]);
  return out;
}

std::string hex(std::uint64_t v) {
  char buf[19];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double std_of(const std::vector<double>& v) {
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return v.empty() ? 0.0 : std::sqrt(s / static_cast<double>(v.size()));
}

// Layer stack over all rows after standardising with the fold's training statistics.
LayerKernelStack fold_stack(const Dataset& d, const std::vector<std::size_t>& train, const NetworkShape& shape) {
  const auto [st, z] = standardize_fit_transform(d.x, train);
  (void)st;
  return layer_kernels_from_stack(sigma_recursion(z, shape));
}

double holdout_accuracy(const Matrix& k, const Dataset& d, const std::vector<std::size_t>& train,
                        const std::vector<std::size_t>& test, double ridge) {
  const KernelRegressor r = fit_krr(block(k, train, train), encode_labels(take(d.y, train), d.class_count), ridge);
  return score_accuracy(predict(r, block(k, test, train)), take(d.y, test));
}

struct LearnOutcome {
  json folds = json::array();
  std::vector<double> ntk;
  std::vector<double> wntk;
  std::vector<WeightTrace> traces;
};

LearnOutcome learn_weights_cv(const RunConfig& cfg, const Dataset& d) {
  const NetworkShape shape = shape_for(cfg, d.dim());
  const double ridge = cfg.reg.value_or(kDefaultRidge);
  const FoldPlan plan = kfold_split(d.size(), cfg.folds, cfg.seed);
  LearnOutcome out;
  for (std::size_t f = 0; f < plan.k(); ++f) {
    const std::vector<std::size_t> train = plan.train_rows(f);
    const std::vector<std::size_t>& test = plan.folds[f];
    const LayerKernelStack stack = fold_stack(d, train, shape);
    WeightLearnerConfig wc;
    wc.init = weights_for(cfg, shape.depth).value_or(LayerWeights::ones(shape.depth));
    wc.eta_w = cfg.eta_w;
    wc.ratio = cfg.ratio;
    wc.ridge = ridge;
    wc.max_iters = cfg.iters.value_or(kDefaultWeightIters);
    wc.seed = cfg.seed + f;
    const Matrix y_train = encode_labels(take(d.y, train), d.class_count);
    WeightTrace trace = algorithm1_update_loop(stack.select(train, train), y_train, wc);
    const double ntk_acc = holdout_accuracy(stack.sum(), d, train, test, ridge);
    const double wntk_acc = holdout_accuracy(wntk_weighted_sum(stack, trace.final_weights), d, train, test, ridge);
    json row;
    row["fold"] = f;
    row["n_train"] = train.size();
    row["n_test"] = test.size();
    row["ntk_accuracy"] = ntk_acc;
    row["wntk_accuracy"] = wntk_acc;
    row["delta"] = wntk_acc - ntk_acc;
    row["weights"] = trace.final_weights.values();
    row["iterations"] = trace.iterations.size();
    out.folds.push_back(std::move(row));
    out.ntk.push_back(ntk_acc);
    out.wntk.push_back(wntk_acc);
    out.traces.push_back(std::move(trace));
  }
  return out;
}

void apply_sweep_flags(const RunConfig& cfg, SweepConfig& c) {
  if (!cfg.data.empty()) throw ConfigError(cfg.subcommand + " runs on synthetic sphere data; --data is not supported");
  if (!cfg.synthetic.empty()) {
    const SyntheticSpec s = parse_synthetic(cfg.synthetic);
    if (s.kind != "sphere") throw ConfigError(cfg.subcommand + " only supports --synthetic sphere:...");
    if (cfg.synthetic.find("n=") != std::string::npos) c.n = s.n;
    if (cfg.synthetic.find("d=") != std::string::npos) c.input_dim = s.dim;
  }
  if (!cfg.widths.empty()) c.widths = cfg.widths;
  if (cfg.depth) c.depth = *cfg.depth;
  c.activation = ActivationKind::from_name(cfg.activation);
  if (!cfg.parameterization.empty()) c.parameterization = parameterization_from_name(cfg.parameterization);
  if (cfg.kappa) c.kappa = *cfg.kappa;
  if (!cfg.weights.empty()) c.rates = cfg.weights;
  if (cfg.iters) c.steps = *cfg.iters;
  if (cfg.seeds) c.seeds = *cfg.seeds;
  if (cfg.eta0) c.eta0 = *cfg.eta0;
  c.seed = cfg.seed;
  c.validate();
}

void print_medians(const char* metric, const std::vector<std::size_t>& widths, const std::vector<double>& values,
                   const SlopeFit& fit) {
  for (std::size_t i = 0; i < widths.size(); ++i) std::printf("width %6zu  median %s %.6g\n", widths[i], metric, values[i]);
  std::printf("log-log slope %.4f%s\n", fit.slope, fit.valid ? "" : " (invalid)");
}

}  // namespace

int cmd_kernel(const RunConfig& cfg) {
  Stopwatch sw;
  bool from_csv = false;
  Dataset d = load_single(cfg, from_csv);
  std::vector<std::size_t> all(d.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  const Matrix x = from_csv ? standardize_fit_transform(d.x, all).second : d.x;
  const NetworkShape shape = shape_for(cfg, d.dim());
  const std::optional<LayerWeights> w = weights_for(cfg, shape.depth);
  const SigmaStack s = sigma_recursion(x, shape);
  const Matrix ntk = ntk_from_stack(s);
  const Matrix wntk = wntk_recursion(s, w.value_or(LayerWeights::ones(shape.depth)));
  const LayerKernelStack layers = layer_kernels_from_stack(s);

  const std::string dir = prepare_out(cfg);
  io::write_kernel_file(join(dir, "ntk.bin"), ntk);
  io::write_matrix_csv_file(join(dir, "ntk.csv"), ntk);
  io::write_kernel_file(join(dir, "wntk.bin"), wntk);
  io::write_matrix_csv_file(join(dir, "wntk.csv"), wntk);
  for (std::size_t l = 1; l <= layers.depth(); ++l)
    io::write_matrix_csv_file(join(dir, "layer_" + std::to_string(l) + ".csv"), layers[l]);

  Eigen::SelfAdjointEigenSolver<Matrix> eig(wntk, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues()(0);
  const double hi = eig.eigenvalues()(eig.eigenvalues().size() - 1);
  json rep = report_header(cfg);
  json m;
  m["n"] = d.size();
  m["input_dim"] = d.dim();
  m["depth"] = shape.depth;
  m["activation"] = shape.activation.name();
  m["standardized"] = from_csv;
  m["weights"] = w.value_or(LayerWeights::ones(shape.depth)).values();
  m["lambda_min"] = lo;
  m["lambda_max"] = hi;
  try {
    m["eta_critical"] = estimate_eta_critical(wntk);
  } catch (const NonPositiveDefinite&) {
    m["eta_critical"] = nullptr;
  }
  m["ntk_hash"] = hex(io::kernel_hash(ntk));
  m["wntk_hash"] = hex(io::kernel_hash(wntk));
  rep["metrics"] = std::move(m);
  write_json(join(dir, "kernel.json"), rep);
  write_timing(dir, cfg, sw);
  std::printf("n=%zu depth=%zu lambda_min=%.6g lambda_max=%.6g\n", d.size(), shape.depth, lo, hi);
  return 0;
}

int cmd_fit(const RunConfig& cfg) {
  Stopwatch sw;
  bool from_csv = false;
  const Dataset d = load_single(cfg, from_csv);
  const NetworkShape shape = shape_for(cfg, d.dim());
  const std::optional<LayerWeights> w = weights_for(cfg, shape.depth);
  const double ridge = cfg.reg.value_or(kDefaultRidge);
  const FoldPlan plan = kfold_split(d.size(), cfg.folds, cfg.seed);
  json folds = json::array();
  std::vector<double> acc;
  for (std::size_t f = 0; f < plan.k(); ++f) {
    const std::vector<std::size_t> train = plan.train_rows(f);
    const double a = holdout_accuracy(combine(fold_stack(d, train, shape), w), d, train, plan.folds[f], ridge);
    json row;
    row["fold"] = f;
    row["n_train"] = train.size();
    row["n_test"] = plan.folds[f].size();
    row["accuracy"] = a;
    folds.push_back(std::move(row));
    acc.push_back(a);
  }
  const std::string dir = prepare_out(cfg);
  json rep = report_header(cfg);
  json m;
  m["dataset"] = d.provenance;
  m["kernel"] = w ? "wntk" : "ntk";
  m["ridge"] = ridge;
  m["folds"] = plan.k();
  m["mean_accuracy"] = mean_of(acc);
  m["std_accuracy"] = std_of(acc);
  rep["metrics"] = std::move(m);
  rep["per_fold"] = std::move(folds);
  write_json(join(dir, "fit.json"), rep);
  write_timing(dir, cfg, sw);
  std::printf("%s accuracy %.4f +- %.4f over %zu folds\n", w ? "WNTK" : "NTK", mean_of(acc), std_of(acc), plan.k());
  return 0;
}

int cmd_learn_weights(const RunConfig& cfg) {
  Stopwatch sw;
  bool from_csv = false;
  const Dataset d = load_single(cfg, from_csv);
  LearnOutcome o = learn_weights_cv(cfg, d);
  const std::string dir = prepare_out(cfg);
  json traces = json::array();
  for (std::size_t f = 0; f < o.traces.size(); ++f) {
    std::ostringstream csv;
    o.traces[f].write_records(csv);
    write_text(join(dir, "learn-weights_fold" + std::to_string(f) + "_trace.csv"), csv.str());
    traces.push_back(to_json(o.traces[f]));
  }
  json rep = report_header(cfg);
  json m;
  m["dataset"] = d.provenance;
  m["ridge"] = cfg.reg.value_or(kDefaultRidge);
  m["ntk_mean_accuracy"] = mean_of(o.ntk);
  m["wntk_mean_accuracy"] = mean_of(o.wntk);
  m["mean_delta"] = mean_of(o.wntk) - mean_of(o.ntk);
  rep["metrics"] = std::move(m);
  rep["per_fold"] = std::move(o.folds);
  rep["traces"] = std::move(traces);
  write_json(join(dir, "learn-weights.json"), rep);
  write_timing(dir, cfg, sw);
  std::printf("NTK %.4f  WNTK %.4f  delta %+.4f\n", mean_of(o.ntk), mean_of(o.wntk), mean_of(o.wntk) - mean_of(o.ntk));
  return 0;
}

int cmd_verify_stability(const RunConfig& cfg) {
  Stopwatch sw;
  SweepConfig c = default_stability_config();
  apply_sweep_flags(cfg, c);
  const StabilityReport r = verify_stability(c);
  const std::string dir = prepare_out(cfg);
  json rep = report_header(cfg);
  rep["sweep"] = to_json(c);
  rep["metrics"] = to_json(r);
  write_json(join(dir, "verify-stability.json"), rep);
  write_plot_csv(join(dir, "verify-stability_plot.csv"), "median_drift", r.widths, r.median_drift);
  write_timing(dir, cfg, sw);
  print_medians("drift", r.widths, r.median_drift, r.fit);
  return 0;
}

int cmd_verify_lazy(const RunConfig& cfg) {
  Stopwatch sw;
  SweepConfig c = default_lazy_config();
  apply_sweep_flags(cfg, c);
  const LazyReport r = verify_lazy(c);
  const std::string dir = prepare_out(cfg);
  json rep = report_header(cfg);
  rep["sweep"] = to_json(c);
  rep["metrics"] = to_json(r);
  write_json(join(dir, "verify-lazy.json"), rep);
  write_plot_csv(join(dir, "verify-lazy_plot.csv"), "median_gap", r.widths, r.median_gap);
  write_timing(dir, cfg, sw);
  print_medians("gap", r.widths, r.median_gap, r.fit);
  return 0;
}

int cmd_verify_equivalence(const RunConfig& cfg) {
  Stopwatch sw;
  SweepConfig c = default_equivalence_config();
  apply_sweep_flags(cfg, c);
  std::vector<double> ridges{1e-4, 1e-6, 0.0};
  if (cfg.reg) ridges = {*cfg.reg};
  const EquivalenceReport r = verify_equivalence(c, ridges);
  const std::string dir = prepare_out(cfg);
  json rep = report_header(cfg);
  rep["sweep"] = to_json(c);
  rep["metrics"] = to_json(r);
  write_json(join(dir, "verify-equivalence.json"), rep);
  write_plot_csv(join(dir, "verify-equivalence_plot.csv"), "median_gap", r.widths, r.median_gap);
  write_timing(dir, cfg, sw);
  print_medians("gap", r.widths, r.median_gap, r.fit);
  return 0;
}

int cmd_benchmark(const RunConfig& cfg) {
  Stopwatch sw;
  if (!cfg.synthetic.empty()) throw ConfigError("benchmark runs on CSV datasets; use --data");
  std::vector<std::string> files = cfg.data;
  if (files.empty())
    for (const char* name : {"iris.csv", "wine.csv", "breast_cancer.csv"}) files.push_back(join(WNTK_DATA_DIR, name));
  json rows = json::array();
  bool none_worse = true;
  bool some_better = false;
  for (const auto& file : files) {
    const Dataset d = load_csv(file);
    const LearnOutcome o = learn_weights_cv(cfg, d);
    const double ntk = mean_of(o.ntk);
    const double wntk = mean_of(o.wntk);
    if (wntk < ntk - 0.005) none_worse = false;
    if (wntk > ntk) some_better = true;
    json row;
    row["dataset"] = fs::path(file).stem().string();
    row["n"] = d.size();
    row["classes"] = d.class_count;
    row["ntk_mean_accuracy"] = ntk;
    row["ntk_std_accuracy"] = std_of(o.ntk);
    row["wntk_mean_accuracy"] = wntk;
    row["wntk_std_accuracy"] = std_of(o.wntk);
    row["delta"] = wntk - ntk;
    row["per_fold"] = o.folds;
    rows.push_back(std::move(row));
    std::printf("%-16s NTK %.4f  WNTK %.4f  delta %+.4f\n", fs::path(file).stem().string().c_str(), ntk, wntk,
                wntk - ntk);
  }
  const bool sane = none_worse && some_better;
  const std::string dir = prepare_out(cfg);
  json rep = report_header(cfg);
  json m;
  m["ridge"] = cfg.reg.value_or(kDefaultRidge);
  m["folds"] = cfg.folds;
  m["no_dataset_worse_by_half_point"] = none_worse;
  m["some_dataset_improved"] = some_better;
  m["sanity"] = sane;
  rep["metrics"] = std::move(m);
  rep["datasets"] = std::move(rows);
  write_json(join(dir, "benchmark.json"), rep);
  write_timing(dir, cfg, sw);
  if (!sane) std::fprintf(stderr, "warning: learned weights did not beat the NTK baseline on this benchmark\n");
  return 0;
}

}  // namespace wntk::cli
