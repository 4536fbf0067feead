#include "config.hpp"

#include <cstdlib>
#include <sstream>

#include "wntk/errors.hpp"

namespace wntk::cli {

json RunConfig::echo() const {
  json j;
  j["subcommand"] = subcommand;
  j["data"] = data;
  j["synthetic"] = synthetic;
  j["depth"] = depth ? json(*depth) : json(nullptr);
  j["widths"] = widths;
  j["activation"] = activation;
  j["parameterization"] = parameterization;
  j["kappa"] = kappa ? json(*kappa) : json(nullptr);
  j["reg"] = reg ? json(*reg) : json(nullptr);
  j["weights"] = weights;
  j["eta_w"] = eta_w;
  j["ratio"] = ratio;
  j["iters"] = iters ? json(*iters) : json(nullptr);
  j["seed"] = seed;
  j["folds"] = folds;
  j["seeds"] = seeds ? json(*seeds) : json(nullptr);
  j["eta0"] = eta0 ? json(*eta0) : json(nullptr);
  return j;
}

namespace {

std::size_t to_count(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  unsigned long long out = 0;
  try {
    out = std::stoull(v, &pos);
  } catch (const std::exception&) {
    throw ConfigError("synthetic: bad integer for " + key + ": " + v);
  }
  if (pos != v.size()) throw ConfigError("synthetic: bad integer for " + key + ": " + v);
  return static_cast<std::size_t>(out);
}

double to_real(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &pos);
  } catch (const std::exception&) {
    throw ConfigError("synthetic: bad number for " + key + ": " + v);
  }
  if (pos != v.size()) throw ConfigError("synthetic: bad number for " + key + ": " + v);
  return out;
}

}  // namespace

SyntheticSpec parse_synthetic(const std::string& text) {
  SyntheticSpec s;
  const auto colon = text.find(':');
  s.kind = text.substr(0, colon);
  if (s.kind == "blobs") {
    s.n = 120;
    s.dim = 4;
  } else if (s.kind == "sphere") {
    s.n = 20;
    s.dim = 8;
  } else {
    throw ConfigError("unknown synthetic generator '" + s.kind + "' (blobs, sphere)");
  }
  if (colon == std::string::npos) return s;
  std::stringstream ss(text.substr(colon + 1));
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw ConfigError("synthetic: expected key=value, got '" + item + "'");
    const std::string key = item.substr(0, eq);
    const std::string val = item.substr(eq + 1);
    if (key == "n") s.n = to_count(key, val);
    else if (key == "d") s.dim = to_count(key, val);
    else if (key == "classes") s.classes = static_cast<int>(to_count(key, val));
    else if (key == "sep") s.separation = to_real(key, val);
    else throw ConfigError("synthetic: unknown key '" + key + "'");
  }
  if (s.n < 2 || s.dim == 0) throw ConfigError("synthetic: need n >= 2 and d >= 1");
  if (s.classes < 2) throw ConfigError("synthetic: need at least two classes");
  return s;
}

Dataset make_synthetic(const SyntheticSpec& s, std::uint64_t seed) {
  if (s.kind == "blobs") return gaussian_blobs(s.n, s.dim, s.classes, s.separation, seed);
  const RegressionData r = sphere_regression(s.n, s.dim, seed);
  Dataset d;
  d.x = r.x;
  d.class_count = 2;
  d.class_names = {"neg", "pos"};
  for (Eigen::Index i = 0; i < r.y.size(); ++i) d.y.push_back(r.y(i) >= 0.0 ? 1 : 0);
  for (std::size_t j = 0; j < s.dim; ++j) d.feature_names.push_back("x" + std::to_string(j));
  d.provenance = "synthetic:sphere";
  return d;
}

std::string resolve_out_dir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("WNTK_OUT_DIR"); env != nullptr && *env != '\0') return env;
  return "wntk-out";
}

}  // namespace wntk::cli
