#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wntk/data.hpp"

namespace wntk::cli {

using json = nlohmann::ordered_json;

// Every flag the front end understands; unset optionals fall back to per-command defaults.
struct RunConfig {
  std::string subcommand;
  std::vector<std::string> data;
  std::string synthetic;
  std::optional<std::size_t> depth;
  std::vector<std::size_t> widths;
  std::string activation = "relu";
  std::string parameterization;
  std::optional<double> kappa;
  std::optional<double> reg;
  std::vector<double> weights;
  double eta_w = 0.01;
  double ratio = 0.2;
  std::optional<std::size_t> iters;
  std::uint64_t seed = 0;
  std::size_t folds = 5;
  std::optional<std::size_t> seeds;
  std::optional<double> eta0;
  std::string out;

  json echo() const;
};

// "blobs:n=120,d=4,classes=3,sep=3" or "sphere:n=20,d=8" (labels from the target sign).
struct SyntheticSpec {
  std::string kind;
  std::size_t n = 0;
  std::size_t dim = 0;
  int classes = 2;
  double separation = 3.0;
};

SyntheticSpec parse_synthetic(const std::string& text);
Dataset make_synthetic(const SyntheticSpec& s, std::uint64_t seed);

// --out, else $WNTK_OUT_DIR, else ./wntk-out.
std::string resolve_out_dir(const std::string& flag);

}  // namespace wntk::cli
