#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>

#include <CLI11.hpp>

#include "commands.hpp"
#include "wntk/errors.hpp"

namespace {

enum ExitCode { kOk = 0, kConfig = 2, kNumerical = 3, kIo = 4 };

void add_flags(CLI::App& sub, wntk::cli::RunConfig& cfg) {
  sub.add_option("--data", cfg.data, "CSV dataset (label in the last column); repeatable for benchmark");
  sub.add_option("--synthetic", cfg.synthetic, "blobs:n=,d=,classes=,sep= or sphere:n=,d=");
  sub.add_option("--depth", cfg.depth, "number of layers L");
  sub.add_option("--widths", cfg.widths, "hidden widths for sweeps")->delimiter(',');
  sub.add_option("--activation", cfg.activation, "relu | tanh | erf | identity")->capture_default_str();
  sub.add_option("--parameterization", cfg.parameterization, "ntk | standard");
  sub.add_option("--kappa", cfg.kappa, "output scale");
  sub.add_option("--reg", cfg.reg, "ridge regularisation");
  sub.add_option("--weights", cfg.weights, "layer weights a_1..a_L")->delimiter(',');
  sub.add_option("--eta-w", cfg.eta_w, "weight-learning rate")->capture_default_str();
  sub.add_option("--ratio", cfg.ratio, "validation fraction for weight learning")->capture_default_str();
  sub.add_option("--iters", cfg.iters, "weight-learning iterations or training steps");
  sub.add_option("--seed", cfg.seed, "base seed")->capture_default_str();
  sub.add_option("--folds", cfg.folds, "cross-validation folds")->capture_default_str();
  sub.add_option("--seeds", cfg.seeds, "seeds per width in sweeps");
  sub.add_option("--eta0", cfg.eta0, "base step size in sweeps");
  sub.add_option("--out", cfg.out, "output directory (default $WNTK_OUT_DIR or ./wntk-out)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weighted neural tangent kernels: analytic kernels, regression, weight learning and training-dynamics checks"};
  app.require_subcommand(1);
  wntk::cli::RunConfig cfg;

  const std::map<std::string, std::pair<std::string, std::function<int(const wntk::cli::RunConfig&)>>> commands{
      {"kernel", {"compute analytic NTK / WNTK and layer kernels", wntk::cli::cmd_kernel}},
      {"fit", {"k-fold kernel ridge regression accuracy", wntk::cli::cmd_fit}},
      {"learn-weights", {"learn layer weights by validation-loss descent", wntk::cli::cmd_learn_weights}},
      {"verify-stability", {"kernel drift during training versus width", wntk::cli::cmd_verify_stability}},
      {"verify-lazy", {"network versus linearisation gap versus width", wntk::cli::cmd_verify_lazy}},
      {"verify-equivalence", {"trained network versus kernel regression", wntk::cli::cmd_verify_equivalence}},
      {"benchmark", {"NTK versus learned WNTK on tabular datasets", wntk::cli::cmd_benchmark}},
  };
  for (const auto& [name, entry] : commands) add_flags(*app.add_subcommand(name, entry.first), cfg);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  for (const auto& [name, entry] : commands) {
    if (!app.got_subcommand(name)) continue;
    cfg.subcommand = name;
    try {
      return entry.second(cfg);
    } catch (const wntk::ConfigError& e) {
      std::fprintf(stderr, "config error: %s\n", e.what());
      return kConfig;
    } catch (const wntk::NumericalError& e) {
      std::fprintf(stderr, "numerical error: %s\n", e.what());
      return kNumerical;
    } catch (const wntk::IoError& e) {
      std::fprintf(stderr, "i/o error: %s\n", e.what());
      return kIo;
    } catch (const std::filesystem::filesystem_error& e) {
      std::fprintf(stderr, "i/o error: %s\n", e.what());
      return kIo;
    } catch (const std::invalid_argument& e) {
      std::fprintf(stderr, "config error: %s\n", e.what());
      return kConfig;
    }
  }
  return kConfig;
}
