#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>

#include <gtest/gtest.h>

#include "wntk/data.hpp"
#include "wntk/kernel_io.hpp"

namespace fs = std::filesystem;

namespace {

const std::string kCli = WNTK_CLI_PATH;
const std::string kData = WNTK_DATA_DIR;

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("wntk_cli_" + name);
  fs::remove_all(p);
  return p;
}

int run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + (env.empty() ? "" : " ") + kCli + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

struct Case {
  const char* name;
  std::string args;
  std::vector<std::string> files;
};

}  // namespace

TEST(Cli, EverySubcommandIsByteDeterministic) {
  const std::string iris = kData + "/iris.csv";
  const std::vector<Case> cases = {
      {"kernel", "kernel --synthetic sphere:n=12,d=5 --weights 1,0.5,2", {"kernel.json", "ntk.bin", "wntk.csv"}},
      {"fit", "fit --data " + iris, {"fit.json"}},
      {"learn-weights", "learn-weights --data " + iris + " --iters 3", {"learn-weights.json", "learn-weights_fold0_trace.csv"}},
      {"verify-stability", "verify-stability --widths 16,32 --seeds 1 --iters 10", {"verify-stability.json", "verify-stability_plot.csv"}},
      {"verify-lazy", "verify-lazy --widths 16,32 --seeds 1 --iters 10", {"verify-lazy.json", "verify-lazy_plot.csv"}},
      {"verify-equivalence", "verify-equivalence --widths 32,64 --seeds 1 --iters 50 --kappa 1 --eta0 0.5", {"verify-equivalence.json"}},
      {"benchmark", "benchmark --data " + iris + " --iters 3", {"benchmark.json"}},
  };
  for (const auto& c : cases) {
    const fs::path a = scratch(std::string(c.name) + "_a"), b = scratch(std::string(c.name) + "_b");
    ASSERT_EQ(run(c.args + " --seed 3 --out " + a.string()), 0) << c.name;
    ASSERT_EQ(run(c.args + " --seed 3 --out " + b.string()), 0) << c.name;
    for (const auto& f : c.files) {
      const std::string ra = slurp(a / f);
      EXPECT_FALSE(ra.empty()) << c.name << '/' << f;
      EXPECT_EQ(ra, slurp(b / f)) << c.name << '/' << f;
    }
    EXPECT_TRUE(fs::exists(a / (std::string(c.name) + "_timing.json"))) << c.name;
    EXPECT_EQ(slurp(a / c.files.front()).find("wall"), std::string::npos) << c.name;
    fs::remove_all(a);
    fs::remove_all(b);
  }
}

TEST(Cli, ReportsCarrySchemaAndConfig) {
  const fs::path out = scratch("schema");
  ASSERT_EQ(run("fit --data " + kData + "/wine.csv --reg 0.5 --out " + out.string()), 0);
  const std::string text = slurp(out / "fit.json");
  EXPECT_NE(text.find("\"schema\": \"wntk.report/1\""), std::string::npos);
  EXPECT_NE(text.find("\"reg\": 0.5"), std::string::npos);
  fs::remove_all(out);
}

TEST(Cli, UnitWeightsReproduceNtkFile) {
  const fs::path out = scratch("identity");
  ASSERT_EQ(run("kernel --synthetic sphere:n=15,d=4 --weights 1,1,1 --out " + out.string()), 0);
  EXPECT_EQ(slurp(out / "ntk.bin"), slurp(out / "wntk.bin"));
  fs::remove_all(out);
}

TEST(Cli, SingleLayerKernelIsScaledGram) {
  const fs::path out = scratch("gram");
  ASSERT_EQ(run("kernel --synthetic sphere:n=9,d=6 --depth 1 --seed 5 --out " + out.string()), 0);
  const wntk::Matrix k = wntk::io::read_kernel_file((out / "ntk.bin").string());
  const wntk::Matrix x = wntk::sphere_regression(9, 6, 5).x;
  EXPECT_LT((k - x * x.transpose() / 6.0).cwiseAbs().maxCoeff(), 1e-15);
  fs::remove_all(out);
}

TEST(Cli, SeparableBlobsAreFitPerfectly) {
  const fs::path out = scratch("blobs");
  ASSERT_EQ(run("fit --synthetic blobs:n=60,d=3,classes=2,sep=12 --out " + out.string()), 0);
  EXPECT_NE(slurp(out / "fit.json").find("\"mean_accuracy\": 1.0"), std::string::npos);
  fs::remove_all(out);
}

TEST(Cli, ExitCodes) {
  const fs::path out = scratch("codes");
  EXPECT_EQ(run("--help"), 0);
  EXPECT_EQ(run("fit --no-such-flag"), 2);
  EXPECT_EQ(run("fit --out " + out.string()), 2);
  EXPECT_EQ(run("fit --data " + kData + "/iris.csv --weights 1,2 --out " + out.string()), 2);
  EXPECT_EQ(run("verify-stability --widths 64,32 --out " + out.string()), 2);
  EXPECT_EQ(run("fit --data /nonexistent.csv --out " + out.string()), 4);

  fs::create_directories(out);
  const fs::path csv = out / "degenerate.csv";
  std::ofstream(csv) << "a,b,label\n1,1,x\n-1,-1,y\n0,0,x\n";
  EXPECT_EQ(run("kernel --data " + csv.string() + " --out " + out.string()), 3);
  fs::remove_all(out);
}

TEST(Cli, EnvironmentSetsDefaultOutputDirectory) {
  const fs::path out = scratch("env");
  ASSERT_EQ(run("kernel --synthetic sphere:n=5,d=3", "WNTK_OUT_DIR=" + out.string()), 0);
  EXPECT_TRUE(fs::exists(out / "kernel.json"));
  fs::remove_all(out);
}
