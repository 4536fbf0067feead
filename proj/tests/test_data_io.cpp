#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "wntk/data.hpp"
#include "wntk/errors.hpp"
#include "wntk/kernel_io.hpp"

using namespace wntk;

namespace {

std::string write_temp(const std::string& name, const std::string& text) {
  const std::string path = (std::filesystem::temp_directory_path() / ("wntk_test_" + name)).string();
  std::ofstream out(path);
  out << text;
  return path;
}

}  // namespace

TEST(Csv, LoadsLabelsInFirstAppearanceOrder) {
  const std::string path = write_temp("ok.csv", "a,b,label\n1,2,dog\n3,4,cat\n5,6,dog\n");
  const Dataset d = load_csv(path);
  EXPECT_EQ(d.size(), 3u);
  EXPECT_EQ(d.dim(), 2u);
  EXPECT_EQ(d.class_count, 2);
  EXPECT_EQ(d.class_names, (std::vector<std::string>{"dog", "cat"}));
  EXPECT_EQ(d.y, (std::vector<int>{0, 1, 0}));
  EXPECT_EQ(d.x(1, 1), 4.0);
  EXPECT_EQ(d.feature_names, (std::vector<std::string>{"a", "b"}));
  std::remove(path.c_str());
}

TEST(Csv, NamedLabelColumn) {
  const std::string path = write_temp("named.csv", "label,a\nx,1\ny,2\n");
  CsvSchema s;
  s.label_column = "label";
  const Dataset d = load_csv(path, s);
  EXPECT_EQ(d.dim(), 1u);
  EXPECT_EQ(d.x(1, 0), 2.0);
  std::remove(path.c_str());
}

TEST(Csv, ReportsRowAndColumnOfBadCell) {
  const std::string path = write_temp("bad.csv", "a,b,label\n1,2,x\n3,oops,y\n");
  try {
    load_csv(path);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.row(), 3);
    EXPECT_EQ(e.column(), 2);
  }
  const std::string missing = write_temp("short.csv", "a,b,label\n1,2,x\n3,y\n");
  EXPECT_THROW(load_csv(missing), ParseError);
  std::remove(path.c_str());
  std::remove(missing.c_str());
}

TEST(Csv, RejectsTinyAndMissingFiles) {
  const std::string path = write_temp("tiny.csv", "a,label\n1,x\n");
  EXPECT_THROW(load_csv(path), EmptyDataset);
  EXPECT_THROW(load_csv("/nonexistent/file.csv"), IoError);
  std::remove(path.c_str());
}

TEST(Csv, WriteReadRoundTrip) {
  const Dataset d = gaussian_blobs(30, 3, 3, 2.0, 4);
  const std::string path = (std::filesystem::temp_directory_path() / "wntk_test_rt.csv").string();
  write_csv(path, d);
  const Dataset back = load_csv(path);
  EXPECT_TRUE(back.x == d.x);
  EXPECT_EQ(back.class_count, d.class_count);
  for (std::size_t i = 0; i < d.size(); ++i) EXPECT_EQ(back.class_names[back.y[i]], d.class_names[d.y[i]]);
  std::remove(path.c_str());
}

TEST(Standardizer, UsesTrainingRowsOnly) {
  Matrix x(4, 2);
  x << 1, 5, 3, 5, 100, 7, -50, 9;
  const Standardizer s = Standardizer::fit(x, {0, 1});
  EXPECT_DOUBLE_EQ(s.mean()(0), 2.0);
  EXPECT_DOUBLE_EQ(s.scale()(0), 1.0);
  EXPECT_TRUE(s.constant()[1]);
  const Matrix z = s.transform(x);
  EXPECT_DOUBLE_EQ(z(2, 0), 98.0);
  EXPECT_DOUBLE_EQ(z(3, 1), 4.0);
  EXPECT_LT((s.inverse_transform(z) - x).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Standardizer, TrainRowsHaveZeroMeanUnitVariance) {
  const Dataset d = gaussian_blobs(50, 4, 2, 3.0, 5);
  std::vector<std::size_t> rows(40);
  std::iota(rows.begin(), rows.end(), 0);
  const auto [s, z] = standardize_fit_transform(d.x, rows);
  const Matrix zt = take_rows(z, rows);
  for (Eigen::Index j = 0; j < zt.cols(); ++j) {
    EXPECT_NEAR(zt.col(j).mean(), 0.0, 1e-12);
    EXPECT_NEAR((zt.col(j).array() - zt.col(j).mean()).square().mean(), 1.0, 1e-12);
  }
}

TEST(Folds, PartitionAllRows) {
  for (std::size_t n : {10u, 23u, 150u}) {
    const FoldPlan p = kfold_split(n, 5, 7);
    ASSERT_EQ(p.k(), 5u);
    std::set<std::size_t> seen;
    std::size_t largest = 0, smallest = n;
    for (const auto& f : p.folds) {
      largest = std::max(largest, f.size());
      smallest = std::min(smallest, f.size());
      for (std::size_t i : f) EXPECT_TRUE(seen.insert(i).second);
    }
    EXPECT_EQ(seen.size(), n);
    EXPECT_LE(largest - smallest, 1u);
    EXPECT_EQ(p.train_rows(0).size() + p.folds[0].size(), n);
  }
  EXPECT_EQ(kfold_split(20, 5, 1).folds, kfold_split(20, 5, 1).folds);
  EXPECT_NE(kfold_split(20, 5, 1).folds, kfold_split(20, 5, 2).folds);
  EXPECT_THROW(kfold_split(3, 5, 1), ConfigError);
}

TEST(Folds, TrainValSplitSizes) {
  std::vector<std::size_t> idx(25);
  std::iota(idx.begin(), idx.end(), 100);
  const TrainValSplit s = train_val_split(idx, 0.2, 3);
  EXPECT_EQ(s.val.size(), 5u);
  EXPECT_EQ(s.train.size(), 20u);
  std::set<std::size_t> all(s.train.begin(), s.train.end());
  all.insert(s.val.begin(), s.val.end());
  EXPECT_EQ(all.size(), 25u);
  EXPECT_EQ(*all.begin(), 100u);
}

TEST(Synthetic, SphereAndBlobs) {
  const RegressionData r = sphere_regression(30, 8, 1);
  for (Eigen::Index i = 0; i < r.x.rows(); ++i) EXPECT_NEAR(r.x.row(i).norm(), 1.0, 1e-12);
  EXPECT_TRUE(smooth_target(r.x, 7) == r.y);
  EXPECT_TRUE(sphere_regression(30, 8, 1).x == r.x);
  const Dataset b = gaussian_blobs(60, 3, 3, 4.0, 2);
  EXPECT_EQ(b.size(), 60u);
  EXPECT_EQ(b.class_count, 3);
}

TEST(KernelFile, BinaryRoundTripAndHash) {
  Matrix k(3, 2);
  k << 1.5, -2.0, 3.25, 1e-300, 7.0, 0.1;
  std::stringstream ss;
  io::write_kernel(ss, k);
  EXPECT_EQ(ss.str().size(), 5u + 4u + 4u + 1u + 6u * 8u);
  const Matrix back = io::read_kernel(ss);
  EXPECT_TRUE(back == k);
  EXPECT_EQ(io::kernel_hash(back), io::kernel_hash(k));
  Matrix other = k;
  other(2, 1) = 0.1000000001;
  EXPECT_NE(io::kernel_hash(other), io::kernel_hash(k));
}

TEST(KernelFile, RejectsCorruptContainers) {
  std::stringstream bad("NOPE!");
  EXPECT_THROW(io::read_kernel(bad), ParseError);
  std::stringstream ss;
  io::write_kernel(ss, Matrix::Identity(2, 2));
  std::string text = ss.str();
  text.resize(text.size() - 3);
  std::stringstream truncated(text);
  EXPECT_THROW(io::read_kernel(truncated), ParseError);
}
