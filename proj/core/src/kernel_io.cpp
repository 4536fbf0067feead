#include "wntk/kernel_io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>

#include "wntk/errors.hpp"

static_assert(std::endian::native == std::endian::little, "containers assume a little-endian host");

namespace wntk::io {
namespace {

constexpr std::array<char, 5> kKernelMagic = {'W', 'N', 'T', 'K', '1'};
constexpr std::array<char, 5> kMlpMagic = {'W', 'M', 'L', 'P', '1'};
constexpr std::uint8_t kDtypeF64 = 1;

template <typename T>
void put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& in, const char* what) {
  T value{};
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(T))) throw ParseError(std::string("truncated ") + what);
  return value;
}

void expect_magic(std::istream& in, const std::array<char, 5>& magic) {
  std::array<char, 5> got{};
  if (!in.read(got.data(), got.size()) || got != magic)
    throw ParseError("bad magic, expected " + std::string(magic.data(), magic.size()));
}

std::uint32_t checked_u32(Eigen::Index v) {
  if (v < 0 || static_cast<std::uint64_t>(v) > std::numeric_limits<std::uint32_t>::max())
    throw ConfigError("dimension does not fit in u32");
  return static_cast<std::uint32_t>(v);
}

void put_row_major(std::ostream& out, const Matrix& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) put<double>(out, m(r, c));
}

Matrix get_row_major(std::istream& in, Eigen::Index rows, Eigen::Index cols) {
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = get<double>(in, "payload");
  return m;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  return in;
}

}  // namespace

void write_kernel(std::ostream& out, const Matrix& k) {
  out.write(kKernelMagic.data(), kKernelMagic.size());
  put<std::uint32_t>(out, checked_u32(k.rows()));
  put<std::uint32_t>(out, checked_u32(k.cols()));
  put<std::uint8_t>(out, kDtypeF64);
  put_row_major(out, k);
  if (!out) throw IoError("kernel write failed");
}

Matrix read_kernel(std::istream& in) {
  expect_magic(in, kKernelMagic);
  const auto rows = get<std::uint32_t>(in, "header");
  const auto cols = get<std::uint32_t>(in, "header");
  if (get<std::uint8_t>(in, "header") != kDtypeF64) throw ParseError("unsupported kernel dtype");
  return get_row_major(in, rows, cols);
}

void write_kernel_file(const std::string& path, const Matrix& k) {
  auto out = open_out(path);
  write_kernel(out, k);
}

Matrix read_kernel_file(const std::string& path) {
  auto in = open_in(path);
  return read_kernel(in);
}

void write_matrix_csv(std::ostream& out, const Matrix& k) {
  out << std::setprecision(17);
  for (Eigen::Index r = 0; r < k.rows(); ++r) {
    for (Eigen::Index c = 0; c < k.cols(); ++c) out << (c ? "," : "") << k(r, c);
    out << '\n';
  }
  if (!out) throw IoError("csv write failed");
}

void write_matrix_csv_file(const std::string& path, const Matrix& k) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write_matrix_csv(out, k);
}

void write_mlp(std::ostream& out, const Mlp& m) {
  m.validate();
  out.write(kMlpMagic.data(), kMlpMagic.size());
  put<std::uint32_t>(out, static_cast<std::uint32_t>(m.depth()));
  for (std::size_t w : m.widths) put<std::uint32_t>(out, checked_u32(static_cast<Eigen::Index>(w)));
  put<std::uint8_t>(out, static_cast<std::uint8_t>(m.parameterization));
  const std::string& name = m.activation.name();
  if (name.size() > 255) throw ConfigError("activation name too long");
  put<std::uint8_t>(out, static_cast<std::uint8_t>(name.size()));
  out.write(name.data(), static_cast<std::streamsize>(name.size()));
  put<double>(out, m.output_scale);
  for (const auto& w : m.weights) put_row_major(out, w);
  if (!out) throw IoError("checkpoint write failed");
}

Mlp read_mlp(std::istream& in) {
  expect_magic(in, kMlpMagic);
  Mlp m;
  const auto depth = get<std::uint32_t>(in, "header");
  if (depth == 0) throw ParseError("checkpoint depth is zero");
  for (std::uint32_t i = 0; i <= depth; ++i) m.widths.push_back(get<std::uint32_t>(in, "widths"));
  const auto param = get<std::uint8_t>(in, "header");
  if (param > 1) throw ParseError("unknown parameterization code");
  m.parameterization = static_cast<Parameterization>(param);
  const auto len = get<std::uint8_t>(in, "header");
  std::string name(len, '\0');
  if (!in.read(name.data(), len)) throw ParseError("truncated activation name");
  try {
    m.activation = ActivationKind::from_name(name);
  } catch (const ConfigError& e) {
    throw ParseError(e.what());
  }
  m.output_scale = get<double>(in, "header");
  for (std::uint32_t l = 1; l <= depth; ++l)
    m.weights.push_back(get_row_major(in, m.widths[l], m.widths[l - 1]));
  m.validate();
  return m;
}

void write_mlp_file(const std::string& path, const Mlp& m) {
  auto out = open_out(path);
  write_mlp(out, m);
}

Mlp read_mlp_file(const std::string& path) {
  auto in = open_in(path);
  return read_mlp(in);
}

std::uint64_t kernel_hash(const Matrix& k) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](const void* data, std::size_t size) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < size; ++i) {
      h ^= bytes[i];
      h *= 1099511628211ULL;
    }
  };
  const std::uint64_t dims[2] = {static_cast<std::uint64_t>(k.rows()), static_cast<std::uint64_t>(k.cols())};
  mix(dims, sizeof(dims));
  for (Eigen::Index r = 0; r < k.rows(); ++r)
    for (Eigen::Index c = 0; c < k.cols(); ++c) {
      const double v = k(r, c);
      mix(&v, sizeof(v));
    }
  return h;
}

}  // namespace wntk::io
