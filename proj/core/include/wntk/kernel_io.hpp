#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "wntk/mlp.hpp"
#include "wntk/types.hpp"

namespace wntk::io {

// Kernel container, little-endian:
//   "WNTK1" | u32 rows | u32 cols | u8 dtype (1 = f64) | rows*cols f64, row-major
void write_kernel(std::ostream& out, const Matrix& k);
Matrix read_kernel(std::istream& in);
void write_kernel_file(const std::string& path, const Matrix& k);
Matrix read_kernel_file(const std::string& path);

// Plain CSV, one row per line, 17 significant digits.
void write_matrix_csv(std::ostream& out, const Matrix& k);
void write_matrix_csv_file(const std::string& path, const Matrix& k);

// Network checkpoint, little-endian:
//   "WMLP1" | u32 L | u32 widths[L+1] | u8 parameterization | u8 name_len | name bytes
//   | f64 output_scale | per layer: d_l*d_{l-1} f64, row-major
// Smooth activations are restored by name (tanh, identity, erf).
void write_mlp(std::ostream& out, const Mlp& m);
Mlp read_mlp(std::istream& in);
void write_mlp_file(const std::string& path, const Mlp& m);
Mlp read_mlp_file(const std::string& path);

// FNV-1a over the row-major f64 bytes and the shape; used to tie fitted models to kernels.
std::uint64_t kernel_hash(const Matrix& k);

}  // namespace wntk::io
