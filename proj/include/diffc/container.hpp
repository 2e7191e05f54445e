#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "diffc/tensor.hpp"

namespace diffc {

// DFC1 tensor record, all integers little-endian:
//
//   offset  size      field
//   0       4         magic "DFC1"
//   4       1         version (1)
//   5       1         dtype code (1 = float32 little-endian)
//   6       4         rank r (uint32)
//   10      8·r       dims (uint64 each)
//   10+8r   4·Π dims  payload, row-major
//
// A file is one or more records back to back.

inline constexpr std::uint8_t kContainerVersion = 1;
inline constexpr std::uint8_t kDtypeF32 = 1;

std::vector<std::uint8_t> encode_tensor(const Tensor& t);
void append_tensor(std::vector<std::uint8_t>& out, const Tensor& t);
/// Decode every record in `bytes`.
std::vector<Tensor> decode_tensors(const std::vector<std::uint8_t>& bytes);

void save_tensors(const std::string& path, const std::vector<Tensor>& tensors);
std::vector<Tensor> load_tensors(const std::string& path);

void save_tensor(const std::string& path, const Tensor& t);
/// Loads a file holding exactly one record.
Tensor load_tensor(const std::string& path);

std::vector<std::uint8_t> read_file(const std::string& path);
void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes);
void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

}  // namespace diffc
