#pragma once

#include <bit>
#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "namer/tensor.hpp"

namespace namer {

// NAMT layout, all integers u32 little-endian:
//   "NAMT" | version=1 | ndim | dims[ndim] | dtype=1 (f32) | payload (LE f32)
inline constexpr std::uint32_t kNamtVersion = 1;
inline constexpr std::uint32_t kNamtDtypeF32 = 1;
inline constexpr std::uint32_t kNamtMaxDim = 1U << 20;

std::vector<std::byte> encode_tensor(const Tensor& t);
Tensor decode_tensor(std::span<const std::byte> bytes);

Tensor read_tensor(const std::filesystem::path& path);
void write_tensor(const Tensor& t, const std::filesystem::path& path);

namespace detail {

/// Converts a payload of 4-byte words from a host memory image in `host`
/// byte order to the little-endian file order, and back. The host order is a
/// parameter so a big-endian machine can be simulated on any platform.
std::vector<std::byte> words_to_le(std::span<const std::byte> host_image, std::endian host);
std::vector<std::byte> words_from_le(std::span<const std::byte> file_bytes, std::endian host);

/// A payload as raw host memory together with its dims.
struct HostImage {
  std::vector<std::uint32_t> dims;
  std::vector<std::byte> payload;
};

std::vector<std::byte> encode_image(const HostImage& image, std::endian host);
HostImage decode_image(std::span<const std::byte> bytes, std::endian host);

}  // namespace detail

}  // namespace namer
