#include "namer/tensor_io.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "namer/error.hpp"

namespace namer {

namespace {

constexpr std::byte kMagic[4] = {std::byte{0x4E}, std::byte{0x41}, std::byte{0x4D}, std::byte{0x54}};
constexpr std::uint32_t kMaxRank = 8;

void put_u32(std::vector<std::byte>& out, std::uint32_t v) {
  for (int shift = 0; shift < 32; shift += 8) out.push_back(static_cast<std::byte>((v >> shift) & 0xFFU));
}

class Reader {
 public:
  explicit Reader(std::span<const std::byte> bytes) : bytes_(bytes) {}

  std::uint32_t u32(const char* what) {
    if (remaining() < 4) throw Error(Errc::TruncatedPayload, std::string("header ends before ") + what);
    std::uint32_t v = 0;
    for (int k = 0; k < 4; ++k) v |= static_cast<std::uint32_t>(bytes_[pos_ + k]) << (8 * k);
    pos_ += 4;
    return v;
  }
  std::span<const std::byte> take(std::size_t n) {
    auto s = bytes_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  std::span<const std::byte> bytes_;
  std::size_t pos_ = 0;
};

void check_rank(const Tensor& t, std::size_t rank, const char* kind) {
  if (t.dims.size() != rank) {
    throw Error(Errc::ShapeMismatch, std::string(kind) + " needs " + std::to_string(rank) +
                                         " dims, got " + std::to_string(t.dims.size()));
  }
}

}  // namespace

namespace detail {

std::vector<std::byte> words_to_le(std::span<const std::byte> host_image, std::endian host) {
  std::vector<std::byte> out(host_image.begin(), host_image.end());
  if (host == std::endian::big) {
    for (std::size_t i = 0; i + 4 <= out.size(); i += 4) {
      std::swap(out[i], out[i + 3]);
      std::swap(out[i + 1], out[i + 2]);
    }
  }
  return out;
}

std::vector<std::byte> words_from_le(std::span<const std::byte> file_bytes, std::endian host) {
  // Swapping is its own inverse.
  return words_to_le(file_bytes, host);
}

std::vector<std::byte> encode_image(const HostImage& image, std::endian host) {
  std::vector<std::byte> out(std::begin(kMagic), std::end(kMagic));
  put_u32(out, kNamtVersion);
  put_u32(out, static_cast<std::uint32_t>(image.dims.size()));
  for (auto d : image.dims) put_u32(out, d);
  put_u32(out, kNamtDtypeF32);
  auto payload = words_to_le(image.payload, host);
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

HostImage decode_image(std::span<const std::byte> bytes, std::endian host) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw Error(Errc::BadMagic, "expected NAMT header");
  }
  Reader in(bytes.subspan(4));
  std::uint32_t version = in.u32("version");
  if (version != kNamtVersion) throw Error(Errc::UnsupportedFormat, "version " + std::to_string(version));
  std::uint32_t ndim = in.u32("ndim");
  if (ndim > kMaxRank) throw Error(Errc::UnsupportedFormat, "rank " + std::to_string(ndim));
  HostImage image;
  std::size_t count = 1;
  for (std::uint32_t i = 0; i < ndim; ++i) {
    std::uint32_t d = in.u32("dims");
    if (d > kNamtMaxDim) throw Error(Errc::DimOverflow, "dim " + std::to_string(i) + " = " + std::to_string(d));
    image.dims.push_back(d);
    count *= d;
    if (count > bytes.size()) count = bytes.size() + 1;  // saturate; payload check below fails
  }
  std::uint32_t dtype = in.u32("dtype");
  if (dtype != kNamtDtypeF32) throw Error(Errc::UnsupportedFormat, "dtype " + std::to_string(dtype));
  if (in.remaining() < count * 4) {
    throw Error(Errc::TruncatedPayload, "need " + std::to_string(count * 4) + " payload bytes, have " +
                                            std::to_string(in.remaining()));
  }
  if (in.remaining() > count * 4) {
    throw Error(Errc::TruncatedPayload, std::to_string(in.remaining() - count * 4) + " trailing bytes");
  }
  image.payload = words_from_le(in.take(count * 4), host);
  return image;
}

}  // namespace detail

std::vector<std::byte> encode_tensor(const Tensor& t) {
  if (t.data.size() != t.element_count()) {
    throw Error(Errc::ShapeMismatch, "payload size does not match dims");
  }
  for (std::size_t i = 0; i < t.dims.size(); ++i) {
    if (t.dims[i] > kNamtMaxDim) throw Error(Errc::DimOverflow, "dim " + std::to_string(i));
  }
  detail::HostImage image{t.dims, {}};
  auto raw = std::as_bytes(std::span(t.data));
  image.payload.assign(raw.begin(), raw.end());
  return detail::encode_image(image, std::endian::native);
}

Tensor decode_tensor(std::span<const std::byte> bytes) {
  auto image = detail::decode_image(bytes, std::endian::native);
  Tensor t;
  t.dims = std::move(image.dims);
  t.data.resize(image.payload.size() / 4);
  std::memcpy(t.data.data(), image.payload.data(), image.payload.size());
  for (std::size_t i = 0; i < t.data.size(); ++i) {
    if (!std::isfinite(t.data[i])) throw Error(Errc::NonFiniteValue, "element " + std::to_string(i));
  }
  return t;
}

Tensor read_tensor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoFailure, "cannot open " + path.string());
  std::vector<char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_tensor(std::as_bytes(std::span(buf)));
}

void write_tensor(const Tensor& t, const std::filesystem::path& path) {
  auto bytes = encode_tensor(t);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::IoFailure, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(Errc::IoFailure, "write failed for " + path.string());
}

Grid as_grid(Tensor t) {
  check_rank(t, 3, "grid");
  Grid g;
  g.channels = t.dims[0];
  g.height = t.dims[1];
  g.width = t.dims[2];
  g.data = std::move(t.data);
  return g;
}

AttentionStack as_attention(Tensor t) {
  check_rank(t, 3, "attention stack");
  AttentionStack a;
  a.steps = t.dims[0];
  a.height = t.dims[1];
  a.width = t.dims[2];
  a.data = std::move(t.data);
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    if (a.data[i] < 0.0F) throw Error(Errc::ShapeMismatch, "negative attention at element " + std::to_string(i));
  }
  return a;
}

ScoreMatrix as_matrix(Tensor t) {
  check_rank(t, 2, "score matrix");
  ScoreMatrix m;
  m.rows = t.dims[0];
  m.cols = t.dims[1];
  m.data = std::move(t.data);
  return m;
}

namespace {
std::uint32_t dim32(std::size_t d) { return static_cast<std::uint32_t>(d); }
}  // namespace

Tensor to_tensor(const Grid& g) { return {{dim32(g.channels), dim32(g.height), dim32(g.width)}, g.data}; }
Tensor to_tensor(const AttentionStack& a) { return {{dim32(a.steps), dim32(a.height), dim32(a.width)}, a.data}; }
Tensor to_tensor(const ScoreMatrix& m) { return {{dim32(m.rows), dim32(m.cols)}, m.data}; }

}  // namespace namer
