#include <array>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "scfn/network.hpp"

namespace scfn {

namespace {

// Parameter roles, in parameters() order.
constexpr std::array<uint8_t, 10> kKinds = {1, 2, 1, 2, 1, 2, 3, 4, 3, 4};
constexpr char kMagic[4] = {'S', 'C', 'F', 'N'};
constexpr uint32_t kVersion = 1;

uint32_t crc32_update(uint32_t crc, const uint8_t* data, size_t len) {
  static const auto table = [] {
    std::array<uint32_t, 256> t{};
    for (uint32_t i = 0; i < 256; ++i) {
      uint32_t c = i;
      for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
      t[i] = c;
    }
    return t;
  }();
  for (size_t i = 0; i < len; ++i) crc = table[(crc ^ data[i]) & 0xFFu] ^ (crc >> 8);
  return crc;
}

void put_u32(std::string& out, uint32_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>((v >> 8) & 0xFF));
  out.push_back(static_cast<char>((v >> 16) & 0xFF));
  out.push_back(static_cast<char>((v >> 24) & 0xFF));
}

class Reader {
 public:
  explicit Reader(std::string bytes) : bytes_(std::move(bytes)) {}

  uint8_t u8() {
    need(1);
    return static_cast<uint8_t>(bytes_[pos_++]);
  }

  uint32_t u32() {
    need(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
      v |= static_cast<uint32_t>(static_cast<uint8_t>(bytes_[pos_ + i])) << (8 * i);
    pos_ += 4;
    return v;
  }

  const uint8_t* raw(size_t len) {
    need(len);
    const uint8_t* p = reinterpret_cast<const uint8_t*>(bytes_.data()) + pos_;
    pos_ += len;
    return p;
  }

  size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void need(size_t len) const {
    if (bytes_.size() - pos_ < len) throw ModelFormatError("model file is truncated");
  }

  std::string bytes_;
  size_t pos_ = 0;
};

}  // namespace

void save_network(const Network<float>& net, const std::string& path) {
  auto params = net.parameters();
  std::string out;
  out.append(kMagic, 4);
  put_u32(out, kVersion);
  put_u32(out, static_cast<uint32_t>(params.size()));

  uint32_t crc = 0xFFFFFFFFu;
  for (size_t r = 0; r < params.size(); ++r) {
    const Tensor<float>& t = *params[r];
    out.push_back(static_cast<char>(kKinds[r]));
    out.push_back(static_cast<char>(t.rank()));
    for (int d = 0; d < t.rank(); ++d) put_u32(out, static_cast<uint32_t>(t.extent(d)));
    for (size_t i = 0; i < t.size(); ++i) {
      uint32_t bits;
      float v = t.data()[i];
      std::memcpy(&bits, &v, 4);
      size_t at = out.size();
      put_u32(out, bits);
      crc = crc32_update(crc, reinterpret_cast<const uint8_t*>(out.data()) + at, 4);
    }
  }
  put_u32(out, crc ^ 0xFFFFFFFFu);

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw std::runtime_error("write failed: " + path);
}

Network<float> load_network(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ModelFormatError("cannot open: " + path);
  std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  Reader in(std::move(bytes));

  char magic[4];
  std::memcpy(magic, in.raw(4), 4);
  if (std::memcmp(magic, kMagic, 4) != 0)
    throw ModelFormatError("not a model file (bad magic)");
  uint32_t version = in.u32();
  if (version != kVersion)
    throw ModelFormatError("unsupported model version " + std::to_string(version));

  Network<float> net = Network<float>::init(RngStream::root(0), {});
  auto params = net.parameters();

  uint32_t count = in.u32();
  if (count != params.size())
    throw ModelShapeError("expected " + std::to_string(params.size()) + " records, found " +
                          std::to_string(count));

  uint32_t crc = 0xFFFFFFFFu;
  for (size_t r = 0; r < params.size(); ++r) {
    Tensor<float>& t = *params[r];
    uint8_t kind = in.u8();
    if (kind != kKinds[r])
      throw ModelShapeError("record " + std::to_string(r) + ": unexpected kind " +
                            std::to_string(kind));
    uint8_t rank = in.u8();
    if (rank != t.rank())
      throw ModelShapeError("record " + std::to_string(r) + ": rank " + std::to_string(rank) +
                            " does not match this network");
    for (int d = 0; d < t.rank(); ++d) {
      uint32_t e = in.u32();
      if (e != static_cast<uint32_t>(t.extent(d)))
        throw ModelShapeError("record " + std::to_string(r) + ": extent " + std::to_string(e) +
                              " at axis " + std::to_string(d) + " does not match this network");
    }
    for (size_t i = 0; i < t.size(); ++i) {
      const uint8_t* p = in.raw(4);
      crc = crc32_update(crc, p, 4);
      uint32_t bits = static_cast<uint32_t>(p[0]) | static_cast<uint32_t>(p[1]) << 8 |
                      static_cast<uint32_t>(p[2]) << 16 | static_cast<uint32_t>(p[3]) << 24;
      float v;
      std::memcpy(&v, &bits, 4);
      t.data()[i] = v;
    }
  }

  uint32_t stored = in.u32();
  if (stored != (crc ^ 0xFFFFFFFFu)) throw ModelFormatError("checksum mismatch");
  if (in.remaining() != 0) throw ModelFormatError("trailing data after checksum");
  return net;
}

}  // namespace scfn
