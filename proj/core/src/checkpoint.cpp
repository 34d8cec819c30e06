#include "mvid/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace mvid {

namespace {

constexpr char kMagic[4] = {'S', 'M', 'L', 'W'};

class Writer {
 public:
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) bytes.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void raw(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    bytes.insert(bytes.end(), b, b + n);
  }
  std::vector<std::uint8_t> bytes;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> b) : bytes_(b) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t(bytes_[pos_++]) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t(bytes_[pos_++]) << (8 * i);
    return v;
  }
  std::span<const std::uint8_t> take(std::size_t n) {
    need(n);
    auto s = bytes_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t remaining() const noexcept { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) fail(ErrorCode::kCorruptDirectory, "checkpoint is truncated");
  }
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> serialize_checkpoint(const SmlWeights& weights) {
  const SmlConfig& c = weights.config;
  Writer w;
  w.raw(kMagic, 4);
  w.u32(kCheckpointVersion);
  w.u32(c.extra.bits());
  for (int width : c.stage_widths) w.u32(static_cast<std::uint32_t>(width));
  w.u32(c.regress_shift ? 1u : 0u);
  w.u32(static_cast<std::uint32_t>(c.input_resolution));
  w.u32(static_cast<std::uint32_t>(weights.layout.size()));
  for (const auto& t : weights.layout) {
    w.u32(static_cast<std::uint32_t>(t.name.size()));
    w.raw(t.name.data(), t.name.size());
    w.u32(static_cast<std::uint32_t>(t.dims.size()));
    for (int d : t.dims) w.u32(static_cast<std::uint32_t>(d));
    w.u64(static_cast<std::uint64_t>(t.offset) * sizeof(float));
  }
  w.u64(static_cast<std::uint64_t>(weights.values.size()) * sizeof(float));
  for (float f : weights.values) w.u32(std::bit_cast<std::uint32_t>(f));
  return std::move(w.bytes);
}

SmlWeights deserialize_checkpoint(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    fail(ErrorCode::kBadMagic, "not an SML checkpoint");
  }
  Reader r(bytes.subspan(4));
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) {
    fail(ErrorCode::kVersionMismatch, "checkpoint version " + std::to_string(version) +
                                          ", expected " + std::to_string(kCheckpointVersion));
  }

  SmlConfig config;
  config.extra = InputChannels::from_bits(r.u32());
  for (int& width : config.stage_widths) width = static_cast<int>(r.u32());
  config.regress_shift = r.u32() != 0;
  config.input_resolution = static_cast<int>(r.u32());
  for (int width : config.stage_widths) {
    if (width > 4096) fail(ErrorCode::kCorruptDirectory, "implausible stage width");
  }
  try {
    config.validate();
  } catch (const Error& e) {
    fail(ErrorCode::kCorruptDirectory, std::string("stored config is invalid: ") + e.what());
  }

  const std::vector<TensorSpec> expected = parameter_layout(config);
  const std::uint32_t count = r.u32();
  if (count != expected.size()) {
    fail(ErrorCode::kCorruptDirectory, "tensor count does not match the stored config");
  }
  std::uint64_t next_offset = 0;
  for (const auto& spec : expected) {
    const std::uint32_t name_len = r.u32();
    if (name_len > 4096) fail(ErrorCode::kCorruptDirectory, "implausible tensor name length");
    const auto name_bytes = r.take(name_len);
    const std::string name(name_bytes.begin(), name_bytes.end());
    const std::uint32_t rank = r.u32();
    if (rank > 8) fail(ErrorCode::kCorruptDirectory, "implausible tensor rank");
    std::vector<int> dims(rank);
    for (auto& d : dims) d = static_cast<int>(r.u32());
    const std::uint64_t offset = r.u64();
    if (name != spec.name || dims != spec.dims) {
      fail(ErrorCode::kCorruptDirectory, "directory entry '" + name + "' does not match '" +
                                             spec.name + "'");
    }
    if (offset != next_offset) {
      fail(ErrorCode::kCorruptDirectory, "tensor '" + name + "' has an overlapping or gapped offset");
    }
    next_offset += spec.count() * sizeof(float);
  }
  const std::uint64_t payload = r.u64();
  if (payload != next_offset) {
    fail(ErrorCode::kCorruptDirectory, "payload size disagrees with the directory");
  }
  if (r.remaining() != payload) {
    fail(ErrorCode::kCorruptDirectory, r.remaining() < payload ? "checkpoint is truncated"
                                                               : "trailing bytes after payload");
  }

  SmlWeights w;
  w.config = config;
  w.layout = expected;
  w.values.resize(payload / sizeof(float));
  for (auto& f : w.values) f = std::bit_cast<float>(r.u32());
  return w;
}

void write_checkpoint(const SmlWeights& weights, const std::filesystem::path& path) {
  const auto bytes = serialize_checkpoint(weights);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIoFailure, "cannot create '" + path.string() + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) fail(ErrorCode::kIoFailure, "failed writing '" + path.string() + "'");
}

SmlWeights read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIoFailure, "cannot open '" + path.string() + "'");
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                        std::istreambuf_iterator<char>());
  return deserialize_checkpoint(bytes);
}

}  // namespace mvid
