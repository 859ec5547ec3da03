#include "rfimlab/snapshot.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace rfimlab {

namespace {

constexpr char kMagic[8] = {'R', 'F', 'I', 'M', 'L', 'A', 'B', '1'};

template <class T>
void put(std::vector<std::uint8_t>& buf, std::size_t at, T value) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint8_t>>;
  const U bits = std::bit_cast<U>(value);
  for (std::size_t i = 0; i < sizeof(T); ++i) buf[at + i] = static_cast<std::uint8_t>(bits >> (8 * i));
}

template <class T>
T get(std::span<const std::uint8_t> buf, std::size_t at) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint8_t>>;
  U bits = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) bits |= static_cast<U>(static_cast<U>(buf[at + i]) << (8 * i));
  return std::bit_cast<T>(bits);
}

std::size_t vertex_count(std::uint32_t d, std::uint32_t N) {
  std::size_t n = 1;
  for (std::uint32_t k = 0; k < d; ++k) {
    if (n > (std::size_t{1} << 40) / std::max<std::uint32_t>(N, 1)) throw SnapshotError("snapshot lattice too large");
    n *= N;
  }
  return n;
}

void check_payload(const Snapshot& s) {
  if (s.d < 1 || s.N < 1) throw SnapshotError("snapshot has empty geometry");
  if (s.payload.size() != vertex_count(s.d, s.N)) throw SnapshotError("payload size does not match geometry");
  if (s.kind == SnapshotKind::Spin) {
    for (auto b : s.payload)
      if (b != 1 && b != -1) throw SnapshotError("spin payload holds a value other than +1/-1");
  } else if (s.kind == SnapshotKind::Site) {
    try {
      (void)SiteConfig::decode(s.payload);
    } catch (const std::invalid_argument& e) {
      throw SnapshotError(e.what());
    }
  } else {
    throw SnapshotError("unknown payload kind");
  }
}

}  // namespace

std::vector<std::uint8_t> encode_snapshot(const Snapshot& s) {
  check_payload(s);
  std::vector<std::uint8_t> buf(kSnapshotHeaderSize + s.payload.size(), 0);
  std::memcpy(buf.data(), kMagic, sizeof kMagic);
  put<std::uint32_t>(buf, 8, kSnapshotVersion);
  put<std::uint32_t>(buf, 12, s.d);
  put<std::uint32_t>(buf, 16, s.N);
  buf[20] = s.wrap ? 1 : 0;
  buf[21] = static_cast<std::uint8_t>(s.kind);
  put<std::uint64_t>(buf, 24, s.seed);
  put<double>(buf, 32, s.M);
  put<double>(buf, 40, s.eps);
  for (std::size_t i = 0; i < s.payload.size(); ++i) buf[kSnapshotHeaderSize + i] = static_cast<std::uint8_t>(s.payload[i]);
  return buf;
}

Snapshot decode_snapshot(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kSnapshotHeaderSize) throw SnapshotError("truncated snapshot header");
  if (std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) throw SnapshotError("bad snapshot magic");
  const auto version = get<std::uint32_t>(bytes, 8);
  if (version != kSnapshotVersion) throw SnapshotError("unsupported snapshot version " + std::to_string(version));
  Snapshot s;
  s.d = get<std::uint32_t>(bytes, 12);
  s.N = get<std::uint32_t>(bytes, 16);
  if (bytes[20] > 1) throw SnapshotError("bad wrap flag");
  s.wrap = bytes[20] == 1;
  if (bytes[21] > 1) throw SnapshotError("unknown payload kind");
  s.kind = static_cast<SnapshotKind>(bytes[21]);
  s.seed = get<std::uint64_t>(bytes, 24);
  s.M = get<double>(bytes, 32);
  s.eps = get<double>(bytes, 40);
  const std::size_t n = vertex_count(s.d, s.N);
  if (bytes.size() < kSnapshotHeaderSize + n) throw SnapshotError("truncated snapshot payload");
  if (bytes.size() > kSnapshotHeaderSize + n) throw SnapshotError("trailing bytes after snapshot payload");
  s.payload.resize(n);
  for (std::size_t i = 0; i < n; ++i) s.payload[i] = static_cast<std::int8_t>(bytes[kSnapshotHeaderSize + i]);
  check_payload(s);
  return s;
}

void write_snapshot(const std::filesystem::path& path, const Snapshot& s) {
  const auto buf = encode_snapshot(s);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw SnapshotError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!out) throw SnapshotError("write failed: " + path.string());
}

Snapshot read_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SnapshotError("cannot open " + path.string());
  const std::vector<std::uint8_t> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_snapshot(buf);
}

namespace {

Snapshot header_for(const Lattice& lat, SnapshotKind kind, std::uint64_t seed, double M, double eps) {
  if (!lat.cubic()) throw SnapshotError("snapshots store cubic lattices only");
  Snapshot s;
  s.d = static_cast<std::uint32_t>(lat.dim());
  s.N = static_cast<std::uint32_t>(lat.side());
  s.wrap = lat.wrap();
  s.kind = kind;
  s.seed = seed;
  s.M = M;
  s.eps = eps;
  return s;
}

}  // namespace

Snapshot make_snapshot(const Lattice& lat, const SpinConfig& c, std::uint64_t seed, double M, double eps) {
  if (c.size() != lat.size()) throw std::invalid_argument("configuration does not match lattice");
  Snapshot s = header_for(lat, SnapshotKind::Spin, seed, M, eps);
  s.payload = c.spins();
  return s;
}

Snapshot make_snapshot(const Lattice& lat, const SiteConfig& c, std::uint64_t seed, double M, double eps) {
  if (c.size() != lat.size()) throw std::invalid_argument("configuration does not match lattice");
  Snapshot s = header_for(lat, SnapshotKind::Site, seed, M, eps);
  s.payload.resize(c.size());
  for (std::size_t v = 0; v < c.size(); ++v) s.payload[v] = c.encode(static_cast<Vertex>(v));
  return s;
}

Lattice snapshot_lattice(const Snapshot& s) {
  return Lattice(static_cast<int>(s.d), static_cast<int>(s.N), s.wrap);
}

SpinConfig snapshot_spins(const Snapshot& s) {
  if (s.kind != SnapshotKind::Spin) throw SnapshotError("snapshot does not hold spins");
  return SpinConfig(s.payload);
}

SiteConfig snapshot_sites(const Snapshot& s) {
  if (s.kind != SnapshotKind::Site) throw SnapshotError("snapshot does not hold sites");
  return SiteConfig::decode(s.payload);
}

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes, std::uint64_t h) noexcept {
  for (auto b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t fnv1a64(std::string_view text) noexcept {
  return fnv1a64(std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::uint64_t payload_hash(const Snapshot& s) noexcept {
  return fnv1a64(std::span(reinterpret_cast<const std::uint8_t*>(s.payload.data()), s.payload.size()));
}

}  // namespace rfimlab
