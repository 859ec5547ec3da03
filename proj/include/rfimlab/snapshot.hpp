#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "rfimlab/bootstrap.hpp"
#include "rfimlab/groundstate.hpp"

namespace rfimlab {

// Binary lattice snapshot, little-endian:
//   0  char[8] "RFIMLAB1"     24 u64 seed
//   8  u32 version (1)        32 f64 M
//  12  u32 d                  40 f64 eps
//  16  u32 N                  48 zero padding to 64
//  20  u8 wrap, 21 u8 kind, 22..23 zero
// followed by N^d signed bytes in row-major vertex order.

inline constexpr std::uint32_t kSnapshotVersion = 1;
inline constexpr std::size_t kSnapshotHeaderSize = 64;

enum class SnapshotKind : std::uint8_t { Spin = 0, Site = 1 };

struct Snapshot {
  std::uint32_t d = 2;
  std::uint32_t N = 0;
  bool wrap = true;
  SnapshotKind kind = SnapshotKind::Spin;
  std::uint64_t seed = 0;
  double M = 0.0;
  double eps = 0.0;
  std::vector<std::int8_t> payload;

  bool operator==(const Snapshot&) const = default;
};

class SnapshotError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::vector<std::uint8_t> encode_snapshot(const Snapshot& s);
/// Validates the whole buffer before building anything.
Snapshot decode_snapshot(std::span<const std::uint8_t> bytes);

void write_snapshot(const std::filesystem::path& path, const Snapshot& s);
Snapshot read_snapshot(const std::filesystem::path& path);

Snapshot make_snapshot(const Lattice& lat, const SpinConfig& c, std::uint64_t seed, double M, double eps);
Snapshot make_snapshot(const Lattice& lat, const SiteConfig& c, std::uint64_t seed, double M, double eps);

Lattice snapshot_lattice(const Snapshot& s);
SpinConfig snapshot_spins(const Snapshot& s);
SiteConfig snapshot_sites(const Snapshot& s);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes, std::uint64_t h = 0xcbf29ce484222325ULL) noexcept;
std::uint64_t fnv1a64(std::string_view text) noexcept;

/// Hash of a configuration payload, for cross-engine consistency checks.
std::uint64_t payload_hash(const Snapshot& s) noexcept;

}  // namespace rfimlab
