#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace rfimlab {

using Vertex = std::uint32_t;
inline constexpr Vertex kNoVertex = ~Vertex{0};

using Coord = std::vector<int>;

/// |.|_inf ball B(center, radius), clipped to the lattice (wrapped on a torus).
struct Box {
  Coord center;
  int radius = 0;
};

/// Hypercubic torus T_N^d, or an open rectangular box of Z^d.
///
/// Vertices are stored row-major (axis 0 slowest). Each vertex owns 2d
/// neighbor slots ordered (+e_0, -e_0, +e_1, -e_1, ...); on an open box the
/// slots that leave the box hold kNoVertex.
class Lattice {
 public:
  Lattice(int dim, int side, bool wrap);

  /// Open box with per-axis extents (extent >= 1).
  static Lattice box(std::vector<int> extents);

  int dim() const noexcept { return dim_; }
  /// Side length of a cubic lattice; throws for non-cubic boxes.
  int side() const;
  const std::vector<int>& extents() const noexcept { return extents_; }
  bool wrap() const noexcept { return wrap_; }
  bool cubic() const noexcept;
  std::size_t size() const noexcept { return size_; }
  int slots() const noexcept { return 2 * dim_; }

  bool contains(std::span<const int> c) const noexcept;
  Vertex index(std::span<const int> c) const;
  Coord coord(Vertex v) const;
  int coord_at(Vertex v, int axis) const noexcept {
    return static_cast<int>((v / strides_[axis]) % static_cast<std::size_t>(extents_[axis]));
  }

  std::span<const Vertex> neighbor_slots(Vertex v) const noexcept {
    return {nbr_.data() + static_cast<std::size_t>(v) * slots(), static_cast<std::size_t>(slots())};
  }
  std::vector<Coord> neighbors(std::span<const int> c) const;
  int degree(Vertex v) const noexcept;
  std::size_t edge_count() const noexcept;

  /// |.|_inf distance; per-axis min(delta, N - delta) on a torus.
  int distance(Vertex a, Vertex b) const noexcept;
  int axis_distance(int a, int b, int axis) const noexcept;

  /// Vertices of B(center, radius) in row-major order of the box offsets,
  /// without duplicates when the box wraps onto itself.
  std::vector<Vertex> box_vertices(const Box& b) const;

  bool operator==(const Lattice& o) const noexcept {
    return dim_ == o.dim_ && wrap_ == o.wrap_ && extents_ == o.extents_;
  }

 private:
  Lattice(std::vector<int> extents, bool wrap);
  void build();

  int dim_;
  bool wrap_;
  std::vector<int> extents_;
  std::vector<std::size_t> strides_;
  std::size_t size_ = 0;
  std::vector<Vertex> nbr_;
};

/// Membership bitmap over the vertices of a lattice.
class VertexSet {
 public:
  VertexSet() = default;
  explicit VertexSet(std::size_t universe) : bits_(universe, 0) {}
  VertexSet(std::size_t universe, std::span<const Vertex> members);

  std::size_t universe() const noexcept { return bits_.size(); }
  std::size_t size() const noexcept { return count_; }
  bool empty() const noexcept { return count_ == 0; }
  bool contains(Vertex v) const noexcept { return bits_[v] != 0; }
  void insert(Vertex v) noexcept {
    if (!bits_[v]) { bits_[v] = 1; ++count_; }
  }
  void erase(Vertex v) noexcept {
    if (bits_[v]) { bits_[v] = 0; --count_; }
  }
  std::vector<Vertex> members() const;
  VertexSet complement() const;

  bool operator==(const VertexSet& o) const noexcept { return bits_ == o.bits_; }

 private:
  std::vector<std::uint8_t> bits_;
  std::size_t count_ = 0;
};

std::vector<Vertex> inner_boundary(const Lattice& lat, const VertexSet& a);
std::vector<Vertex> outer_boundary(const Lattice& lat, const VertexSet& a);

/// |d_e A|: edges with one endpoint in A and the other outside.
/// Throws std::invalid_argument for an empty or full set.
std::size_t edge_boundary(const Lattice& lat, const VertexSet& a);

bool is_connected(const Lattice& lat, const VertexSet& a);
std::vector<std::vector<Vertex>> connected_components(const Lattice& lat, const VertexSet& a);

/// |.|_inf diameter of an arbitrary vertex list (0 for a singleton or empty list).
int linf_diameter(const Lattice& lat, std::span<const Vertex> vs);

/// Diameter of a connected nonempty set; throws std::invalid_argument otherwise.
int cluster_diameter(const Lattice& lat, const VertexSet& a);

}  // namespace rfimlab
