#include "rfimlab/lattice.hpp"

#include <algorithm>
#include <limits>
#include <string>

namespace rfimlab {

Lattice::Lattice(int dim, int side, bool wrap) : dim_(dim), wrap_(wrap) {
  if (dim < 1) throw std::invalid_argument("lattice dimension must be >= 1");
  if (wrap && side < 3) throw std::invalid_argument("torus side must be >= 3");
  if (side < 1) throw std::invalid_argument("lattice side must be >= 1");
  extents_.assign(static_cast<std::size_t>(dim), side);
  build();
}

Lattice::Lattice(std::vector<int> extents, bool wrap)
    : dim_(static_cast<int>(extents.size())), wrap_(wrap), extents_(std::move(extents)) {
  if (dim_ < 1) throw std::invalid_argument("lattice dimension must be >= 1");
  for (int e : extents_)
    if (e < 1) throw std::invalid_argument("box extents must be >= 1");
  build();
}

Lattice Lattice::box(std::vector<int> extents) { return Lattice(std::move(extents), false); }

void Lattice::build() {
  strides_.assign(static_cast<std::size_t>(dim_), 1);
  std::size_t n = 1;
  for (int k = dim_ - 1; k >= 0; --k) {
    strides_[k] = n;
    n *= static_cast<std::size_t>(extents_[k]);
    if (n >= static_cast<std::size_t>(std::numeric_limits<Vertex>::max()))
      throw std::invalid_argument("lattice too large for 32-bit vertex indices");
  }
  size_ = n;
  nbr_.assign(size_ * static_cast<std::size_t>(slots()), kNoVertex);
  for (std::size_t v = 0; v < size_; ++v) {
    for (int k = 0; k < dim_; ++k) {
      const int x = coord_at(static_cast<Vertex>(v), k);
      const int e = extents_[k];
      const auto s = strides_[k];
      Vertex* slot = &nbr_[v * slots() + 2 * k];
      if (x + 1 < e)
        slot[0] = static_cast<Vertex>(v + s);
      else if (wrap_)
        slot[0] = static_cast<Vertex>(v - static_cast<std::size_t>(e - 1) * s);
      if (x > 0)
        slot[1] = static_cast<Vertex>(v - s);
      else if (wrap_)
        slot[1] = static_cast<Vertex>(v + static_cast<std::size_t>(e - 1) * s);
    }
  }
}

int Lattice::side() const {
  if (!cubic()) throw std::logic_error("lattice is not cubic");
  return extents_[0];
}

bool Lattice::cubic() const noexcept {
  return std::all_of(extents_.begin(), extents_.end(), [&](int e) { return e == extents_[0]; });
}

bool Lattice::contains(std::span<const int> c) const noexcept {
  if (static_cast<int>(c.size()) != dim_) return false;
  for (int k = 0; k < dim_; ++k)
    if (c[k] < 0 || c[k] >= extents_[k]) return false;
  return true;
}

Vertex Lattice::index(std::span<const int> c) const {
  if (!contains(c)) throw std::out_of_range("coordinate outside lattice");
  std::size_t v = 0;
  for (int k = 0; k < dim_; ++k) v += static_cast<std::size_t>(c[k]) * strides_[k];
  return static_cast<Vertex>(v);
}

Coord Lattice::coord(Vertex v) const {
  Coord c(static_cast<std::size_t>(dim_));
  for (int k = 0; k < dim_; ++k) c[k] = coord_at(v, k);
  return c;
}

std::vector<Coord> Lattice::neighbors(std::span<const int> c) const {
  const Vertex v = index(c);
  std::vector<Coord> out;
  for (Vertex w : neighbor_slots(v))
    if (w != kNoVertex) out.push_back(coord(w));
  return out;
}

int Lattice::degree(Vertex v) const noexcept {
  int d = 0;
  for (Vertex w : neighbor_slots(v)) d += (w != kNoVertex);
  return d;
}

std::size_t Lattice::edge_count() const noexcept {
  std::size_t twice = 0;
  for (std::size_t v = 0; v < size_; ++v) twice += static_cast<std::size_t>(degree(static_cast<Vertex>(v)));
  return twice / 2;
}

int Lattice::axis_distance(int a, int b, int axis) const noexcept {
  int delta = a > b ? a - b : b - a;
  if (wrap_) delta = std::min(delta, extents_[axis] - delta);
  return delta;
}

int Lattice::distance(Vertex a, Vertex b) const noexcept {
  int best = 0;
  for (int k = 0; k < dim_; ++k) best = std::max(best, axis_distance(coord_at(a, k), coord_at(b, k), k));
  return best;
}

std::vector<Vertex> Lattice::box_vertices(const Box& b) const {
  if (static_cast<int>(b.center.size()) != dim_) throw std::invalid_argument("box center has wrong dimension");
  if (b.radius < 0) throw std::invalid_argument("box radius must be >= 0");
  if (!contains(b.center)) throw std::out_of_range("box center outside lattice");
  // Per-axis list of admissible coordinates.
  std::vector<std::vector<int>> axis(static_cast<std::size_t>(dim_));
  for (int k = 0; k < dim_; ++k) {
    const int e = extents_[k];
    if (wrap_ && 2 * b.radius + 1 >= e) {
      for (int x = 0; x < e; ++x) axis[k].push_back(x);
      continue;
    }
    for (int off = -b.radius; off <= b.radius; ++off) {
      int x = b.center[k] + off;
      if (wrap_) {
        x = ((x % e) + e) % e;
      } else if (x < 0 || x >= e) {
        continue;
      }
      axis[k].push_back(x);
    }
  }
  std::vector<Vertex> out;
  std::vector<std::size_t> pos(static_cast<std::size_t>(dim_), 0);
  for (int k = 0; k < dim_; ++k)
    if (axis[k].empty()) return out;
  while (true) {
    std::size_t v = 0;
    for (int k = 0; k < dim_; ++k) v += static_cast<std::size_t>(axis[k][pos[k]]) * strides_[k];
    out.push_back(static_cast<Vertex>(v));
    int k = dim_ - 1;
    while (k >= 0 && ++pos[k] == axis[k].size()) pos[k--] = 0;
    if (k < 0) break;
  }
  return out;
}

VertexSet::VertexSet(std::size_t universe, std::span<const Vertex> members) : bits_(universe, 0) {
  for (Vertex v : members) {
    if (v >= universe) throw std::out_of_range("vertex outside set universe");
    insert(v);
  }
}

std::vector<Vertex> VertexSet::members() const {
  std::vector<Vertex> out;
  out.reserve(count_);
  for (std::size_t v = 0; v < bits_.size(); ++v)
    if (bits_[v]) out.push_back(static_cast<Vertex>(v));
  return out;
}

VertexSet VertexSet::complement() const {
  VertexSet c(bits_.size());
  for (std::size_t v = 0; v < bits_.size(); ++v)
    if (!bits_[v]) c.insert(static_cast<Vertex>(v));
  return c;
}

std::vector<Vertex> inner_boundary(const Lattice& lat, const VertexSet& a) {
  std::vector<Vertex> out;
  for (Vertex v : a.members()) {
    for (Vertex w : lat.neighbor_slots(v)) {
      if (w != kNoVertex && !a.contains(w)) {
        out.push_back(v);
        break;
      }
    }
  }
  return out;
}

std::vector<Vertex> outer_boundary(const Lattice& lat, const VertexSet& a) {
  return inner_boundary(lat, a.complement());
}

std::size_t edge_boundary(const Lattice& lat, const VertexSet& a) {
  if (a.universe() != lat.size()) throw std::invalid_argument("vertex set does not match lattice");
  if (a.empty() || a.size() == lat.size()) throw std::invalid_argument("edge boundary needs a proper nonempty subset");
  std::size_t count = 0;
  for (Vertex v : a.members())
    for (Vertex w : lat.neighbor_slots(v))
      if (w != kNoVertex && !a.contains(w)) ++count;
  return count;
}

std::vector<std::vector<Vertex>> connected_components(const Lattice& lat, const VertexSet& a) {
  std::vector<std::vector<Vertex>> comps;
  std::vector<std::uint8_t> seen(lat.size(), 0);
  std::vector<Vertex> stack;
  for (Vertex s : a.members()) {
    if (seen[s]) continue;
    comps.emplace_back();
    auto& comp = comps.back();
    seen[s] = 1;
    stack.push_back(s);
    while (!stack.empty()) {
      const Vertex v = stack.back();
      stack.pop_back();
      comp.push_back(v);
      for (Vertex w : lat.neighbor_slots(v)) {
        if (w != kNoVertex && a.contains(w) && !seen[w]) {
          seen[w] = 1;
          stack.push_back(w);
        }
      }
    }
  }
  return comps;
}

bool is_connected(const Lattice& lat, const VertexSet& a) {
  return !a.empty() && connected_components(lat, a).size() == 1;
}

namespace {

// Largest cyclic distance between two occupied positions on a cycle of length n.
int max_cyclic_distance(const std::vector<int>& occ, int n) {
  int best = 0;
  for (std::size_t i = 0; i < occ.size(); ++i) {
    for (std::size_t j = i + 1; j < occ.size(); ++j) {
      const int delta = occ[j] - occ[i];
      best = std::max(best, std::min(delta, n - delta));
      if (best == n / 2) return best;
    }
  }
  return best;
}

}  // namespace

int linf_diameter(const Lattice& lat, std::span<const Vertex> vs) {
  if (vs.size() < 2) return 0;
  int best = 0;
  for (int k = 0; k < lat.dim(); ++k) {
    const int e = lat.extents()[k];
    if (!lat.wrap()) {
      int lo = e, hi = -1;
      for (Vertex v : vs) {
        const int x = lat.coord_at(v, k);
        lo = std::min(lo, x);
        hi = std::max(hi, x);
      }
      best = std::max(best, hi - lo);
      continue;
    }
    std::vector<std::uint8_t> mark(static_cast<std::size_t>(e), 0);
    for (Vertex v : vs) mark[lat.coord_at(v, k)] = 1;
    std::vector<int> occ;
    for (int x = 0; x < e; ++x)
      if (mark[x]) occ.push_back(x);
    best = std::max(best, max_cyclic_distance(occ, e));
  }
  return best;
}

int cluster_diameter(const Lattice& lat, const VertexSet& a) {
  if (a.universe() != lat.size()) throw std::invalid_argument("vertex set does not match lattice");
  if (a.empty()) throw std::invalid_argument("cluster diameter of an empty set");
  if (!is_connected(lat, a)) throw std::invalid_argument("cluster diameter of a disconnected set");
  const auto m = a.members();
  return linf_diameter(lat, m);
}

}  // namespace rfimlab
