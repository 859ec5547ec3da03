#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "rfimlab/lattice.hpp"

namespace rfimlab {

/// Capacities and field units are integers at this resolution (2^32 per unit field).
inline constexpr double kCapacityScale = 4294967296.0;

/// +-1 spin per vertex.
class SpinConfig {
 public:
  SpinConfig() = default;
  explicit SpinConfig(std::vector<std::int8_t> spins);
  static SpinConfig uniform(std::size_t n, int spin);

  std::size_t size() const noexcept { return s_.size(); }
  std::int8_t operator[](Vertex v) const noexcept { return s_[v]; }
  void set(Vertex v, int spin) noexcept { s_[v] = static_cast<std::int8_t>(spin); }
  const std::vector<std::int8_t>& spins() const noexcept { return s_; }

  std::size_t plus_count() const noexcept;
  long long magnetization() const noexcept;
  VertexSet plus_set() const;

  bool operator==(const SpinConfig&) const = default;

 private:
  std::vector<std::int8_t> s_;
};

/// hi >= lo pointwise.
bool dominates(const SpinConfig& hi, const SpinConfig& lo);

enum class BoundaryKind { None, Plus, Minus, Explicit };

/// Spins on the outer boundary of an open box. An explicit boundary stores one
/// spin per (vertex, neighbor slot) whose slot leaves the box; on Z^d each
/// outer-boundary site sits across exactly one such slot.
struct BoundaryCondition {
  BoundaryKind kind = BoundaryKind::None;
  std::vector<std::int8_t> slot_spins;

  static BoundaryCondition none() { return {}; }
  static BoundaryCondition plus() { return {BoundaryKind::Plus, {}}; }
  static BoundaryCondition minus() { return {BoundaryKind::Minus, {}}; }
  static BoundaryCondition explicit_spins(std::vector<std::int8_t> slot_spins) {
    return {BoundaryKind::Explicit, std::move(slot_spins)};
  }
};

/// RFIM Hamiltonian H = -sum_{u~v} s_u s_v - sum_v (M + eps h_v) s_v, plus
/// -sum s_v xi_w over boundary edges when the domain is a box with boundary xi.
struct EnergyModel {
  Lattice lattice;
  std::vector<double> h;
  double eps = 0.0;
  double M = 0.0;
  BoundaryCondition boundary;

  EnergyModel(Lattice lat, std::vector<double> field, double eps_, double M_,
              BoundaryCondition bc = BoundaryCondition::none());

  /// Per-vertex sum of boundary spins across the vertex's outside slots.
  std::vector<double> boundary_field() const;
  EnergyModel with_M(double m) const;
  EnergyModel with_field(std::vector<double> field) const;
};

class ScaleOverflow : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

double hamiltonian(const EnergyModel& model, const SpinConfig& config);

/// Energy change from flipping v: 2 s_v (sum_{u~v} s_u + M + eps h_v + boundary).
double flip_delta(const EnergyModel& model, const SpinConfig& config, Vertex v);

/// Field M + eps h_v + boundary, in integer units of 1/kCapacityScale.
/// Throws ScaleOverflow if any cut capacity could overflow 64 bits.
std::vector<std::int64_t> field_units(const EnergyModel& model);

/// Exact minimizer with the maximal-plus tie-break, via s-t min cut.
SpinConfig ground_state(const EnergyModel& model);

/// Maximal minimizer among configurations with lower <= s <= upper.
SpinConfig ground_state_clamped(const EnergyModel& model, const SpinConfig& lower, const SpinConfig& upper);

/// Same contract by exhaustive enumeration; at most 24 vertices.
SpinConfig brute_force_ground_state(const EnergyModel& model);

double ground_energy(const EnergyModel& model);

/// Disorder with the sign of h flipped on A.
struct FlippedDisorder {
  const std::vector<double>* base;
  VertexSet flipped;

  std::vector<double> values() const;
};

/// Ground energy under the flipped disorder minus the ground energy under h.
double flipped_energy_gap(const EnergyModel& model, const VertexSet& a);

/// True if s is -1 on the inner boundary of A and +1 on its outer boundary, or the reverse.
bool has_interface_on(const Lattice& lat, const SpinConfig& config, const VertexSet& a);

/// Maximal connected sets of equal spin.
std::vector<std::vector<Vertex>> spin_clusters(const Lattice& lat, const SpinConfig& config);

/// A spin cluster whose removal leaves only components of |.|_inf diameter
/// at most `threshold`; empty if none exists.
std::optional<VertexSet> global_spin_cluster(const Lattice& lat, const SpinConfig& config, int threshold);

/// Open-box model on B(center, radius) of a larger model, with the base field
/// restricted to the window and the given boundary condition.
struct Window {
  EnergyModel model;
  std::vector<Vertex> to_base;  // local vertex -> base vertex
  Vertex center_local = 0;
};
Window window_model(const EnergyModel& base, const Box& box, BoundaryCondition bc);

struct GoodVertexOptions {
  std::size_t max_set_size = 8;
  bool simply_connected_only = true;
};

struct GoodVertexReport {
  bool good = true;
  std::size_t sets_checked = 0;
  std::size_t max_set_size = 0;  // the truncation actually applied
  double worst_margin = 0.0;     // max over checks of |dH| - |d_e A|
};

/// Checks |H^{+-}_{B(u,2R),M,h} - H^{+-}_{B(u,2R),M,h^A}| <= |d_e A| for every
/// connected A containing u inside B(u, 2R) with |A| <= max_set_size, both
/// boundary signs, at M = m_lo and M = m_hi.
GoodVertexReport is_good_vertex(const EnergyModel& model, Vertex u, int R, double m_lo, double m_hi,
                                const GoodVertexOptions& opts = {});

}  // namespace rfimlab
