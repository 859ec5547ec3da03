#include "rfimlab/groundstate.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <limits>

#include "rfimlab/maxflow.hpp"

namespace rfimlab {

SpinConfig::SpinConfig(std::vector<std::int8_t> spins) : s_(std::move(spins)) {
  for (auto x : s_)
    if (x != 1 && x != -1) throw std::invalid_argument("spins must be +1 or -1");
}

SpinConfig SpinConfig::uniform(std::size_t n, int spin) {
  if (spin != 1 && spin != -1) throw std::invalid_argument("spins must be +1 or -1");
  return SpinConfig(std::vector<std::int8_t>(n, static_cast<std::int8_t>(spin)));
}

std::size_t SpinConfig::plus_count() const noexcept {
  return static_cast<std::size_t>(std::count(s_.begin(), s_.end(), std::int8_t{1}));
}

long long SpinConfig::magnetization() const noexcept {
  return 2 * static_cast<long long>(plus_count()) - static_cast<long long>(s_.size());
}

VertexSet SpinConfig::plus_set() const {
  VertexSet out(s_.size());
  for (std::size_t v = 0; v < s_.size(); ++v)
    if (s_[v] > 0) out.insert(static_cast<Vertex>(v));
  return out;
}

bool dominates(const SpinConfig& hi, const SpinConfig& lo) {
  if (hi.size() != lo.size()) throw std::invalid_argument("configurations differ in size");
  for (std::size_t v = 0; v < hi.size(); ++v)
    if (hi[static_cast<Vertex>(v)] < lo[static_cast<Vertex>(v)]) return false;
  return true;
}

EnergyModel::EnergyModel(Lattice lat, std::vector<double> field, double eps_, double M_, BoundaryCondition bc)
    : lattice(std::move(lat)), h(std::move(field)), eps(eps_), M(M_), boundary(std::move(bc)) {
  if (h.size() != lattice.size()) throw std::invalid_argument("field size does not match lattice");
  if (!(eps >= 0.0)) throw std::invalid_argument("noise intensity must be >= 0");
  if (lattice.wrap() && boundary.kind != BoundaryKind::None)
    throw std::invalid_argument("a torus takes no boundary condition");
  if (boundary.kind == BoundaryKind::Explicit) {
    const std::size_t slots = lattice.size() * static_cast<std::size_t>(lattice.slots());
    if (boundary.slot_spins.size() != slots) throw std::invalid_argument("explicit boundary has wrong size");
    for (std::size_t v = 0; v < lattice.size(); ++v) {
      auto nb = lattice.neighbor_slots(static_cast<Vertex>(v));
      for (int k = 0; k < lattice.slots(); ++k) {
        const auto s = boundary.slot_spins[v * lattice.slots() + k];
        if (nb[k] == kNoVertex && s != 1 && s != -1)
          throw std::invalid_argument("explicit boundary spins must be +1 or -1");
      }
    }
  }
}

std::vector<double> EnergyModel::boundary_field() const {
  std::vector<double> out(lattice.size(), 0.0);
  if (boundary.kind == BoundaryKind::None) return out;
  for (std::size_t v = 0; v < lattice.size(); ++v) {
    auto nb = lattice.neighbor_slots(static_cast<Vertex>(v));
    for (int k = 0; k < lattice.slots(); ++k) {
      if (nb[k] != kNoVertex) continue;
      switch (boundary.kind) {
        case BoundaryKind::Plus: out[v] += 1.0; break;
        case BoundaryKind::Minus: out[v] -= 1.0; break;
        case BoundaryKind::Explicit: out[v] += boundary.slot_spins[v * lattice.slots() + k]; break;
        case BoundaryKind::None: break;
      }
    }
  }
  return out;
}

EnergyModel EnergyModel::with_M(double m) const {
  EnergyModel copy = *this;
  copy.M = m;
  return copy;
}

EnergyModel EnergyModel::with_field(std::vector<double> field) const {
  return EnergyModel(lattice, std::move(field), eps, M, boundary);
}

namespace {

void check_config(const EnergyModel& model, const SpinConfig& config) {
  if (config.size() != model.lattice.size()) throw std::invalid_argument("configuration does not match model domain");
}

long double energy_of(const EnergyModel& model, const std::vector<double>& bnd, const std::int8_t* s) {
  const Lattice& lat = model.lattice;
  long double e = 0.0L;
  for (std::size_t v = 0; v < lat.size(); ++v) {
    auto nb = lat.neighbor_slots(static_cast<Vertex>(v));
    for (int k = 0; k < lat.dim(); ++k) {
      const Vertex w = nb[2 * k];
      if (w != kNoVertex) e -= s[v] * s[w];
    }
    e -= (model.M + model.eps * model.h[v] + bnd[v]) * s[v];
  }
  return e;
}

}  // namespace

double hamiltonian(const EnergyModel& model, const SpinConfig& config) {
  check_config(model, config);
  return static_cast<double>(energy_of(model, model.boundary_field(), config.spins().data()));
}

double flip_delta(const EnergyModel& model, const SpinConfig& config, Vertex v) {
  check_config(model, config);
  double local = model.M + model.eps * model.h[v];
  auto nb = model.lattice.neighbor_slots(v);
  for (int k = 0; k < model.lattice.slots(); ++k) {
    if (nb[k] != kNoVertex) {
      local += config[nb[k]];
    } else {
      switch (model.boundary.kind) {
        case BoundaryKind::Plus: local += 1.0; break;
        case BoundaryKind::Minus: local -= 1.0; break;
        case BoundaryKind::Explicit:
          local += model.boundary.slot_spins[static_cast<std::size_t>(v) * model.lattice.slots() + k];
          break;
        case BoundaryKind::None: break;
      }
    }
  }
  return 2.0 * config[v] * local;
}

std::vector<std::int64_t> field_units(const EnergyModel& model) {
  const auto bnd = model.boundary_field();
  const std::size_t n = model.lattice.size();
  std::vector<std::int64_t> units(n);
  constexpr long double kLimit = 4611686018427387904.0L;  // 2^62
  long double total = 2.0L * static_cast<long double>(model.lattice.edge_count()) * kCapacityScale;
  for (std::size_t v = 0; v < n; ++v) {
    const long double x = (static_cast<long double>(model.M) + static_cast<long double>(model.eps) * model.h[v] + bnd[v]) *
                          static_cast<long double>(kCapacityScale);
    if (!std::isfinite(static_cast<double>(x)) || std::fabs(x) >= kLimit)
      throw ScaleOverflow("field too large for the integer capacity scale");
    units[v] = std::llround(x);
    total += std::fabs(x) + 2.0L * model.lattice.slots() * kCapacityScale;
    if (total >= kLimit) throw ScaleOverflow("total capacity exceeds the integer capacity scale");
  }
  return units;
}

SpinConfig ground_state_clamped(const EnergyModel& model, const SpinConfig& lower, const SpinConfig& upper) {
  check_config(model, lower);
  check_config(model, upper);
  const Lattice& lat = model.lattice;
  const std::size_t n = lat.size();
  const auto units = field_units(model);
  const auto scale = static_cast<std::int64_t>(kCapacityScale);

  std::vector<std::uint32_t> local(n, std::numeric_limits<std::uint32_t>::max());
  std::vector<Vertex> free;
  for (std::size_t v = 0; v < n; ++v) {
    const auto vv = static_cast<Vertex>(v);
    if (lower[vv] > upper[vv]) throw std::invalid_argument("clamp bounds are inconsistent");
    if (lower[vv] < upper[vv]) {
      local[v] = static_cast<std::uint32_t>(free.size());
      free.push_back(vv);
    }
  }
  SpinConfig out = lower;
  if (free.empty()) return out;

  MinCut cut(free.size());
  for (std::size_t i = 0; i < free.size(); ++i) {
    const Vertex v = free[i];
    std::int64_t b = units[v];
    for (Vertex w : lat.neighbor_slots(v)) {
      if (w == kNoVertex) continue;
      if (local[w] == std::numeric_limits<std::uint32_t>::max()) {
        b += scale * lower[w];
      } else if (local[w] > i) {
        cut.add_edge(i, local[w], scale, scale);
      }
    }
    if (b > 0)
      cut.add_terminal(i, b, 0);
    else if (b < 0)
      cut.add_terminal(i, 0, -b);
  }
  cut.solve();
  const auto plus = cut.maximal_source_side();
  for (std::size_t i = 0; i < free.size(); ++i) out.set(free[i], plus[i] ? 1 : -1);
  return out;
}

SpinConfig ground_state(const EnergyModel& model) {
  const std::size_t n = model.lattice.size();
  return ground_state_clamped(model, SpinConfig::uniform(n, -1), SpinConfig::uniform(n, 1));
}

SpinConfig brute_force_ground_state(const EnergyModel& model) {
  const std::size_t n = model.lattice.size();
  if (n > 24) throw std::invalid_argument("brute force limited to 24 vertices");
  const auto bnd = model.boundary_field();
  std::vector<std::int8_t> s(n);
  auto decode = [&](std::uint64_t mask) {
    for (std::size_t v = 0; v < n; ++v) s[v] = (mask >> v) & 1U ? 1 : -1;
  };
  const std::uint64_t count = std::uint64_t{1} << n;
  long double best = std::numeric_limits<long double>::infinity();
  for (std::uint64_t mask = 0; mask < count; ++mask) {
    decode(mask);
    best = std::min(best, energy_of(model, bnd, s.data()));
  }
  const long double tol = 1e-9L * std::max(1.0L, std::fabs(best));
  std::uint64_t chosen = 0;
  int chosen_plus = -1;
  for (std::uint64_t mask = 0; mask < count; ++mask) {
    const int plus = std::popcount(mask);
    if (plus <= chosen_plus) continue;
    decode(mask);
    if (energy_of(model, bnd, s.data()) <= best + tol) {
      chosen = mask;
      chosen_plus = plus;
    }
  }
  decode(chosen);
  return SpinConfig(s);
}

double ground_energy(const EnergyModel& model) { return hamiltonian(model, ground_state(model)); }

std::vector<double> FlippedDisorder::values() const {
  std::vector<double> out = *base;
  if (flipped.universe() != out.size()) throw std::invalid_argument("flip set does not match field");
  for (Vertex v : flipped.members()) out[v] = -out[v];
  return out;
}

double flipped_energy_gap(const EnergyModel& model, const VertexSet& a) {
  const FlippedDisorder fd{&model.h, a};
  return ground_energy(model.with_field(fd.values())) - ground_energy(model);
}

bool has_interface_on(const Lattice& lat, const SpinConfig& config, const VertexSet& a) {
  if (a.empty() || a.size() == lat.size()) return false;
  const auto inner = inner_boundary(lat, a);
  const auto outer = outer_boundary(lat, a);
  auto all_equal = [&](const std::vector<Vertex>& vs, int spin) {
    return std::all_of(vs.begin(), vs.end(), [&](Vertex v) { return config[v] == spin; });
  };
  return (all_equal(inner, -1) && all_equal(outer, 1)) || (all_equal(inner, 1) && all_equal(outer, -1));
}

std::vector<std::vector<Vertex>> spin_clusters(const Lattice& lat, const SpinConfig& config) {
  if (config.size() != lat.size()) throw std::invalid_argument("configuration does not match lattice");
  const auto plus = config.plus_set();
  auto clusters = connected_components(lat, plus);
  auto minus = connected_components(lat, plus.complement());
  clusters.insert(clusters.end(), std::make_move_iterator(minus.begin()), std::make_move_iterator(minus.end()));
  return clusters;
}

std::optional<VertexSet> global_spin_cluster(const Lattice& lat, const SpinConfig& config, int threshold) {
  if (threshold < 1) throw std::invalid_argument("global cluster threshold must be >= 1");
  auto clusters = spin_clusters(lat, config);
  std::vector<int> diam(clusters.size());
  std::size_t wide = 0;
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    diam[i] = linf_diameter(lat, clusters[i]);
    if (diam[i] > threshold) ++wide;
  }
  // Every other cluster lies inside one component of the remainder.
  if (wide > 1) return std::nullopt;
  std::vector<std::size_t> order(clusters.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return clusters[a].size() > clusters[b].size(); });
  for (std::size_t i : order) {
    if (wide == 1 && diam[i] <= threshold) continue;
    VertexSet c(lat.size(), clusters[i]);
    const auto rest = connected_components(lat, c.complement());
    const bool ok = std::all_of(rest.begin(), rest.end(),
                                [&](const std::vector<Vertex>& comp) { return linf_diameter(lat, comp) <= threshold; });
    if (ok) return c;
  }
  return std::nullopt;
}

Window window_model(const EnergyModel& base, const Box& box, BoundaryCondition bc) {
  const Lattice& lat = base.lattice;
  const int side = 2 * box.radius + 1;
  if (static_cast<int>(box.center.size()) != lat.dim()) throw std::invalid_argument("window center has wrong dimension");
  for (int k = 0; k < lat.dim(); ++k) {
    if (lat.wrap()) {
      if (side > lat.extents()[k]) throw std::invalid_argument("window exceeds lattice");
    } else if (box.center[k] - box.radius < 0 || box.center[k] + box.radius >= lat.extents()[k]) {
      throw std::invalid_argument("window exceeds lattice");
    }
  }
  // Local coordinate x maps to center + x - radius (mod N on a torus).
  Lattice local = Lattice::box(std::vector<int>(static_cast<std::size_t>(lat.dim()), side));
  std::vector<Vertex> verts(local.size());
  Coord g(static_cast<std::size_t>(lat.dim()));
  for (std::size_t i = 0; i < local.size(); ++i) {
    for (int k = 0; k < lat.dim(); ++k) {
      const int e = lat.extents()[k];
      g[k] = ((box.center[k] + local.coord_at(static_cast<Vertex>(i), k) - box.radius) % e + e) % e;
    }
    verts[i] = lat.index(g);
  }
  std::vector<double> h(verts.size());
  for (std::size_t i = 0; i < verts.size(); ++i) h[i] = base.h[verts[i]];
  Coord mid(static_cast<std::size_t>(lat.dim()), box.radius);
  Window w{EnergyModel(local, std::move(h), base.eps, base.M, std::move(bc)), verts, 0};
  w.center_local = w.model.lattice.index(mid);
  return w;
}

namespace {

// Redelmeier enumeration of connected vertex sets containing `root` with at
// most `cap` vertices; `visit` sees each set exactly once.
void enumerate_animals(const Lattice& lat, Vertex root, std::size_t cap,
                       const std::function<void(const std::vector<Vertex>&)>& visit) {
  std::vector<std::uint8_t> seen(lat.size(), 0);
  std::vector<Vertex> current;
  std::function<void(std::vector<Vertex>)> grow = [&](std::vector<Vertex> untried) {
    while (!untried.empty()) {
      const Vertex v = untried.back();
      untried.pop_back();
      current.push_back(v);
      visit(current);
      if (current.size() < cap) {
        std::vector<Vertex> next = untried;
        std::vector<Vertex> marked;
        for (Vertex w : lat.neighbor_slots(v)) {
          if (w != kNoVertex && !seen[w]) {
            seen[w] = 1;
            marked.push_back(w);
            next.push_back(w);
          }
        }
        grow(std::move(next));
        for (Vertex w : marked) seen[w] = 0;
      }
      current.pop_back();
    }
  };
  seen[root] = 1;
  grow({root});
}

bool complement_connected_in_window(const Lattice& window, const VertexSet& a) {
  // Window sites on the window's inner boundary touch the (connected) outside.
  std::vector<std::uint8_t> reached(window.size(), 0);
  std::vector<Vertex> stack;
  std::size_t outside = 0;
  for (std::size_t v = 0; v < window.size(); ++v) {
    const auto vv = static_cast<Vertex>(v);
    if (a.contains(vv)) continue;
    ++outside;
    if (window.degree(vv) < window.slots()) {
      reached[v] = 1;
      stack.push_back(vv);
    }
  }
  std::size_t count = stack.size();
  while (!stack.empty()) {
    const Vertex v = stack.back();
    stack.pop_back();
    for (Vertex w : window.neighbor_slots(v)) {
      if (w != kNoVertex && !a.contains(w) && !reached[w]) {
        reached[w] = 1;
        ++count;
        stack.push_back(w);
      }
    }
  }
  return count == outside;
}

}  // namespace

GoodVertexReport is_good_vertex(const EnergyModel& model, Vertex u, int R, double m_lo, double m_hi,
                                const GoodVertexOptions& opts) {
  if (R < 0) throw std::invalid_argument("window radius must be >= 0");
  if (opts.max_set_size < 1) throw std::invalid_argument("set size cap must be >= 1");
  const Box box{model.lattice.coord(u), 2 * R};
  GoodVertexReport report;
  report.max_set_size = opts.max_set_size;

  struct Case {
    EnergyModel model;
    double base_energy;
  };
  std::vector<Case> cases;
  std::vector<Vertex> to_base;
  Vertex root = 0;
  for (auto bc : {BoundaryCondition::plus(), BoundaryCondition::minus()}) {
    for (double m : {m_lo, m_hi}) {
      Window w = window_model(model.with_M(m), box, bc);
      to_base = w.to_base;
      root = w.center_local;
      const double e = ground_energy(w.model);
      cases.push_back({std::move(w.model), e});
    }
  }
  const Lattice& window = cases.front().model.lattice;
  const double eps_tol = 1e-9;

  enumerate_animals(window, root, opts.max_set_size, [&](const std::vector<Vertex>& set) {
    VertexSet local(window.size(), set);
    if (opts.simply_connected_only && !complement_connected_in_window(window, local)) return;
    std::vector<Vertex> global(set.size());
    for (std::size_t i = 0; i < set.size(); ++i) global[i] = to_base[set[i]];
    const VertexSet gset(model.lattice.size(), global);
    const auto boundary = static_cast<double>(edge_boundary(model.lattice, gset));
    ++report.sets_checked;
    for (const auto& c : cases) {
      const FlippedDisorder fd{&c.model.h, local};
      const double e = ground_energy(c.model.with_field(fd.values()));
      const double margin = std::fabs(e - c.base_energy) - boundary;
      report.worst_margin = std::max(report.worst_margin, margin);
      if (margin > eps_tol) report.good = false;
    }
  });
  return report;
}

}  // namespace rfimlab
