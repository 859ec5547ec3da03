#include "rfimlab/gs_evolution.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rfimlab/disorder.hpp"
#include "rfimlab/parallel.hpp"

namespace rfimlab {

double min_sweep_tol() noexcept { return 16.0 / kCapacityScale; }

std::pair<double, double> flip_window(const EnergyModel& model, Vertex v) {
  const double bnd = model.boundary_field()[v];
  const double deg = model.lattice.degree(v);
  const double shift = model.eps * model.h[v] + bnd;
  return {-deg - shift, deg - shift};
}

namespace {

void check_tol(double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
  if (tol < min_sweep_tol()) throw std::invalid_argument("tolerance below the integer field resolution");
}

struct Sweeper {
  const EnergyModel& model;
  double tol;
  EvolutionSummary out;

  SpinConfig solve(double m, const SpinConfig& lo, const SpinConfig& hi) {
    ++out.solves;
    return ground_state_clamped(model.with_M(m), lo, hi);
  }

  // Emits breakpoints inside (a, b] in increasing M order.
  void run(double a, const SpinConfig& ta, double b, const SpinConfig& tb) {
    if (ta == tb) return;
    if (b - a <= tol) {
      emit(a, ta, b, tb);
      return;
    }
    const double m = 0.5 * (a + b);
    const SpinConfig tm = solve(m, ta, tb);
    run(a, ta, m, tm);
    run(m, tm, b, tb);
  }

  void emit(double a, const SpinConfig& ta, double b, const SpinConfig& tb) {
    Breakpoint bp;
    bp.M_lo = a;
    bp.M_hi = b;
    VertexSet set(ta.size());
    for (std::size_t v = 0; v < ta.size(); ++v) {
      if (tb[static_cast<Vertex>(v)] > ta[static_cast<Vertex>(v)]) {
        bp.flipped.push_back(static_cast<Vertex>(v));
        set.insert(static_cast<Vertex>(v));
        out.flip_time[v] = bp.midpoint();
      }
    }
    for (const auto& comp : connected_components(model.lattice, set)) bp.component_sizes.push_back(comp.size());
    std::sort(bp.component_sizes.rbegin(), bp.component_sizes.rend());
    bp.merged = bp.component_sizes.size() > 1;
    out.breakpoints.push_back(std::move(bp));
  }
};

}  // namespace

EvolutionSummary sweep(const EnergyModel& model, double tol) {
  check_tol(tol);
  const std::size_t n = model.lattice.size();
  double lo = 0.0;
  double hi = 0.0;
  for (std::size_t v = 0; v < n; ++v) {
    const auto [a, b] = flip_window(model, static_cast<Vertex>(v));
    if (v == 0 || a < lo) lo = a;
    if (v == 0 || b > hi) hi = b;
  }
  // Strictly outside every window the ground state is forced.
  lo -= 1.0;
  hi += 1.0;

  Sweeper s{model, tol, {}};
  s.out.flip_time.assign(n, 0.0);
  s.run(lo, SpinConfig::uniform(n, -1), hi, SpinConfig::uniform(n, 1));

  auto& bps = s.out.breakpoints;
  std::size_t best = 0;
  std::size_t ties = 0;
  for (std::size_t i = 0; i < bps.size(); ++i) {
    if (bps[i].size() > s.out.M_G) {
      s.out.M_G = bps[i].size();
      best = i;
      ties = 1;
    } else if (bps[i].size() == s.out.M_G) {
      ++ties;
    }
  }
  if (ties == 1) s.out.M_star = bps[best].midpoint();
  return std::move(s.out);
}

double flip_time(const EnergyModel& model, Vertex v, double tol) {
  check_tol(tol);
  if (v >= model.lattice.size()) throw std::out_of_range("vertex outside lattice");
  auto [lo, hi] = flip_window(model, v);
  lo -= 1.0;
  hi += 1.0;
  while (hi - lo > tol) {
    const double m = 0.5 * (lo + hi);
    if (ground_state(model.with_M(m))[v] > 0)
      hi = m;
    else
      lo = m;
  }
  return 0.5 * (lo + hi);
}

std::vector<AvalancheRow> avalanche_scaling_experiment(int d, double eps, const std::vector<int>& sizes, int trials,
                                                       double tol, std::uint64_t base_seed, unsigned workers) {
  if (trials < 0) throw std::invalid_argument("trial count must be >= 0");
  check_tol(tol);
  std::vector<AvalancheRow> rows(sizes.size() * static_cast<std::size_t>(trials));
  parallel_for(rows.size(), workers, [&](std::size_t i) {
    const int N = sizes[i / trials];
    const int t = static_cast<int>(i % trials);
    Lattice lat(d, N, true);
    const std::uint64_t seed = derive_seed(base_seed, {static_cast<std::uint64_t>(d), static_cast<std::uint64_t>(N),
                                                       static_cast<std::uint64_t>(t)});
    EnergyModel model(lat, sample_field(seed, lat).values, eps, 0.0);
    const auto summary = sweep(model, tol);
    AvalancheRow& r = rows[i];
    r.N = N;
    r.trial = t;
    r.seed = seed;
    r.M_G = summary.M_G;
    r.M_star = summary.M_star;
    r.breakpoints = summary.breakpoints.size();
    for (const auto& bp : summary.breakpoints)
      if (bp.size() == summary.M_G && bp.merged) r.merged_max = true;
    r.frac = static_cast<double>(summary.M_G) / static_cast<double>(lat.size());
    r.per_log = static_cast<double>(summary.M_G) / std::log(static_cast<double>(N));
  });
  return rows;
}

}  // namespace rfimlab
