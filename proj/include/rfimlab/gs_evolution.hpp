#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "rfimlab/groundstate.hpp"

namespace rfimlab {

/// Ground-state transition located inside [M_lo, M_hi].
struct Breakpoint {
  double M_lo = 0.0;
  double M_hi = 0.0;
  std::vector<Vertex> flipped;                // tau_{M_hi} minus tau_{M_lo}, as plus sets
  std::vector<std::size_t> component_sizes;   // connected pieces of `flipped`
  bool merged = false;                        // more than one component

  std::size_t size() const noexcept { return flipped.size(); }
  double midpoint() const noexcept { return 0.5 * (M_lo + M_hi); }
};

struct EvolutionSummary {
  std::vector<Breakpoint> breakpoints;  // increasing M
  std::size_t M_G = 0;
  std::optional<double> M_star;         // absent when the largest size is tied
  std::vector<double> flip_time;        // per vertex: midpoint of its bracket
  std::size_t solves = 0;
};

inline constexpr double kDefaultSweepTol = 1e-7;

/// Smallest tolerance the integer field scale can resolve.
double min_sweep_tol() noexcept;

/// Interval outside of which v's ground-state spin is forced by its own field:
/// [-deg - eps h_v - bnd_v, deg - eps h_v - bnd_v].
std::pair<double, double> flip_window(const EnergyModel& model, Vertex v);

/// Ground-state evolution in M by recursive bisection. The model's M is ignored.
EvolutionSummary sweep(const EnergyModel& model, double tol = kDefaultSweepTol);

/// M at which v turns plus, to within tol, by bisection on full solves.
double flip_time(const EnergyModel& model, Vertex v, double tol = kDefaultSweepTol);

struct AvalancheRow {
  int N = 0;
  int trial = 0;
  std::uint64_t seed = 0;
  std::size_t M_G = 0;
  std::optional<double> M_star;
  std::size_t breakpoints = 0;
  bool merged_max = false;  // the largest breakpoint spans several components
  double frac = 0.0;        // M_G / N^d
  double per_log = 0.0;     // M_G / log N
};

/// Sweeps `trials` torus fields for each N; field seeds derive from
/// (base_seed, d, N, trial). Rows come back ordered by (N, trial).
std::vector<AvalancheRow> avalanche_scaling_experiment(int d, double eps, const std::vector<int>& sizes, int trials,
                                                       double tol, std::uint64_t base_seed, unsigned workers = 1);

}  // namespace rfimlab
