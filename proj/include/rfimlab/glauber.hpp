#pragma once

#include <cstdint>
#include <queue>
#include <vector>

#include "rfimlab/groundstate.hpp"

namespace rfimlab {

// Zero-temperature dynamics run on the lattice as given: a torus wraps, an
// open box sees a frozen minus spin across every missing neighbor slot.

/// Spins flipped by one cascade at a single value of M.
struct AvalancheEvent {
  double M = 0.0;
  Vertex seed = kNoVertex;
  std::vector<Vertex> flipped;       // in flip order, seed first
  std::vector<int> plus_neighbors;   // plus-neighbor count of each flipped vertex when it flipped
  double plus_fraction_after = 0.0;

  std::size_t size() const noexcept { return flipped.size(); }
};

/// Event-driven zero-temperature Glauber evolution from all-minus at M = -inf.
/// A minus vertex flips once sum_{u~v} s_u + M + eps h_v >= 0.
class GlauberEngine {
 public:
  GlauberEngine(Lattice lattice, std::vector<double> h, double eps);

  const Lattice& lattice() const noexcept { return lat_; }
  const SpinConfig& config() const noexcept { return spins_; }
  /// Largest M reached so far: the last advance_to target (-inf before any).
  double current_M() const noexcept { return M_; }
  std::size_t plus_count() const noexcept { return plus_; }

  /// Smallest pending trigger, +inf once every spin is plus.
  double next_trigger();

  /// Processes every event with trigger <= M_end and returns them in order.
  /// Calls must use nondecreasing M_end.
  std::vector<AvalancheEvent> advance_to(double M_end);

  /// Trigger of a minus vertex: the M at which it becomes eligible.
  double trigger(Vertex v) const noexcept { return -eps_ * h_[v] - nsum_[v]; }

 private:
  struct Entry {
    double trigger;
    Vertex v;
    bool operator>(const Entry& o) const noexcept {
      return trigger > o.trigger || (trigger == o.trigger && v > o.v);
    }
  };

  void drop_stale();
  void flip(Vertex v, std::vector<Vertex>& cascade, std::vector<std::uint8_t>& queued, AvalancheEvent& ev);

  Lattice lat_;
  std::vector<double> h_;
  double eps_;
  double M_;
  SpinConfig spins_;
  std::vector<int> nsum_;
  std::size_t plus_ = 0;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap_;
};

struct GlauberRun {
  std::vector<AvalancheEvent> events;
  SpinConfig final_config;
};

GlauberRun glauber_evolve(const Lattice& lat, const std::vector<double>& h, double eps, double M_end);

/// Fixed point of the flip rule at fixed M, reached from all-minus.
SpinConfig glauber_at(const Lattice& lat, const std::vector<double>& h, double eps, double M);

/// Checks that every flip of every event satisfies: open (eps h + M - 2 >= 0),
/// or non-closed with >= d plus neighbors, or closed with >= d + 1. Returns
/// the number of flips violating it.
std::size_t eligibility_violations(const Lattice& lat, const std::vector<double>& h, double eps,
                                   const std::vector<AvalancheEvent>& events);

/// Heat-bath probability of choosing plus given the local field
/// sum_{u~v} s_u + M + eps h_v, i.e. 1 / (1 + exp(-2 field / T)), computed
/// without overflow. Exactly 1/2 at zero field.
double heat_bath_plus_probability(double local_field, double T) noexcept;

struct MagnetizationSample {
  double M = 0.0;
  double plus_fraction = 0.0;
  long long magnetization = 0;
};

/// Positive-temperature Glauber dynamics with time identified with M.
/// Every vertex carries a rate-alpha exponential clock; on a ring the spin is
/// resampled by the heat-bath rule. Starts all-minus at M_lo and records the
/// state at `grid_points` evenly spaced values of M in [M_lo, M_hi].
std::vector<MagnetizationSample> positive_T_glauber(const Lattice& lat, const std::vector<double>& h, double eps,
                                                    double T, double alpha, double M_lo, double M_hi,
                                                    int grid_points, std::uint64_t seed);

}  // namespace rfimlab
