#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rfimlab/bootstrap.hpp"
#include "rfimlab/groundstate.hpp"

namespace rfimlab {

/// L_n = K^n * L_0 with L_0 = floor(1/p) unless overridden, plus the cluster
/// diameter bound D of the scale-0 test.
struct ScaleLadder {
  int K = 4;
  double p = 0.0;
  int D = 16;
  int base_override = 0;  // > 0 replaces floor(1/p)

  int L0() const;
  long long L(int n) const;
  void validate() const;
};

enum class BoxReason { Clean, Confined, ClustersTooLarge, BadSubboxesUnconfined, EscapeFrom3Box };
const char* to_string(BoxReason r) noexcept;

struct BoxVerdict {
  Coord center;
  int scale = 0;
  bool good = true;
  BoxReason reason = BoxReason::Clean;
  std::optional<Coord> y;  // confining center, when one was found
  std::size_t bad_subboxes = 0;
};

// Boxes are |.|_inf balls B(center, L_n) that must lie inside an open-box
// lattice. Verdicts read only the configuration inside the box.

/// Good iff every open cluster of the growth restricted to the box has
/// diameter at most D.
BoxVerdict classify_L0(const Lattice& lat, const SiteConfig& config, const Coord& center, const BPRule& rule,
                       const ScaleLadder& ladder);

/// Scale n >= 1: good if no sub-box of scale n-1 is bad, or if all bad
/// sub-boxes fit in B(y, 3 L_{n-1}) for some y in L_{n-1} Z^d and every open
/// cluster of the restricted growth meeting B(y, 3 L_{n-1}) stays within
/// B(y, sqrt(K) L_{n-1}). Candidate y are scanned lexicographically and the
/// first one meeting both conditions is reported.
BoxVerdict classify_Ln(const Lattice& lat, const SiteConfig& config, const Coord& center, const BPRule& rule,
                       const ScaleLadder& ladder, int n);

BoxVerdict classify(const Lattice& lat, const SiteConfig& config, const Coord& center, const BPRule& rule,
                    const ScaleLadder& ladder, int n);

struct WilsonInterval {
  double lo = 0.0;
  double hi = 1.0;
};
WilsonInterval wilson_interval(std::size_t successes, std::size_t trials, double z = 1.959963984540054);

struct PnRow {
  int n = 0;
  long long L = 0;
  std::size_t trials = 0;
  std::size_t bad = 0;
  double bad_freq = 0.0;
  WilsonInterval ci;
  bool truncated = false;  // budget reached before all requested trials
};

struct PnConfig {
  int d = 2;
  double q = 0.0;
  ScaleLadder ladder;
  std::vector<int> levels{0, 1};
  int trials = 100;
  BPRule rule = BPRule::standard(2);
  std::uint64_t base_seed = 0;
  double vertex_budget = 4e9;  // cap on sum over trials of |B(0, L_n)|
};

/// Frequency of B(0, L_n) being bad when the box itself is the whole domain.
/// Trial t at level n samples sites from a seed derived from (base, n, t).
std::vector<PnRow> estimate_pn(const PnConfig& cfg, unsigned workers = 1);

/// Tiles B_x = x + [0, L)^d of a fine lattice, classified for the coarse
/// modified bootstrap percolation with threshold d - 1.
struct Renormalization {
  int L = 0;
  double p = 0.0;
  double q = 0.0;
  Lattice coarse;
  SiteConfig initial;  // open tiles are marked initially open
  BPRule rule;
  std::vector<int> tiles;  // per-axis tile counts
};

/// L = floor(-d log p / p). A tile is open iff eps h_v + M - 2d >= 0 on all of
/// it; empty iff it has no vertex with eps h_v + M < 0 and every axis-parallel
/// line of the tile has a vertex with eps h_v + M - 2 >= 0; closed otherwise.
/// The coarse lattice wraps only if the fine one does and L divides N.
Renormalization box_renormalize(const Lattice& lat, const std::vector<double>& h, double eps, double M);

/// Fine vertices of tile t.
std::vector<Vertex> tile_vertices(const Lattice& fine, const Renormalization& r, Vertex tile);

/// Coarse-open tiles (after the coarse growth) holding a minus spin in `fine`.
std::size_t soundness_violations(const Lattice& fine, const Renormalization& r, const SiteConfig& coarse_final,
                                 const SpinConfig& fine_config);

}  // namespace rfimlab
