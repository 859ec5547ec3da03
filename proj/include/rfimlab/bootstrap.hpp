#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rfimlab/lattice.hpp"

namespace rfimlab {

enum class SiteState : std::uint8_t { Empty = 0, Open = 1, Closed = 2 };

/// Per-vertex site state plus a flag for vertices that were open initially.
/// Evolution never touches closed (unless a rule lets them open) or
/// initially open sites, and never closes an open one.
class SiteConfig {
 public:
  SiteConfig() = default;
  explicit SiteConfig(std::size_t n) : state_(n, SiteState::Empty), initial_(n, 0) {}

  std::size_t size() const noexcept { return state_.size(); }
  SiteState operator[](Vertex v) const noexcept { return state_[v]; }
  bool is_open(Vertex v) const noexcept { return state_[v] == SiteState::Open; }
  bool initially_open(Vertex v) const noexcept { return initial_[v] != 0; }

  void set(Vertex v, SiteState s) noexcept { state_[v] = s; }
  /// Marks v open from the start.
  void seed_open(Vertex v) noexcept {
    state_[v] = SiteState::Open;
    initial_[v] = 1;
  }

  std::size_t count(SiteState s) const noexcept;

  /// Snapshot byte: 0 empty, 1 open, 2 closed, | 0x10 for initially open.
  std::int8_t encode(Vertex v) const noexcept;
  static SiteConfig decode(const std::vector<std::int8_t>& bytes);

  bool operator==(const SiteConfig&) const = default;

 private:
  std::vector<SiteState> state_;
  std::vector<std::uint8_t> initial_;
};

/// Growth rule. An empty site opens when its open-neighbor count reaches r
/// (or, if `modified`, when at least r axes carry an open neighbor). With
/// `closed_threshold` set, a closed site opens at that many open neighbors.
struct BPRule {
  int r = 2;
  bool modified = false;
  std::optional<int> closed_threshold;

  static BPRule standard(int r) { return {r, false, std::nullopt}; }
  static BPRule modified_rule(int r) { return {r, true, std::nullopt}; }
  /// Threshold-d rule in which closed sites open at d + 1 open neighbors.
  static BPRule closed_flippable(int d) { return {d, false, d + 1}; }

  void validate(int d) const;
  std::string describe() const;
};

/// Initial law from one uniform u_v per vertex: u < q closed, u > 1 - p open.
/// Raising p or lowering q only adds open sites or removes closed ones.
SiteConfig sample_sites(std::uint64_t seed, const Lattice& lat, double p, double q);

/// Uniform driving sample_sites at vertex v.
double site_uniform(std::uint64_t seed, Vertex v) noexcept;

/// Final configuration of the growth. If `trace` is non-null, every newly
/// opened vertex is appended in opening order.
SiteConfig bp_final(const Lattice& lat, const SiteConfig& init, const BPRule& rule,
                    std::vector<Vertex>* trace = nullptr);

/// Evolution restricted to the given vertex block: sites outside the block
/// count as absent. `lo`/`hi` are inclusive per-axis coordinate bounds; on a
/// torus a block may wrap (lo > hi), or span a full cycle.
SiteConfig bp_final_in_block(const Lattice& lat, const SiteConfig& config, const BPRule& rule,
                             const std::vector<int>& lo, const std::vector<int>& hi);

struct BoxedResult {
  SiteConfig final_config;
  std::vector<int> scales;  // scales actually run, including any appended
};

/// Staged evolution: at stage t every box B(x, L_t), x in L_t Z^d, evolves
/// on its own from the configuration at the start of the stage, and an empty
/// site opens if it opens in some box. After the given scales, the scale keeps
/// growing by the last ratio until one box covers the whole domain.
BoxedResult bp_final_boxed(const Lattice& lat, const SiteConfig& init, const BPRule& rule,
                           const std::vector<int>& scales);

struct ClusterInfo {
  std::vector<Vertex> members;
  std::size_t size = 0;
  int diameter = 0;
  std::size_t initial_count = 0;
  bool spanning = false;  // touches two opposite faces of an open box
};

/// Open clusters of a configuration, ordered by smallest member.
std::vector<ClusterInfo> cluster_stats(const Lattice& lat, const SiteConfig& config);

/// Sum of open-cluster diameters plus twice the number of open clusters.
long long u_statistic(const Lattice& lat, const SiteConfig& config);

struct UMonitorReport {
  bool non_increasing = true;
  long long initial_U = 0;
  long long final_U = 0;
  long long max_step = 0;  // largest single-step change (negative if always decreasing)
  std::size_t steps = 0;
};

/// Replays a traced evolution one opening at a time and checks U never grows.
/// Requires an open box and a trace; throws std::invalid_argument otherwise.
UMonitorReport u_monitor(const Lattice& lat, const SiteConfig& init, const std::vector<Vertex>* trace);

struct PhaseTrialRow {
  double p = 0.0;
  double q = 0.0;
  int trial = 0;
  std::uint64_t seed = 0;
  double density = 0.0;
  bool origin_open = false;
  bool spanning = false;
};

struct PhaseRow {
  double p = 0.0;
  double q = 0.0;
  int trials = 0;
  double density = 0.0;
  double origin_freq = 0.0;
  double spanning_freq = 0.0;
};

struct PhaseScanConfig {
  int d = 2;
  std::vector<double> p_grid;
  bool q_scaled = true;  // q = q_value * p^d, else q = q_value
  double q_value = 0.0;
  int L = 64;
  bool wrap = false;
  int trials = 10;
  std::uint64_t base_seed = 0;
  BPRule rule = BPRule::standard(2);
};

struct PhaseScanResult {
  std::vector<PhaseTrialRow> trials;  // ordered by (p index, trial)
  std::vector<PhaseRow> rows;         // one per p
};

/// Trial t uses the same uniform field for every p, so rows are coupled.
/// The origin is the center vertex of the domain.
PhaseScanResult phase_scan(const PhaseScanConfig& cfg, unsigned workers = 1);

}  // namespace rfimlab
