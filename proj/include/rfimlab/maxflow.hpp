#pragma once

#include <cstdint>
#include <vector>

namespace rfimlab {

/// s-t max-flow / min-cut on integer capacities.
///
/// Highest-label push-relabel with the gap heuristic and periodic global
/// relabeling. Only the first phase (maximum preflow) is run: the minimum cut
/// is read off the residual graph, which is all the callers need.
class MinCut {
 public:
  using Cap = std::int64_t;

  explicit MinCut(std::size_t nodes);

  std::size_t nodes() const noexcept { return n_; }

  /// Adds source->v with capacity `from_source` and v->sink with `to_sink`.
  void add_terminal(std::size_t v, Cap from_source, Cap to_sink);
  /// Adds arcs u->v (cap_uv) and v->u (cap_vu), each the other's residual.
  void add_edge(std::size_t u, std::size_t v, Cap cap_uv, Cap cap_vu);

  /// Runs the solver; returns the cut value.
  Cap solve();

  /// Largest source side among all minimum cuts: nodes that cannot reach the
  /// sink in the residual graph. Valid after solve().
  std::vector<bool> maximal_source_side() const;

 private:
  struct Arc {
    std::uint32_t head;
    std::uint32_t rev;
    Cap res;
  };
  struct PendingArc {
    std::uint32_t tail, head;
    Cap cap_fwd, cap_rev;
  };

  void finalize();
  void global_relabel();
  void push_active(std::uint32_t v);
  void discharge(std::uint32_t v);
  void relabel(std::uint32_t v);
  void gap(std::uint32_t label);

  std::size_t n_;
  std::uint32_t source_, sink_, total_;
  std::vector<PendingArc> pending_;
  std::vector<std::uint32_t> first_;
  std::vector<Arc> arcs_;
  std::vector<std::uint32_t> current_;
  std::vector<Cap> excess_;
  std::vector<std::uint32_t> label_;
  std::vector<std::uint32_t> label_count_;
  std::vector<std::vector<std::uint32_t>> active_;
  std::vector<std::uint8_t> in_active_;
  std::int64_t max_active_ = -1;
  std::size_t work_since_relabel_ = 0;
  bool solved_ = false;
};

}  // namespace rfimlab
