#include "rfimlab/maxflow.hpp"

#include <algorithm>
#include <stdexcept>

namespace rfimlab {

MinCut::MinCut(std::size_t nodes)
    : n_(nodes),
      source_(static_cast<std::uint32_t>(nodes)),
      sink_(static_cast<std::uint32_t>(nodes + 1)),
      total_(static_cast<std::uint32_t>(nodes + 2)) {}

void MinCut::add_terminal(std::size_t v, Cap from_source, Cap to_sink) {
  if (v >= n_) throw std::out_of_range("terminal arc on unknown node");
  if (from_source < 0 || to_sink < 0) throw std::invalid_argument("negative capacity");
  const auto u = static_cast<std::uint32_t>(v);
  if (from_source > 0) pending_.push_back({source_, u, from_source, 0});
  if (to_sink > 0) pending_.push_back({u, sink_, to_sink, 0});
}

void MinCut::add_edge(std::size_t u, std::size_t v, Cap cap_uv, Cap cap_vu) {
  if (u >= n_ || v >= n_) throw std::out_of_range("edge on unknown node");
  if (cap_uv < 0 || cap_vu < 0) throw std::invalid_argument("negative capacity");
  pending_.push_back({static_cast<std::uint32_t>(u), static_cast<std::uint32_t>(v), cap_uv, cap_vu});
}

void MinCut::finalize() {
  first_.assign(total_ + 1, 0);
  for (const auto& p : pending_) {
    ++first_[p.tail + 1];
    ++first_[p.head + 1];
  }
  for (std::uint32_t v = 0; v < total_; ++v) first_[v + 1] += first_[v];
  arcs_.resize(first_[total_]);
  std::vector<std::uint32_t> fill(first_.begin(), first_.end() - 1);
  for (const auto& p : pending_) {
    const std::uint32_t a = fill[p.tail]++;
    const std::uint32_t b = fill[p.head]++;
    arcs_[a] = {p.head, b, p.cap_fwd};
    arcs_[b] = {p.tail, a, p.cap_rev};
  }
  pending_.clear();
  pending_.shrink_to_fit();
}

void MinCut::global_relabel() {
  std::fill(label_.begin(), label_.end(), total_);
  label_[sink_] = 0;
  std::vector<std::uint32_t> queue{sink_};
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const std::uint32_t w = queue[head];
    for (std::uint32_t i = first_[w]; i < first_[w + 1]; ++i) {
      const std::uint32_t u = arcs_[i].head;
      if (u == source_ || label_[u] != total_) continue;
      if (arcs_[arcs_[i].rev].res > 0) {
        label_[u] = label_[w] + 1;
        queue.push_back(u);
      }
    }
  }
  label_[source_] = total_;
  std::fill(label_count_.begin(), label_count_.end(), 0);
  for (std::uint32_t v = 0; v < total_; ++v) ++label_count_[label_[v]];
  for (auto& bucket : active_) bucket.clear();
  std::fill(in_active_.begin(), in_active_.end(), 0);
  max_active_ = -1;
  for (std::uint32_t v = 0; v < total_; ++v) {
    current_[v] = first_[v];
    if (v != source_ && v != sink_ && excess_[v] > 0 && label_[v] < total_) push_active(v);
  }
  work_since_relabel_ = 0;
}

void MinCut::push_active(std::uint32_t v) {
  if (in_active_[v]) return;
  in_active_[v] = 1;
  active_[label_[v]].push_back(v);
  max_active_ = std::max<std::int64_t>(max_active_, label_[v]);
}

void MinCut::gap(std::uint32_t label) {
  for (std::uint32_t u = 0; u < total_; ++u) {
    if (u == source_ || u == sink_) continue;
    if (label_[u] > label && label_[u] < total_) {
      --label_count_[label_[u]];
      label_[u] = total_;
      ++label_count_[total_];
    }
  }
}

void MinCut::relabel(std::uint32_t v) {
  ++work_since_relabel_;
  const std::uint32_t old = label_[v];
  std::uint32_t next = total_;
  for (std::uint32_t i = first_[v]; i < first_[v + 1]; ++i)
    if (arcs_[i].res > 0) next = std::min(next, label_[arcs_[i].head] + 1);
  next = std::min(next, total_);
  --label_count_[old];
  if (label_count_[old] == 0 && old < total_) {
    gap(old);
    next = total_;
  }
  label_[v] = next;
  ++label_count_[next];
  current_[v] = first_[v];
}

void MinCut::discharge(std::uint32_t v) {
  while (excess_[v] > 0) {
    if (current_[v] == first_[v + 1]) {
      relabel(v);
      if (label_[v] >= total_) return;
      continue;
    }
    Arc& a = arcs_[current_[v]];
    if (a.res > 0 && label_[v] == label_[a.head] + 1) {
      const Cap delta = std::min(excess_[v], a.res);
      a.res -= delta;
      arcs_[a.rev].res += delta;
      excess_[v] -= delta;
      const std::uint32_t w = a.head;
      excess_[w] += delta;
      if (w != sink_ && w != source_ && label_[w] < total_) push_active(w);
    } else {
      ++current_[v];
    }
  }
}

MinCut::Cap MinCut::solve() {
  if (solved_) throw std::logic_error("MinCut::solve called twice");
  solved_ = true;
  finalize();
  excess_.assign(total_, 0);
  label_.assign(total_, 0);
  label_count_.assign(total_ + 1, 0);
  current_.assign(total_, 0);
  active_.assign(total_ + 1, {});
  in_active_.assign(total_, 0);

  for (std::uint32_t i = first_[source_]; i < first_[source_ + 1]; ++i) {
    Arc& a = arcs_[i];
    if (a.res == 0) continue;
    excess_[a.head] += a.res;
    arcs_[a.rev].res += a.res;
    a.res = 0;
  }
  global_relabel();

  const std::size_t relabel_period = 6 * static_cast<std::size_t>(total_) + arcs_.size() / 2;
  while (max_active_ >= 0) {
    auto& bucket = active_[static_cast<std::size_t>(max_active_)];
    if (bucket.empty()) {
      --max_active_;
      continue;
    }
    const std::uint32_t v = bucket.back();
    bucket.pop_back();
    in_active_[v] = 0;
    if (label_[v] >= total_ || excess_[v] == 0) continue;
    discharge(v);
    if (work_since_relabel_ > relabel_period) global_relabel();
  }
  return excess_[sink_];
}

std::vector<bool> MinCut::maximal_source_side() const {
  if (!solved_) throw std::logic_error("MinCut not solved");
  std::vector<std::uint8_t> reaches(total_, 0);
  reaches[sink_] = 1;
  std::vector<std::uint32_t> queue{sink_};
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const std::uint32_t w = queue[head];
    for (std::uint32_t i = first_[w]; i < first_[w + 1]; ++i) {
      const std::uint32_t u = arcs_[i].head;
      if (reaches[u]) continue;
      if (arcs_[arcs_[i].rev].res > 0) {
        reaches[u] = 1;
        queue.push_back(u);
      }
    }
  }
  std::vector<bool> side(n_);
  for (std::size_t v = 0; v < n_; ++v) side[v] = !reaches[v];
  return side;
}

}  // namespace rfimlab
