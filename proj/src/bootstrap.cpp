#include "rfimlab/bootstrap.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>

#include "rfimlab/disorder.hpp"
#include "rfimlab/parallel.hpp"
#include "rfimlab/union_find.hpp"

namespace rfimlab {

namespace {
constexpr std::uint64_t kSiteStream = 0xb007;
}  // namespace

std::size_t SiteConfig::count(SiteState s) const noexcept {
  return static_cast<std::size_t>(std::count(state_.begin(), state_.end(), s));
}

std::int8_t SiteConfig::encode(Vertex v) const noexcept {
  return static_cast<std::int8_t>(static_cast<std::uint8_t>(state_[v]) | (initial_[v] ? 0x10 : 0x00));
}

SiteConfig SiteConfig::decode(const std::vector<std::int8_t>& bytes) {
  SiteConfig c(bytes.size());
  for (std::size_t v = 0; v < bytes.size(); ++v) {
    const auto b = static_cast<std::uint8_t>(bytes[v]);
    const std::uint8_t s = b & 0x0f;
    const bool initial = (b & 0x10) != 0;
    if (s > 2 || (b & 0xe0) != 0) throw std::invalid_argument("invalid site byte");
    if (initial && s != 1) throw std::invalid_argument("initially open flag on a non-open site");
    c.state_[v] = static_cast<SiteState>(s);
    c.initial_[v] = initial ? 1 : 0;
  }
  return c;
}

void BPRule::validate(int d) const {
  if (r < 1) throw std::invalid_argument("threshold must be >= 1");
  if (modified ? r > d : r > 2 * d) throw std::invalid_argument("threshold exceeds the available neighbors");
  if (closed_threshold && (*closed_threshold < 1 || *closed_threshold > 2 * d))
    throw std::invalid_argument("closed threshold out of range");
}

std::string BPRule::describe() const {
  std::string s = modified ? "modified" : "standard";
  s += ";r=" + std::to_string(r);
  if (modified) s += ";directions=axes";
  if (closed_threshold) s += ";closed_opens_at=" + std::to_string(*closed_threshold);
  return s;
}

double site_uniform(std::uint64_t seed, Vertex v) noexcept { return uniform_at(seed, v, kSiteStream); }

SiteConfig sample_sites(std::uint64_t seed, const Lattice& lat, double p, double q) {
  if (!(p >= 0.0 && q >= 0.0 && p + q <= 1.0)) throw std::invalid_argument("need p, q >= 0 and p + q <= 1");
  SiteConfig c(lat.size());
  for (std::size_t v = 0; v < lat.size(); ++v) {
    const double u = site_uniform(seed, static_cast<Vertex>(v));
    if (u < q)
      c.set(static_cast<Vertex>(v), SiteState::Closed);
    else if (u > 1.0 - p)
      c.seed_open(static_cast<Vertex>(v));
  }
  return c;
}

SiteConfig bp_final(const Lattice& lat, const SiteConfig& init, const BPRule& rule, std::vector<Vertex>* trace) {
  if (init.size() != lat.size()) throw std::invalid_argument("configuration does not match lattice");
  rule.validate(lat.dim());
  const int d = lat.dim();
  const std::size_t n = lat.size();
  SiteConfig c = init;
  std::vector<std::uint8_t> count(n, 0);
  std::vector<std::uint8_t> axis_count(rule.modified ? n * d : 0, 0);
  std::vector<std::uint8_t> axes(rule.modified ? n : 0, 0);

  auto add_open_neighbor = [&](Vertex w, int slot) {
    ++count[w];
    if (rule.modified && axis_count[static_cast<std::size_t>(w) * d + slot / 2]++ == 0) ++axes[w];
  };
  auto ready = [&](Vertex v) {
    switch (c[v]) {
      case SiteState::Empty: return (rule.modified ? axes[v] : count[v]) >= rule.r;
      case SiteState::Closed: return rule.closed_threshold.has_value() && count[v] >= *rule.closed_threshold;
      case SiteState::Open: return false;
    }
    return false;
  };

  for (std::size_t v = 0; v < n; ++v) {
    if (!c.is_open(static_cast<Vertex>(v))) continue;
    auto nb = lat.neighbor_slots(static_cast<Vertex>(v));
    for (int k = 0; k < lat.slots(); ++k)
      if (nb[k] != kNoVertex) add_open_neighbor(nb[k], k ^ 1);
  }
  std::deque<Vertex> queue;
  std::vector<std::uint8_t> queued(n, 0);
  for (std::size_t v = 0; v < n; ++v) {
    if (ready(static_cast<Vertex>(v))) {
      queue.push_back(static_cast<Vertex>(v));
      queued[v] = 1;
    }
  }
  while (!queue.empty()) {
    const Vertex v = queue.front();
    queue.pop_front();
    c.set(v, SiteState::Open);
    if (trace) trace->push_back(v);
    auto nb = lat.neighbor_slots(v);
    for (int k = 0; k < lat.slots(); ++k) {
      const Vertex w = nb[k];
      if (w == kNoVertex) continue;
      // Seen from w, v lies across slot k ^ 1.
      add_open_neighbor(w, k ^ 1);
      if (!queued[w] && ready(w)) {
        queued[w] = 1;
        queue.push_back(w);
      }
    }
  }
  return c;
}

namespace {

std::vector<int> axis_span(const Lattice& lat, int k, int lo, int hi) {
  const int E = lat.extents()[k];
  std::vector<int> out;
  if (lat.wrap()) {
    if (lo < 0 || lo >= E || hi < 0 || hi >= E) throw std::invalid_argument("block bound outside lattice");
    for (int x = lo;; x = (x + 1) % E) {
      out.push_back(x);
      if (x == hi || static_cast<int>(out.size()) == E) break;
    }
  } else {
    if (lo < 0 || hi >= E || lo > hi) throw std::invalid_argument("block bound outside lattice");
    for (int x = lo; x <= hi; ++x) out.push_back(x);
  }
  return out;
}

// Opens produced by evolving only inside the block spanned by `spans`.
std::vector<Vertex> block_openings(const Lattice& lat, const SiteConfig& config, const BPRule& rule,
                                   const std::vector<std::vector<int>>& spans) {
  std::vector<int> extents;
  for (const auto& s : spans) extents.push_back(static_cast<int>(s.size()));
  const Lattice local = Lattice::box(extents);
  std::vector<Vertex> to_global(local.size());
  SiteConfig sub(local.size());
  Coord g(static_cast<std::size_t>(lat.dim()));
  for (std::size_t i = 0; i < local.size(); ++i) {
    for (int k = 0; k < lat.dim(); ++k) g[k] = spans[k][local.coord_at(static_cast<Vertex>(i), k)];
    const Vertex v = lat.index(g);
    to_global[i] = v;
    if (config.initially_open(v))
      sub.seed_open(static_cast<Vertex>(i));
    else
      sub.set(static_cast<Vertex>(i), config[v]);
  }
  std::vector<Vertex> opened;
  bp_final(local, sub, rule, &opened);
  for (auto& v : opened) v = to_global[v];
  return opened;
}

}  // namespace

SiteConfig bp_final_in_block(const Lattice& lat, const SiteConfig& config, const BPRule& rule,
                             const std::vector<int>& lo, const std::vector<int>& hi) {
  if (config.size() != lat.size()) throw std::invalid_argument("configuration does not match lattice");
  if (static_cast<int>(lo.size()) != lat.dim() || static_cast<int>(hi.size()) != lat.dim())
    throw std::invalid_argument("block bounds have wrong dimension");
  std::vector<std::vector<int>> spans;
  for (int k = 0; k < lat.dim(); ++k) spans.push_back(axis_span(lat, k, lo[k], hi[k]));
  SiteConfig out = config;
  for (Vertex v : block_openings(lat, config, rule, spans)) out.set(v, SiteState::Open);
  return out;
}

BoxedResult bp_final_boxed(const Lattice& lat, const SiteConfig& init, const BPRule& rule,
                           const std::vector<int>& scales) {
  if (init.size() != lat.size()) throw std::invalid_argument("configuration does not match lattice");
  rule.validate(lat.dim());
  if (scales.empty()) throw std::invalid_argument("need at least one scale");
  for (std::size_t i = 0; i < scales.size(); ++i)
    if (scales[i] < 1 || (i > 0 && scales[i] <= scales[i - 1])) throw std::invalid_argument("scales must increase");

  const int d = lat.dim();
  auto covers = [&](int L) {
    for (int k = 0; k < d; ++k) {
      const int E = lat.extents()[k];
      if (lat.wrap() ? 2 * L + 1 < E : L < E - 1) return false;
    }
    return true;
  };
  // Per-axis blocks of the boxes B(x, L), x in L Z, clipped or wrapped.
  auto axis_blocks = [&](int k, int L) {
    const int E = lat.extents()[k];
    std::vector<std::vector<int>> blocks;
    if (lat.wrap()) {
      if (2 * L + 1 >= E) return std::vector<std::vector<int>>{axis_span(lat, k, 0, E - 1)};
      for (int c = 0; c < E; c += L) blocks.push_back(axis_span(lat, k, ((c - L) % E + E) % E, (c + L) % E));
    } else {
      for (int c = 0; c - L <= E - 1; c += L)
        blocks.push_back(axis_span(lat, k, std::max(0, c - L), std::min(E - 1, c + L)));
    }
    return blocks;
  };

  BoxedResult res;
  SiteConfig current = init;
  std::vector<int> plan = scales;
  const double ratio = scales.size() >= 2 ? static_cast<double>(scales.back()) / scales[scales.size() - 2] : 2.0;
  while (!covers(plan.back())) {
    const int L = plan.back();
    plan.push_back(std::max(L + 1, static_cast<int>(std::ceil(L * ratio))));
  }

  for (int L : plan) {
    res.scales.push_back(L);
    if (covers(L)) {
      current = bp_final(lat, current, rule);
      break;
    }
    std::vector<std::vector<std::vector<int>>> per_axis;
    for (int k = 0; k < d; ++k) per_axis.push_back(axis_blocks(k, L));
    SiteConfig next = current;
    std::vector<std::size_t> idx(static_cast<std::size_t>(d), 0);
    std::vector<std::vector<int>> spans(static_cast<std::size_t>(d));
    for (;;) {
      for (int k = 0; k < d; ++k) spans[k] = per_axis[k][idx[k]];
      for (Vertex v : block_openings(lat, current, rule, spans)) next.set(v, SiteState::Open);
      int k = d - 1;
      while (k >= 0 && ++idx[k] == per_axis[k].size()) idx[k--] = 0;
      if (k < 0) break;
    }
    current = std::move(next);
  }
  res.final_config = std::move(current);
  return res;
}

std::vector<ClusterInfo> cluster_stats(const Lattice& lat, const SiteConfig& config) {
  if (config.size() != lat.size()) throw std::invalid_argument("configuration does not match lattice");
  const std::size_t n = lat.size();
  UnionFind uf(n);
  for (std::size_t v = 0; v < n; ++v) {
    if (!config.is_open(static_cast<Vertex>(v))) continue;
    auto nb = lat.neighbor_slots(static_cast<Vertex>(v));
    for (int k = 0; k < lat.slots(); k += 2)
      if (nb[k] != kNoVertex && config.is_open(nb[k])) uf.unite(static_cast<std::uint32_t>(v), nb[k]);
  }
  std::vector<std::int64_t> slot(n, -1);
  std::vector<ClusterInfo> out;
  for (std::size_t v = 0; v < n; ++v) {
    if (!config.is_open(static_cast<Vertex>(v))) continue;
    const auto r = uf.find(static_cast<std::uint32_t>(v));
    if (slot[r] < 0) {
      slot[r] = static_cast<std::int64_t>(out.size());
      out.emplace_back();
    }
    auto& c = out[static_cast<std::size_t>(slot[r])];
    c.members.push_back(static_cast<Vertex>(v));
    if (config.initially_open(static_cast<Vertex>(v))) ++c.initial_count;
  }
  for (auto& c : out) {
    c.size = c.members.size();
    c.diameter = linf_diameter(lat, c.members);
    if (lat.wrap()) continue;
    for (int k = 0; k < lat.dim() && !c.spanning; ++k) {
      const int E = lat.extents()[k];
      if (E < 2) continue;
      bool low = false;
      bool high = false;
      for (Vertex v : c.members) {
        const int x = lat.coord_at(v, k);
        low = low || x == 0;
        high = high || x == E - 1;
      }
      c.spanning = low && high;
    }
  }
  return out;
}

long long u_statistic(const Lattice& lat, const SiteConfig& config) {
  long long u = 0;
  for (const auto& c : cluster_stats(lat, config)) u += c.diameter + 2;
  return u;
}

UMonitorReport u_monitor(const Lattice& lat, const SiteConfig& init, const std::vector<Vertex>* trace) {
  if (!trace) throw std::invalid_argument("u_monitor needs a traced evolution");
  if (lat.wrap()) throw std::invalid_argument("u_monitor is defined on open boxes");
  if (init.size() != lat.size()) throw std::invalid_argument("configuration does not match lattice");
  const int d = lat.dim();
  const std::size_t n = lat.size();
  UnionFind uf(n);
  std::vector<int> lo(n * d);
  std::vector<int> hi(n * d);
  std::vector<std::uint8_t> open(n, 0);
  for (std::size_t v = 0; v < n; ++v) {
    for (int k = 0; k < d; ++k) lo[v * d + k] = hi[v * d + k] = lat.coord_at(static_cast<Vertex>(v), k);
    open[v] = init.is_open(static_cast<Vertex>(v)) ? 1 : 0;
  }
  auto diam = [&](std::uint32_t r) {
    int m = 0;
    for (int k = 0; k < d; ++k) m = std::max(m, hi[r * d + k] - lo[r * d + k]);
    return m;
  };
  auto join = [&](std::uint32_t a, std::uint32_t b) {
    a = uf.find(a);
    b = uf.find(b);
    if (a == b) return a;
    const auto r = uf.unite(a, b);
    const auto o = r == a ? b : a;
    for (int k = 0; k < d; ++k) {
      lo[r * d + k] = std::min(lo[r * d + k], lo[o * d + k]);
      hi[r * d + k] = std::max(hi[r * d + k], hi[o * d + k]);
    }
    return r;
  };
  for (std::size_t v = 0; v < n; ++v) {
    if (!open[v]) continue;
    auto nb = lat.neighbor_slots(static_cast<Vertex>(v));
    for (int k = 0; k < lat.slots(); k += 2)
      if (nb[k] != kNoVertex && open[nb[k]]) join(static_cast<std::uint32_t>(v), nb[k]);
  }
  long long U = 0;
  for (std::size_t v = 0; v < n; ++v)
    if (open[v] && uf.find(static_cast<std::uint32_t>(v)) == v) U += diam(static_cast<std::uint32_t>(v)) + 2;

  UMonitorReport rep;
  rep.initial_U = U;
  rep.max_step = std::numeric_limits<long long>::min();
  std::vector<std::uint32_t> roots;
  for (Vertex v : *trace) {
    if (v >= n || open[v]) throw std::invalid_argument("trace opens an invalid or already open vertex");
    roots.clear();
    for (Vertex w : lat.neighbor_slots(v)) {
      if (w == kNoVertex || !open[w]) continue;
      const auto r = uf.find(w);
      if (std::find(roots.begin(), roots.end(), r) == roots.end()) roots.push_back(r);
    }
    long long before = 0;
    for (auto r : roots) before += diam(r) + 2;
    open[v] = 1;
    std::uint32_t r = v;
    for (auto o : roots) r = join(r, o);
    const long long delta = (diam(r) + 2) - before;
    U += delta;
    rep.max_step = std::max(rep.max_step, delta);
    if (delta > 0) rep.non_increasing = false;
    ++rep.steps;
  }
  if (rep.steps == 0) rep.max_step = 0;
  rep.final_U = U;
  return rep;
}

PhaseScanResult phase_scan(const PhaseScanConfig& cfg, unsigned workers) {
  if (cfg.trials < 1) throw std::invalid_argument("need at least one trial");
  if (cfg.p_grid.empty()) throw std::invalid_argument("empty p grid");
  cfg.rule.validate(cfg.d);
  const Lattice lat(cfg.d, cfg.L, cfg.wrap);
  const Vertex origin = lat.index(Coord(static_cast<std::size_t>(cfg.d), cfg.L / 2));
  const std::size_t T = static_cast<std::size_t>(cfg.trials);

  PhaseScanResult res;
  res.trials.resize(cfg.p_grid.size() * T);
  parallel_for(res.trials.size(), workers, [&](std::size_t i) {
    const double p = cfg.p_grid[i / T];
    const int t = static_cast<int>(i % T);
    const double q = cfg.q_scaled ? cfg.q_value * std::pow(p, cfg.d) : cfg.q_value;
    const std::uint64_t seed = derive_seed(cfg.base_seed, {static_cast<std::uint64_t>(t)});
    const SiteConfig fin = bp_final(lat, sample_sites(seed, lat, p, q), cfg.rule);
    PhaseTrialRow& row = res.trials[i];
    row.p = p;
    row.q = q;
    row.trial = t;
    row.seed = seed;
    row.density = static_cast<double>(fin.count(SiteState::Open)) / static_cast<double>(lat.size());
    row.origin_open = fin.is_open(origin);
    if (!cfg.wrap) {
      const auto clusters = cluster_stats(lat, fin);
      row.spanning = std::any_of(clusters.begin(), clusters.end(), [](const ClusterInfo& c) { return c.spanning; });
    }
  });
  for (std::size_t j = 0; j < cfg.p_grid.size(); ++j) {
    PhaseRow row;
    row.p = cfg.p_grid[j];
    row.trials = cfg.trials;
    for (std::size_t t = 0; t < T; ++t) {
      const auto& tr = res.trials[j * T + t];
      row.q = tr.q;
      row.density += tr.density;
      row.origin_freq += tr.origin_open ? 1.0 : 0.0;
      row.spanning_freq += tr.spanning ? 1.0 : 0.0;
    }
    row.density /= cfg.trials;
    row.origin_freq /= cfg.trials;
    row.spanning_freq /= cfg.trials;
    res.rows.push_back(row);
  }
  return res;
}

}  // namespace rfimlab
