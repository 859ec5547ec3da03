#include "rfimlab/renorm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "rfimlab/disorder.hpp"
#include "rfimlab/parallel.hpp"

namespace rfimlab {

int ScaleLadder::L0() const {
  if (base_override > 0) return base_override;
  if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("scale ladder needs 0 < p <= 1 or an explicit L0");
  return static_cast<int>(std::floor(1.0 / p));
}

long long ScaleLadder::L(int n) const {
  if (n < 0) throw std::invalid_argument("scale index must be >= 0");
  long long v = L0();
  for (int i = 0; i < n; ++i) {
    v *= K;
    if (v > (1LL << 40)) throw std::overflow_error("scale too large");
  }
  return v;
}

void ScaleLadder::validate() const {
  if (K < 2) throw std::invalid_argument("K must be >= 2");
  if (D < 0) throw std::invalid_argument("D must be >= 0");
  (void)L0();
}

const char* to_string(BoxReason r) noexcept {
  switch (r) {
    case BoxReason::Clean: return "clean";
    case BoxReason::Confined: return "confined";
    case BoxReason::ClustersTooLarge: return "clusters-too-large";
    case BoxReason::BadSubboxesUnconfined: return "bad-subboxes-unconfined";
    case BoxReason::EscapeFrom3Box: return "escape-from-3box";
  }
  return "?";
}

namespace {

struct LocalGrowth {
  Lattice local;
  SiteConfig final_config;
  Coord origin;  // global coordinate of local (0, ..., 0)
};

// Growth of the configuration restricted to B(center, radius), on a local lattice.
LocalGrowth grow_in_box(const Lattice& lat, const SiteConfig& config, const Coord& center, long long radius,
                        const BPRule& rule) {
  if (lat.wrap()) throw std::invalid_argument("box classification runs on open boxes");
  if (static_cast<int>(center.size()) != lat.dim()) throw std::invalid_argument("center has wrong dimension");
  std::vector<int> extents;
  Coord origin;
  for (int k = 0; k < lat.dim(); ++k) {
    if (center[k] - radius < 0 || center[k] + radius >= lat.extents()[k])
      throw std::invalid_argument("box exceeds lattice");
    extents.push_back(static_cast<int>(2 * radius + 1));
    origin.push_back(static_cast<int>(center[k] - radius));
  }
  Lattice local = Lattice::box(extents);
  SiteConfig sub(local.size());
  Coord g(origin.size());
  for (std::size_t i = 0; i < local.size(); ++i) {
    for (int k = 0; k < lat.dim(); ++k) g[k] = origin[k] + local.coord_at(static_cast<Vertex>(i), k);
    const Vertex v = lat.index(g);
    if (config.initially_open(v))
      sub.seed_open(static_cast<Vertex>(i));
    else
      sub.set(static_cast<Vertex>(i), config[v]);
  }
  SiteConfig fin = bp_final(local, sub, rule);
  return {std::move(local), std::move(fin), std::move(origin)};
}

// Multiples of step within [lo, hi].
std::vector<long long> multiples_in(long long lo, long long hi, long long step) {
  std::vector<long long> out;
  long long c = lo >= 0 ? (lo + step - 1) / step * step : -((-lo) / step * step);
  for (; c <= hi; c += step) out.push_back(c);
  return out;
}

}  // namespace

BoxVerdict classify_L0(const Lattice& lat, const SiteConfig& config, const Coord& center, const BPRule& rule,
                       const ScaleLadder& ladder) {
  ladder.validate();
  const auto g = grow_in_box(lat, config, center, ladder.L(0), rule);
  BoxVerdict v;
  v.center = center;
  v.scale = 0;
  for (const auto& c : cluster_stats(g.local, g.final_config)) {
    if (c.diameter > ladder.D) {
      v.good = false;
      v.reason = BoxReason::ClustersTooLarge;
      break;
    }
  }
  return v;
}

BoxVerdict classify_Ln(const Lattice& lat, const SiteConfig& config, const Coord& center, const BPRule& rule,
                       const ScaleLadder& ladder, int n) {
  if (n < 1) throw std::invalid_argument("classify_Ln needs n >= 1");
  ladder.validate();
  const long long Ln = ladder.L(n);
  const long long Lp = ladder.L(n - 1);
  const int d = lat.dim();

  BoxVerdict v;
  v.center = center;
  v.scale = n;

  // Sub-boxes B(z, Lp) inside B(center, Ln), z in Lp Z^d.
  std::vector<std::vector<long long>> axes;
  for (int k = 0; k < d; ++k) axes.push_back(multiples_in(center[k] - Ln + Lp, center[k] + Ln - Lp, Lp));
  std::vector<Coord> bad;
  std::vector<std::size_t> idx(static_cast<std::size_t>(d), 0);
  Coord z(static_cast<std::size_t>(d));
  bool any = std::all_of(axes.begin(), axes.end(), [](const auto& a) { return !a.empty(); });
  while (any) {
    for (int k = 0; k < d; ++k) z[k] = static_cast<int>(axes[k][idx[k]]);
    if (!classify(lat, config, z, rule, ladder, n - 1).good) bad.push_back(z);
    int k = d - 1;
    while (k >= 0 && ++idx[k] == axes[k].size()) idx[k--] = 0;
    if (k < 0) break;
  }
  v.bad_subboxes = bad.size();
  if (bad.empty()) return v;

  // Candidate y: multiples of Lp with every bad z in B(y, 2 Lp), limited to
  // centers whose 3 Lp box meets the L_n box.
  std::vector<std::vector<long long>> ycands;
  for (int k = 0; k < d; ++k) {
    long long zmin = bad.front()[k];
    long long zmax = zmin;
    for (const auto& b : bad) {
      zmin = std::min<long long>(zmin, b[k]);
      zmax = std::max<long long>(zmax, b[k]);
    }
    const long long lo = std::max(zmax - 2 * Lp, center[k] - Ln - 3 * Lp);
    const long long hi = std::min(zmin + 2 * Lp, center[k] + Ln + 3 * Lp);
    ycands.push_back(multiples_in(lo, hi, Lp));
    if (ycands.back().empty()) {
      v.good = false;
      v.reason = BoxReason::BadSubboxesUnconfined;
      return v;
    }
  }

  const auto g = grow_in_box(lat, config, center, Ln, rule);
  const auto clusters = cluster_stats(g.local, g.final_config);
  // Per-cluster bounding box in global coordinates; |.|_inf distances to y
  // are then maxima over axes of interval distances.
  std::vector<std::vector<long long>> blo(clusters.size()), bhi(clusters.size());
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    blo[i].assign(static_cast<std::size_t>(d), std::numeric_limits<long long>::max());
    bhi[i].assign(static_cast<std::size_t>(d), std::numeric_limits<long long>::min());
    for (Vertex u : clusters[i].members) {
      for (int k = 0; k < d; ++k) {
        const long long x = g.origin[k] + g.local.coord_at(u, k);
        blo[i][k] = std::min(blo[i][k], x);
        bhi[i][k] = std::max(bhi[i][k], x);
      }
    }
  }
  const double reach = std::sqrt(static_cast<double>(ladder.K)) * static_cast<double>(Lp);
  // A cluster meets B(y, 3 Lp) iff some member is that close; the bounding box
  // is not enough for that test, so members are scanned.
  auto meets = [&](std::size_t i, const Coord& y) {
    for (Vertex u : clusters[i].members) {
      long long m = 0;
      for (int k = 0; k < d; ++k) m = std::max<long long>(m, std::llabs(g.origin[k] + g.local.coord_at(u, k) - y[k]));
      if (m <= 3 * Lp) return true;
    }
    return false;
  };
  auto within = [&](std::size_t i, const Coord& y) {
    for (int k = 0; k < d; ++k)
      if (static_cast<double>(std::max(y[k] - blo[i][k], bhi[i][k] - y[k])) > reach) return false;
    return true;
  };

  // Lexicographic scan; the first y that also confines the growth wins.
  Coord y(static_cast<std::size_t>(d));
  std::vector<std::size_t> yi(static_cast<std::size_t>(d), 0);
  for (;;) {
    for (int k = 0; k < d; ++k) y[k] = static_cast<int>(ycands[k][yi[k]]);
    bool ok = true;
    for (std::size_t i = 0; i < clusters.size() && ok; ++i)
      if (!within(i, y) && meets(i, y)) ok = false;
    if (ok) {
      v.y = y;
      v.reason = BoxReason::Confined;
      return v;
    }
    int k = d - 1;
    while (k >= 0 && ++yi[k] == ycands[k].size()) yi[k--] = 0;
    if (k < 0) break;
  }
  v.good = false;
  v.reason = BoxReason::EscapeFrom3Box;
  return v;
}

BoxVerdict classify(const Lattice& lat, const SiteConfig& config, const Coord& center, const BPRule& rule,
                    const ScaleLadder& ladder, int n) {
  return n == 0 ? classify_L0(lat, config, center, rule, ladder) : classify_Ln(lat, config, center, rule, ladder, n);
}

WilsonInterval wilson_interval(std::size_t successes, std::size_t trials, double z) {
  if (trials == 0) return {0.0, 1.0};
  if (successes > trials) throw std::invalid_argument("more successes than trials");
  const double n = static_cast<double>(trials);
  const double ph = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double mid = (ph + z2 / (2.0 * n)) / denom;
  const double half = z / denom * std::sqrt(ph * (1.0 - ph) / n + z2 / (4.0 * n * n));
  return {std::max(0.0, mid - half), std::min(1.0, mid + half)};
}

std::vector<PnRow> estimate_pn(const PnConfig& cfg, unsigned workers) {
  cfg.ladder.validate();
  cfg.rule.validate(cfg.d);
  if (cfg.trials < 1) throw std::invalid_argument("need at least one trial");
  std::vector<PnRow> rows;
  for (int n : cfg.levels) {
    const long long L = cfg.ladder.L(n);
    const double cost = std::pow(static_cast<double>(2 * L + 1), cfg.d);
    const auto affordable = static_cast<std::size_t>(std::max(0.0, std::floor(cfg.vertex_budget / cost)));
    PnRow row;
    row.n = n;
    row.L = L;
    row.trials = std::min<std::size_t>(static_cast<std::size_t>(cfg.trials), affordable);
    row.truncated = row.trials < static_cast<std::size_t>(cfg.trials);
    if (row.trials > 0) {
      const Lattice lat(cfg.d, static_cast<int>(2 * L + 1), false);
      const Coord center(static_cast<std::size_t>(cfg.d), static_cast<int>(L));
      std::vector<std::uint8_t> bad(row.trials, 0);
      parallel_for(row.trials, workers, [&](std::size_t t) {
        const auto seed = derive_seed(cfg.base_seed, {static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(t)});
        const auto init = sample_sites(seed, lat, cfg.ladder.p, cfg.q);
        bad[t] = classify(lat, init, center, cfg.rule, cfg.ladder, n).good ? 0 : 1;
      });
      row.bad = static_cast<std::size_t>(std::count(bad.begin(), bad.end(), 1));
      row.bad_freq = static_cast<double>(row.bad) / static_cast<double>(row.trials);
    }
    row.ci = wilson_interval(row.bad, row.trials);
    rows.push_back(row);
  }
  return rows;
}

Renormalization box_renormalize(const Lattice& lat, const std::vector<double>& h, double eps, double M) {
  if (h.size() != lat.size()) throw std::invalid_argument("field size does not match lattice");
  if (!(eps > 0.0)) throw std::invalid_argument("box renormalization needs eps > 0");
  const auto pq = open_closed_probs(M, eps);
  if (!(pq.p > 0.0)) throw std::invalid_argument("open probability underflows to zero");
  const int d = lat.dim();
  const double Lr = std::floor(-d * std::log(pq.p) / pq.p);
  if (Lr < 1.0) throw std::invalid_argument("tile side below one");
  std::vector<int> tiles;
  bool divides = true;
  for (int k = 0; k < d; ++k) {
    const int E = lat.extents()[k];
    if (Lr > E) throw std::invalid_argument("tile side exceeds lattice side");
    tiles.push_back(E / static_cast<int>(Lr));
    divides = divides && E % static_cast<int>(Lr) == 0;
  }
  const int L = static_cast<int>(Lr);
  const bool wrap = lat.wrap() && divides && lat.cubic() && tiles[0] >= 3;
  Lattice coarse = wrap ? Lattice(d, tiles[0], true) : Lattice::box(tiles);
  Renormalization r{L, pq.p, pq.q, coarse, SiteConfig(coarse.size()), BPRule::modified_rule(d - 1), tiles};

  for (std::size_t t = 0; t < coarse.size(); ++t) {
    const auto verts = tile_vertices(lat, r, static_cast<Vertex>(t));
    bool open = true;
    bool bad_vertex = false;
    for (Vertex v : verts) {
      const double a = eps * h[v] + M;
      open = open && a - 2.0 * d >= 0.0;
      bad_vertex = bad_vertex || a < 0.0;
    }
    bool lines_ok = !bad_vertex;
    // verts is row-major over the tile offsets; an axis-k line varies offset k.
    std::size_t stride = 1;
    for (int k = d - 1; k >= 0 && lines_ok; --k) {
      const std::size_t block = stride * static_cast<std::size_t>(L);
      for (std::size_t base = 0; base < verts.size() && lines_ok; ++base) {
        if ((base / stride) % static_cast<std::size_t>(L) != 0) continue;
        bool good = false;
        for (int j = 0; j < L && !good; ++j) good = eps * h[verts[base + j * stride]] + M - 2.0 >= 0.0;
        lines_ok = good;
      }
      stride = block;
    }
    if (open)
      r.initial.seed_open(static_cast<Vertex>(t));
    else if (!lines_ok)
      r.initial.set(static_cast<Vertex>(t), SiteState::Closed);
  }
  return r;
}

std::vector<Vertex> tile_vertices(const Lattice& fine, const Renormalization& r, Vertex tile) {
  const int d = fine.dim();
  const Coord c = r.coarse.coord(tile);
  std::vector<Vertex> out;
  out.reserve(static_cast<std::size_t>(std::pow(r.L, d)));
  Coord off(static_cast<std::size_t>(d), 0);
  Coord g(static_cast<std::size_t>(d));
  for (;;) {
    for (int k = 0; k < d; ++k) g[k] = c[k] * r.L + off[k];
    out.push_back(fine.index(g));
    int k = d - 1;
    while (k >= 0 && ++off[k] == r.L) off[k--] = 0;
    if (k < 0) break;
  }
  return out;
}

std::size_t soundness_violations(const Lattice& fine, const Renormalization& r, const SiteConfig& coarse_final,
                                 const SpinConfig& fine_config) {
  if (coarse_final.size() != r.coarse.size() || fine_config.size() != fine.size())
    throw std::invalid_argument("configuration sizes do not match");
  std::size_t bad = 0;
  for (std::size_t t = 0; t < r.coarse.size(); ++t) {
    if (!coarse_final.is_open(static_cast<Vertex>(t))) continue;
    const auto verts = tile_vertices(fine, r, static_cast<Vertex>(t));
    if (std::any_of(verts.begin(), verts.end(), [&](Vertex v) { return fine_config[v] < 0; })) ++bad;
  }
  return bad;
}

}  // namespace rfimlab
