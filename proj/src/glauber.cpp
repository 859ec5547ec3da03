#include "rfimlab/glauber.hpp"

#include <cmath>
#include <deque>
#include <limits>
#include <random>
#include <stdexcept>

namespace rfimlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_field(const Lattice& lat, const std::vector<double>& h, double eps) {
  if (h.size() != lat.size()) throw std::invalid_argument("field size does not match lattice");
  if (!(eps >= 0.0)) throw std::invalid_argument("noise intensity must be >= 0");
}

}  // namespace

GlauberEngine::GlauberEngine(Lattice lattice, std::vector<double> h, double eps)
    : lat_(std::move(lattice)),
      h_(std::move(h)),
      eps_(eps),
      M_(-kInf),
      spins_(SpinConfig::uniform(lat_.size(), -1)),
      nsum_(lat_.size(), -lat_.slots()) {
  check_field(lat_, h_, eps_);
  std::vector<Entry> init;
  init.reserve(lat_.size());
  for (std::size_t v = 0; v < lat_.size(); ++v) init.push_back({trigger(static_cast<Vertex>(v)), static_cast<Vertex>(v)});
  heap_ = decltype(heap_)(std::greater<>{}, std::move(init));
}

void GlauberEngine::drop_stale() {
  while (!heap_.empty()) {
    const Entry& e = heap_.top();
    if (spins_[e.v] < 0 && e.trigger == trigger(e.v)) return;
    heap_.pop();
  }
}

double GlauberEngine::next_trigger() {
  drop_stale();
  return heap_.empty() ? kInf : heap_.top().trigger;
}

void GlauberEngine::flip(Vertex v, std::vector<Vertex>& cascade, std::vector<std::uint8_t>& queued,
                         AvalancheEvent& ev) {
  ev.flipped.push_back(v);
  ev.plus_neighbors.push_back((nsum_[v] + lat_.slots()) / 2);
  spins_.set(v, 1);
  ++plus_;
  for (Vertex w : lat_.neighbor_slots(v)) {
    if (w == kNoVertex) continue;
    nsum_[w] += 2;
    if (spins_[w] > 0 || queued[w]) continue;
    const double t = trigger(w);
    if (t <= M_) {
      queued[w] = 1;
      cascade.push_back(w);
    } else {
      heap_.push({t, w});
    }
  }
}

std::vector<AvalancheEvent> GlauberEngine::advance_to(double M_end) {
  if (M_end < M_) throw std::invalid_argument("advance_to requires nondecreasing M");
  std::vector<AvalancheEvent> events;
  std::vector<std::uint8_t> queued(lat_.size(), 0);
  std::vector<Vertex> cascade;
  // An empty heap reports +inf, so test emptiness too: M_end may be +inf.
  while (next_trigger() <= M_end && !heap_.empty()) {
    const Entry top = heap_.top();
    heap_.pop();
    M_ = top.trigger;
    AvalancheEvent ev;
    ev.M = M_;
    ev.seed = top.v;
    cascade.assign(1, top.v);
    queued[top.v] = 1;
    for (std::size_t i = 0; i < cascade.size(); ++i) flip(cascade[i], cascade, queued, ev);
    for (Vertex v : cascade) queued[v] = 0;
    ev.plus_fraction_after = static_cast<double>(plus_) / static_cast<double>(lat_.size());
    events.push_back(std::move(ev));
  }
  if (M_end > M_) M_ = M_end;
  return events;
}

GlauberRun glauber_evolve(const Lattice& lat, const std::vector<double>& h, double eps, double M_end) {
  GlauberEngine engine(lat, h, eps);
  GlauberRun run;
  run.events = engine.advance_to(M_end);
  run.final_config = engine.config();
  return run;
}

SpinConfig glauber_at(const Lattice& lat, const std::vector<double>& h, double eps, double M) {
  check_field(lat, h, eps);
  SpinConfig s = SpinConfig::uniform(lat.size(), -1);
  std::vector<int> nsum(lat.size(), -lat.slots());
  auto eligible = [&](Vertex v) { return nsum[v] + M + eps * h[v] >= 0.0; };
  std::deque<Vertex> queue;
  std::vector<std::uint8_t> queued(lat.size(), 0);
  for (std::size_t v = 0; v < lat.size(); ++v) {
    if (eligible(static_cast<Vertex>(v))) {
      queue.push_back(static_cast<Vertex>(v));
      queued[v] = 1;
    }
  }
  while (!queue.empty()) {
    const Vertex v = queue.front();
    queue.pop_front();
    s.set(v, 1);
    for (Vertex w : lat.neighbor_slots(v)) {
      if (w == kNoVertex) continue;
      nsum[w] += 2;
      if (!queued[w] && eligible(w)) {
        queued[w] = 1;
        queue.push_back(w);
      }
    }
  }
  return s;
}

std::size_t eligibility_violations(const Lattice& lat, const std::vector<double>& h, double eps,
                                   const std::vector<AvalancheEvent>& events) {
  check_field(lat, h, eps);
  const int d = lat.dim();
  std::size_t bad = 0;
  for (const auto& ev : events) {
    if (ev.plus_neighbors.size() != ev.flipped.size()) throw std::invalid_argument("event lacks neighbor counts");
    for (std::size_t i = 0; i < ev.flipped.size(); ++i) {
      // Thresholds written as M >= c - eps h, the same rounding as the triggers.
      const double field = eps * h[ev.flipped[i]];
      const int k = ev.plus_neighbors[i];
      const bool open = ev.M >= 2.0 - field;
      const bool closed = ev.M < -field;
      const bool ok = open || (!closed && k >= d) || (closed && k >= d + 1);
      if (!ok) ++bad;
    }
  }
  return bad;
}

double heat_bath_plus_probability(double local_field, double T) noexcept {
  const double x = 2.0 * local_field / T;
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

std::vector<MagnetizationSample> positive_T_glauber(const Lattice& lat, const std::vector<double>& h, double eps,
                                                    double T, double alpha, double M_lo, double M_hi,
                                                    int grid_points, std::uint64_t seed) {
  check_field(lat, h, eps);
  if (!(T > 0.0)) throw std::invalid_argument("temperature must be positive");
  if (!(alpha > 0.0)) throw std::invalid_argument("clock rate must be positive");
  if (!(M_hi >= M_lo)) throw std::invalid_argument("M range is empty");
  if (grid_points < 1) throw std::invalid_argument("need at least one sample point");

  const std::size_t n = lat.size();
  SpinConfig s = SpinConfig::uniform(n, -1);
  std::vector<int> nsum(n, -lat.slots());
  long long mag = -static_cast<long long>(n);

  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> wait(alpha * static_cast<double>(n));
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::uniform_real_distribution<double> coin(0.0, 1.0);

  std::vector<MagnetizationSample> out;
  out.reserve(static_cast<std::size_t>(grid_points));
  auto grid_at = [&](int i) {
    return grid_points == 1 ? M_lo : M_lo + (M_hi - M_lo) * static_cast<double>(i) / (grid_points - 1);
  };
  auto record = [&](double m) {
    out.push_back({m, static_cast<double>(mag + static_cast<long long>(n)) / (2.0 * static_cast<double>(n)), mag});
  };

  double M = M_lo;
  int next = 0;
  while (next < grid_points && grid_at(next) <= M) record(grid_at(next++));
  while (next < grid_points) {
    M += wait(rng);
    while (next < grid_points && grid_at(next) < M) record(grid_at(next++));
    if (next >= grid_points) break;
    const auto v = static_cast<Vertex>(pick(rng));
    const double p = heat_bath_plus_probability(nsum[v] + M + eps * h[v], T);
    const int spin = coin(rng) < p ? 1 : -1;
    if (spin == s[v]) continue;
    s.set(v, spin);
    mag += 2 * spin;
    for (Vertex w : lat.neighbor_slots(v))
      if (w != kNoVertex) nsum[w] += 2 * spin;
  }
  return out;
}

}  // namespace rfimlab
