#include "rfimlab/experiment.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>

#include "json.hpp"
#include "rfimlab/bootstrap.hpp"
#include "rfimlab/disorder.hpp"
#include "rfimlab/glauber.hpp"
#include "rfimlab/groundstate.hpp"
#include "rfimlab/gs_evolution.hpp"
#include "rfimlab/parallel.hpp"
#include "rfimlab/renorm.hpp"
#include "rfimlab/snapshot.hpp"

namespace rfimlab {

namespace {

using json = nlohmann::json;
using VT = ValueType;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    const auto piece = trim(s.substr(start, comma == std::string_view::npos ? s.npos : comma - start));
    if (!piece.empty()) out.push_back(piece);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

long long parse_int(const std::string& key, std::string_view s) {
  long long v = 0;
  const auto t = trim(s);
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
    throw ConfigError("key '" + key + "': not an integer: '" + t + "'");
  return v;
}

double parse_double(const std::string& key, std::string_view s) {
  const auto t = trim(s);
  if (t == "inf" || t == "+inf") return std::numeric_limits<double>::infinity();
  if (t == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty() || std::isnan(v))
    throw ConfigError("key '" + key + "': not a number: '" + t + "'");
  return v;
}

bool parse_bool(const std::string& key, std::string_view s) {
  std::string t = trim(s);
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw ConfigError("key '" + key + "': not a boolean: '" + t + "'");
}

template <class T, class F>
std::string join(const std::vector<T>& xs, F&& fmt) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ',';
    out += fmt(xs[i]);
  }
  return out;
}

// Canonical text of a value, so equal configs hash equally however they were written.
std::string canonical(const KeySpec& spec, const std::string& raw) {
  switch (spec.type) {
    case VT::Int: return std::to_string(parse_int(spec.name, raw));
    case VT::Double: return format_double(parse_double(spec.name, raw));
    case VT::Bool: return parse_bool(spec.name, raw) ? "true" : "false";
    case VT::String: return trim(raw);
    case VT::IntList: {
      std::vector<long long> xs;
      for (const auto& p : split_list(raw)) xs.push_back(parse_int(spec.name, p));
      return join(xs, [](long long v) { return std::to_string(v); });
    }
    case VT::DoubleList: {
      std::vector<double> xs;
      for (const auto& p : split_list(raw)) xs.push_back(parse_double(spec.name, p));
      return join(xs, format_double);
    }
    case VT::Seeds: {
      try {
        (void)parse_seed_list(raw);
      } catch (const std::exception& e) {
        throw ConfigError("key '" + spec.name + "': " + e.what());
      }
      std::string t;
      for (char c : raw)
        if (!std::isspace(static_cast<unsigned char>(c))) t += c;
      return t;
    }
  }
  return raw;
}

KeySpec key(std::string name, VT type, std::optional<std::string> def, std::string help) {
  return {std::move(name), type, std::move(def), std::move(help)};
}

std::vector<KeySpec> with_common(std::vector<KeySpec> keys) {
  keys.push_back(key("workers", VT::Int, "0", "worker threads (0: RFIMLAB_WORKERS or hardware)"));
  return keys;
}

const std::map<std::string, std::vector<KeySpec>, std::less<>>& schemas() {
  static const std::map<std::string, std::vector<KeySpec>, std::less<>> s = [] {
    std::map<std::string, std::vector<KeySpec>, std::less<>> m;
    m["gs-evolve"] = with_common({
        key("d", VT::Int, "2", "dimension"),
        key("N", VT::IntList, std::nullopt, "side lengths"),
        key("wrap", VT::Bool, "true", "torus (true) or open box"),
        key("boundary", VT::String, "none", "open-box boundary spins: none, plus, minus"),
        key("eps", VT::Double, std::nullopt, "disorder strength"),
        key("tol", VT::Double, "1e-07", "bisection tolerance in M"),
        key("seeds", VT::Seeds, "1", "field seeds"),
    });
    m["glauber"] = with_common({
        key("d", VT::Int, "2", "dimension"),
        key("N", VT::Int, std::nullopt, "side length"),
        key("wrap", VT::Bool, "true", "torus (true) or open box with frozen minus outside"),
        key("eps", VT::Double, std::nullopt, "disorder strength"),
        key("M-end", VT::Double, "inf", "final M of the evolution"),
        key("M-grid", VT::DoubleList, "", "M values at which the plus fraction is recorded"),
        key("events", VT::Bool, "true", "write the avalanche event log"),
        key("snapshot", VT::Bool, "false", "write the final configuration per seed"),
        key("compare-gs", VT::Bool, "false", "record whether the ground state dominates at each grid M"),
        key("nesting-check", VT::Bool, "false", "check evolve(M1) then M2 equals the fixed point at M2"),
        key("seeds", VT::Seeds, "1", "field seeds"),
    });
    m["glauber-t"] = with_common({
        key("d", VT::Int, "2", "dimension"),
        key("N", VT::Int, std::nullopt, "side length"),
        key("wrap", VT::Bool, "true", "torus (true) or open box"),
        key("eps", VT::Double, std::nullopt, "disorder strength"),
        key("T", VT::Double, std::nullopt, "temperature"),
        key("alpha", VT::Double, "1", "clock rate per unit M"),
        key("M-lo", VT::Double, std::nullopt, "start of the M range"),
        key("M-hi", VT::Double, std::nullopt, "end of the M range"),
        key("grid", VT::Int, "21", "number of recorded M values"),
        key("seeds", VT::Seeds, "1", "field seeds"),
    });
    m["bootstrap"] = with_common({
        key("input", VT::String, "", "site snapshot to evolve instead of sampling"),
        key("golden", VT::String, "", "site snapshot the final state must equal"),
        key("d", VT::Int, "2", "dimension"),
        key("N", VT::Int, "64", "side length"),
        key("wrap", VT::Bool, "false", "torus (true) or open box"),
        key("p", VT::Double, "0.05", "open density"),
        key("q", VT::Double, "0", "closed density"),
        key("r", VT::Int, "2", "threshold"),
        key("modified", VT::Bool, "false", "count axes instead of neighbors"),
        key("closed-threshold", VT::Int, "0", "open neighbors that open a closed site (0: never)"),
        key("scales", VT::IntList, "", "box scales for the staged evolution check"),
        key("snapshot", VT::Bool, "true", "write the final configuration"),
        key("seeds", VT::Seeds, "1", "site seeds"),
    });
    m["phase-scan"] = with_common({
        key("d", VT::Int, "2", "dimension"),
        key("N", VT::Int, "64", "side length"),
        key("wrap", VT::Bool, "false", "torus (true) or open box"),
        key("p-grid", VT::DoubleList, std::nullopt, "open densities"),
        key("q-law", VT::String, "scaled", "scaled (q = q * p^d) or fixed"),
        key("q", VT::Double, std::nullopt, "closed density or its prefactor"),
        key("trials", VT::Int, "10", "trials per p"),
        key("r", VT::Int, "2", "threshold"),
        key("modified", VT::Bool, "false", "count axes instead of neighbors"),
        key("closed-threshold", VT::Int, "0", "open neighbors that open a closed site (0: never)"),
        key("seed", VT::Seeds, "1", "base seed"),
    });
    m["renorm"] = with_common({
        key("mode", VT::String, "box", "box (tile renormalization) or pn (bad-box frequencies)"),
        key("d", VT::Int, "2", "dimension"),
        key("N", VT::Int, "128", "side length (box mode)"),
        key("wrap", VT::Bool, "true", "torus (true) or open box (box mode)"),
        key("eps", VT::Double, "1", "disorder strength (box mode)"),
        key("M", VT::Double, "1.5", "external field (box mode)"),
        key("snapshot", VT::Bool, "false", "write the coarse configuration (box mode)"),
        key("p", VT::Double, "0.02", "open density (pn mode)"),
        key("q", VT::Double, "0", "closed density (pn mode)"),
        key("K", VT::Int, "4", "scale ratio (pn mode)"),
        key("D", VT::Int, "16", "scale-0 diameter bound (pn mode)"),
        key("levels", VT::IntList, "0,1", "scales to estimate (pn mode)"),
        key("trials", VT::Int, "100", "trials per level (pn mode)"),
        key("r", VT::Int, "2", "threshold (pn mode)"),
        key("modified", VT::Bool, "false", "count axes instead of neighbors (pn mode)"),
        key("seeds", VT::Seeds, "1", "field seeds (box mode); the first is the base seed in pn mode"),
    });
    m["selftest"] = with_common({
        key("d", VT::Int, "2", "dimension"),
        key("N", VT::Int, "8", "side length"),
        key("eps", VT::Double, "1", "disorder strength"),
        key("seeds", VT::Seeds, "1..50", "seeds"),
    });
    return m;
  }();
  return s;
}

const KeySpec& find_spec(const std::string& engine, const std::string& name) {
  for (const auto& k : engine_schema(engine))
    if (k.name == name) return k;
  throw ConfigError("engine '" + engine + "' has no key '" + name + "'");
}

// ---- output helpers ----

class Csv {
 public:
  Csv(const ExperimentConfig& cfg, std::vector<std::string> columns) {
    out_ = "# format=" + std::string(kFormatTag) + " engine=" + cfg.engine() + " config_hash=" + cfg.hash_hex() + "\n";
    for (const auto& k : engine_schema(cfg.engine())) out_ += "# " + k.name + "=" + cfg.values().at(k.name) + "\n";
    out_ += "seed,config_hash";
    for (const auto& c : columns) out_ += "," + c;
    out_ += "\n";
    hash_ = cfg.hash_hex();
  }
  void row(std::uint64_t seed, const std::vector<std::string>& cells) { out_ += line(seed, cells); }
  std::string line(std::uint64_t seed, const std::vector<std::string>& cells) const {
    std::string s = std::to_string(seed) + "," + hash_;
    for (const auto& c : cells) s += "," + c;
    return s + "\n";
  }
  void append(const std::string& lines) { out_ += lines; }
  const std::string& str() const noexcept { return out_; }

 private:
  std::string out_;
  std::string hash_;
};

std::string fd(double x) { return format_double(x); }
std::string fi(long long x) { return std::to_string(x); }
std::string fu(std::size_t x) { return std::to_string(x); }
std::string fb(bool b) { return b ? "1" : "0"; }

json config_record(const ExperimentConfig& cfg) {
  json c = json::object();
  for (const auto& [k, v] : cfg.values()) c[k] = v;
  return {{"type", "config"}, {"format", kFormatTag}, {"engine", cfg.engine()}, {"config_hash", cfg.hash_hex()},
          {"config", c}};
}

std::string jsonl_header(const ExperimentConfig& cfg) { return config_record(cfg).dump() + "\n"; }

json event_base(const ExperimentConfig& cfg, std::uint64_t seed, const char* type) {
  return {{"type", type}, {"format", kFormatTag}, {"seed", seed}, {"config_hash", cfg.hash_hex()}};
}

std::string snapshot_bytes(const Snapshot& s) {
  const auto b = encode_snapshot(s);
  return {b.begin(), b.end()};
}

unsigned workers_of(const ExperimentConfig& cfg) {
  const auto w = cfg.get_int("workers");
  return w > 0 ? static_cast<unsigned>(w) : default_workers();
}

Lattice make_lattice(const ExperimentConfig& cfg, int N) {
  const auto d = cfg.get_int("d");
  if (d < 1 || d > 8) throw ConfigError("d must be in [1, 8]");
  if (N < 1) throw ConfigError("N must be positive");
  try {
    return Lattice(static_cast<int>(d), N, cfg.get_bool("wrap"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

BPRule rule_of(const ExperimentConfig& cfg, int d) {
  BPRule rule{static_cast<int>(cfg.get_int("r")), cfg.get_bool("modified"), std::nullopt};
  if (cfg.values().count("closed-threshold")) {
    const auto ct = cfg.get_int("closed-threshold");
    if (ct > 0) rule.closed_threshold = static_cast<int>(ct);
  }
  try {
    rule.validate(d);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return rule;
}

// Runs one task per cell; each fills its own slot, then slots are merged in index order.
template <class Slot, class Fn>
std::vector<Slot> per_cell(std::size_t n, unsigned workers, Fn&& fn) {
  std::vector<Slot> slots(n);
  parallel_for(n, workers, [&](std::size_t i) { slots[i] = fn(i); });
  return slots;
}

void note(Artifacts& a, std::string msg) {
  a.status = kExitInvariant;
  a.violations.push_back(std::move(msg));
}

// ---- engines ----

Artifacts run_gs_evolve(const ExperimentConfig& cfg) {
  const auto sizes = cfg.get_ints("N");
  const auto seeds = cfg.get_seeds("seeds");
  const double eps = cfg.get_double("eps");
  const double tol = cfg.get_double("tol");
  const auto bname = cfg.get_string("boundary");
  if (sizes.empty()) throw ConfigError("N needs at least one value");
  if (tol < min_sweep_tol()) throw ConfigError("tol is below the field resolution");
  BoundaryCondition bc;
  if (bname == "plus") bc = BoundaryCondition::plus();
  else if (bname == "minus") bc = BoundaryCondition::minus();
  else if (bname != "none") throw ConfigError("boundary must be none, plus or minus");
  if (bc.kind != BoundaryKind::None && cfg.get_bool("wrap")) throw ConfigError("boundary spins need wrap=false");

  struct Cell {
    std::string summary, breaks, events;
    std::vector<std::string> bad;
  };
  Csv summary(cfg, {"N", "M_G", "M_star", "breakpoints", "merged_max", "frac", "per_log", "solves"});
  Csv breaks(cfg, {"N", "index", "M_lo", "M_hi", "size", "components", "merged"});
  const std::size_t cells = sizes.size() * seeds.size();
  auto slots = per_cell<Cell>(cells, workers_of(cfg), [&](std::size_t i) {
    const int N = static_cast<int>(sizes[i / seeds.size()]);
    const auto seed = seeds[i % seeds.size()];
    const auto lat = make_lattice(cfg, N);
    const auto field = sample_field(seed, lat);
    const EnergyModel model(lat, field.values, eps, 0.0, bc);
    const auto ev = sweep(model, tol);
    Cell c;
    std::size_t total = 0;
    bool merged_max = false;
    for (std::size_t b = 0; b < ev.breakpoints.size(); ++b) {
      const auto& bp = ev.breakpoints[b];
      total += bp.size();
      if (bp.size() == ev.M_G) merged_max = merged_max || bp.merged;
      c.breaks += breaks.line(seed, {fi(N), fu(b), fd(bp.M_lo), fd(bp.M_hi), fu(bp.size()),
                                     fu(bp.component_sizes.size()), fb(bp.merged)});
      auto e = event_base(cfg, seed, "breakpoint");
      e["N"] = N;
      e["index"] = b;
      e["M_lo"] = bp.M_lo;
      e["M_hi"] = bp.M_hi;
      e["size"] = bp.size();
      e["component_sizes"] = bp.component_sizes;
      c.events += e.dump() + "\n";
    }
    if (total != lat.size())
      c.bad.push_back("N=" + fi(N) + " seed=" + std::to_string(seed) + ": flip sets do not partition V");
    for (Vertex v = 0; v < lat.size(); ++v) {
      const auto [lo, hi] = flip_window(model, v);
      if (ev.flip_time[v] < lo - tol || ev.flip_time[v] > hi + tol) {
        c.bad.push_back("N=" + fi(N) + " seed=" + std::to_string(seed) + ": flip time outside its window");
        break;
      }
    }
    const double n = static_cast<double>(lat.size());
    c.summary = summary.line(seed, {fi(N), fu(ev.M_G), ev.M_star ? fd(*ev.M_star) : "", fu(ev.breakpoints.size()),
                                    fb(merged_max), fd(static_cast<double>(ev.M_G) / n),
                                    fd(static_cast<double>(ev.M_G) / std::log(static_cast<double>(N))),
                                    fu(ev.solves)});
    return c;
  });
  Artifacts a;
  std::string events = jsonl_header(cfg);
  for (auto& s : slots) {
    summary.append(s.summary);
    breaks.append(s.breaks);
    events += s.events;
    for (auto& b : s.bad) note(a, b);
  }
  a.files["summary.csv"] = summary.str();
  a.files["breakpoints.csv"] = breaks.str();
  a.files["events.jsonl"] = events;
  return a;
}

// Fixed (M1, M2) pairs for the nesting check when no grid is given.
const std::vector<std::pair<double, double>> kNestingPairs{{-1.0, 1.0}, {0.5, 2.0}, {1.5, 3.5}};

Artifacts run_glauber(const ExperimentConfig& cfg) {
  const int N = static_cast<int>(cfg.get_int("N"));
  const double eps = cfg.get_double("eps");
  const double M_end = cfg.get_double("M-end");
  auto grid = cfg.get_doubles("M-grid");
  std::sort(grid.begin(), grid.end());
  const bool want_events = cfg.get_bool("events");
  const bool want_snap = cfg.get_bool("snapshot");
  const bool compare_gs = cfg.get_bool("compare-gs");
  const bool nesting = cfg.get_bool("nesting-check");
  const auto seeds = cfg.get_seeds("seeds");
  const auto lat = make_lattice(cfg, N);
  if (!grid.empty() && grid.back() > M_end) throw ConfigError("M-grid extends past M-end");

  std::vector<std::pair<double, double>> pairs;
  if (nesting) {
    if (grid.size() >= 2) {
      for (std::size_t i = 0; i + 1 < grid.size(); ++i) pairs.emplace_back(grid[i], grid[i + 1]);
    } else {
      pairs = kNestingPairs;
    }
  }

  struct Cell {
    std::string avalanches, curve, events, snap;
    std::vector<std::string> bad;
  };
  Csv av(cfg, {"index", "M", "seed_vertex", "size", "plus_fraction_after"});
  std::vector<std::string> curve_cols{"M", "plus_fraction", "magnetization"};
  if (compare_gs) curve_cols.push_back("gs_dominates");
  Csv curve(cfg, curve_cols);
  auto slots = per_cell<Cell>(seeds.size(), workers_of(cfg), [&](std::size_t i) {
    const auto seed = seeds[i];
    const auto h = sample_field(seed, lat).values;
    const std::string tag = "seed=" + std::to_string(seed);
    Cell c;
    GlauberEngine eng(lat, h, eps);
    std::vector<AvalancheEvent> all;
    double last_frac = -1.0;
    auto consume = [&](std::vector<AvalancheEvent> evs) {
      for (auto& e : evs) all.push_back(std::move(e));
    };
    for (double M : grid) {
      consume(eng.advance_to(M));
      const double frac = static_cast<double>(eng.plus_count()) / static_cast<double>(lat.size());
      if (frac < last_frac) c.bad.push_back(tag + ": plus fraction decreased at M=" + fd(M));
      last_frac = frac;
      std::vector<std::string> row{fd(M), fd(frac), fi(eng.config().magnetization())};
      if (compare_gs) {
        const auto gs = ground_state(EnergyModel(lat, h, eps, M));
        row.push_back(fb(dominates(gs, eng.config())));
      }
      c.curve += curve.line(seed, row);
    }
    consume(eng.advance_to(M_end));
    if (const auto v = eligibility_violations(lat, h, eps, all))
      c.bad.push_back(tag + ": " + fu(v) + " flips break the eligibility chain");
    for (std::size_t k = 0; k < all.size(); ++k) {
      const auto& e = all[k];
      if (want_events) {
        c.avalanches += av.line(seed, {fu(k), fd(e.M), fu(e.seed), fu(e.size()), fd(e.plus_fraction_after)});
        auto j = event_base(cfg, seed, "avalanche");
        j["index"] = k;
        j["M"] = e.M;
        j["seed_vertex"] = e.seed;
        j["size"] = e.size();
        j["plus_fraction_after"] = e.plus_fraction_after;
        c.events += j.dump() + "\n";
      }
    }
    for (const auto& [m1, m2] : pairs) {
      GlauberEngine staged(lat, h, eps);
      staged.advance_to(m1);
      staged.advance_to(m2);
      if (!(staged.config() == glauber_at(lat, h, eps, m2)))
        c.bad.push_back(tag + ": nesting fails for M1=" + fd(m1) + " M2=" + fd(m2));
    }
    if (want_snap) c.snap = snapshot_bytes(make_snapshot(lat, eng.config(), seed, M_end, eps));
    return c;
  });
  Artifacts a;
  std::string events = jsonl_header(cfg);
  for (std::size_t i = 0; i < slots.size(); ++i) {
    auto& s = slots[i];
    av.append(s.avalanches);
    curve.append(s.curve);
    events += s.events;
    if (want_snap) a.files["final_" + std::to_string(seeds[i]) + ".snap"] = std::move(s.snap);
    for (auto& b : s.bad) note(a, b);
  }
  if (want_events) {
    a.files["avalanches.csv"] = av.str();
    a.files["events.jsonl"] = events;
  }
  if (!grid.empty()) a.files["curve.csv"] = curve.str();
  return a;
}

Artifacts run_glauber_t(const ExperimentConfig& cfg) {
  const auto lat = make_lattice(cfg, static_cast<int>(cfg.get_int("N")));
  const double eps = cfg.get_double("eps"), T = cfg.get_double("T"), alpha = cfg.get_double("alpha");
  const double lo = cfg.get_double("M-lo"), hi = cfg.get_double("M-hi");
  const int grid = static_cast<int>(cfg.get_int("grid"));
  if (!(T > 0.0) || !(alpha > 0.0)) throw ConfigError("T and alpha must be positive");
  if (!(hi >= lo) || grid < 1) throw ConfigError("need M-lo <= M-hi and grid >= 1");
  const auto seeds = cfg.get_seeds("seeds");
  Csv csv(cfg, {"M", "plus_fraction", "magnetization"});
  auto slots = per_cell<std::string>(seeds.size(), workers_of(cfg), [&](std::size_t i) {
    const auto seed = seeds[i];
    const auto h = sample_field(seed, lat).values;
    std::string out;
    for (const auto& s : positive_T_glauber(lat, h, eps, T, alpha, lo, hi, grid, derive_seed(seed, {1})))
      out += csv.line(seed, {fd(s.M), fd(s.plus_fraction), fi(s.magnetization)});
    return out;
  });
  for (const auto& s : slots) csv.append(s);
  Artifacts a;
  a.files["magnetization.csv"] = csv.str();
  return a;
}

Snapshot load_snapshot(const std::string& path) {
  try {
    return read_snapshot(path);
  } catch (const SnapshotError& e) {
    throw ConfigError("cannot read snapshot '" + path + "': " + e.what());
  }
}

Artifacts run_bootstrap(const ExperimentConfig& cfg) {
  const auto input = cfg.get_string("input");
  const auto golden = cfg.get_string("golden");
  auto scales = cfg.get_ints("scales");
  const bool want_snap = cfg.get_bool("snapshot");

  struct Job {
    Lattice lat;
    SiteConfig init;
    std::uint64_t seed;
    double M, eps;
  };
  std::vector<Job> jobs;
  if (!input.empty()) {
    const auto s = load_snapshot(input);
    if (s.kind != SnapshotKind::Site) throw ConfigError("input snapshot does not hold sites");
    jobs.push_back({snapshot_lattice(s), snapshot_sites(s), s.seed, s.M, s.eps});
  } else {
    const auto lat = make_lattice(cfg, static_cast<int>(cfg.get_int("N")));
    const double p = cfg.get_double("p"), q = cfg.get_double("q");
    if (p < 0 || q < 0 || p + q > 1) throw ConfigError("need p, q >= 0 and p + q <= 1");
    for (auto seed : cfg.get_seeds("seeds")) jobs.push_back({lat, sample_sites(seed, lat, p, q), seed, 0.0, 0.0});
  }
  const BPRule rule = rule_of(cfg, jobs.front().lat.dim());
  std::vector<int> scale_list(scales.begin(), scales.end());
  for (int L : scale_list)
    if (L < 1) throw ConfigError("scales must be positive");

  struct Cell {
    std::string clusters, summary, snap;
    std::vector<std::string> bad;
  };
  Csv clusters(cfg, {"cluster", "size", "diameter", "initial_count", "spanning"});
  Csv summary(cfg, {"open_initial", "open_final", "closed", "density", "clusters", "U_initial", "U_final",
                    "U_nonincreasing", "cluster_bound_ok", "boxed_equal"});
  auto slots = per_cell<Cell>(jobs.size(), workers_of(cfg), [&](std::size_t i) {
    const auto& job = jobs[i];
    const std::string tag = "seed=" + std::to_string(job.seed);
    Cell c;
    std::vector<Vertex> trace;
    const auto fin = bp_final(job.lat, job.init, rule, &trace);
    const auto stats = cluster_stats(job.lat, fin);
    bool cluster_bound_ok = true;
    for (std::size_t k = 0; k < stats.size(); ++k) {
      const auto& cl = stats[k];
      if (2 * cl.initial_count < static_cast<std::size_t>(cl.diameter) + 1) cluster_bound_ok = false;
      c.clusters += clusters.line(job.seed, {fu(k), fu(cl.size), fi(cl.diameter), fu(cl.initial_count),
                                             fb(cl.spanning)});
    }
    if (!cluster_bound_ok) c.bad.push_back(tag + ": a cluster has fewer initial sites than (diameter+1)/2");
    std::string u0, u1, mono;
    if (!job.lat.wrap()) {
      const auto rep = u_monitor(job.lat, job.init, &trace);
      u0 = fi(rep.initial_U);
      u1 = fi(rep.final_U);
      mono = fb(rep.non_increasing);
      if (!rep.non_increasing) c.bad.push_back(tag + ": U increased during the growth");
    }
    std::string boxed;
    if (!scale_list.empty()) {
      const bool eq = bp_final_boxed(job.lat, job.init, rule, scale_list).final_config == fin;
      boxed = fb(eq);
      if (!eq) c.bad.push_back(tag + ": staged box evolution differs from the direct one");
    }
    const double n = static_cast<double>(job.lat.size());
    c.summary = summary.line(job.seed, {fu(job.init.count(SiteState::Open)), fu(fin.count(SiteState::Open)),
                                        fu(fin.count(SiteState::Closed)),
                                        fd(static_cast<double>(fin.count(SiteState::Open)) / n), fu(stats.size()),
                                        u0, u1, mono, fb(cluster_bound_ok), boxed});
    if (want_snap || !golden.empty()) c.snap = snapshot_bytes(make_snapshot(job.lat, fin, job.seed, job.M, job.eps));
    return c;
  });

  Artifacts a;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    auto& s = slots[i];
    clusters.append(s.clusters);
    summary.append(s.summary);
    for (auto& b : s.bad) note(a, b);
    if (want_snap) {
      const auto name = input.empty() ? "final_" + std::to_string(jobs[i].seed) + ".snap" : std::string("final.snap");
      a.files[name] = s.snap;
    }
  }
  if (!golden.empty()) {
    if (slots.size() != 1) throw ConfigError("golden comparison needs exactly one run");
    const auto expected = snapshot_bytes(load_snapshot(golden));
    if (expected != slots[0].snap) note(a, "final configuration differs from the golden snapshot");
  }
  a.files["clusters.csv"] = clusters.str();
  a.files["summary.csv"] = summary.str();
  return a;
}

Artifacts run_phase_scan(const ExperimentConfig& cfg) {
  PhaseScanConfig pc;
  pc.d = static_cast<int>(cfg.get_int("d"));
  pc.L = static_cast<int>(cfg.get_int("N"));
  pc.wrap = cfg.get_bool("wrap");
  pc.p_grid = cfg.get_doubles("p-grid");
  const auto law = cfg.get_string("q-law");
  if (law != "scaled" && law != "fixed") throw ConfigError("q-law must be scaled or fixed");
  pc.q_scaled = law == "scaled";
  pc.q_value = cfg.get_double("q");
  pc.trials = static_cast<int>(cfg.get_int("trials"));
  const auto seeds = cfg.get_seeds("seed");
  if (seeds.size() != 1) throw ConfigError("phase-scan takes exactly one base seed");
  pc.base_seed = seeds[0];
  pc.rule = rule_of(cfg, pc.d);
  if (pc.p_grid.empty() || pc.trials < 1 || pc.L < 1) throw ConfigError("need a p grid, trials >= 1 and N >= 1");
  for (double p : pc.p_grid)
    if (p < 0 || p > 1) throw ConfigError("p values must lie in [0, 1]");
  PhaseScanResult res;
  try {
    res = phase_scan(pc, workers_of(cfg));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  Csv rows(cfg, {"p", "q", "trials", "density", "origin_freq", "spanning_freq"});
  for (const auto& r : res.rows)
    rows.row(pc.base_seed, {fd(r.p), fd(r.q), fi(r.trials), fd(r.density), fd(r.origin_freq), fd(r.spanning_freq)});
  Csv trials(cfg, {"p", "q", "trial", "density", "origin_open", "spanning"});
  for (const auto& t : res.trials)
    trials.row(t.seed, {fd(t.p), fd(t.q), fi(t.trial), fd(t.density), fb(t.origin_open), fb(t.spanning)});
  Artifacts a;
  a.files["phase.csv"] = rows.str();
  a.files["trials.csv"] = trials.str();
  return a;
}

Artifacts run_renorm_pn(const ExperimentConfig& cfg) {
  PnConfig pc;
  pc.d = static_cast<int>(cfg.get_int("d"));
  pc.q = cfg.get_double("q");
  pc.ladder.K = static_cast<int>(cfg.get_int("K"));
  pc.ladder.p = cfg.get_double("p");
  pc.ladder.D = static_cast<int>(cfg.get_int("D"));
  pc.levels.clear();
  for (auto n : cfg.get_ints("levels")) pc.levels.push_back(static_cast<int>(n));
  pc.trials = static_cast<int>(cfg.get_int("trials"));
  pc.rule = BPRule{static_cast<int>(cfg.get_int("r")), cfg.get_bool("modified"), std::nullopt};
  pc.base_seed = cfg.get_seeds("seeds").front();
  std::vector<PnRow> rows;
  try {
    pc.ladder.validate();
    pc.rule.validate(pc.d);
    rows = estimate_pn(pc, workers_of(cfg));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  Csv csv(cfg, {"n", "L", "trials", "bad", "bad_freq", "ci_lo", "ci_hi", "truncated"});
  for (const auto& r : rows)
    csv.row(pc.base_seed, {fi(r.n), fi(r.L), fu(r.trials), fu(r.bad), fd(r.bad_freq), fd(r.ci.lo), fd(r.ci.hi),
                           fb(r.truncated)});
  Artifacts a;
  a.files["pn.csv"] = csv.str();
  return a;
}

Artifacts run_renorm_box(const ExperimentConfig& cfg) {
  const auto lat = make_lattice(cfg, static_cast<int>(cfg.get_int("N")));
  const double eps = cfg.get_double("eps"), M = cfg.get_double("M");
  const bool want_snap = cfg.get_bool("snapshot");
  const auto seeds = cfg.get_seeds("seeds");
  struct Cell {
    std::string row, snap;
    std::size_t violations = 0;
  };
  Csv csv(cfg, {"L", "p", "q", "tiles", "open_initial", "empty_initial", "closed_initial", "open_final",
                "fine_plus_fraction", "violations"});
  auto slots = per_cell<Cell>(seeds.size(), workers_of(cfg), [&](std::size_t i) {
    const auto seed = seeds[i];
    const auto h = sample_field(seed, lat).values;
    Renormalization r = [&] {
      try {
        return box_renormalize(lat, h, eps, M);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
      }
    }();
    const auto coarse_final = bp_final(r.coarse, r.initial, r.rule);
    const auto fine = glauber_at(lat, h, eps, M);
    Cell c;
    c.violations = soundness_violations(lat, r, coarse_final, fine);
    const auto tiles = join(r.tiles, [](int t) { return std::to_string(t); });
    c.row = csv.line(seed, {fi(r.L), fd(r.p), fd(r.q), tiles, fu(r.initial.count(SiteState::Open)),
                            fu(r.initial.count(SiteState::Empty)), fu(r.initial.count(SiteState::Closed)),
                            fu(coarse_final.count(SiteState::Open)),
                            fd(static_cast<double>(fine.plus_count()) / static_cast<double>(lat.size())),
                            fu(c.violations)});
    if (want_snap && r.coarse.cubic()) c.snap = snapshot_bytes(make_snapshot(r.coarse, coarse_final, seed, M, eps));
    return c;
  });
  Artifacts a;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    csv.append(slots[i].row);
    if (slots[i].violations)
      note(a, "seed=" + std::to_string(seeds[i]) + ": " + fu(slots[i].violations) +
                  " coarse-open tiles hold a minus spin");
    if (!slots[i].snap.empty()) a.files["coarse_" + std::to_string(seeds[i]) + ".snap"] = slots[i].snap;
  }
  a.files["renorm.csv"] = csv.str();
  return a;
}

Artifacts run_renorm(const ExperimentConfig& cfg) {
  const auto mode = cfg.get_string("mode");
  if (mode == "box") return run_renorm_box(cfg);
  if (mode == "pn") return run_renorm_pn(cfg);
  throw ConfigError("mode must be box or pn");
}

// Cheap end-to-end checks over every engine; each row is one (seed, check).
Artifacts run_selftest(const ExperimentConfig& cfg) {
  const int d = static_cast<int>(cfg.get_int("d"));
  const int N = static_cast<int>(cfg.get_int("N"));
  const double eps = cfg.get_double("eps");
  const auto seeds = cfg.get_seeds("seeds");
  if (d != 2 && d != 3) throw ConfigError("selftest runs in d = 2 or 3");
  const Lattice torus(d, N, true);
  const Lattice small = d == 2 ? Lattice::box({3, 3}) : Lattice::box({2, 2, 3});
  const Lattice open_box(d, N, false);

  struct Check {
    std::string name;
    bool ok;
    std::string detail;
  };
  auto slots = per_cell<std::vector<Check>>(seeds.size(), workers_of(cfg), [&](std::size_t i) {
    const auto seed = seeds[i];
    std::vector<Check> out;
    const auto h = sample_field(seed, torus).values;

    // Nesting: staged evolution equals the fixed point at the later M.
    bool nest = true;
    for (const auto& [m1, m2] : kNestingPairs) {
      GlauberEngine eng(torus, h, eps);
      eng.advance_to(m1);
      eng.advance_to(m2);
      nest = nest && eng.config() == glauber_at(torus, h, eps, m2);
    }
    out.push_back({"glauber_nesting", nest, fu(kNestingPairs.size()) + " pairs"});

    // Min cut against enumeration on a small box with a minus boundary.
    const auto hs = sample_field(seed, small).values;
    const EnergyModel m(small, hs, eps, 0.5, BoundaryCondition::minus());
    const bool gs_ok = ground_state(m) == brute_force_ground_state(m);
    out.push_back({"ground_state_exact", gs_ok, fu(small.size()) + " vertices"});

    // U never increases along a traced growth.
    const auto init = sample_sites(seed, open_box, 0.1, 0.01);
    std::vector<Vertex> trace;
    const auto fin = bp_final(open_box, init, BPRule::standard(d), &trace);
    const auto rep = u_monitor(open_box, init, &trace);
    out.push_back({"u_monitor", rep.non_increasing, fi(rep.initial_U) + "->" + fi(rep.final_U)});
    out.push_back({"boxed_equals_direct", bp_final_boxed(open_box, init, BPRule::standard(d), {2}).final_config == fin,
                   "scales=2"});

    // Snapshot pipeline: a Glauber final state reloaded from bytes, checked
    // against the state rebuilt from the header's seed and eps.
    const double M = 1.0;
    const auto snap = make_snapshot(torus, glauber_at(torus, h, eps, M), seed, M, eps);
    const auto bytes = encode_snapshot(snap);
    const auto back = decode_snapshot(bytes);
    const auto lat2 = snapshot_lattice(back);
    const auto h2 = sample_field(back.seed, lat2).values;
    const auto rebuilt = make_snapshot(lat2, glauber_at(lat2, h2, back.eps, back.M), back.seed, back.M, back.eps);
    const bool hash_ok = payload_hash(back) == payload_hash(snap) && payload_hash(rebuilt) == payload_hash(back);
    out.push_back({"snapshot_pipeline", hash_ok, "payload_hash=" + std::to_string(payload_hash(back))});
    const EnergyModel model(lat2, h2, back.eps, back.M);
    const auto gv = is_good_vertex(model, 0, 1, back.M - 0.5, back.M + 0.5, {5, true});
    out.push_back({"good_vertex_diagnostic", true,
                   std::string(gv.good ? "good" : "bad") + " sets=" + fu(gv.sets_checked)});
    return out;
  });

  Csv csv(cfg, {"check", "passed", "detail"});
  Artifacts a;
  for (std::size_t i = 0; i < slots.size(); ++i)
    for (const auto& c : slots[i]) {
      csv.row(seeds[i], {c.name, fb(c.ok), c.detail});
      if (!c.ok) note(a, "seed=" + std::to_string(seeds[i]) + ": " + c.name + " failed");
    }
  a.files["selftest.csv"] = csv.str();
  return a;
}

}  // namespace

const std::vector<std::string>& engine_names() {
  static const std::vector<std::string> names{"gs-evolve", "glauber",  "glauber-t", "bootstrap",
                                              "phase-scan", "renorm", "selftest"};
  return names;
}

const std::vector<KeySpec>& engine_schema(std::string_view engine) {
  const auto& s = schemas();
  const auto it = s.find(engine);
  if (it == s.end()) throw ConfigError("unknown engine '" + std::string(engine) + "'");
  return it->second;
}

ExperimentConfig ExperimentConfig::resolve(std::string engine, const std::map<std::string, std::string>& given) {
  const auto& schema = engine_schema(engine);
  for (const auto& [k, v] : given) (void)find_spec(engine, k);
  ExperimentConfig cfg;
  cfg.engine_ = std::move(engine);
  std::vector<std::string> missing;
  for (const auto& spec : schema) {
    const auto it = given.find(spec.name);
    if (it != given.end()) {
      cfg.values_[spec.name] = canonical(spec, it->second);
    } else if (spec.default_value) {
      cfg.values_[spec.name] = canonical(spec, *spec.default_value);
    } else {
      missing.push_back(spec.name);
    }
  }
  if (!missing.empty()) {
    std::string msg = cfg.engine_ + ": missing required key(s):";
    for (const auto& m : missing) msg += " " + m;
    throw ConfigError(msg);
  }
  // The worker count is part of the resolved config, so resolve "0" here.
  if (cfg.values_.at("workers") == "0") cfg.values_["workers"] = std::to_string(default_workers());
  return cfg;
}

long long ExperimentConfig::get_int(const std::string& k) const { return parse_int(k, values_.at(k)); }
double ExperimentConfig::get_double(const std::string& k) const { return parse_double(k, values_.at(k)); }
bool ExperimentConfig::get_bool(const std::string& k) const { return parse_bool(k, values_.at(k)); }
const std::string& ExperimentConfig::get_string(const std::string& k) const { return values_.at(k); }

std::vector<long long> ExperimentConfig::get_ints(const std::string& k) const {
  std::vector<long long> out;
  for (const auto& p : split_list(values_.at(k))) out.push_back(parse_int(k, p));
  return out;
}

std::vector<double> ExperimentConfig::get_doubles(const std::string& k) const {
  std::vector<double> out;
  for (const auto& p : split_list(values_.at(k))) out.push_back(parse_double(k, p));
  return out;
}

std::vector<std::uint64_t> ExperimentConfig::get_seeds(const std::string& k) const {
  return parse_seed_list(values_.at(k));
}

std::string ExperimentConfig::to_ini() const {
  std::string out = "[" + engine_ + "]\n";
  for (const auto& spec : engine_schema(engine_)) out += spec.name + " = " + values_.at(spec.name) + "\n";
  return out;
}

std::uint64_t ExperimentConfig::hash() const noexcept { return fnv1a64(to_ini()); }

std::string ExperimentConfig::hash_hex() const {
  char buf[19];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash()));
  return buf;
}

std::vector<std::uint64_t> parse_seed_list(std::string_view text) {
  std::vector<std::uint64_t> out;
  for (const auto& piece : split_list(text)) {
    const auto dots = piece.find("..");
    if (dots == std::string::npos) {
      out.push_back(parse_seed(piece));
      continue;
    }
    const auto lo = parse_seed(trim(piece.substr(0, dots)));
    const auto hi = parse_seed(trim(piece.substr(dots + 2)));
    if (hi < lo) throw std::invalid_argument("empty seed range '" + piece + "'");
    if (hi - lo >= 10'000'000) throw std::invalid_argument("seed range too long '" + piece + "'");
    for (auto s = lo;; ++s) {
      out.push_back(s);
      if (s == hi) break;
    }
  }
  if (out.empty()) throw std::invalid_argument("no seeds given");
  return out;
}

std::string format_double(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

Artifacts run_experiment(const ExperimentConfig& cfg) {
  const auto& e = cfg.engine();
  if (e == "gs-evolve") return run_gs_evolve(cfg);
  if (e == "glauber") return run_glauber(cfg);
  if (e == "glauber-t") return run_glauber_t(cfg);
  if (e == "bootstrap") return run_bootstrap(cfg);
  if (e == "phase-scan") return run_phase_scan(cfg);
  if (e == "renorm") return run_renorm(cfg);
  if (e == "selftest") return run_selftest(cfg);
  throw ConfigError("unknown engine '" + e + "'");
}

void write_artifacts(const std::string& dir, const ExperimentConfig& cfg, const Artifacts& a) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + dir + "': " + ec.message());
  auto put = [&](const std::string& name, const std::string& content) {
    std::ofstream f(fs::path(dir) / name, std::ios::binary | std::ios::trunc);
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!f) throw ConfigError("cannot write '" + (fs::path(dir) / name).string() + "'");
  };
  put("config.ini", cfg.to_ini());
  json run = config_record(cfg);
  run["type"] = "run";
  run["status"] = a.status;
  run["violations"] = a.violations;
  run["files"] = json::array();
  for (const auto& [name, content] : a.files) {
    run["files"].push_back(name);
    put(name, content);
  }
  put("run.json", run.dump(2) + "\n");
}

}  // namespace rfimlab
