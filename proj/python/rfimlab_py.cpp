#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "rfimlab/bootstrap.hpp"
#include "rfimlab/disorder.hpp"
#include "rfimlab/experiment.hpp"
#include "rfimlab/glauber.hpp"
#include "rfimlab/groundstate.hpp"
#include "rfimlab/gs_evolution.hpp"
#include "rfimlab/renorm.hpp"
#include "rfimlab/snapshot.hpp"

namespace py = pybind11;
using namespace rfimlab;

namespace {

BoundaryCondition boundary_from(const std::string& name) {
  if (name == "none") return BoundaryCondition::none();
  if (name == "plus") return BoundaryCondition::plus();
  if (name == "minus") return BoundaryCondition::minus();
  throw py::value_error("boundary must be 'none', 'plus' or 'minus'");
}

std::vector<int> spins_of(const SpinConfig& c) { return {c.spins().begin(), c.spins().end()}; }

SpinConfig spins_from(const std::vector<int>& s) {
  std::vector<std::int8_t> out;
  out.reserve(s.size());
  for (int x : s) {
    if (x != 1 && x != -1) throw py::value_error("spins must be +1 or -1");
    out.push_back(static_cast<std::int8_t>(x));
  }
  return SpinConfig(out);
}

std::vector<int> sites_of(const SiteConfig& c) {
  std::vector<int> out(c.size());
  for (Vertex v = 0; v < c.size(); ++v) out[v] = static_cast<int>(c[v]);
  return out;
}

py::bytes to_bytes(const std::vector<std::uint8_t>& b) {
  return {reinterpret_cast<const char*>(b.data()), b.size()};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Random-field Ising ground states, Glauber dynamics and polluted bootstrap percolation";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<SnapshotError>(m, "SnapshotError", PyExc_ValueError);

  py::class_<Lattice>(m, "Lattice")
      .def(py::init<int, int, bool>(), py::arg("d"), py::arg("N"), py::arg("wrap") = true)
      .def_static("box", &Lattice::box, py::arg("extents"))
      .def_property_readonly("dim", &Lattice::dim)
      .def_property_readonly("extents", &Lattice::extents)
      .def_property_readonly("wrap", &Lattice::wrap)
      .def("__len__", &Lattice::size)
      .def("index", [](const Lattice& l, std::vector<int> c) { return l.index(c); })
      .def("coord", &Lattice::coord)
      .def("degree", &Lattice::degree)
      .def("distance", &Lattice::distance);

  m.def("sample_field", [](std::uint64_t seed, const Lattice& lat) { return sample_field(seed, lat).values; },
        py::arg("seed"), py::arg("lattice"), "i.i.d. standard Gaussian field keyed by seed");
  m.def("open_closed_probs",
        [](double M, double eps) {
          const auto t = open_closed_probs(M, eps);
          return py::make_tuple(t.p, t.q);
        },
        py::arg("M"), py::arg("eps"));
  m.def("critical_time", &critical_time, py::arg("d"));

  m.def("hamiltonian",
        [](const Lattice& lat, std::vector<double> h, double eps, double M, const std::vector<int>& s,
           const std::string& boundary) {
          return hamiltonian(EnergyModel(lat, std::move(h), eps, M, boundary_from(boundary)), spins_from(s));
        },
        py::arg("lattice"), py::arg("h"), py::arg("eps"), py::arg("M"), py::arg("spins"),
        py::arg("boundary") = "none");
  m.def("ground_state",
        [](const Lattice& lat, std::vector<double> h, double eps, double M, const std::string& boundary) {
          return spins_of(ground_state(EnergyModel(lat, std::move(h), eps, M, boundary_from(boundary))));
        },
        py::arg("lattice"), py::arg("h"), py::arg("eps"), py::arg("M"), py::arg("boundary") = "none",
        "maximal-plus minimizer via min cut");

  m.def("sweep",
        [](const Lattice& lat, std::vector<double> h, double eps, double tol, const std::string& boundary) {
          const auto ev = sweep(EnergyModel(lat, std::move(h), eps, 0.0, boundary_from(boundary)), tol);
          py::list bps;
          for (const auto& b : ev.breakpoints) {
            py::dict d;
            d["M_lo"] = b.M_lo;
            d["M_hi"] = b.M_hi;
            d["flipped"] = b.flipped;
            d["component_sizes"] = b.component_sizes;
            bps.append(d);
          }
          py::dict out;
          out["breakpoints"] = bps;
          out["M_G"] = ev.M_G;
          out["M_star"] = ev.M_star ? py::object(py::float_(*ev.M_star)) : py::object(py::none());
          out["flip_time"] = ev.flip_time;
          return out;
        },
        py::arg("lattice"), py::arg("h"), py::arg("eps"), py::arg("tol") = kDefaultSweepTol,
        py::arg("boundary") = "none");

  m.def("glauber_evolve",
        [](const Lattice& lat, const std::vector<double>& h, double eps, double M_end) {
          const auto run = glauber_evolve(lat, h, eps, M_end);
          py::list events;
          for (const auto& e : run.events)
            events.append(py::make_tuple(e.M, e.seed, e.size(), e.plus_fraction_after));
          return py::make_tuple(events, spins_of(run.final_config));
        },
        py::arg("lattice"), py::arg("h"), py::arg("eps"), py::arg("M_end"),
        "events as (M, seed vertex, size, plus fraction after) and the final spins");
  m.def("glauber_at",
        [](const Lattice& lat, const std::vector<double>& h, double eps, double M) {
          return spins_of(glauber_at(lat, h, eps, M));
        },
        py::arg("lattice"), py::arg("h"), py::arg("eps"), py::arg("M"));

  m.def("sample_sites",
        [](std::uint64_t seed, const Lattice& lat, double p, double q) {
          return sites_of(sample_sites(seed, lat, p, q));
        },
        py::arg("seed"), py::arg("lattice"), py::arg("p"), py::arg("q"), "0 empty, 1 open, 2 closed");
  m.def("bp_final",
        [](std::uint64_t seed, const Lattice& lat, double p, double q, int r, bool modified) {
          const BPRule rule{r, modified, std::nullopt};
          rule.validate(lat.dim());
          return sites_of(bp_final(lat, sample_sites(seed, lat, p, q), rule));
        },
        py::arg("seed"), py::arg("lattice"), py::arg("p"), py::arg("q"), py::arg("r") = 2,
        py::arg("modified") = false, "final sites of the growth from a sampled start");

  m.def("fnv1a64", [](const std::string& s) { return fnv1a64(std::string_view(s)); });
  m.def("read_snapshot",
        [](const std::string& path) {
          const auto s = read_snapshot(path);
          py::dict d;
          d["d"] = s.d;
          d["N"] = s.N;
          d["wrap"] = s.wrap;
          d["kind"] = s.kind == SnapshotKind::Spin ? "spin" : "site";
          d["seed"] = s.seed;
          d["M"] = s.M;
          d["eps"] = s.eps;
          d["payload"] = std::vector<int>(s.payload.begin(), s.payload.end());
          d["payload_hash"] = payload_hash(s);
          return d;
        },
        py::arg("path"));
  m.def("spin_snapshot_bytes",
        [](const Lattice& lat, const std::vector<int>& spins, std::uint64_t seed, double M, double eps) {
          return to_bytes(encode_snapshot(make_snapshot(lat, spins_from(spins), seed, M, eps)));
        },
        py::arg("lattice"), py::arg("spins"), py::arg("seed"), py::arg("M"), py::arg("eps"));

  m.def("engines", &engine_names);
  m.def("config_hash",
        [](const std::string& engine, const std::map<std::string, std::string>& kv) {
          return ExperimentConfig::resolve(engine, kv).hash_hex();
        },
        py::arg("engine"), py::arg("config"));
  m.def("run",
        [](const std::string& engine, const std::map<std::string, std::string>& kv, const std::string& out_dir) {
          const auto cfg = ExperimentConfig::resolve(engine, kv);
          Artifacts a;
          {
            py::gil_scoped_release release;
            a = run_experiment(cfg);
            if (!out_dir.empty()) write_artifacts(out_dir, cfg, a);
          }
          py::dict files;
          for (const auto& [name, content] : a.files) files[py::str(name)] = py::bytes(content);
          return py::make_tuple(a.status, files);
        },
        py::arg("engine"), py::arg("config"), py::arg("out_dir") = "",
        "runs an engine; returns (status, {filename: bytes})");
}
