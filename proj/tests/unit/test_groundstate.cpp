#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "rfimlab/disorder.hpp"
#include "rfimlab/groundstate.hpp"

using namespace rfimlab;

namespace {

EnergyModel seeded(const Lattice& lat, std::uint64_t seed, double eps, double M,
                   BoundaryCondition bc = BoundaryCondition::none()) {
  return EnergyModel(lat, sample_field(seed, lat).values, eps, M, std::move(bc));
}

double resolution(const EnergyModel& m) { return 2.0 * static_cast<double>(m.lattice.size()) / kCapacityScale; }

}  // namespace

TEST_SUITE("groundstate") {
  TEST_CASE("hamiltonian on the 3x3 torus") {
    Lattice lat(2, 3, true);
    EnergyModel m(lat, std::vector<double>(9, 0.0), 0.0, 0.0);
    CHECK(hamiltonian(m, SpinConfig::uniform(9, 1)) == -18.0);
    CHECK(hamiltonian(m.with_M(1.0), SpinConfig::uniform(9, -1)) == -9.0);
    auto one = SpinConfig::uniform(9, -1);
    one.set(0, 1);
    CHECK(hamiltonian(m, one) == -10.0);
    CHECK_THROWS_AS(hamiltonian(m, SpinConfig::uniform(8, 1)), std::invalid_argument);
  }

  TEST_CASE("hamiltonian matches explicit edge enumeration") {
    std::mt19937_64 rng(5);
    for (auto bc : {BoundaryCondition::plus(), BoundaryCondition::minus()}) {
      Lattice lat = Lattice::box({3, 4});
      auto m = seeded(lat, 77, 1.3, -0.4, bc);
      for (int t = 0; t < 20; ++t) {
        std::vector<std::int8_t> s(lat.size());
        for (auto& x : s) x = rng() & 1 ? 1 : -1;
        CHECK(hamiltonian(m, SpinConfig(s)) == doctest::Approx(oracle::energy(m, SpinConfig(s))).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("single flip delta identity") {
    std::mt19937_64 rng(8);
    Lattice lat(2, 4, true);
    auto m = seeded(lat, 3, 0.9, 0.3);
    std::vector<std::int8_t> s(lat.size());
    for (auto& x : s) x = rng() & 1 ? 1 : -1;
    SpinConfig c(s);
    for (Vertex v = 0; v < lat.size(); ++v) {
      auto f = c;
      f.set(v, -c[v]);
      CHECK(hamiltonian(m, f) - hamiltonian(m, c) == doctest::Approx(flip_delta(m, c, v)).epsilon(1e-12));
    }
  }

  TEST_CASE("uniform fields") {
    for (bool wrap : {true, false}) {
      Lattice lat(2, 5, wrap);
      EnergyModel m(lat, std::vector<double>(lat.size(), 0.0), 0.0, 0.1);
      CHECK(ground_state(m) == SpinConfig::uniform(lat.size(), 1));
      CHECK(ground_state(m.with_M(0.0)) == SpinConfig::uniform(lat.size(), 1));
      CHECK(ground_state(m.with_M(-0.1)) == SpinConfig::uniform(lat.size(), -1));
      CHECK(brute_force_ground_state(EnergyModel(Lattice(2, 3, wrap), std::vector<double>(9, 0.0), 0.0, -0.5)) ==
            SpinConfig::uniform(9, -1));
    }
  }

  TEST_CASE("minus boundary beats the tie on a 2x3 box") {
    EnergyModel m(Lattice::box({2, 3}), std::vector<double>(6, 0.0), 0.0, 0.0, BoundaryCondition::minus());
    CHECK(brute_force_ground_state(m) == SpinConfig::uniform(6, -1));
    CHECK(ground_state(m) == SpinConfig::uniform(6, -1));
    EnergyModel p(Lattice::box({2, 3}), std::vector<double>(6, 0.0), 0.0, 0.0, BoundaryCondition::plus());
    CHECK(ground_state(p) == SpinConfig::uniform(6, 1));
  }

  TEST_CASE("min cut agrees with enumeration on the 3x3 torus") {
    Lattice lat(2, 3, true);
    std::mt19937_64 rng(17);
    int n = 0;
    for (double eps : {0.1, 1.0, 10.0}) {
      for (int t = 0; t < 67; ++t, ++n) {
        const double M = std::uniform_real_distribution<double>(-3.0, 3.0)(rng);
        auto m = seeded(lat, 1000 + n, eps, M);
        const auto cut = ground_state(m);
        const auto brute = brute_force_ground_state(m);
        CHECK(cut == brute);
        CHECK(std::fabs(hamiltonian(m, cut) - hamiltonian(m, brute)) <= resolution(m));
      }
    }
    CHECK(n >= 200);
  }

  TEST_CASE("min cut agrees with enumeration on boxes with boundary conditions") {
    int n = 0;
    for (auto ext : {std::vector<int>{3, 3}, std::vector<int>{2, 3}, std::vector<int>{4, 4}, std::vector<int>{2, 2, 3}}) {
      for (auto bc : {BoundaryCondition::plus(), BoundaryCondition::minus()}) {
        for (double eps : {0.1, 1.0, 10.0}) {
          for (double M : {-1.0, 0.0, 1.0}) {
            auto m = seeded(Lattice::box(ext), 500 + n++, eps, M, bc);
            CHECK(ground_state(m) == brute_force_ground_state(m));
          }
        }
      }
    }
  }

  TEST_CASE("explicit boundary spins") {
    Lattice lat = Lattice::box({3, 3});
    std::mt19937_64 rng(21);
    for (int t = 0; t < 20; ++t) {
      std::vector<std::int8_t> slots(lat.size() * lat.slots(), 0);
      for (Vertex v = 0; v < lat.size(); ++v) {
        auto nb = lat.neighbor_slots(v);
        for (int k = 0; k < lat.slots(); ++k)
          if (nb[k] == kNoVertex) slots[v * lat.slots() + k] = rng() & 1 ? 1 : -1;
      }
      auto m = seeded(lat, 900 + t, 1.0, 0.2, BoundaryCondition::explicit_spins(slots));
      CHECK(ground_state(m) == brute_force_ground_state(m));
    }
    CHECK_THROWS_AS(EnergyModel(lat, std::vector<double>(9, 0.0), 1.0, 0.0, BoundaryCondition::explicit_spins({1, -1})),
                    std::invalid_argument);
  }

  TEST_CASE("returned minimizer is maximal and locally stable") {
    Lattice lat(2, 6, true);
    for (int t = 0; t < 20; ++t) {
      auto m = seeded(lat, 40 + t, 1.5, 0.1 * t - 1.0);
      const auto g = ground_state(m);
      for (Vertex v = 0; v < lat.size(); ++v) {
        if (g[v] > 0) {
          CHECK(flip_delta(m, g, v) >= -resolution(m));
        } else {
          CHECK(flip_delta(m, g, v) > 0.0);
        }
      }
    }
  }

  TEST_CASE("monotone in M and in the boundary") {
    Lattice torus(2, 8, true);
    auto m = seeded(torus, 5, 1.0, 0.0);
    SpinConfig prev = ground_state(m.with_M(-5.0));
    for (double M = -4.5; M <= 5.0; M += 0.5) {
      const auto cur = ground_state(m.with_M(M));
      CHECK(dominates(cur, prev));
      prev = cur;
    }
    Lattice box = Lattice::box({7, 7});
    for (int t = 0; t < 10; ++t) {
      auto lo = seeded(box, 60 + t, 2.0, 0.0, BoundaryCondition::minus());
      auto hi = seeded(box, 60 + t, 2.0, 0.0, BoundaryCondition::plus());
      CHECK(dominates(ground_state(hi), ground_state(lo)));
    }
  }

  TEST_CASE("clamped solve respects bounds and matches the free solve inside them") {
    Lattice lat(2, 6, true);
    auto m = seeded(lat, 12, 1.0, 0.0);
    const auto lo = ground_state(m.with_M(-0.5));
    const auto hi = ground_state(m.with_M(0.5));
    CHECK(ground_state_clamped(m, lo, hi) == ground_state(m));
    CHECK_THROWS_AS(ground_state_clamped(m, SpinConfig::uniform(lat.size(), 1), SpinConfig::uniform(lat.size(), -1)),
                    std::invalid_argument);
    const auto pinned = ground_state_clamped(m, SpinConfig::uniform(lat.size(), 1), SpinConfig::uniform(lat.size(), 1));
    CHECK(pinned == SpinConfig::uniform(lat.size(), 1));
  }

  TEST_CASE("capacity overflow is reported before solving") {
    Lattice lat(2, 3, true);
    EnergyModel m(lat, std::vector<double>(9, 1e12), 1.0, 0.0);
    CHECK_THROWS_AS(ground_state(m), ScaleOverflow);
  }

  TEST_CASE("brute force size limit") {
    Lattice lat(2, 5, true);
    CHECK_THROWS_AS(brute_force_ground_state(seeded(lat, 1, 1.0, 0.0)), std::invalid_argument);
  }

  TEST_CASE("flipped energy gap identities") {
    Lattice lat(2, 4, true);
    auto m = seeded(lat, 88, 1.2, 0.0);
    CHECK(flipped_energy_gap(m, VertexSet(lat.size())) == 0.0);
    CHECK(std::fabs(flipped_energy_gap(m, VertexSet(lat.size()).complement())) <= 2 * resolution(m));
  }

  TEST_CASE("interface bound on flipped disorder") {
    std::size_t checked = 0;
    for (int d : {2, 3}) {
      Lattice lat(d, d == 2 ? 4 : 3, true);
      for (int t = 0; t < 60; ++t) {
        const double M = 0.25 * (t % 7) - 0.75;
        auto m = seeded(lat, 300 + t + 100 * d, 3.0, M);
        const auto tau = ground_state(m);
        // Spin clusters of tau carry an interface on their boundary.
        for (const auto& cl : spin_clusters(lat, tau)) {
          VertexSet a(lat.size(), cl);
          if (a.size() == lat.size()) continue;
          REQUIRE(has_interface_on(lat, tau, a));
          const double bound = -2.0 * edge_boundary(lat, a) + 2.0 * std::fabs(M) * a.size();
          CHECK(flipped_energy_gap(m, a) <= bound + 4 * resolution(m));
          ++checked;
        }
      }
    }
    CHECK(checked > 50);
  }

  TEST_CASE("global spin cluster") {
    Lattice lat(2, 6, true);
    auto all = global_spin_cluster(lat, SpinConfig::uniform(lat.size(), 1), 1);
    REQUIRE(all.has_value());
    CHECK(all->size() == lat.size());

    std::vector<std::int8_t> board(lat.size());
    for (Vertex v = 0; v < lat.size(); ++v) board[v] = (lat.coord_at(v, 0) + lat.coord_at(v, 1)) % 2 ? 1 : -1;
    CHECK_FALSE(global_spin_cluster(lat, SpinConfig(board), 1).has_value());

    auto hole = SpinConfig::uniform(lat.size(), 1);
    hole.set(14, -1);
    auto g = global_spin_cluster(lat, hole, 1);
    REQUIRE(g.has_value());
    CHECK(g->size() == lat.size() - 1);
    CHECK_FALSE(g->contains(14));
    CHECK_THROWS_AS(global_spin_cluster(lat, hole, 0), std::invalid_argument);
  }

  TEST_CASE("every vertex is good without noise") {
    Lattice lat(2, 9, true);
    EnergyModel m(lat, sample_field(4, lat).values, 0.0, 0.0);
    for (Vertex u : {0u, 40u, 80u}) {
      const auto r = is_good_vertex(m, u, 2, -0.1, 0.1, {4, true});
      CHECK(r.good);
      CHECK(r.sets_checked > 0);
      CHECK(r.max_set_size == 4);
    }
  }

  TEST_CASE("singleton cap reduces to a two-solve comparison") {
    Lattice lat(2, 9, true);
    for (int t = 0; t < 10; ++t) {
      auto m = seeded(lat, 700 + t, 2.0, 0.0);
      const Vertex u = static_cast<Vertex>(t * 7 % lat.size());
      const auto r = is_good_vertex(m, u, 2, -0.2, 0.2, {1, true});
      bool expect = true;
      for (auto bc : {BoundaryCondition::plus(), BoundaryCondition::minus()}) {
        for (double M : {-0.2, 0.2}) {
          auto w = window_model(m.with_M(M), {lat.coord(u), 4}, bc);
          auto h = w.model.h;
          h[w.center_local] = -h[w.center_local];
          const double gap = ground_energy(w.model.with_field(h)) - ground_energy(w.model);
          expect = expect && std::fabs(gap) <= 2.0 * lat.dim() + 1e-9;
        }
      }
      CHECK(r.sets_checked == 1);
      CHECK(r.good == expect);
    }
  }

  TEST_CASE("strong noise makes most vertices bad") {
    Lattice lat(2, 9, true);
    int bad = 0;
    for (int t = 0; t < 16; ++t) {
      auto m = seeded(lat, 1300 + t, 10.0, 0.0);
      if (!is_good_vertex(m, 40, 2, -0.1, 0.1, {4, true}).good) ++bad;
    }
    CHECK(bad >= 12);
  }

  TEST_CASE("good vertex window must fit") {
    Lattice lat(2, 8, true);
    auto m = seeded(lat, 1, 1.0, 0.0);
    CHECK_THROWS_AS(is_good_vertex(m, 0, 2, 0.0, 0.1), std::invalid_argument);
  }
}
