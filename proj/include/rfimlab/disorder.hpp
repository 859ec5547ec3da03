#pragma once

#include <cstdint>
#include <initializer_list>
#include <string_view>
#include <vector>

#include "rfimlab/lattice.hpp"

namespace rfimlab {

/// Counter-mode hash: a pure function of (key, counter).
std::uint64_t mix64(std::uint64_t key, std::uint64_t counter) noexcept;

/// Uniform in (0, 1) keyed by (seed, counter, stream); never returns 0 or 1.
double uniform_at(std::uint64_t seed, std::uint64_t counter, std::uint64_t stream = 0) noexcept;

/// Standard Gaussian keyed by (seed, linear index).
double gaussian_at(std::uint64_t seed, std::uint64_t index) noexcept;

/// Derives a child seed from a base seed and a cell key; used to give each
/// (parameter cell, trial) of an experiment its own field.
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> key) noexcept;

/// Parses a seed written in decimal or as 0x-prefixed hex.
std::uint64_t parse_seed(std::string_view text);

/// i.i.d. standard Gaussian values h_v on a lattice.
struct DisorderField {
  std::uint64_t seed = 0;
  std::vector<double> values;

  std::size_t size() const noexcept { return values.size(); }
  double operator[](Vertex v) const noexcept { return values[v]; }
};

DisorderField sample_field(std::uint64_t seed, const Lattice& lat);

/// Standard normal CDF and upper tail, via erfc.
double normal_cdf(double x) noexcept;
double normal_sf(double x) noexcept;

/// Probabilities of a vertex being open (eps*h + M - 2 >= 0) and closed
/// (eps*h + M < 0). With eps == 0 the values are 0/1 and `degenerate` is set.
struct ThresholdParams {
  double M = 0.0;
  double eps = 0.0;
  double p = 0.0;
  double q = 0.0;
  bool degenerate = false;
};

ThresholdParams open_closed_probs(double M, double eps);

/// c_d = 2 sqrt(d) / (1 + sqrt(d)), the positive root of x^2 = d (2 - x)^2.
double critical_time(int d);

}  // namespace rfimlab
