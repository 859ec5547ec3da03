#include "rfimlab/disorder.hpp"

#include <charconv>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace rfimlab {

namespace {

constexpr std::uint64_t splitmix(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// 53-bit mantissa mapped into the open interval (0, 1).
double to_open_unit(std::uint64_t bits) noexcept {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace

std::uint64_t mix64(std::uint64_t key, std::uint64_t counter) noexcept {
  return splitmix(splitmix(key) ^ splitmix(counter + 0x632be59bd9b4e019ULL));
}

double uniform_at(std::uint64_t seed, std::uint64_t counter, std::uint64_t stream) noexcept {
  return to_open_unit(mix64(seed ^ (stream * 0xd1342543de82ef95ULL), counter));
}

double gaussian_at(std::uint64_t seed, std::uint64_t index) noexcept {
  const double u1 = uniform_at(seed, 2 * index, 0x5eed);
  const double u2 = uniform_at(seed, 2 * index + 1, 0x5eed);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> key) noexcept {
  std::uint64_t h = splitmix(base);
  for (std::uint64_t k : key) h = mix64(h, k);
  return h;
}

std::uint64_t parse_seed(std::string_view text) {
  int base = 10;
  if (text.size() > 2 && text[0] == '0' && (text[1] == 'x' || text[1] == 'X')) {
    base = 16;
    text.remove_prefix(2);
  }
  std::uint64_t value = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value, base);
  if (text.empty() || ec != std::errc{} || ptr != end)
    throw std::invalid_argument("invalid seed: " + std::string(text));
  return value;
}

DisorderField sample_field(std::uint64_t seed, const Lattice& lat) {
  DisorderField f;
  f.seed = seed;
  f.values.resize(lat.size());
  for (std::size_t v = 0; v < lat.size(); ++v) f.values[v] = gaussian_at(seed, v);
  return f;
}

double normal_cdf(double x) noexcept { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_sf(double x) noexcept { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

ThresholdParams open_closed_probs(double M, double eps) {
  if (!(eps >= 0.0)) throw std::invalid_argument("noise intensity must be >= 0");
  ThresholdParams t;
  t.M = M;
  t.eps = eps;
  if (eps == 0.0) {
    t.degenerate = true;
    t.p = M - 2.0 >= 0.0 ? 1.0 : 0.0;
    t.q = M < 0.0 ? 1.0 : 0.0;
    return t;
  }
  t.p = normal_sf((2.0 - M) / eps);
  t.q = normal_cdf(-M / eps);
  return t;
}

double critical_time(int d) {
  if (d < 2) throw std::invalid_argument("critical time needs d >= 2");
  const double s = std::sqrt(static_cast<double>(d));
  return 2.0 * s / (1.0 + s);
}

}  // namespace rfimlab
