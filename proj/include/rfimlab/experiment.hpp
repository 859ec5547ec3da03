#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rfimlab {

inline constexpr const char* kFormatTag = "rfimlab/1";

enum class ValueType { Int, Double, Bool, String, IntList, DoubleList, Seeds };

/// One configuration key. A key without a default is required.
struct KeySpec {
  std::string name;
  ValueType type;
  std::optional<std::string> default_value;
  std::string help;
};

/// Keys accepted by an engine, in echo order.
const std::vector<KeySpec>& engine_schema(std::string_view engine);
const std::vector<std::string>& engine_names();

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A fully resolved configuration: every schema key has a value.
class ExperimentConfig {
 public:
  /// Fills defaults, rejects unknown keys, missing required keys and
  /// values that do not parse as the key's type.
  static ExperimentConfig resolve(std::string engine, const std::map<std::string, std::string>& given);

  const std::string& engine() const noexcept { return engine_; }
  const std::map<std::string, std::string>& values() const noexcept { return values_; }

  long long get_int(const std::string& key) const;
  double get_double(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  const std::string& get_string(const std::string& key) const;
  std::vector<long long> get_ints(const std::string& key) const;
  std::vector<double> get_doubles(const std::string& key) const;
  std::vector<std::uint64_t> get_seeds(const std::string& key) const;

  /// INI text with one [engine] section, keys in schema order.
  std::string to_ini() const;
  /// FNV-1a of to_ini().
  std::uint64_t hash() const noexcept;
  std::string hash_hex() const;

 private:
  std::string engine_;
  std::map<std::string, std::string> values_;
};

/// Seed lists: comma-separated seeds and inclusive ranges "a..b".
std::vector<std::uint64_t> parse_seed_list(std::string_view text);

/// Shortest text that reads back to the same double.
std::string format_double(double x);

/// Files produced by a run, keyed by relative path. Binary files are stored
/// as raw bytes in the string.
struct Artifacts {
  std::map<std::string, std::string> files;
  int status = 0;  // 0 ok, 2 invariant violated
  std::vector<std::string> violations;
};

/// Runs the configured engine. Throws ConfigError for usage problems
/// (e.g. unreadable input); invariant violations set status = 2.
Artifacts run_experiment(const ExperimentConfig& cfg);

/// Writes artifacts plus config.ini under `dir`, creating it if needed.
void write_artifacts(const std::string& dir, const ExperimentConfig& cfg, const Artifacts& a);

/// Exit code mapping shared by the CLI and the bindings.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitInvariant = 2;

}  // namespace rfimlab
