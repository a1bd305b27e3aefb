#pragma once
// Pipeline configuration: flat `key = value` lines with `#` comments.
// Precedence, lowest first: built-in defaults, config file, TRIAGE_SEED,
// command-line overrides.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "ldu/data_io.hpp"
#include "ldu/ensemble.hpp"
#include "ldu/neural_net.hpp"
#include "ldu/triage.hpp"

namespace ldu {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class RunConfig {
 public:
  RunConfig();

  // Merges a config file; unknown keys are rejected.
  void load_file(const std::filesystem::path& path);
  // `key=value`.
  void set_override(const std::string& assignment);
  void set(const std::string& key, const std::string& value);
  void apply_environment();

  const std::string& get(const std::string& key) const;
  double get_double(const std::string& key) const;
  std::int64_t get_int(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  std::vector<double> get_doubles(const std::string& key) const;
  std::vector<std::size_t> get_sizes(const std::string& key) const;

  std::uint64_t seed() const { return static_cast<std::uint64_t>(get_int("seed")); }
  std::size_t threads() const;

  // Sub-task seeds are fixed offsets from the run seed.
  std::uint64_t data_seed() const { return seed(); }
  std::uint64_t split_seed() const { return seed() + 1; }
  std::uint64_t holdout_seed() const { return seed() + 2; }
  std::uint64_t ensemble_seed() const { return seed() + 100; }
  std::uint64_t ldu_seed() const { return seed() + 200; }
  std::uint64_t ld_seed() const { return seed() + 300; }

  SyntheticConfig synthetic() const;
  EnsembleSpec ensemble(std::size_t input_dim) const;
  // prefix is "member", "ldu" or "ld".
  TrainConfig train_config(const std::string& prefix, std::uint64_t seed) const;
  LduOptions ldu_options() const;
  LdOptions ld_options() const;
  EntropyMeasure dt_measure() const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace ldu
