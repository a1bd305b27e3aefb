#include "ldu/run_config.hpp"

#include <charconv>
#include <cstdlib>
#include <sstream>

#include "ldu/file_util.hpp"
#include "ldu/parallel.hpp"

namespace ldu {
namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_double(const std::string& key, const std::string& text) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    throw ConfigError("config key '" + key + "': not a number: '" + text + "'");
  }
  return v;
}

std::int64_t to_int(const std::string& key, const std::string& text) {
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    throw ConfigError("config key '" + key + "': not an integer: '" + text + "'");
  }
  return v;
}

Optimizer to_optimizer(const std::string& key, const std::string& text) {
  if (text == "adam") return Optimizer::kAdam;
  if (text == "sgd") return Optimizer::kSgd;
  throw ConfigError("config key '" + key + "': expected adam or sgd");
}

}  // namespace

RunConfig::RunConfig() {
  values_ = {
      {"seed", "42"},
      {"threads", "0"},
      // synthetic task
      {"n", "4000"},
      {"d", "8"},
      {"mu", "1.0"},
      {"confound_fraction", "0.1"},
      {"flip_prob", "0.8"},
      {"split_ratio", "0.7"},
      // inputs; empty means <out>/<default name>
      {"dataset_file", ""},
      {"train_file", ""},
      {"test_file", ""},
      // stage one
      {"members", "50"},
      {"member_hidden", "16"},
      {"member_epochs", "20"},
      {"member_lr", "0.01"},
      {"member_optimizer", "adam"},
      {"member_batch", "32"},
      {"member_weight_decay", "0"},
      {"stage2_holdout", "0"},
      // stage two
      {"ldu_hidden", "100,100"},
      {"ldu_epochs", "80"},
      {"ldu_lr", "0.01"},
      {"ldu_optimizer", "adam"},
      {"ldu_batch", "32"},
      {"ldu_weight_decay", "0"},
      {"sort_members", "false"},
      // LD baseline
      {"ld_hidden", "16"},
      {"ld_epochs", "20"},
      {"ld_lr", "0.01"},
      {"ld_optimizer", "adam"},
      {"ld_batch", "32"},
      {"ld_weight_decay", "0"},
      {"ld_warm_start", "false"},
      // sweeps
      {"alpha_grid", "0.5,0.6,0.7,0.8,0.85,0.9,0.93,0.95,0.97,0.98,0.99,0.995,1.0"},
      {"tau_grid", "0,0.1,0.2,0.3,0.4,0.5,0.6,0.6931471805599453"},
      {"dt_measure", "diagnostic"},
      {"write_decisions", "false"},
  };
}

void RunConfig::load_file(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) +
                        ": expected `key = value`");
    }
    try {
      set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

void RunConfig::set_override(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) {
    throw ConfigError("override '" + assignment + "' is not key=value");
  }
  set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

void RunConfig::set(const std::string& key, const std::string& value) {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
  it->second = value;
}

void RunConfig::apply_environment() {
  if (const char* env = std::getenv("TRIAGE_SEED")) {
    to_int("TRIAGE_SEED", env);
    set("seed", env);
  }
}

const std::string& RunConfig::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
  return it->second;
}

double RunConfig::get_double(const std::string& key) const {
  return to_double(key, get(key));
}

std::int64_t RunConfig::get_int(const std::string& key) const {
  return to_int(key, get(key));
}

bool RunConfig::get_bool(const std::string& key) const {
  const std::string& v = get(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("config key '" + key + "': expected true or false");
}

std::vector<double> RunConfig::get_doubles(const std::string& key) const {
  std::vector<double> out;
  for (const auto& item : split_list(get(key))) out.push_back(to_double(key, item));
  return out;
}

std::vector<std::size_t> RunConfig::get_sizes(const std::string& key) const {
  std::vector<std::size_t> out;
  for (const auto& item : split_list(get(key))) {
    const auto v = to_int(key, item);
    if (v <= 0) throw ConfigError("config key '" + key + "': sizes must be positive");
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

std::size_t RunConfig::threads() const {
  const auto t = get_int("threads");
  return t > 0 ? static_cast<std::size_t>(t) : default_threads();
}

SyntheticConfig RunConfig::synthetic() const {
  SyntheticConfig c;
  c.n = static_cast<std::size_t>(get_int("n"));
  c.d = static_cast<std::size_t>(get_int("d"));
  c.mu = get_double("mu");
  c.confound_fraction = get_double("confound_fraction");
  c.flip_prob = get_double("flip_prob");
  c.seed = data_seed();
  return c;
}

TrainConfig RunConfig::train_config(const std::string& prefix, std::uint64_t seed) const {
  TrainConfig c;
  c.epochs = static_cast<int>(get_int(prefix + "_epochs"));
  c.learning_rate = get_double(prefix + "_lr");
  c.optimizer = to_optimizer(prefix + "_optimizer", get(prefix + "_optimizer"));
  const auto batch = get_int(prefix + "_batch");
  if (batch <= 0) throw ConfigError(prefix + "_batch must be positive");
  c.batch_size = static_cast<std::size_t>(batch);
  c.weight_decay = get_double(prefix + "_weight_decay");
  c.seed = seed;
  return c;
}

EnsembleSpec RunConfig::ensemble(std::size_t input_dim) const {
  EnsembleSpec spec;
  const auto k = get_int("members");
  if (k <= 0) throw ConfigError("members must be positive");
  spec.member_count = static_cast<std::size_t>(k);
  spec.layers = mlp_specs(input_dim, get_sizes("member_hidden"), kBinaryClasses);
  spec.member_config = train_config("member", ensemble_seed());
  spec.base_seed = ensemble_seed();
  spec.threads = threads();
  return spec;
}

LduOptions RunConfig::ldu_options() const {
  return {get_sizes("ldu_hidden"), get_bool("sort_members")};
}

LdOptions RunConfig::ld_options() const {
  LdOptions options;
  options.hidden = get_sizes("ld_hidden");
  return options;
}

EntropyMeasure RunConfig::dt_measure() const {
  const std::string& v = get("dt_measure");
  if (v == "diagnostic") return EntropyMeasure::kDiagnostic;
  if (v == "ensemble") return EntropyMeasure::kEnsemble;
  throw ConfigError("dt_measure must be diagnostic or ensemble");
}

}  // namespace ldu
