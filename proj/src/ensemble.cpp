#include "ldu/ensemble.hpp"

#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "ldu/data_io.hpp"
#include "ldu/file_util.hpp"
#include "ldu/numerics.hpp"
#include "ldu/parallel.hpp"

namespace ldu {
namespace {

std::filesystem::path member_path(const std::filesystem::path& dir, std::size_t k) {
  char name[32];
  std::snprintf(name, sizeof name, "member_%03zu.txt", k);
  return dir / name;
}

}  // namespace

void EnsembleSpec::validate() const {
  if (member_count == 0) throw std::invalid_argument("ensemble: K must be >= 1");
  if (layers.empty()) throw std::invalid_argument("ensemble: no member layers");
  if (layers.back().output_dim != static_cast<std::size_t>(kBinaryClasses)) {
    throw std::invalid_argument("ensemble: members must have a two-logit head");
  }
  member_config.validate();
}

std::vector<NetworkParams> train_ensemble(const Matrix& features,
                                          std::span<const int> labels,
                                          const EnsembleSpec& spec) {
  spec.validate();
  if (features.rows() == 0) throw std::invalid_argument("ensemble: empty training set");
  std::vector<NetworkParams> members(spec.member_count);
  parallel_for(spec.member_count, spec.threads, [&](std::size_t k) {
    TrainConfig config = spec.member_config;
    config.seed = spec.member_seed(k);
    try {
      members[k] = train(features, labels, spec.layers, config);
    } catch (const TrainingDiverged& e) {
      throw TrainingDiverged("ensemble member " + std::to_string(k) + ": " + e.what());
    }
  });
  return members;
}

Matrix predict_probs(std::span<const NetworkParams> members, const Matrix& features) {
  if (members.empty()) throw std::invalid_argument("predict: no ensemble members");
  for (const auto& m : members) {
    if (m.output_dim() != static_cast<std::size_t>(kBinaryClasses)) {
      throw std::invalid_argument("predict: member head is not two-class");
    }
    if (m.input_dim() != features.cols()) {
      throw std::invalid_argument("predict: member input dimension mismatch");
    }
  }
  Matrix probs(features.rows(), members.size());
  for (std::size_t k = 0; k < members.size(); ++k) {
    const Matrix logits = forward_batch(members[k], features);
    for (std::size_t i = 0; i < features.rows(); ++i) {
      probs(i, k) = softmax(logits.row(i))[1];
    }
  }
  return probs;
}

PredictionMatrix predict_matrix(std::span<const NetworkParams> members,
                                const LabeledDataset& dataset) {
  return {dataset.ids, predict_probs(members, dataset.features), dataset.labels};
}

void save_ensemble(const std::filesystem::path& dir,
                   std::span<const NetworkParams> members, std::uint64_t base_seed) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string());
  for (std::size_t k = 0; k < members.size(); ++k) {
    save_params(member_path(dir, k), members[k]);
  }
  write_file_atomic(dir / "manifest.txt", std::to_string(members.size()) + " " +
                                              std::to_string(base_seed) + "\n");
}

std::vector<NetworkParams> load_ensemble(const std::filesystem::path& dir,
                                         std::uint64_t* base_seed) {
  std::istringstream manifest(read_file(dir / "manifest.txt"));
  std::size_t count = 0;
  std::uint64_t seed = 0;
  if (!(manifest >> count >> seed) || count == 0) {
    throw std::invalid_argument("ensemble manifest: expected `K base_seed`");
  }
  std::vector<NetworkParams> members;
  members.reserve(count);
  for (std::size_t k = 0; k < count; ++k) members.push_back(load_params(member_path(dir, k)));
  if (base_seed) *base_seed = seed;
  return members;
}

}  // namespace ldu
