#pragma once
// Stage one: K identically configured diagnostic networks that differ only
// in their seed, all trained on the full training set.

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "ldu/neural_net.hpp"
#include "ldu/uncertainty.hpp"

namespace ldu {

struct LabeledDataset;

struct EnsembleSpec {
  std::size_t member_count = 50;
  std::vector<LayerSpec> layers;
  TrainConfig member_config;  // seed field is ignored; see member_seed()
  std::uint64_t base_seed = 0;
  std::size_t threads = 1;

  std::uint64_t member_seed(std::size_t k) const { return base_seed + k; }
  void validate() const;
};

// Member k is trained with seed base_seed + k. The result does not depend on
// thread count or scheduling. A diverging member raises TrainingDiverged
// naming the member.
std::vector<NetworkParams> train_ensemble(const Matrix& features,
                                          std::span<const int> labels,
                                          const EnsembleSpec& spec);

// Entry (i, k) = softmax(forward(member k, x_i))[1]. Members must have a
// two-logit head and matching input dimension.
Matrix predict_probs(std::span<const NetworkParams> members, const Matrix& features);

PredictionMatrix predict_matrix(std::span<const NetworkParams> members,
                                const LabeledDataset& dataset);

// Directory layout: manifest.txt holding `K base_seed`, plus
// member_<k>.txt parameter files.
void save_ensemble(const std::filesystem::path& dir,
                   std::span<const NetworkParams> members, std::uint64_t base_seed);
std::vector<NetworkParams> load_ensemble(const std::filesystem::path& dir,
                                         std::uint64_t* base_seed = nullptr);

}  // namespace ldu
