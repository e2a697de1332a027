/* Copyright 2026 The Spiketrum Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include <Eigen/Dense>

#include "spiketrum/spike_coder.hpp"

namespace spiketrum {

// ---------------------------------------------------------------------------
// Temporal averaging
// ---------------------------------------------------------------------------

enum class ActivityMode {
  kBinary,  // fraction of bins with at least one spike, in [0, 1]
  kCounts,  // mean spike count per bin
};

using FeatureVector = Eigen::VectorXd;

/// Collapses a spike train to one value per channel. Events outside
/// [0, duration) are ignored.
FeatureVector temporal_average(const std::vector<SpikeEvent>& events,
                               std::int64_t duration, std::int64_t bin,
                               const ChannelTable& table,
                               ActivityMode mode = ActivityMode::kBinary);

// ---------------------------------------------------------------------------
// Precision / recall / F1
// ---------------------------------------------------------------------------

struct ClassCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
};

using ConfusionCounts = std::vector<ClassCounts>;

struct ClassScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct Prf1Report {
  std::vector<ClassScores> per_class;
  ClassScores macro;
};

// 0/0 ratios are defined as 0.
ClassScores prf1(const ClassCounts& counts);
Prf1Report prf1(const ConfusionCounts& counts);

ConfusionCounts confusion_counts(const std::vector<int>& truth,
                                 const std::vector<int>& predicted,
                                 std::size_t num_classes);

// ---------------------------------------------------------------------------
// Multilayer perceptron: ReLU hidden layers, softmax output
// ---------------------------------------------------------------------------

struct MlpModel {
  // weights[l] is (out x in); layer l maps widths[l] -> widths[l + 1].
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;

  std::size_t num_layers() const { return weights.size(); }
  std::size_t input_dim() const {
    return weights.empty() ? 0 : std::size_t(weights.front().cols());
  }
  std::size_t num_classes() const {
    return weights.empty() ? 0 : std::size_t(weights.back().rows());
  }
  std::vector<std::size_t> widths() const;
  // Throws kShapeMismatch when consecutive layers do not chain.
  void validate() const;
};

// Weights ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)), biases zero.
MlpModel init_mlp(const std::vector<std::size_t>& widths, std::uint64_t seed);

// Multiply-accumulates of one forward pass, biases excluded.
std::size_t mac_count(const MlpModel& model);

/// Class probabilities for one input. Throws kShapeMismatch.
Eigen::VectorXd mlp_forward(const MlpModel& model, const FeatureVector& x);

// Column-per-sample batch form.
Eigen::MatrixXd mlp_forward_batch(const MlpModel& model, const Eigen::MatrixXd& x);

struct MlpGradients {
  double loss = 0.0;  // mean cross-entropy
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
};

// Mean cross-entropy and its gradient over the columns of `x`.
MlpGradients mlp_gradients(const MlpModel& model, const Eigen::MatrixXd& x,
                           const std::vector<int>& labels);

double mlp_loss(const MlpModel& model, const Eigen::MatrixXd& x,
                const std::vector<int>& labels);

struct MlpTrainConfig {
  std::vector<std::size_t> hidden{256, 64};
  std::size_t epochs = 400;
  std::size_t batch = 64;
  double learning_rate = 1e-3;
  double decay_factor = 0.9;  // lr *= decay_factor ...
  std::size_t decay_every = 50;  // ... every this many epochs
  std::uint64_t seed = 1;
};

struct MlpTrainResult {
  MlpModel model;
  std::vector<double> epoch_loss;  // mean training loss per epoch
};

/// Mini-batch gradient descent on cross-entropy. Deterministic for a fixed
/// seed. Throws kDegenerateData if any class in [0, num_classes) is absent.
MlpTrainResult mlp_train(const std::vector<FeatureVector>& features,
                         const std::vector<int>& labels, std::size_t num_classes,
                         const MlpTrainConfig& cfg);

std::vector<int> mlp_predict(const MlpModel& model,
                             const std::vector<FeatureVector>& features);

void save_mlp(const std::filesystem::path& path, const MlpModel& model);
MlpModel load_mlp(const std::filesystem::path& path);

}  // namespace spiketrum
