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
#include "spiketrum/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>

namespace spiketrum {

namespace {

// Platform-independent uniform in [0, 1) from a 64-bit engine.
double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

Eigen::MatrixXd softmax_columns(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd out(logits.rows(), logits.cols());
  for (Eigen::Index c = 0; c < logits.cols(); ++c) {
    const Eigen::VectorXd shifted =
        (logits.col(c).array() - logits.col(c).maxCoeff()).exp();
    out.col(c) = shifted / shifted.sum();
  }
  return out;
}

// Pre-activations z[l] and activations a[l] (a[0] = input).
struct ForwardTrace {
  std::vector<Eigen::MatrixXd> z;
  std::vector<Eigen::MatrixXd> a;
  Eigen::MatrixXd probs;
};

ForwardTrace forward_trace(const MlpModel& model, const Eigen::MatrixXd& x) {
  if (std::size_t(x.rows()) != model.input_dim()) {
    throw Error(ErrorKind::kShapeMismatch,
                "input has " + std::to_string(x.rows()) + " features, model expects " +
                    std::to_string(model.input_dim()));
  }
  ForwardTrace tr;
  tr.a.push_back(x);
  for (std::size_t l = 0; l < model.num_layers(); ++l) {
    Eigen::MatrixXd z = model.weights[l] * tr.a.back();
    z.colwise() += model.biases[l];
    tr.z.push_back(z);
    if (l + 1 < model.num_layers()) tr.a.push_back(z.cwiseMax(0.0));
  }
  tr.probs = softmax_columns(tr.z.back());
  return tr;
}

Eigen::MatrixXd stack_columns(const std::vector<FeatureVector>& features,
                              const std::vector<std::size_t>& order,
                              std::size_t begin, std::size_t end) {
  Eigen::MatrixXd x(features[order[begin]].size(), Eigen::Index(end - begin));
  for (std::size_t i = begin; i < end; ++i) {
    x.col(Eigen::Index(i - begin)) = features[order[i]];
  }
  return x;
}

}  // namespace

FeatureVector temporal_average(const std::vector<SpikeEvent>& events,
                               std::int64_t duration, std::int64_t bin,
                               const ChannelTable& table, ActivityMode mode) {
  if (duration <= 0 || bin <= 0) {
    throw Error(ErrorKind::kInvalidConfig, "duration and bin must be positive");
  }
  const std::int64_t bins = (duration + bin - 1) / bin;
  FeatureVector values = FeatureVector::Zero(Eigen::Index(table.channels()));
  std::set<std::pair<std::size_t, std::int64_t>> active;
  for (const auto& ev : events) {
    if (ev.t < 0 || ev.t >= duration) continue;
    if (ev.channel >= table.channels()) {
      throw Error(ErrorKind::kCodeOutOfBounds,
                  "channel " + std::to_string(ev.channel) + " not in table");
    }
    if (mode == ActivityMode::kCounts) {
      values(Eigen::Index(ev.channel)) += 1.0;
    } else if (active.emplace(ev.channel, ev.t / bin).second) {
      values(Eigen::Index(ev.channel)) += 1.0;
    }
  }
  return values / static_cast<double>(bins);
}

ClassScores prf1(const ClassCounts& c) {
  ClassScores s;
  s.precision = ratio(c.tp, c.tp + c.fp);
  s.recall = ratio(c.tp, c.tp + c.fn);
  const double sum = s.precision + s.recall;
  s.f1 = sum == 0.0 ? 0.0 : 2.0 * s.precision * s.recall / sum;
  return s;
}

Prf1Report prf1(const ConfusionCounts& counts) {
  Prf1Report report;
  for (const auto& c : counts) {
    report.per_class.push_back(prf1(c));
    report.macro.precision += report.per_class.back().precision;
    report.macro.recall += report.per_class.back().recall;
    report.macro.f1 += report.per_class.back().f1;
  }
  if (!counts.empty()) {
    const double n = static_cast<double>(counts.size());
    report.macro.precision /= n;
    report.macro.recall /= n;
    report.macro.f1 /= n;
  }
  return report;
}

ConfusionCounts confusion_counts(const std::vector<int>& truth,
                                 const std::vector<int>& predicted,
                                 std::size_t num_classes) {
  if (truth.size() != predicted.size()) {
    throw Error(ErrorKind::kLengthMismatch, "truth/prediction length differ");
  }
  ConfusionCounts counts(num_classes);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const auto t = static_cast<std::size_t>(truth[i]);
    const auto p = static_cast<std::size_t>(predicted[i]);
    if (t >= num_classes || p >= num_classes) {
      throw Error(ErrorKind::kCodeOutOfBounds, "class label out of range");
    }
    if (t == p) {
      ++counts[t].tp;
    } else {
      ++counts[p].fp;
      ++counts[t].fn;
    }
  }
  return counts;
}

std::vector<std::size_t> MlpModel::widths() const {
  std::vector<std::size_t> w;
  if (weights.empty()) return w;
  w.push_back(input_dim());
  for (const auto& m : weights) w.push_back(std::size_t(m.rows()));
  return w;
}

void MlpModel::validate() const {
  if (weights.empty() || weights.size() != biases.size()) {
    throw Error(ErrorKind::kShapeMismatch, "weights and biases do not pair up");
  }
  for (std::size_t l = 0; l < weights.size(); ++l) {
    if (biases[l].size() != weights[l].rows() ||
        (l > 0 && weights[l].cols() != weights[l - 1].rows())) {
      throw Error(ErrorKind::kShapeMismatch,
                  "layer " + std::to_string(l) + " does not chain");
    }
  }
}

MlpModel init_mlp(const std::vector<std::size_t>& widths, std::uint64_t seed) {
  if (widths.size() < 2) {
    throw Error(ErrorKind::kShapeMismatch, "an MLP needs at least two widths");
  }
  std::mt19937_64 rng(seed);
  MlpModel model;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const auto in = Eigen::Index(widths[l]);
    const auto out = Eigen::Index(widths[l + 1]);
    const double limit = 1.0 / std::sqrt(static_cast<double>(in));
    Eigen::MatrixXd w(out, in);
    for (Eigen::Index r = 0; r < out; ++r) {
      for (Eigen::Index c = 0; c < in; ++c) {
        w(r, c) = (2.0 * unit_uniform(rng) - 1.0) * limit;
      }
    }
    model.weights.push_back(std::move(w));
    model.biases.push_back(Eigen::VectorXd::Zero(out));
  }
  return model;
}

std::size_t mac_count(const MlpModel& model) {
  std::size_t macs = 0;
  for (const auto& w : model.weights) macs += std::size_t(w.rows() * w.cols());
  return macs;
}

Eigen::VectorXd mlp_forward(const MlpModel& model, const FeatureVector& x) {
  return forward_trace(model, x).probs.col(0);
}

Eigen::MatrixXd mlp_forward_batch(const MlpModel& model, const Eigen::MatrixXd& x) {
  return forward_trace(model, x).probs;
}

MlpGradients mlp_gradients(const MlpModel& model, const Eigen::MatrixXd& x,
                           const std::vector<int>& labels) {
  if (std::size_t(x.cols()) != labels.size() || labels.empty()) {
    throw Error(ErrorKind::kShapeMismatch, "one label per input column expected");
  }
  const ForwardTrace tr = forward_trace(model, x);
  const double n = static_cast<double>(labels.size());

  MlpGradients g;
  Eigen::MatrixXd delta = tr.probs;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto y = static_cast<Eigen::Index>(labels[i]);
    if (y < 0 || y >= delta.rows()) {
      throw Error(ErrorKind::kShapeMismatch, "label out of range");
    }
    g.loss -= std::log(std::max(tr.probs(y, Eigen::Index(i)), 1e-300));
    delta(y, Eigen::Index(i)) -= 1.0;
  }
  g.loss /= n;
  delta /= n;

  const std::size_t layers = model.num_layers();
  g.weights.resize(layers);
  g.biases.resize(layers);
  for (std::size_t l = layers; l-- > 0;) {
    g.weights[l] = delta * tr.a[l].transpose();
    g.biases[l] = delta.rowwise().sum();
    if (l > 0) {
      delta = (model.weights[l].transpose() * delta)
                  .cwiseProduct((tr.z[l - 1].array() > 0.0).cast<double>().matrix());
    }
  }
  return g;
}

double mlp_loss(const MlpModel& model, const Eigen::MatrixXd& x,
                const std::vector<int>& labels) {
  const Eigen::MatrixXd probs = mlp_forward_batch(model, x);
  double loss = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    loss -= std::log(std::max(probs(labels[i], Eigen::Index(i)), 1e-300));
  }
  return loss / static_cast<double>(labels.size());
}

MlpTrainResult mlp_train(const std::vector<FeatureVector>& features,
                         const std::vector<int>& labels, std::size_t num_classes,
                         const MlpTrainConfig& cfg) {
  if (features.size() != labels.size() || features.empty()) {
    throw Error(ErrorKind::kShapeMismatch, "features and labels differ in length");
  }
  if (num_classes < 2) {
    throw Error(ErrorKind::kDegenerateData, "need at least two classes");
  }
  std::vector<std::size_t> per_class(num_classes, 0);
  for (int y : labels) {
    if (y < 0 || std::size_t(y) >= num_classes) {
      throw Error(ErrorKind::kDegenerateData, "label out of range");
    }
    ++per_class[std::size_t(y)];
  }
  for (std::size_t c = 0; c < num_classes; ++c) {
    if (per_class[c] == 0) {
      throw Error(ErrorKind::kDegenerateData,
                  "class " + std::to_string(c) + " has no samples");
    }
  }
  if (cfg.batch == 0) throw Error(ErrorKind::kInvalidConfig, "batch must be > 0");
  const auto dim = std::size_t(features.front().size());
  for (const auto& f : features) {
    if (std::size_t(f.size()) != dim) {
      throw Error(ErrorKind::kShapeMismatch, "feature vectors differ in length");
    }
  }

  std::vector<std::size_t> widths{dim};
  widths.insert(widths.end(), cfg.hidden.begin(), cfg.hidden.end());
  widths.push_back(num_classes);

  MlpTrainResult result;
  result.model = init_mlp(widths, cfg.seed);
  MlpModel& model = result.model;

  std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<std::size_t> order(features.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<int> batch_labels;
  double lr = cfg.learning_rate;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (epoch > 0 && cfg.decay_every > 0 && epoch % cfg.decay_every == 0) {
      lr *= cfg.decay_factor;
    }
    // Fisher-Yates with our own draws so the order is the same everywhere.
    for (std::size_t i = order.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(rng() % i);
      std::swap(order[i - 1], order[j]);
    }
    double epoch_loss = 0.0;
    for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch) {
      const std::size_t end = std::min(order.size(), begin + cfg.batch);
      const Eigen::MatrixXd x = stack_columns(features, order, begin, end);
      batch_labels.clear();
      for (std::size_t i = begin; i < end; ++i) batch_labels.push_back(labels[order[i]]);
      const MlpGradients g = mlp_gradients(model, x, batch_labels);
      epoch_loss += g.loss * static_cast<double>(end - begin);
      for (std::size_t l = 0; l < model.num_layers(); ++l) {
        model.weights[l] -= lr * g.weights[l];
        model.biases[l] -= lr * g.biases[l];
      }
    }
    result.epoch_loss.push_back(epoch_loss / static_cast<double>(order.size()));
  }
  return result;
}

std::vector<int> mlp_predict(const MlpModel& model,
                             const std::vector<FeatureVector>& features) {
  std::vector<int> out;
  out.reserve(features.size());
  for (const auto& f : features) {
    Eigen::Index best = 0;
    mlp_forward(model, f).maxCoeff(&best);
    out.push_back(static_cast<int>(best));
  }
  return out;
}

void save_mlp(const std::filesystem::path& path, const MlpModel& model) {
  model.validate();
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIoError, "cannot write " + path.string());
  out << "# spiketrum mlp v1\n";
  out << "# hidden activation relu, output softmax\n";
  out << "# widths";
  for (auto w : model.widths()) out << ' ' << w;
  out << "\n# per layer: 'layer L OUT IN', OUT weight rows of IN values, then OUT biases\n";
  out << "layers " << model.num_layers() << '\n';
  char buf[32];
  for (std::size_t l = 0; l < model.num_layers(); ++l) {
    const auto& w = model.weights[l];
    out << "layer " << l << ' ' << w.rows() << ' ' << w.cols() << '\n';
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) {
        std::snprintf(buf, sizeof buf, "%.17g", w(r, c));
        out << (c ? " " : "") << buf;
      }
      out << '\n';
    }
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      std::snprintf(buf, sizeof buf, "%.17g", model.biases[l](r));
      out << (r ? " " : "") << buf;
    }
    out << '\n';
  }
  if (!out) throw Error(ErrorKind::kIoError, "write failed: " + path.string());
}

MlpModel load_mlp(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIoError, "cannot open " + path.string());
  std::stringstream body;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] == '#') continue;
    body << line << '\n';
  }
  auto corrupt = [&] {
    return Error(ErrorKind::kCorruptFile, "malformed model file " + path.string());
  };
  std::string tag;
  std::size_t layers = 0;
  if (!(body >> tag >> layers) || tag != "layers" || layers == 0) throw corrupt();
  MlpModel model;
  for (std::size_t l = 0; l < layers; ++l) {
    std::size_t index = 0;
    Eigen::Index rows = 0, cols = 0;
    if (!(body >> tag >> index >> rows >> cols) || tag != "layer" || index != l ||
        rows <= 0 || cols <= 0) {
      throw corrupt();
    }
    Eigen::MatrixXd w(rows, cols);
    Eigen::VectorXd b(rows);
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index c = 0; c < cols; ++c)
        if (!(body >> w(r, c))) throw corrupt();
    for (Eigen::Index r = 0; r < rows; ++r)
      if (!(body >> b(r))) throw corrupt();
    model.weights.push_back(std::move(w));
    model.biases.push_back(std::move(b));
  }
  model.validate();
  return model;
}

}  // namespace spiketrum
