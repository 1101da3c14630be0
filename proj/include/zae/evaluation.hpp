#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "zae/autoencoder.hpp"
#include "zae/core.hpp"
#include "zae/datasets.hpp"
#include "zae/kmeans.hpp"
#include "zae/preprocessing.hpp"
#include "zae/training.hpp"

namespace zae {

// ---------------------------------------------------------------------------
// Feature extraction under the three inference schemes.
// ---------------------------------------------------------------------------

enum class InferenceScheme { ReluWithBias, ReluNoBias, Natural };

inline std::string to_string(InferenceScheme scheme) {
  switch (scheme) {
    case InferenceScheme::ReluWithBias: return "relu-bias";
    case InferenceScheme::ReluNoBias: return "relu-nobias";
    case InferenceScheme::Natural: return "natural";
  }
  return "?";
}

inline InferenceScheme scheme_from_string(const std::string& name) {
  if (name == "relu-bias") return InferenceScheme::ReluWithBias;
  if (name == "relu-nobias") return InferenceScheme::ReluNoBias;
  if (name == "natural") return InferenceScheme::Natural;
  throw std::invalid_argument("unknown inference scheme: " + name);
}

/// Features per scheme: [W^T x + b]_+, [W^T x]_+, or the model's own training
/// activation on W^T x + b. Zero-bias models make the first two identical.
inline DataMatrix extract_features(const AutoencoderModel& model, const DataMatrix& x,
                                   InferenceScheme scheme) {
  detail::check_input_dim(model, x.cols(), "extract_features");
  switch (scheme) {
    case InferenceScheme::ReluWithBias: {
      DataMatrix a = x * model.W;
      if (!model.zero_bias()) a.rowwise() += model.b.transpose();
      return a.cwiseMax(0.0);
    }
    case InferenceScheme::ReluNoBias:
      return (x * model.W).cwiseMax(0.0);
    case InferenceScheme::Natural:
      return encode_batch(model, x, EncodeMode::Train);
  }
  return {};
}

/// K-means features are the zero-bias rectified centroid responses under
/// every scheme (the triangle activation is near-identical to this).
inline DataMatrix extract_features(const KMeansModel& model, const DataMatrix& x,
                                   InferenceScheme /*scheme*/) {
  if (x.cols() != model.input_dim()) {
    throw std::invalid_argument("extract_features: dimension mismatch with centroids");
  }
  return (x * model.centroids).cwiseMax(0.0);
}

// ---------------------------------------------------------------------------
// Multinomial logistic regression with weight decay.
// ---------------------------------------------------------------------------

struct ClassifierModel {
  Eigen::MatrixXd weights;  // K x C
  Vector biases;            // C
  double weight_decay = 0.0;
};

struct LogRegConfig {
  int iters = 500;
  double lr = 0.1;
  double momentum = 0.9;
  std::uint64_t seed = 0;
};

/// Row-wise softmax with max subtraction.
inline DataMatrix softmax_probs(const ClassifierModel& model, const DataMatrix& f) {
  DataMatrix logits = f * model.weights;
  logits.rowwise() += model.biases.transpose();
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    double m = logits.row(i).maxCoeff();
    logits.row(i) = (logits.row(i).array() - m).exp();
    logits.row(i) /= logits.row(i).sum();
  }
  return logits;
}

namespace detail {
/// Mean cross-entropy and its gradients, without the decay term.
inline double softmax_ce_grads(const ClassifierModel& model, const DataMatrix& f,
                               const std::vector<int>& labels, Eigen::MatrixXd& grad_w,
                               Vector& grad_b) {
  const Eigen::Index n = f.rows();
  if (static_cast<std::size_t>(n) != labels.size()) {
    throw std::invalid_argument("logreg: feature rows and label count differ");
  }
  DataMatrix probs = softmax_probs(model, f);
  double loss = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    loss -= std::log(std::max(probs(i, labels[static_cast<std::size_t>(i)]), 1e-300));
    probs(i, labels[static_cast<std::size_t>(i)]) -= 1.0;
  }
  loss /= static_cast<double>(n);
  probs /= static_cast<double>(n);
  grad_w = f.transpose() * probs;
  grad_b = probs.colwise().sum();
  return loss;
}
}  // namespace detail

/// Mean cross-entropy plus weight_decay*||W||^2 and its exact gradients.
inline double logreg_loss_and_grad(const ClassifierModel& model, const DataMatrix& f,
                                   const std::vector<int>& labels, Eigen::MatrixXd& grad_w,
                                   Vector& grad_b) {
  double loss = detail::softmax_ce_grads(model, f, labels, grad_w, grad_b);
  grad_w += 2.0 * model.weight_decay * model.weights;
  return loss + model.weight_decay * model.weights.squaredNorm();
}

/// Full-batch gradient descent with momentum from a zero initialization;
/// deterministic per configuration. The decay term is applied as its exact
/// per-step shrinkage W /= (1 + 2*lr*decay) after the momentum update, which
/// stays stable for arbitrarily large decay values (biases are not decayed).
inline ClassifierModel logreg_train(const DataMatrix& f, const std::vector<int>& labels,
                                    int num_classes, double weight_decay,
                                    const LogRegConfig& cfg = {}) {
  if (num_classes < 2) throw std::invalid_argument("logreg_train: need >= 2 classes");
  for (int label : labels) {
    if (label < 0 || label >= num_classes) throw std::invalid_argument("logreg_train: label out of range");
  }
  if (weight_decay < 0.0) throw std::invalid_argument("logreg_train: negative weight decay");

  ClassifierModel model;
  model.weights = Eigen::MatrixXd::Zero(f.cols(), num_classes);
  model.biases = Vector::Zero(num_classes);
  model.weight_decay = weight_decay;

  const double shrink = 1.0 / (1.0 + 2.0 * cfg.lr * weight_decay);
  Eigen::MatrixXd vel_w = Eigen::MatrixXd::Zero(f.cols(), num_classes);
  Vector vel_b = Vector::Zero(num_classes);
  Eigen::MatrixXd grad_w;
  Vector grad_b;
  for (int it = 0; it < cfg.iters; ++it) {
    double loss = detail::softmax_ce_grads(model, f, labels, grad_w, grad_b);
    if (!std::isfinite(loss)) {
      throw numeric_error("logreg_train: non-finite loss at iteration " + std::to_string(it));
    }
    vel_w = cfg.momentum * vel_w - cfg.lr * grad_w;
    model.weights = shrink * (model.weights + vel_w);
    vel_b = cfg.momentum * vel_b - cfg.lr * grad_b;
    model.biases += vel_b;
  }
  return model;
}

inline std::vector<int> predict_labels(const ClassifierModel& model, const DataMatrix& f) {
  DataMatrix probs = softmax_probs(model, f);
  std::vector<int> out(static_cast<std::size_t>(f.rows()));
  for (Eigen::Index i = 0; i < f.rows(); ++i) {
    Eigen::Index best = 0;
    probs.row(i).maxCoeff(&best);
    out[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return out;
}

inline double accuracy(const std::vector<int>& predicted, const std::vector<int>& truth) {
  if (predicted.size() != truth.size() || predicted.empty()) {
    throw std::invalid_argument("accuracy: size mismatch or empty");
  }
  std::size_t hits = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i)
    if (predicted[i] == truth[i]) ++hits;
  return static_cast<double>(hits) / static_cast<double>(predicted.size());
}

/// Single seeded holdout split; trains once per grid value on the remainder
/// and returns the decay with the best holdout accuracy (ties -> smaller).
inline double cross_validate_decay(const DataMatrix& f, const std::vector<int>& labels,
                                   int num_classes, const std::vector<double>& grid,
                                   int holdout_size, std::uint64_t seed,
                                   const LogRegConfig& cfg = {}) {
  if (grid.empty()) throw std::invalid_argument("cross_validate_decay: empty grid");
  const Eigen::Index n = f.rows();
  if (holdout_size <= 0 || static_cast<Eigen::Index>(holdout_size) >= n) {
    throw std::invalid_argument("cross_validate_decay: holdout_size must lie in [1, N)");
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  Rng rng(substream_seed(seed, "cv-split"));
  rng.shuffle(order);

  const Eigen::Index train_n = n - holdout_size;
  DataMatrix train_f(train_n, f.cols());
  DataMatrix hold_f(holdout_size, f.cols());
  std::vector<int> train_y(static_cast<std::size_t>(train_n));
  std::vector<int> hold_y(static_cast<std::size_t>(holdout_size));
  for (Eigen::Index i = 0; i < train_n; ++i) {
    train_f.row(i) = f.row(order[i]);
    train_y[static_cast<std::size_t>(i)] = labels[static_cast<std::size_t>(order[i])];
  }
  for (Eigen::Index i = 0; i < holdout_size; ++i) {
    hold_f.row(i) = f.row(order[train_n + i]);
    hold_y[static_cast<std::size_t>(i)] = labels[static_cast<std::size_t>(order[train_n + i])];
  }

  double best_decay = grid.front();
  double best_acc = -1.0;
  for (double decay : grid) {
    ClassifierModel model = logreg_train(train_f, train_y, num_classes, decay, cfg);
    double acc = accuracy(predict_labels(model, hold_f), hold_y);
    if (acc > best_acc || (acc == best_acc && decay < best_decay)) {
      best_acc = acc;
      best_decay = decay;
    }
  }
  return best_decay;
}

// ---------------------------------------------------------------------------
// Experiment drivers.
// ---------------------------------------------------------------------------

/// Preprocessed features + labels for a classification experiment.
struct ClassificationData {
  DataMatrix train_x;
  DataMatrix test_x;
  std::vector<int> train_y;
  std::vector<int> test_y;
  int num_classes = 10;
};

/// One feature-learning model in a sweep.
struct ModelSpec {
  std::string name;  // row label in CSV output
  ActivationKind kind;
  RegularizerSpec reg;
  bool is_kmeans = false;
  int kmeans_iters = 30;
};

inline ModelSpec model_spec_from_name(const std::string& name, double theta = 1.0,
                                      double reg_p = 0.5, double reg_lambda = 1.0) {
  if (name == "trec") return {name, make_activation(Activation::TRec, theta), RegularizerSpec::none()};
  if (name == "tlin") return {name, make_activation(Activation::TLin, theta), RegularizerSpec::none()};
  if (name == "dae")
    return {name, ActivationKind{Activation::ReLU}, RegularizerSpec::denoising(reg_p)};
  if (name == "cae")
    return {name, ActivationKind{Activation::Sigmoid}, RegularizerSpec::contractive(reg_lambda)};
  if (name == "kmeans") {
    ModelSpec spec{name, ActivationKind{Activation::ZeroBiasReLU}, RegularizerSpec::none()};
    spec.is_kmeans = true;
    return spec;
  }
  throw std::invalid_argument("unknown model name: " + name);
}

/// Shared classification protocol: cross-validated weight decay on a training
/// subset, then one classifier at the chosen decay, scored on the test set.
struct EvalProtocol {
  TrainConfig train;
  LogRegConfig classifier;
  std::vector<double> decay_grid{0.0, 1e-4, 1e-3, 1e-2, 1e-1};
  int cv_holdout = 1000;
  InferenceScheme scheme = InferenceScheme::ReluNoBias;
};

inline double classify_features(const DataMatrix& train_f, const std::vector<int>& train_y,
                                const DataMatrix& test_f, const std::vector<int>& test_y,
                                int num_classes, const EvalProtocol& protocol) {
  int holdout = std::min<int>(protocol.cv_holdout, static_cast<int>(train_f.rows()) / 5);
  holdout = std::max(holdout, 1);
  double decay = cross_validate_decay(train_f, train_y, num_classes, protocol.decay_grid, holdout,
                                      protocol.train.seed, protocol.classifier);
  ClassifierModel model = logreg_train(train_f, train_y, num_classes, decay, protocol.classifier);
  return accuracy(predict_labels(model, test_f), test_y);
}

/// Train one feature model of size `hidden` and score it end to end.
inline double evaluate_model(const ModelSpec& spec, int hidden, const ClassificationData& data,
                             const EvalProtocol& protocol) {
  DataMatrix train_f, test_f;
  if (spec.is_kmeans) {
    KMeansModel model = kmeans_train(data.train_x, hidden, spec.kmeans_iters, protocol.train.seed);
    train_f = extract_features(model, data.train_x, protocol.scheme);
    test_f = extract_features(model, data.test_x, protocol.scheme);
  } else {
    AutoencoderModel model =
        init_autoencoder(data.train_x.cols(), hidden, spec.kind, protocol.train.seed);
    model = sgd_train(std::move(model), data.train_x, protocol.train, spec.reg);
    train_f = extract_features(model, data.train_x, protocol.scheme);
    test_f = extract_features(model, data.test_x, protocol.scheme);
  }
  return classify_features(train_f, data.train_y, test_f, data.test_y, data.num_classes, protocol);
}

/// Accuracy as a function of the number of hidden features.
inline std::vector<std::pair<int, double>> run_feature_sweep(const ClassificationData& data,
                                                             const ModelSpec& spec,
                                                             const std::vector<int>& counts,
                                                             const EvalProtocol& protocol) {
  std::vector<std::pair<int, double>> rows;
  rows.reserve(counts.size());
  for (int k : counts) rows.emplace_back(k, evaluate_model(spec, k, data, protocol));
  return rows;
}

struct PatchSweepRow {
  int patch_size = 0;
  std::string model;
  double accuracy = 0.0;
};

/// Center-crop both sets per patch size, re-fit the preprocessing, and score
/// every model at a fixed feature count.
inline std::vector<PatchSweepRow> run_patchsize_sweep(
    const LabeledImageSet& train, const LabeledImageSet& test, const std::vector<ModelSpec>& specs,
    const std::vector<int>& patch_sizes, int hidden, double variance_retained, bool whiten,
    const EvalProtocol& protocol) {
  std::vector<PatchSweepRow> rows;
  for (int p : patch_sizes) {
    LabeledImageSet train_p = crop_center_patches(train, p);
    LabeledImageSet test_p = crop_center_patches(test, p);
    DataMatrix train_n = contrast_normalize(train_p.images);
    DataMatrix test_n = contrast_normalize(test_p.images);
    WhiteningTransform t = pca_fit(train_n, variance_retained, whiten);

    ClassificationData data;
    data.train_x = pca_apply(t, train_n);
    data.test_x = pca_apply(t, test_n);
    data.train_y = train_p.labels;
    data.test_y = test_p.labels;
    for (const auto& spec : specs) {
      rows.push_back({p, spec.name, evaluate_model(spec, hidden, data, protocol)});
    }
  }
  return rows;
}

struct SchemeRow {
  InferenceScheme scheme = InferenceScheme::ReluNoBias;
  double accuracy = 0.0;
};

/// One trained model, all three inference schemes, the same classifier
/// protocol for each.
inline std::vector<SchemeRow> run_inference_comparison(const AutoencoderModel& model,
                                                       const ClassificationData& data,
                                                       const EvalProtocol& protocol) {
  std::vector<SchemeRow> rows;
  for (InferenceScheme scheme : {InferenceScheme::ReluWithBias, InferenceScheme::ReluNoBias,
                                 InferenceScheme::Natural}) {
    DataMatrix train_f = extract_features(model, data.train_x, scheme);
    DataMatrix test_f = extract_features(model, data.test_x, scheme);
    double acc = classify_features(train_f, data.train_y, test_f, data.test_y, data.num_classes,
                                   protocol);
    rows.push_back({scheme, acc});
  }
  return rows;
}

// CSV writers for the drivers' tables.

inline void write_feature_sweep_csv(const std::filesystem::path& path,
                                    const std::vector<std::pair<int, double>>& rows) {
  std::ofstream os(path);
  if (!os) throw parse_error("cannot open for writing: " + path.string());
  os << "k,accuracy\n";
  char buf[80];
  for (const auto& [k, acc] : rows) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g\n", k, acc);
    os << buf;
  }
}

inline void write_patch_sweep_csv(const std::filesystem::path& path,
                                  const std::vector<PatchSweepRow>& rows) {
  std::ofstream os(path);
  if (!os) throw parse_error("cannot open for writing: " + path.string());
  os << "p,model,accuracy\n";
  char buf[120];
  for (const auto& row : rows) {
    std::snprintf(buf, sizeof(buf), "%d,%s,%.17g\n", row.patch_size, row.model.c_str(),
                  row.accuracy);
    os << buf;
  }
}

inline void write_scheme_csv(const std::filesystem::path& path,
                             const std::vector<SchemeRow>& rows) {
  std::ofstream os(path);
  if (!os) throw parse_error("cannot open for writing: " + path.string());
  os << "scheme,accuracy\n";
  char buf[80];
  for (const auto& row : rows) {
    std::snprintf(buf, sizeof(buf), "%s,%.17g\n", to_string(row.scheme).c_str(), row.accuracy);
    os << buf;
  }
}

}  // namespace zae
