#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "zae/autoencoder.hpp"
#include "zae/core.hpp"

namespace zae {

/// Minibatch SGD settings. The learning rate follows a two-phase schedule:
/// lr_warmup for the first warmup_epochs epochs, lr_main afterwards.
struct TrainConfig {
  int epochs = 1000;
  int batch_size = 100;
  double lr_warmup = 1e-4;
  double lr_main = 1e-3;
  int warmup_epochs = 3;
  double momentum = 0.9;
  std::uint64_t seed = 0;
  bool shuffle = true;
};

struct EpochStats {
  int epoch = 0;    // 1-based
  double loss = 0.0;  // mean reconstruction loss over the epoch's samples
};

using MetricsSink = std::function<void(const EpochStats&)>;

/// Accumulates per-epoch stats; CSV format is `epoch,loss`, one row per epoch.
struct TrainingLog {
  std::vector<EpochStats> rows;

  void add(const EpochStats& s) { rows.push_back(s); }
  MetricsSink sink() {
    return [this](const EpochStats& s) { add(s); };
  }

  void write_csv(const std::filesystem::path& path) const {
    std::ofstream os(path);
    if (!os) throw parse_error("cannot open for writing: " + path.string());
    os << "epoch,loss\n";
    char buf[64];
    for (const auto& row : rows) {
      std::snprintf(buf, sizeof(buf), "%d,%.17g\n", row.epoch, row.loss);
      os << buf;
    }
  }
};

/// Minibatch SGD with classical momentum: v <- mu*v - lr*grad, param += v.
///
/// Per-epoch shuffling, the corruption stream, and everything downstream are
/// derived from cfg.seed, so two runs with the same configuration produce
/// bit-identical models. The last partial batch is used; every batch loss is
/// already normalized by its own size. Throws numeric_error with the epoch
/// and batch index if the loss turns non-finite.
inline AutoencoderModel sgd_train(AutoencoderModel model, const DataMatrix& x,
                                  const TrainConfig& cfg, const RegularizerSpec& reg,
                                  const MetricsSink& sink = {}) {
  const Eigen::Index n = x.rows();
  if (n == 0) throw std::invalid_argument("sgd_train: empty training set");
  if (cfg.batch_size <= 0 || static_cast<Eigen::Index>(cfg.batch_size) > n) {
    throw std::invalid_argument("sgd_train: batch_size must lie in [1, N]");
  }
  detail::check_input_dim(model, x.cols(), "sgd_train");

  const bool zero_bias = model.zero_bias();
  Eigen::MatrixXd vel_W = Eigen::MatrixXd::Zero(model.W.rows(), model.W.cols());
  Vector vel_b = Vector::Zero(model.b.size());
  Vector vel_c = Vector::Zero(model.c.size());

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  Rng shuffle_rng(substream_seed(cfg.seed, "shuffle"));
  const std::uint64_t corruption_base = substream_seed(cfg.seed, "corruption");

  DataMatrix batch;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = epoch < cfg.warmup_epochs ? cfg.lr_warmup : cfg.lr_main;
    if (cfg.shuffle) shuffle_rng.shuffle(order);

    double epoch_loss_sum = 0.0;
    int batch_index = 0;
    for (Eigen::Index start = 0; start < n; start += cfg.batch_size, ++batch_index) {
      const Eigen::Index len = std::min<Eigen::Index>(cfg.batch_size, n - start);
      batch.resize(len, x.cols());
      for (Eigen::Index i = 0; i < len; ++i) batch.row(i) = x.row(order[start + i]);

      LossGrads lg = loss_and_grads(model, batch, reg,
                                    substream_seed(corruption_base, epoch, batch_index));
      if (!std::isfinite(lg.loss)) {
        throw numeric_error("sgd_train: non-finite loss at epoch " + std::to_string(epoch) +
                            ", batch " + std::to_string(batch_index));
      }
      epoch_loss_sum += lg.recon_loss * static_cast<double>(len);

      vel_W = cfg.momentum * vel_W - lr * lg.grad_W;
      model.W += vel_W;
      if (!zero_bias) {
        vel_b = cfg.momentum * vel_b - lr * lg.grad_b;
        model.b += vel_b;
        vel_c = cfg.momentum * vel_c - lr * lg.grad_c;
        model.c += vel_c;
      }
    }

    if (sink) sink(EpochStats{epoch + 1, epoch_loss_sum / static_cast<double>(n)});
  }
  return model;
}

}  // namespace zae
