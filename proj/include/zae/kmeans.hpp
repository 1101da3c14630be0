#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "zae/autoencoder.hpp"
#include "zae/core.hpp"

namespace zae {

struct KMeansModel {
  Eigen::MatrixXd centroids;  // D x K

  Eigen::Index input_dim() const { return centroids.rows(); }
  Eigen::Index hidden_dim() const { return centroids.cols(); }
};

/// Lloyd iterations seeded from K distinct random data points. Empty clusters
/// are re-seeded to the point farthest from its assigned centroid.
/// Deterministic per seed.
inline KMeansModel kmeans_train(const DataMatrix& x, int k, int iters, std::uint64_t seed) {
  const Eigen::Index n = x.rows();
  if (k <= 0 || static_cast<Eigen::Index>(k) > n) {
    throw std::invalid_argument("kmeans_train: need 0 < K <= number of samples");
  }
  if (iters < 0) throw std::invalid_argument("kmeans_train: negative iteration count");

  // Draw K distinct row indices (partial Fisher-Yates).
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  Rng rng(substream_seed(seed, "init"));
  for (int j = 0; j < k; ++j) {
    std::size_t pick = j + rng.uniform_index(static_cast<std::size_t>(n) - j);
    std::swap(order[j], order[pick]);
  }

  KMeansModel model;
  model.centroids.resize(x.cols(), k);
  for (int j = 0; j < k; ++j) model.centroids.col(j) = x.row(order[j]).transpose();

  std::vector<int> assignment(static_cast<std::size_t>(n), 0);
  std::vector<double> dist2(static_cast<std::size_t>(n), 0.0);
  for (int it = 0; it < iters; ++it) {
    // Assign: nearest centroid, ties to the lower index.
    Vector cnorm2 = model.centroids.colwise().squaredNorm();
    for (Eigen::Index i = 0; i < n; ++i) {
      Vector scores = cnorm2 - 2.0 * (model.centroids.transpose() * x.row(i).transpose());
      int best = 0;
      for (int j = 1; j < k; ++j)
        if (scores(j) < scores(best)) best = j;
      assignment[i] = best;
      dist2[i] = scores(best) + x.row(i).squaredNorm();
    }

    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(x.cols(), k);
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.col(assignment[i]) += x.row(i).transpose();
      ++counts[assignment[i]];
    }
    for (int j = 0; j < k; ++j) {
      if (counts[j] > 0) {
        model.centroids.col(j) = sums.col(j) / counts[j];
      } else {
        Eigen::Index farthest = 0;
        for (Eigen::Index i = 1; i < n; ++i)
          if (dist2[i] > dist2[farthest]) farthest = i;
        model.centroids.col(j) = x.row(farthest).transpose();
        dist2[farthest] = -1.0;  // do not pick the same point twice
      }
    }
  }
  return model;
}

inline void save_model(const std::filesystem::path& path, const KMeansModel& model) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw parse_error("cannot open for writing: " + path.string());
  detail::write_model_payload(os, model.centroids, Vector::Zero(model.hidden_dim()),
                              Vector::Zero(model.input_dim()), 5, 0.0);
  if (!os) throw parse_error("write failed: " + path.string());
}

inline KMeansModel load_kmeans_model(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw parse_error("cannot open: " + path.string());
  expect_magic(is, "ZAE1", path.string());
  std::uint32_t version = read_u32_le(is, "version");
  if (version != 1) throw parse_error(path.string() + ": unsupported ZAE1 version");
  std::uint32_t d = read_u32_le(is, "D");
  std::uint32_t k = read_u32_le(is, "K");
  std::uint8_t tag = read_u8(is, "kind tag");
  read_f64_le(is, "theta");
  if (tag != 5) throw parse_error(path.string() + ": not a k-means model");
  KMeansModel model;
  model.centroids.resize(d, k);
  for (std::uint32_t i = 0; i < d; ++i)
    for (std::uint32_t j = 0; j < k; ++j) model.centroids(i, j) = read_f64_le(is, "centroids");
  return model;
}

/// Tag byte of a ZAE1 file without loading the payload.
inline std::uint8_t peek_model_tag(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw parse_error("cannot open: " + path.string());
  expect_magic(is, "ZAE1", path.string());
  read_u32_le(is, "version");
  read_u32_le(is, "D");
  read_u32_le(is, "K");
  return read_u8(is, "kind tag");
}

}  // namespace zae
