#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "zae/autoencoder.hpp"
#include "zae/core.hpp"
#include "zae/image.hpp"
#include "zae/preprocessing.hpp"

namespace zae {

/// Hidden units with a nonzero response for one input, in increasing order.
struct ActiveSet {
  std::vector<int> indices;
};

/// Affine kinds: {k : w_k^T x + b_k > 0}. Thresholded kinds: units whose
/// gated activation is nonzero.
inline ActiveSet active_set(const AutoencoderModel& model, const Vector& x) {
  detail::check_input_dim(model, x.size(), "active_set");
  Vector a = model.W.transpose() * x;
  ActiveSet s;
  for (Eigen::Index k = 0; k < a.size(); ++k) {
    bool active = model.zero_bias() ? act_forward(model.kind, a(k)) != 0.0
                                    : a(k) + model.b(k) > 0.0;
    if (active) s.indices.push_back(static_cast<int>(k));
  }
  return s;
}

/// Weight matrix restricted to the active columns (D x |S|).
inline Eigen::MatrixXd active_columns(const AutoencoderModel& model, const ActiveSet& s) {
  Eigen::MatrixXd w_s(model.input_dim(), static_cast<Eigen::Index>(s.indices.size()));
  for (std::size_t j = 0; j < s.indices.size(); ++j) w_s.col(static_cast<Eigen::Index>(j)) = model.W.col(s.indices[j]);
  return w_s;
}

/// Diagnostics of the perfect-reconstruction condition
/// W_S (W_S^T x + b_S) = x on the active set of x.
struct FixedPointReport {
  double residual_norm = 0.0;        // ||W_S (W_S^T x + b_S) - x||
  int nullspace_dim = 0;             // eigenvalues of W_S W_S^T within 1e-6 of 1
  Vector eigenvalues;                // all D eigenvalues of W_S W_S^T, non-increasing
  double orthonormality_error = 0.0; // ||W_S^T W_S - I||_F
};

inline FixedPointReport fixed_point_report(const AutoencoderModel& model, const Vector& x) {
  detail::check_input_dim(model, x.size(), "fixed_point_report");
  if (model.kind.type == Activation::Sigmoid) {
    throw std::invalid_argument("fixed_point_report: defined for ReLU-family and zero-bias models");
  }
  const Eigen::Index d = model.input_dim();
  ActiveSet s = active_set(model, x);

  FixedPointReport report;
  if (s.indices.empty()) {
    report.residual_norm = x.norm();
    report.eigenvalues = Vector::Zero(d);
    return report;
  }

  Eigen::MatrixXd w_s = active_columns(model, s);
  Vector code = w_s.transpose() * x;
  if (!model.zero_bias()) {
    for (std::size_t j = 0; j < s.indices.size(); ++j) code(static_cast<Eigen::Index>(j)) += model.b(s.indices[j]);
  }
  report.residual_norm = (w_s * code - x).norm();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(w_s * w_s.transpose());
  if (eig.info() != Eigen::Success) throw numeric_error("fixed_point_report: eigendecomposition failed");
  report.eigenvalues = eig.eigenvalues().reverse();
  for (Eigen::Index i = 0; i < d; ++i) {
    if (std::abs(report.eigenvalues(i) - 1.0) <= 1e-6) ++report.nullspace_dim;
  }

  Eigen::MatrixXd gram = w_s.transpose() * w_s;
  gram.diagonal().array() -= 1.0;
  report.orthonormality_error = gram.norm();
  return report;
}

/// Binary approximation of a sigmoid autoencoder's reconstruction: the plain
/// superposition of the weight vectors whose preactivation is non-negative.
inline Vector sigmoid_binary_reconstruct(const AutoencoderModel& model, const Vector& x) {
  detail::check_input_dim(model, x.size(), "sigmoid_binary_reconstruct");
  if (model.kind.type != Activation::Sigmoid) {
    throw std::invalid_argument("sigmoid_binary_reconstruct: needs a sigmoid model");
  }
  Vector a = model.W.transpose() * x + model.b;
  Vector out = Vector::Zero(model.input_dim());
  for (Eigen::Index k = 0; k < a.size(); ++k) {
    if (a(k) >= 0.0) out += model.W.col(k);
  }
  return out;
}

/// Frame-theoretic summary of the weight vectors: the frame operator
/// sum_k w_k w_k^T, its dual frame, and the spread of the Parseval ratio
/// sum_{k in S(x)} (w_k^T x)^2 / ||x||^2 over a probe set.
struct FrameReport {
  Eigen::MatrixXd frame_operator;  // D x D
  Eigen::MatrixXd dual_frame;      // D x K
  double ratio_min = 0.0;
  double ratio_median = 0.0;
  double ratio_max = 0.0;
};

inline FrameReport frame_report(const AutoencoderModel& model, const DataMatrix& probe) {
  detail::check_input_dim(model, probe.cols(), "frame_report");
  if (probe.rows() == 0) throw std::invalid_argument("frame_report: empty probe set");

  FrameReport report;
  report.frame_operator = model.W * model.W.transpose();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(report.frame_operator);
  if (eig.info() != Eigen::Success) throw numeric_error("frame_report: eigendecomposition failed");
  const double max_eig = eig.eigenvalues().maxCoeff();
  const double min_eig = eig.eigenvalues().minCoeff();
  if (max_eig <= 0.0 || min_eig <= 1e-10 * max_eig) {
    throw std::invalid_argument("frame_report: weights do not span data space");
  }
  report.dual_frame = eig.eigenvectors() *
                      eig.eigenvalues().cwiseInverse().asDiagonal() *
                      eig.eigenvectors().transpose() * model.W;

  std::vector<double> ratios;
  ratios.reserve(static_cast<std::size_t>(probe.rows()));
  for (Eigen::Index i = 0; i < probe.rows(); ++i) {
    Vector x = probe.row(i).transpose();
    double norm2 = x.squaredNorm();
    if (norm2 == 0.0) throw std::invalid_argument("frame_report: probe row " + std::to_string(i) + " is zero");
    ActiveSet s = active_set(model, x);
    double energy = 0.0;
    for (int k : s.indices) {
      double proj = model.W.col(k).dot(x);
      energy += proj * proj;
    }
    ratios.push_back(energy / norm2);
  }
  std::sort(ratios.begin(), ratios.end());
  report.ratio_min = ratios.front();
  report.ratio_max = ratios.back();
  std::size_t mid = ratios.size() / 2;
  report.ratio_median =
      ratios.size() % 2 == 1 ? ratios[mid] : 0.5 * (ratios[mid - 1] + ratios[mid]);
  return report;
}

/// Histogram over the learned hidden biases. Zero-bias models report the
/// all-zero histogram rather than an error.
struct BiasHistogram {
  std::vector<double> edges;  // bins+1 ascending edges
  std::vector<int> counts;    // per-bin counts, sum to K
  double mean = 0.0;
  double fraction_negative = 0.0;
};

inline BiasHistogram bias_histogram(const AutoencoderModel& model, int bins) {
  if (bins <= 0) throw std::invalid_argument("bias_histogram: bins must be positive");
  const Vector& b = model.b;
  BiasHistogram h;
  h.mean = b.mean();
  h.fraction_negative = static_cast<double>((b.array() < 0.0).count()) / static_cast<double>(b.size());

  double lo = b.minCoeff();
  double hi = b.maxCoeff();
  if (lo == hi) {
    h.edges = {lo, hi};
    h.counts = {static_cast<int>(b.size())};
    return h;
  }
  h.edges.resize(static_cast<std::size_t>(bins) + 1);
  for (int i = 0; i <= bins; ++i) h.edges[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / bins;
  h.counts.assign(static_cast<std::size_t>(bins), 0);
  for (Eigen::Index k = 0; k < b.size(); ++k) {
    int bin = static_cast<int>((b(k) - lo) / (hi - lo) * bins);
    bin = std::clamp(bin, 0, bins - 1);  // the max lands in the last bin
    ++h.counts[static_cast<std::size_t>(bin)];
  }
  return h;
}

/// Pixel-space geometry of a back-projected filter.
struct ImageShape {
  int channels = 1;
  int height = 0;
  int width = 0;
};

/// Back-project every weight vector through the PCA transform and tile the
/// results into one grid image (binary PPM).
inline void export_filters(const AutoencoderModel& model, const WhiteningTransform& transform,
                           const ImageShape& shape, const std::filesystem::path& path) {
  if (model.input_dim() != transform.retained_dim()) {
    throw std::invalid_argument("export_filters: model dimension does not match transform");
  }
  DataMatrix pixel_filters = pca_invert(transform, model.W.transpose());
  write_ppm(path, render_filter_grid(pixel_filters, shape.channels, shape.height, shape.width));
}

/// Video filters: back-project, slice out the selected frames, and write one
/// grid per frame index as <prefix>_frame<T>.ppm.
inline std::vector<std::filesystem::path> export_video_filters(
    const AutoencoderModel& model, const WhiteningTransform& transform, int frames, int frame_size,
    const std::vector<int>& frame_indices, const std::string& path_prefix) {
  if (model.input_dim() != transform.retained_dim()) {
    throw std::invalid_argument("export_video_filters: model dimension does not match transform");
  }
  const Eigen::Index frame_dims = static_cast<Eigen::Index>(frame_size) * frame_size;
  if (transform.input_dim() != static_cast<Eigen::Index>(frames) * frame_dims) {
    throw std::invalid_argument("export_video_filters: transform does not match video geometry");
  }
  DataMatrix pixel_filters = pca_invert(transform, model.W.transpose());
  std::vector<std::filesystem::path> written;
  for (int t : frame_indices) {
    if (t < 0 || t >= frames) throw std::invalid_argument("export_video_filters: frame index out of range");
    DataMatrix slice = pixel_filters.middleCols(static_cast<Eigen::Index>(t) * frame_dims, frame_dims);
    std::filesystem::path path = path_prefix + "_frame" + std::to_string(t) + ".ppm";
    write_ppm(path, render_filter_grid(slice, 1, frame_size, frame_size));
    written.push_back(path);
  }
  return written;
}

}  // namespace zae
