#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "zae/core.hpp"

namespace zae {

/// Learned PCA projection with optional variance normalization.
///
/// basis holds the leading eigenvectors of the sample covariance as
/// orthonormal columns; eigenvalues are sorted non-increasing and floored at
/// epsilon. whiten=false is the plain projection ("NW") variant.
struct WhiteningTransform {
  Vector mean;               // D
  Eigen::MatrixXd basis;     // D x R
  Vector eigenvalues;        // R
  bool whiten = true;
  double epsilon = 1e-8;

  Eigen::Index input_dim() const { return basis.rows(); }
  Eigen::Index retained_dim() const { return basis.cols(); }
};

/// Per-sample mean removal followed by division by the Euclidean norm.
/// Rows whose centered norm falls below 1e-8 map to the zero vector.
/// Idempotent: a normalized row is already zero-mean with unit norm.
inline DataMatrix contrast_normalize(const DataMatrix& x) {
  if (x.rows() == 0 || x.cols() < 2) {
    throw std::invalid_argument("contrast_normalize: need a non-empty matrix with >= 2 columns");
  }
  DataMatrix out(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    Vector row = x.row(i).transpose();
    row.array() -= row.mean();
    double norm = row.norm();
    if (norm < 1e-8) {
      out.row(i).setZero();
    } else {
      out.row(i) = (row / norm).transpose();
    }
  }
  return out;
}

/// Fit a PCA projection on X (rows = samples) keeping the smallest number of
/// leading components whose cumulative eigenvalue mass reaches
/// variance_retained. Uses a symmetric eigendecomposition of the sample
/// covariance (divisor N-1).
inline WhiteningTransform pca_fit(const DataMatrix& x, double variance_retained, bool whiten,
                                  double epsilon = 1e-8) {
  if (x.rows() < 2) throw std::invalid_argument("pca_fit: need at least 2 samples");
  if (!(variance_retained > 0.0) || variance_retained > 1.0) {
    throw std::invalid_argument("pca_fit: variance_retained must lie in (0, 1]");
  }
  const Eigen::Index n = x.rows();
  const Eigen::Index d = x.cols();

  Vector mean = x.colwise().mean().transpose();
  DataMatrix centered = x.rowwise() - mean.transpose();
  Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(n - 1);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success) throw numeric_error("pca_fit: eigendecomposition failed");

  // Eigen returns ascending order; flip to non-increasing.
  Vector evals(d);
  Eigen::MatrixXd evecs(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    evals(j) = std::max(eig.eigenvalues()(d - 1 - j), 0.0);
    evecs.col(j) = eig.eigenvectors().col(d - 1 - j);
    // Fix the sign so the largest-magnitude entry is positive.
    Eigen::Index argmax = 0;
    evecs.col(j).cwiseAbs().maxCoeff(&argmax);
    if (evecs(argmax, j) < 0.0) evecs.col(j) = -evecs.col(j);
  }

  const double total = evals.sum();
  const double target = variance_retained * total;
  Eigen::Index r = d;
  double cumulative = 0.0;
  for (Eigen::Index j = 0; j < d; ++j) {
    cumulative += evals(j);
    if (cumulative >= target) {
      r = j + 1;
      break;
    }
  }

  WhiteningTransform t;
  t.mean = std::move(mean);
  t.basis = evecs.leftCols(r);
  t.eigenvalues = evals.head(r).cwiseMax(epsilon);
  t.whiten = whiten;
  t.epsilon = epsilon;
  return t;
}

/// Project X onto the retained eigenbasis; divide each component by
/// sqrt(eigenvalue + epsilon) when whitening.
inline DataMatrix pca_apply(const WhiteningTransform& t, const DataMatrix& x) {
  if (x.cols() != t.input_dim()) {
    throw std::invalid_argument("pca_apply: input has " + std::to_string(x.cols()) +
                                " columns, transform expects " + std::to_string(t.input_dim()));
  }
  DataMatrix y = (x.rowwise() - t.mean.transpose()) * t.basis;
  if (t.whiten) {
    Vector scale = (t.eigenvalues.array() + t.epsilon).sqrt();
    y.array().rowwise() /= scale.transpose().array();
  }
  return y;
}

/// Right inverse of pca_apply on the retained subspace: maps R-dim codes back
/// to input space, so pca_apply(t, pca_invert(t, y)) == y.
inline DataMatrix pca_invert(const WhiteningTransform& t, const DataMatrix& y) {
  if (y.cols() != t.retained_dim()) {
    throw std::invalid_argument("pca_invert: input has " + std::to_string(y.cols()) +
                                " columns, transform retains " + std::to_string(t.retained_dim()));
  }
  DataMatrix codes = y;
  if (t.whiten) {
    Vector scale = (t.eigenvalues.array() + t.epsilon).sqrt();
    codes.array().rowwise() *= scale.transpose().array();
  }
  DataMatrix x = codes * t.basis.transpose();
  x.rowwise() += t.mean.transpose();
  return x;
}

// ZPCA: "ZPCA", u32 version=1, u32 D, u32 R, u8 whiten, f64 epsilon,
// mean (D f64), eigenvalues (R f64), basis row-major (D*R f64), all LE.

inline void save_transform(const std::filesystem::path& path, const WhiteningTransform& t) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw parse_error("cannot open for writing: " + path.string());
  write_magic(os, "ZPCA");
  write_u32_le(os, 1);
  write_u32_le(os, static_cast<std::uint32_t>(t.input_dim()));
  write_u32_le(os, static_cast<std::uint32_t>(t.retained_dim()));
  write_u8(os, t.whiten ? 1 : 0);
  write_f64_le(os, t.epsilon);
  for (Eigen::Index i = 0; i < t.mean.size(); ++i) write_f64_le(os, t.mean(i));
  for (Eigen::Index i = 0; i < t.eigenvalues.size(); ++i) write_f64_le(os, t.eigenvalues(i));
  for (Eigen::Index i = 0; i < t.basis.rows(); ++i)
    for (Eigen::Index j = 0; j < t.basis.cols(); ++j) write_f64_le(os, t.basis(i, j));
  if (!os) throw parse_error("write failed: " + path.string());
}

inline WhiteningTransform load_transform(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw parse_error("cannot open: " + path.string());
  expect_magic(is, "ZPCA", path.string());
  std::uint32_t version = read_u32_le(is, "version");
  if (version != 1) throw parse_error(path.string() + ": unsupported ZPCA version");
  std::uint32_t d = read_u32_le(is, "D");
  std::uint32_t r = read_u32_le(is, "R");
  WhiteningTransform t;
  t.whiten = read_u8(is, "whiten flag") != 0;
  t.epsilon = read_f64_le(is, "epsilon");
  t.mean.resize(d);
  for (std::uint32_t i = 0; i < d; ++i) t.mean(i) = read_f64_le(is, "mean");
  t.eigenvalues.resize(r);
  for (std::uint32_t i = 0; i < r; ++i) t.eigenvalues(i) = read_f64_le(is, "eigenvalues");
  t.basis.resize(d, r);
  for (std::uint32_t i = 0; i < d; ++i)
    for (std::uint32_t j = 0; j < r; ++j) t.basis(i, j) = read_f64_le(is, "basis");
  return t;
}

}  // namespace zae
