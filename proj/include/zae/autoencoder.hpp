#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>

#include "zae/activations.hpp"
#include "zae/core.hpp"

namespace zae {

/// Tied-weight autoencoder. Weight vectors w_k are the columns of W; the same
/// matrix encodes and decodes. For the zero-bias kinds (TRec, TLin, zrelu)
/// the hidden biases b and visible biases c are pinned at zero: they are not
/// parameters, their gradients are identically zero, and encode/reconstruct
/// never add them.
struct AutoencoderModel {
  Eigen::MatrixXd W;  // D x K
  Vector b;           // K
  Vector c;           // D
  ActivationKind kind;
  bool tied = true;

  Eigen::Index input_dim() const { return W.rows(); }
  Eigen::Index hidden_dim() const { return W.cols(); }
  bool zero_bias() const { return kind.zero_bias(); }
};

/// Gaussian init, std init_std (default 1/sqrt(D)); biases start at zero.
///
/// The scale matters for the thresholded kinds: on whitened data a unit-norm
/// column gives preactivations with roughly unit variance, so a useful
/// fraction of units clears theta=1 at the start of training. Much smaller
/// scales leave every gate closed and the gradient identically zero.
inline AutoencoderModel init_autoencoder(Eigen::Index input_dim, Eigen::Index hidden_dim,
                                         const ActivationKind& kind, std::uint64_t seed,
                                         double init_std = -1.0) {
  if (input_dim <= 0 || hidden_dim <= 0) {
    throw std::invalid_argument("init_autoencoder: dimensions must be positive");
  }
  if (init_std <= 0.0) init_std = 1.0 / std::sqrt(static_cast<double>(input_dim));
  AutoencoderModel model;
  model.kind = kind;
  model.W.resize(input_dim, hidden_dim);
  Rng rng(substream_seed(seed, "init"));
  for (Eigen::Index j = 0; j < hidden_dim; ++j)
    for (Eigen::Index i = 0; i < input_dim; ++i) model.W(i, j) = init_std * rng.normal();
  model.b = Vector::Zero(hidden_dim);
  model.c = Vector::Zero(input_dim);
  return model;
}

/// Input corruption / penalty attached to the reconstruction objective.
struct RegularizerSpec {
  enum class Kind { None, Denoising, Contractive };
  Kind kind = Kind::None;
  double zero_mask_p = 0.0;  // Denoising: probability of zeroing a dimension
  double lambda = 0.0;       // Contractive: penalty strength (negative allowed)

  static RegularizerSpec none() { return {}; }
  static RegularizerSpec denoising(double p) {
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("denoising: p must lie in [0,1]");
    return {Kind::Denoising, p, 0.0};
  }
  static RegularizerSpec contractive(double lambda) {
    if (!std::isfinite(lambda)) throw std::invalid_argument("contractive: lambda must be finite");
    return {Kind::Contractive, 0.0, lambda};
  }
};

enum class EncodeMode { Train, Infer };

namespace detail {

inline void check_input_dim(const AutoencoderModel& model, Eigen::Index dim, const char* where) {
  if (dim != model.input_dim()) {
    throw std::invalid_argument(std::string(where) + ": input has " + std::to_string(dim) +
                                " dimensions, model expects " + std::to_string(model.input_dim()));
  }
}

/// Preactivations for a batch: X*W, plus the hidden bias for affine kinds.
inline DataMatrix preactivations(const AutoencoderModel& model, const DataMatrix& x) {
  DataMatrix a = x * model.W;
  if (!model.zero_bias()) a.rowwise() += model.b.transpose();
  return a;
}

inline DataMatrix apply_forward(const ActivationKind& kind, const DataMatrix& a) {
  return a.unaryExpr([&kind](double v) { return act_forward(kind, v); });
}

inline DataMatrix apply_backward(const ActivationKind& kind, const DataMatrix& a) {
  return a.unaryExpr([&kind](double v) { return act_backward(kind, v); });
}

}  // namespace detail

/// Hidden code for one input. Train mode applies the model's own activation
/// to the preactivation (with bias for the affine kinds, without for the
/// zero-bias kinds). Infer mode always uses the zero-bias rectifier
/// max(0, w_k^T x), whatever the training activation was.
inline Vector encode(const AutoencoderModel& model, const Vector& x, EncodeMode mode) {
  detail::check_input_dim(model, x.size(), "encode");
  Vector a = model.W.transpose() * x;
  if (mode == EncodeMode::Infer) return a.cwiseMax(0.0);
  if (!model.zero_bias()) a += model.b;
  return a.unaryExpr([&model](double v) { return act_forward(model.kind, v); });
}

inline DataMatrix encode_batch(const AutoencoderModel& model, const DataMatrix& x, EncodeMode mode) {
  detail::check_input_dim(model, x.cols(), "encode_batch");
  if (mode == EncodeMode::Infer) return (x * model.W).cwiseMax(0.0);
  return detail::apply_forward(model.kind, detail::preactivations(model, x));
}

/// r(x) = sum_k h_k * w_k (+ c for affine kinds), h_k the training code.
inline DataMatrix reconstruct_batch(const AutoencoderModel& model, const DataMatrix& x) {
  detail::check_input_dim(model, x.cols(), "reconstruct_batch");
  DataMatrix h = detail::apply_forward(model.kind, detail::preactivations(model, x));
  DataMatrix r = h * model.W.transpose();
  if (!model.zero_bias()) r.rowwise() += model.c.transpose();
  return r;
}

inline Vector reconstruct(const AutoencoderModel& model, const Vector& x) {
  return reconstruct_batch(model, x.transpose()).row(0).transpose();
}

struct LossGrads {
  double loss = 0.0;        // full objective (reconstruction + penalty)
  double recon_loss = 0.0;  // mean squared reconstruction error alone
  Eigen::MatrixXd grad_W;
  Vector grad_b;
  Vector grad_c;
};

/// Loss and exact gradients over a batch (rows = samples).
///
/// Objective: mean_i ||r(x_i~) - x_i||^2, where x~ is the zero-masked input
/// for the denoising regularizer (targets stay clean) and x otherwise. The
/// contractive regularizer adds lambda * mean_i sum_k h'(a_ik)^2 ||w_k||^2.
/// Tied weights accumulate encoder and decoder terms into grad_W. The seed
/// drives the corruption mask only; the function is pure per (inputs, seed).
inline LossGrads loss_and_grads(const AutoencoderModel& model, const DataMatrix& batch,
                                const RegularizerSpec& reg, std::uint64_t seed) {
  detail::check_input_dim(model, batch.cols(), "loss_and_grads");
  if (batch.rows() == 0) throw std::invalid_argument("loss_and_grads: empty batch");

  const Eigen::Index n = batch.rows();
  const double inv_n = 1.0 / static_cast<double>(n);
  const bool zero_bias = model.zero_bias();

  // Corrupted encoder input; the reconstruction target stays clean.
  DataMatrix corrupted;
  const DataMatrix* input = &batch;
  if (reg.kind == RegularizerSpec::Kind::Denoising && reg.zero_mask_p > 0.0) {
    corrupted = batch;
    Rng rng(substream_seed(seed, "corruption"));
    for (Eigen::Index i = 0; i < corrupted.rows(); ++i)
      for (Eigen::Index j = 0; j < corrupted.cols(); ++j)
        if (rng.uniform() < reg.zero_mask_p) corrupted(i, j) = 0.0;
    input = &corrupted;
  }

  DataMatrix a = detail::preactivations(model, *input);
  DataMatrix h = detail::apply_forward(model.kind, a);
  DataMatrix r = h * model.W.transpose();
  if (!zero_bias) r.rowwise() += model.c.transpose();

  DataMatrix err = r - batch;
  LossGrads out;
  out.recon_loss = err.squaredNorm() * inv_n;
  out.loss = out.recon_loss;

  DataMatrix d_r = 2.0 * inv_n * err;
  DataMatrix gate = detail::apply_backward(model.kind, a);
  DataMatrix d_a = (d_r * model.W).cwiseProduct(gate);

  out.grad_W = input->transpose() * d_a + d_r.transpose() * h;
  out.grad_b = zero_bias ? Vector::Zero(model.hidden_dim()) : Vector(d_a.colwise().sum());
  out.grad_c = zero_bias ? Vector::Zero(model.input_dim()) : Vector(d_r.colwise().sum());

  if (reg.kind == RegularizerSpec::Kind::Contractive && reg.lambda != 0.0) {
    const double scale = reg.lambda * inv_n;
    Vector col_norms2 = model.W.colwise().squaredNorm();
    Vector gate2_sums = gate.cwiseProduct(gate).colwise().sum();
    out.loss += scale * gate2_sums.dot(col_norms2);

    // d/dW through ||w_k||^2, then through the preactivation inside h'.
    out.grad_W += model.W * (2.0 * scale * gate2_sums).asDiagonal();
    DataMatrix gate_deriv = a.unaryExpr([&model](double v) { return act_backward2(model.kind, v); });
    DataMatrix d_a_pen =
        (2.0 * scale) * gate.cwiseProduct(gate_deriv) * col_norms2.asDiagonal();
    out.grad_W += input->transpose() * d_a_pen;
    if (!zero_bias) out.grad_b += d_a_pen.colwise().sum();
  }

  return out;
}

// ---------------------------------------------------------------------------
// ZAE1 model file: "ZAE1", u32 version=1, u32 D, u32 K, u8 kind tag,
// f64 theta, W row-major (D*K f64), b (K f64), c (D f64), all LE.
// Kind tags: 0 trec, 1 tlin, 2 relu, 3 sigmoid, 4 zrelu, 5 kmeans.
// ---------------------------------------------------------------------------

inline std::uint8_t activation_tag(Activation type) {
  switch (type) {
    case Activation::TRec: return 0;
    case Activation::TLin: return 1;
    case Activation::ReLU: return 2;
    case Activation::Sigmoid: return 3;
    case Activation::ZeroBiasReLU: return 4;
  }
  return 255;
}

inline Activation activation_from_tag(std::uint8_t tag) {
  switch (tag) {
    case 0: return Activation::TRec;
    case 1: return Activation::TLin;
    case 2: return Activation::ReLU;
    case 3: return Activation::Sigmoid;
    case 4: return Activation::ZeroBiasReLU;
  }
  throw parse_error("unknown activation tag " + std::to_string(tag));
}

namespace detail {
inline void write_model_payload(std::ostream& os, const Eigen::MatrixXd& w, const Vector& b,
                                const Vector& c, std::uint8_t tag, double theta) {
  write_magic(os, "ZAE1");
  write_u32_le(os, 1);
  write_u32_le(os, static_cast<std::uint32_t>(w.rows()));
  write_u32_le(os, static_cast<std::uint32_t>(w.cols()));
  write_u8(os, tag);
  write_f64_le(os, theta);
  for (Eigen::Index i = 0; i < w.rows(); ++i)
    for (Eigen::Index j = 0; j < w.cols(); ++j) write_f64_le(os, w(i, j));
  for (Eigen::Index i = 0; i < b.size(); ++i) write_f64_le(os, b(i));
  for (Eigen::Index i = 0; i < c.size(); ++i) write_f64_le(os, c(i));
}
}  // namespace detail

inline void save_model(const std::filesystem::path& path, const AutoencoderModel& model) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw parse_error("cannot open for writing: " + path.string());
  detail::write_model_payload(os, model.W, model.b, model.c, activation_tag(model.kind.type),
                              model.kind.theta);
  if (!os) throw parse_error("write failed: " + path.string());
}

inline AutoencoderModel load_model(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw parse_error("cannot open: " + path.string());
  expect_magic(is, "ZAE1", path.string());
  std::uint32_t version = read_u32_le(is, "version");
  if (version != 1) throw parse_error(path.string() + ": unsupported ZAE1 version");
  std::uint32_t d = read_u32_le(is, "D");
  std::uint32_t k = read_u32_le(is, "K");
  std::uint8_t tag = read_u8(is, "kind tag");
  double theta = read_f64_le(is, "theta");
  if (tag == 5) throw parse_error(path.string() + ": file holds a k-means model");
  AutoencoderModel model;
  model.kind = ActivationKind{activation_from_tag(tag), theta};
  model.W.resize(d, k);
  for (std::uint32_t i = 0; i < d; ++i)
    for (std::uint32_t j = 0; j < k; ++j) model.W(i, j) = read_f64_le(is, "W");
  model.b.resize(k);
  for (std::uint32_t i = 0; i < k; ++i) model.b(i) = read_f64_le(is, "b");
  model.c.resize(d);
  for (std::uint32_t i = 0; i < d; ++i) model.c(i) = read_f64_le(is, "c");
  return model;
}

}  // namespace zae
