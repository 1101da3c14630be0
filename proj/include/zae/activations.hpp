#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace zae {

enum class Activation { TRec, TLin, ReLU, Sigmoid, ZeroBiasReLU };

/// Activation function plus its threshold where one applies.
///
/// TRec gates the identity on (a > theta); TLin gates it on (a^2 > theta^2),
/// so its active region is a subspace instead of a cone. Both use strict
/// inequalities: value and derivative are zero exactly at the threshold.
struct ActivationKind {
  Activation type = Activation::ReLU;
  double theta = 1.0;

  /// Kinds whose hidden and visible biases are pinned at zero.
  bool zero_bias() const {
    return type == Activation::TRec || type == Activation::TLin ||
           type == Activation::ZeroBiasReLU;
  }
  bool thresholded() const { return type == Activation::TRec || type == Activation::TLin; }
};

inline ActivationKind make_activation(Activation type, double theta = 1.0) {
  if ((type == Activation::TRec || type == Activation::TLin) && !(theta > 0.0)) {
    throw std::invalid_argument("TRec/TLin require theta > 0");
  }
  return ActivationKind{type, theta};
}

inline double sigmoid(double a) { return 1.0 / (1.0 + std::exp(-a)); }

inline double act_forward(const ActivationKind& kind, double a) {
  switch (kind.type) {
    case Activation::TRec:
      return a > kind.theta ? a : 0.0;
    case Activation::TLin:
      return a * a > kind.theta * kind.theta ? a : 0.0;
    case Activation::ReLU:
    case Activation::ZeroBiasReLU:
      return a > 0.0 ? a : 0.0;
    case Activation::Sigmoid:
      return sigmoid(a);
  }
  return 0.0;
}

/// Derivative used during training. For the gated kinds the gate is treated
/// as a constant, so the derivative is the gate itself.
inline double act_backward(const ActivationKind& kind, double a) {
  switch (kind.type) {
    case Activation::TRec:
      return a > kind.theta ? 1.0 : 0.0;
    case Activation::TLin:
      return a * a > kind.theta * kind.theta ? 1.0 : 0.0;
    case Activation::ReLU:
    case Activation::ZeroBiasReLU:
      return a > 0.0 ? 1.0 : 0.0;
    case Activation::Sigmoid: {
      double s = sigmoid(a);
      return s * (1.0 - s);
    }
  }
  return 0.0;
}

/// Derivative of act_backward; nonzero only for the sigmoid. Needed for exact
/// gradients of the contraction penalty, which squares act_backward.
inline double act_backward2(const ActivationKind& kind, double a) {
  if (kind.type == Activation::Sigmoid) {
    double s = sigmoid(a);
    return s * (1.0 - s) * (1.0 - 2.0 * s);
  }
  return 0.0;
}

/// Names used in configs and on the command line.
inline std::string to_string(Activation type) {
  switch (type) {
    case Activation::TRec: return "trec";
    case Activation::TLin: return "tlin";
    case Activation::ReLU: return "relu";
    case Activation::Sigmoid: return "sigmoid";
    case Activation::ZeroBiasReLU: return "zrelu";
  }
  return "?";
}

inline Activation activation_from_string(const std::string& name) {
  if (name == "trec") return Activation::TRec;
  if (name == "tlin") return Activation::TLin;
  if (name == "relu") return Activation::ReLU;
  if (name == "sigmoid") return Activation::Sigmoid;
  if (name == "zrelu") return Activation::ZeroBiasReLU;
  throw std::invalid_argument("unknown activation: " + name);
}

}  // namespace zae
