#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "zae/activations.hpp"
#include "zae/core.hpp"

using zae::Activation;
using zae::ActivationKind;
using zae::act_backward;
using zae::act_forward;

TEST_CASE("TRec gates the identity strictly above theta") {
  ActivationKind trec = zae::make_activation(Activation::TRec, 1.0);
  CHECK(act_forward(trec, 2.0) == 2.0);
  CHECK(act_forward(trec, 0.5) == 0.0);
  CHECK(act_forward(trec, -3.0) == 0.0);
  CHECK(act_forward(trec, 1.0) == 0.0);  // strict at the threshold
  CHECK(act_backward(trec, 2.0) == 1.0);
  CHECK(act_backward(trec, 0.5) == 0.0);
  CHECK(act_backward(trec, 1.0) == 0.0);
}

TEST_CASE("TLin is active outside (-theta, theta)") {
  ActivationKind tlin = zae::make_activation(Activation::TLin, 1.0);
  CHECK(act_forward(tlin, -3.0) == -3.0);
  CHECK(act_forward(tlin, 0.5) == 0.0);
  CHECK(act_forward(tlin, 1.0) == 0.0);  // strict
  CHECK(act_forward(tlin, -1.0) == 0.0);
  CHECK(act_backward(tlin, -3.0) == 1.0);
  CHECK(act_backward(tlin, 0.99) == 0.0);
}

TEST_CASE("sigmoid values and derivative") {
  ActivationKind sig{Activation::Sigmoid};
  CHECK(act_forward(sig, 0.0) == Catch::Approx(0.5));
  CHECK(act_backward(sig, 0.0) == Catch::Approx(0.25));
  CHECK(act_forward(sig, 30.0) == Catch::Approx(1.0));
}

TEST_CASE("relu variants") {
  ActivationKind relu{Activation::ReLU};
  ActivationKind zrelu{Activation::ZeroBiasReLU};
  for (double a : {-2.0, -0.1, 0.0, 0.1, 3.5}) {
    CHECK(act_forward(relu, a) == std::max(0.0, a));
    CHECK(act_forward(zrelu, a) == std::max(0.0, a));
    CHECK(act_backward(relu, a) == (a > 0.0 ? 1.0 : 0.0));
  }
}

TEST_CASE("invalid thresholds are rejected") {
  CHECK_THROWS_AS(zae::make_activation(Activation::TRec, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(zae::make_activation(Activation::TLin, -1.0), std::invalid_argument);
}

TEST_CASE("act_backward matches finite differences away from thresholds") {
  const double h = 1e-5;
  const double margin = 1e-4;
  std::vector<ActivationKind> kinds = {
      zae::make_activation(Activation::TRec, 1.0),  zae::make_activation(Activation::TRec, 0.3),
      zae::make_activation(Activation::TLin, 1.0),  zae::make_activation(Activation::TLin, 2.5),
      ActivationKind{Activation::ReLU},             ActivationKind{Activation::Sigmoid},
      ActivationKind{Activation::ZeroBiasReLU}};

  zae::Rng rng(99);
  for (const auto& kind : kinds) {
    for (int i = 0; i < 400; ++i) {
      double a = rng.uniform(-6.0, 6.0);
      // Threshold points: +theta (TRec), +-theta (TLin), 0 (ReLU family).
      bool near = std::abs(a) <= margin + h || std::abs(a - kind.theta) <= margin + h ||
                  std::abs(a + kind.theta) <= margin + h;
      if (near) continue;
      double fd = (act_forward(kind, a + h) - act_forward(kind, a - h)) / (2.0 * h);
      double an = act_backward(kind, a);
      CHECK(std::abs(fd - an) <= 1e-6 * std::max({1.0, std::abs(fd), std::abs(an)}));
    }
  }
}

TEST_CASE("TRec and TLin agree on positive inputs; TLin is odd") {
  ActivationKind trec = zae::make_activation(Activation::TRec, 1.3);
  ActivationKind tlin = zae::make_activation(Activation::TLin, 1.3);
  zae::Rng rng(17);
  for (int i = 0; i < 500; ++i) {
    double a = rng.uniform(0.0, 5.0);
    CHECK(act_forward(trec, a) == act_forward(tlin, a));
    double b = rng.uniform(-5.0, 5.0);
    CHECK(act_forward(tlin, -b) == -act_forward(tlin, b));
  }
}

TEST_CASE("zero-bias relu is the small-theta limit of TRec") {
  ActivationKind zrelu{Activation::ZeroBiasReLU};
  ActivationKind trec_tiny = zae::make_activation(Activation::TRec, 1e-12);
  for (double a : {-1.0, -1e-6, 1e-6, 0.5, 4.0}) {
    CHECK(act_forward(zrelu, a) == act_forward(trec_tiny, a));
  }
}
