#include <doctest.h>

#include <random>

#include "../support.hpp"
#include "lscs/error.hpp"
#include "lscs/predictors.hpp"

using namespace lscs;
using lscs::testing::random_vector;

namespace {
constexpr PredictorKind kAll[] = {PredictorKind::P1, PredictorKind::P2, PredictorKind::P3};
}

TEST_CASE("P3 weights") {
  const double a = (2.0 - std::sqrt(2.0)) / 4.0;
  const double b = (std::sqrt(2.0) - 1.0) / 2.0;
  CHECK(kP3Diagonal == doctest::Approx(a).epsilon(1e-15));
  CHECK(kP3Vertical == doctest::Approx(b).epsilon(1e-15));
  CHECK(std::abs(4.0 * kP3Diagonal + 2.0 * kP3Vertical - 1.0) <= 1e-15);
  const StencilWeights w = stencil_weights(PredictorKind::P3);
  CHECK(w.diagonal == kP3Diagonal);
  CHECK(w.vertical == kP3Vertical);
}

TEST_CASE("predictor hand examples") {
  Vector u(2), l(2);
  u << 0, 1;
  l << 1, 0;
  const Vector p1 = predict(PredictorKind::P1, u, l);
  CHECK(p1[0] == 0.5);
  CHECK(p1[1] == 0.5);

  Vector u3(3), l3(3);
  u3 << 1, 2, 3;
  l3 << 3, 2, 1;
  CHECK(predict(PredictorKind::P3, u3, l3)[1] == doctest::Approx(2.0).epsilon(1e-15));

  // P2 at a clamped border: column -1 repeats column 0.
  const Vector p2 = predict(PredictorKind::P2, u3, l3);
  CHECK(p2[0] == doctest::Approx((1 + 1 + 2 + 3 + 3 + 2) / 6.0).epsilon(1e-15));
  CHECK(p2[2] == doctest::Approx((2 + 3 + 3 + 2 + 1 + 1) / 6.0).epsilon(1e-15));

  Vector one_u(1), one_l(1);
  one_u << 0.2;
  one_l << 0.6;
  for (PredictorKind k : kAll) CHECK(predict(k, one_u, one_l)[0] == doctest::Approx(0.4).epsilon(1e-15));
}

TEST_CASE("predictor properties on random rows") {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> len(1, 40);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const Index n = len(rng);
    const Vector u = random_vector(n, rng), l = random_vector(n, rng);
    const Vector u2 = random_vector(n, rng), l2 = random_vector(n, rng);
    const double alpha = g(rng), beta = g(rng), c = g(rng);
    for (PredictorKind k : kAll) {
      const Vector constant = predict(k, Vector::Constant(n, c), Vector::Constant(n, c));
      CHECK((constant.array() - c).abs().maxCoeff() <= 1e-12 * std::max(1.0, std::abs(c)));
      const Vector lhs = predict(k, alpha * u + beta * u2, alpha * l + beta * l2);
      const Vector rhs = alpha * predict(k, u, l) + beta * predict(k, u2, l2);
      CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, rhs.cwiseAbs().maxCoeff()));
      CHECK((predict(k, u, l) - predict(k, l, u)).cwiseAbs().maxCoeff() <= 1e-12);
    }
    CHECK((predict(PredictorKind::P1, u, l) - predict_stencil({0.0, 0.5}, u, l)).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("predictor errors and names") {
  CHECK_THROWS_AS(predict(PredictorKind::P1, Vector::Zero(3), Vector::Zero(4)), Error);
  CHECK_THROWS_AS(predict(PredictorKind::P3, Vector::Zero(0), Vector::Zero(0)), Error);
  for (PredictorKind k : kAll) CHECK(parse_predictor(predictor_name(k)) == k);
  CHECK(parse_predictor("P3") == PredictorKind::P3);
  CHECK_FALSE(parse_predictor("p4").has_value());
  CHECK(clamp_column(-1, 5) == 0);
  CHECK(clamp_column(5, 5) == 4);
  CHECK(clamp_column(2, 5) == 2);
}
