#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "pdens/fields.hpp"

using namespace pdens;

TEST_SUITE_BEGIN("fields");

namespace {

// s = 1 spec with a single constant coefficient mode of the given value
FieldSpec constant_mode_spec(double mode_value) {
  FieldSpec spec;
  spec.s = 1;
  spec.a0 = ScalarField::constant(0.0);
  spec.a_modes = {ScalarField::constant(mode_value)};
  spec.ell_bar = ScalarField::constant(1.0);
  spec.ell_modes = {ScalarField::constant(1.0), ScalarField::constant(0.0)};
  return spec;
}

}  // namespace

TEST_CASE("coefficient at z = 0 is exp(a0)") {
  const FieldSpec spec = default_field_spec(3);
  const std::vector<double> z(3, 0.0);
  CHECK(eval_coefficient(spec, z, {0.37, 0.0}, 1) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("constant mode gives exp(z * value)") {
  const FieldSpec spec = constant_mode_spec(0.5);
  const std::vector<double> z = {2.0};
  CHECK(eval_coefficient(spec, z, {0.1, 0.0}, 1) ==
        doctest::Approx(std::exp(1.0)).epsilon(1e-15));
}

TEST_CASE("coefficient dimension mismatch is rejected") {
  const FieldSpec spec = default_field_spec(2);
  const std::vector<double> z(3, 0.0);
  CHECK_THROWS_AS(eval_coefficient(spec, z, {0.5, 0.0}, 1), std::invalid_argument);
  CHECK_THROWS_AS(coefficient_extremes(spec, z, 1), std::invalid_argument);
}

TEST_CASE("source at w = 0 is ell_bar") {
  const FieldSpec spec = default_field_spec(2);
  const std::vector<double> w(3, 0.0);
  const Point x{0.3, 0.0};
  CHECK(eval_source(spec, w, x, 1) ==
        doctest::Approx(spec.ell_bar.eval(x, 1)).epsilon(1e-15));
}

TEST_CASE("single source term") {
  FieldSpec spec = constant_mode_spec(0.0);
  spec.ell_bar = ScalarField::constant(0.0);
  const std::vector<double> w = {3.0, 0.0};
  CHECK(eval_source(spec, w, {0.9, 0.0}, 1) == doctest::Approx(3.0).epsilon(1e-15));
  CHECK_THROWS_AS(eval_source(spec, {w.data(), 1}, {0.9, 0.0}, 1),
                  std::invalid_argument);
}

TEST_CASE("source affinity identity") {
  const FieldSpec spec = default_field_spec(3);
  std::mt19937_64 rng(1234);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> w(4), wp(4), sum(4);
    for (int i = 0; i < 4; ++i) {
      w[i] = normal(rng);
      wp[i] = normal(rng);
      sum[i] = w[i] + wp[i];
    }
    const Point x{std::abs(normal(rng)) / 4.0, 0.0};
    const double lhs = eval_source(spec, w, x, 1) + eval_source(spec, wp, x, 1);
    const double rhs = eval_source(spec, sum, x, 1) + spec.ell_bar.eval(x, 1);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
}

TEST_CASE("log-coefficient is affine in z") {
  FieldSpec spec = default_field_spec(3);
  spec.a0 = ScalarField::polynomial({0.3, 0.2});
  std::mt19937_64 rng(77);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> z(3), zp(3), sum(3);
    for (int j = 0; j < 3; ++j) {
      z[j] = normal(rng);
      zp[j] = normal(rng);
      sum[j] = z[j] + zp[j];
    }
    const Point x{0.5 + 0.4 * std::tanh(normal(rng)), 0.0};
    const double lhs = std::log(eval_coefficient(spec, sum, x, 1));
    const double rhs = std::log(eval_coefficient(spec, z, x, 1)) +
                       std::log(eval_coefficient(spec, zp, x, 1)) -
                       spec.a0.eval(x, 1);
    CHECK(std::abs(lhs - rhs) <= 1e-12);
  }
}

TEST_CASE("extremes for the trivial and constant-mode cases") {
  {
    const FieldSpec spec = constant_mode_spec(0.5);
    const std::vector<double> z = {0.0};
    const CoefficientExtremes ex = coefficient_extremes(spec, z, 1);
    CHECK(ex.amin == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(ex.amax == doctest::Approx(1.0).epsilon(1e-15));
  }
  {
    const FieldSpec spec = constant_mode_spec(0.5);
    const std::vector<double> z = {2.0};
    const CoefficientExtremes ex = coefficient_extremes(spec, z, 1);
    CHECK(ex.amin == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
    CHECK(ex.amax == doctest::Approx(std::exp(1.0)).epsilon(1e-15));
  }
}

TEST_CASE("sine mode sup norm is analytic") {
  // a_1(x) = sin(pi x): amplitude 1, frequency 1, decay 0
  FieldSpec spec = constant_mode_spec(0.0);
  spec.a_modes[0] = ScalarField::sine_mode(1.0, 1, 0.0);
  CHECK(spec.a_modes[0].sup_norm(1) == doctest::Approx(1.0).epsilon(1e-15));
  const std::vector<double> z = {1.0};
  const CoefficientExtremes ex = coefficient_extremes(spec, z, 1);
  CHECK(ex.amin == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
  CHECK(ex.amax == doctest::Approx(std::exp(1.0)).epsilon(1e-15));
}

TEST_CASE("coefficient stays inside its envelope") {
  const FieldSpec spec = default_field_spec(3);
  std::mt19937_64 rng(31337);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  for (int dim : {1, 2}) {
    for (int trial = 0; trial < 5000; ++trial) {
      std::vector<double> z(3);
      for (double& v : z) v = 2.0 * normal(rng);
      const Point x{uniform(rng), dim == 2 ? uniform(rng) : 0.0};
      const double a = eval_coefficient(spec, z, x, dim);
      const CoefficientExtremes ex = coefficient_extremes(spec, z, dim);
      CHECK(a >= ex.amin - 1e-15);
      CHECK(a <= ex.amax + 1e-15);
      CHECK(a > 0.0);
    }
  }
}

TEST_CASE("ell_0 positivity is enforced") {
  CHECK_NOTHROW(validate_field_spec(default_field_spec(2), 1));
  CHECK_NOTHROW(validate_field_spec(default_field_spec(2), 2));

  FieldSpec bad = default_field_spec(2);
  bad.ell_modes[0] = ScalarField::constant(0.0);
  CHECK_THROWS_AS(validate_field_spec(bad, 1), std::invalid_argument);
  bad.ell_modes[0] = ScalarField::constant(-1.0);
  CHECK_THROWS_AS(validate_field_spec(bad, 1), std::invalid_argument);
  // sin(pi x) vanishes at the boundary, so its infimum is 0, not positive
  bad.ell_modes[0] = ScalarField::sine_mode(1.0, 1, 0.0);
  CHECK_THROWS_AS(validate_field_spec(bad, 1), std::invalid_argument);
  CHECK_THROWS_AS(validate_field_spec(bad, 2), std::invalid_argument);
  // positive at the endpoints but dips negative mid-domain: only the grid
  // sample catches it
  bad.ell_modes[0] = ScalarField::polynomial({0.1, 1.0, -2.0});
  CHECK_THROWS_AS(validate_field_spec(bad, 1), std::invalid_argument);
}

TEST_CASE("mode count mismatches are rejected") {
  FieldSpec spec = default_field_spec(2);
  spec.a_modes.pop_back();
  CHECK_THROWS_AS(validate_field_spec(spec, 1), std::invalid_argument);
  spec = default_field_spec(2);
  spec.ell_modes.pop_back();
  CHECK_THROWS_AS(validate_field_spec(spec, 1), std::invalid_argument);
  spec = default_field_spec(2);
  spec.s = 0;
  CHECK_THROWS_AS(validate_field_spec(spec, 1), std::invalid_argument);
}

TEST_CASE("polynomial sup norm is a modest upper bound") {
  const ScalarField p = ScalarField::polynomial({0.0, 1.0});  // p(x) = x
  CHECK(p.sup_norm(1) >= 1.0);
  CHECK(p.sup_norm(1) <= 1.02);
  CHECK(p.inf_value(1) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK_THROWS_AS(ScalarField::polynomial({1, 2, 3, 4, 5, 6}), std::invalid_argument);
}

TEST_CASE("sine mode evaluation in 1D and 2D") {
  const ScalarField f = ScalarField::sine_mode(0.8, 2, 2.0);
  // 0.8 * 2^-2 * sin(2 pi x) at x = 0.25 -> 0.2
  CHECK(f.eval({0.25, 0.0}, 1) == doctest::Approx(0.2).epsilon(1e-14));
  CHECK(f.eval({0.25, 0.25}, 2) == doctest::Approx(0.2).epsilon(1e-14));
  CHECK(f.eval({0.25, 0.5}, 2) == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("constant coefficient spec is flagged deterministic") {
  CHECK(constant_field_spec(2).coefficient_is_deterministic());
  CHECK(!default_field_spec(2).coefficient_is_deterministic());
}

TEST_CASE("parameter points enforce their dimensions") {
  const FieldSpec spec = default_field_spec(2);
  const ParameterPoint y = make_parameter_point(spec, {0.1, 0.2, 0.3}, {0.4, 0.5});
  const Point x{0.5, 0.0};
  CHECK(eval_coefficient(spec, y, x, 1) ==
        eval_coefficient(spec, std::span<const double>(y.z), x, 1));
  CHECK(eval_source(spec, y, x, 1) ==
        eval_source(spec, std::span<const double>(y.w), x, 1));
  CHECK_THROWS_AS(make_parameter_point(spec, {0.1, 0.2}, {0.4, 0.5}),
                  std::invalid_argument);
  CHECK_THROWS_AS(make_parameter_point(spec, {0.1, 0.2, 0.3}, {0.4}),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      make_parameter_point(spec, {0.1, 0.2, std::nan("")}, {0.4, 0.5}),
      std::invalid_argument);
}

TEST_SUITE_END();
