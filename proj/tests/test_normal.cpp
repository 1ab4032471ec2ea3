#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "pdens/normal.hpp"
#include "support/oracles.hpp"

using namespace pdens;

TEST_SUITE_BEGIN("normal");

TEST_CASE("cdf and pdf anchor values") {
  CHECK(normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-16));
  CHECK(normal_pdf(0.0) == doctest::Approx(0.3989422804014327).epsilon(1e-15));
}

TEST_CASE("inverse composes with the cdf") {
  for (double x = -6.0; x <= 6.0; x += 0.0625) {
    // For x > 0 the cdf sits within ulp(1) of 1, so the tail mass is stored
    // with absolute error ~1.1e-16 and no inverse can recover x better than
    // ulp/(2 rho(x)); allow exactly that quantization on top of the 1e-9.
    const double quantization = x > 0.0 ? 1.2e-16 / normal_pdf(x) : 0.0;
    CHECK(std::abs(normal_inv_cdf(normal_cdf(x)) - x) <= 1e-9 + quantization);
  }
}

TEST_CASE("pdf is the cdf derivative") {
  const double delta = 1e-5;
  for (double x = -6.0; x <= 6.0; x += 0.125) {
    const double central = (normal_cdf(x + delta) - normal_cdf(x - delta)) / (2 * delta);
    CHECK(std::abs(central - normal_pdf(x)) <= 1e-8);
  }
}

TEST_CASE("inverse cdf anchor values") {
  CHECK(normal_inv_cdf(0.5) == doctest::Approx(0.0).epsilon(1e-15));
  // frozen from bisection on the series cdf
  const double q975 = oracles::inv_phi_bisect(0.975);
  CHECK(q975 == doctest::Approx(1.959963985).epsilon(1e-9));
  CHECK(std::abs(normal_inv_cdf(0.975) - q975) <= 1e-9);
  CHECK(std::abs(normal_inv_cdf(0.975) - 1.959963985) <= 1.5e-9);
}

TEST_CASE("inverse cdf matches the series oracle across the bulk") {
  for (double p : {1e-4, 1e-3, 0.0013, 0.02, 0.02425, 0.1, 0.25, 0.4, 0.5,
                   0.6, 0.75, 0.9, 0.97575, 0.98, 0.999, 0.9999}) {
    CHECK(std::abs(normal_inv_cdf(p) - oracles::inv_phi_bisect(p)) <= 1e-9);
  }
}

TEST_CASE("inverse cdf is self-consistent deep in the tails") {
  for (double p : {1e-12, 1e-10, 1e-8, 1e-6, 1.1102230246251565e-16}) {
    const double x = normal_inv_cdf(p);
    CHECK(x < 0.0);
    CHECK(std::abs(normal_cdf(x) / p - 1.0) <= 1e-8);
  }
  // symmetry where 1 - p still carries p to full precision
  for (double p : {1e-4, 1e-3, 0.01, 0.1, 0.25}) {
    CHECK(std::abs(normal_inv_cdf(1.0 - p) + normal_inv_cdf(p)) <= 1e-9);
  }
}

TEST_CASE("inverse cdf rejects the closed endpoints") {
  CHECK_THROWS_AS(normal_inv_cdf(0.0), std::domain_error);
  CHECK_THROWS_AS(normal_inv_cdf(1.0), std::domain_error);
  CHECK_THROWS_AS(normal_inv_cdf(-0.25), std::domain_error);
  CHECK_THROWS_AS(normal_inv_cdf(1.25), std::domain_error);
}

TEST_CASE("series oracle sanity") {
  CHECK(oracles::phi_series(0.0) == doctest::Approx(0.5).epsilon(1e-16));
  CHECK(oracles::phi_series(1.0) == doctest::Approx(0.841344746068543).epsilon(1e-12));
  CHECK(std::abs(oracles::phi_series(2.0) - normal_cdf(2.0)) <= 1e-14);
}

TEST_SUITE_END();
