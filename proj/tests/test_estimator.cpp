#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "pdens/errors.hpp"
#include "pdens/estimator.hpp"

using namespace pdens;

TEST_SUITE_BEGIN("estimator");

namespace {

EstimationConfig small_config(FieldSpec spec, int cells, uint64_t n, int shifts) {
  EstimationConfig cfg;
  cfg.field = std::move(spec);
  cfg.qoi = Qoi::mean_value();
  cfg.dimension = 1;
  cfg.cells = cells;
  cfg.n = n;
  cfg.shifts = shifts;
  cfg.seed = 7;
  cfg.workers = 1;
  return cfg;
}

// ell_bar = 0, ell_0 scaled so phi_0 = 1 on the 2-cell mesh: X ~ N(0,1)
FieldSpec unit_phi_spec() {
  FieldSpec spec;
  spec.s = 1;
  spec.a0 = ScalarField::constant(0.0);
  spec.a_modes = {ScalarField::constant(0.0)};
  spec.ell_bar = ScalarField::constant(0.0);
  spec.ell_modes = {ScalarField::constant(16.0), ScalarField::constant(0.0)};
  return spec;
}

}  // namespace

TEST_CASE("gaussian oracle anchors") {
  QoiComponents comps;
  comps.phibar = 0.0;
  comps.phi = {1.0, 0.0};
  const std::vector<double> grid = {0.0};
  const DensityCurve c = gaussian_oracle(comps, grid);
  CHECK(c.F[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(c.f[0] == doctest::Approx(0.3989422804014327).epsilon(1e-14));
  CHECK(c.F_stderr[0] == 0.0);

  comps.phibar = 0.25;
  comps.phi = {3.0, 4.0};  // sigma = 5
  const std::vector<double> grid2 = {0.25 + 5.0};
  const DensityCurve c2 = gaussian_oracle(comps, grid2);
  CHECK(c2.F[0] == doctest::Approx(0.841344746).epsilon(2e-9));

  comps.phi = {0.0, 0.0};
  CHECK_THROWS_AS(gaussian_oracle(comps, grid), NumericError);
}

TEST_CASE("unit-phi components are exactly standard normal") {
  const QoiComponents comps =
      qoi_components(build_mesh(1, 2), unit_phi_spec(), Qoi::mean_value(),
                     {std::vector<double>{0.0}});
  CHECK(comps.phibar == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(comps.phi[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(comps.phi[1] == 0.0);
}

TEST_CASE("estimate matches the gaussian closed form for a deterministic "
          "coefficient") {
  EstimationConfig cfg = small_config(constant_field_spec(2), 16, 521, 8);
  cfg.t_grid = resolve_t_grid(cfg, 33);
  const DensityCurve est = estimate_density(cfg);

  const QoiComponents comps =
      qoi_components(build_mesh(1, cfg.cells), cfg.field, cfg.qoi,
                     {std::vector<double>{0.0, 0.0}});
  const DensityCurve oracle = gaussian_oracle(comps, cfg.t_grid);
  for (size_t i = 0; i < cfg.t_grid.size(); ++i) {
    CHECK(std::abs(est.F[i] - oracle.F[i]) <= 3.0 * est.F_stderr[i] + 1e-10);
    CHECK(std::abs(est.f[i] - oracle.f[i]) <= 3.0 * est.f_stderr[i] + 1e-10);
  }
}

TEST_CASE("curves are monotone up to shift noise and densities nonnegative") {
  EstimationConfig cfg = small_config(default_field_spec(2), 16, 251, 8);
  cfg.t_grid = resolve_t_grid(cfg, 25);
  const DensityCurve est = estimate_density(cfg);
  for (size_t i = 0; i < est.t.size(); ++i) {
    CHECK(est.f[i] >= 0.0);
    CHECK(est.F[i] >= -2.0 * est.F_stderr[i]);
    CHECK(est.F[i] <= 1.0 + 2.0 * est.F_stderr[i]);
    if (i > 0) {
      CHECK(est.F[i] >= est.F[i - 1] -
                            2.0 * (est.F_stderr[i] + est.F_stderr[i - 1]));
    }
  }
  CHECK(est.F.front() <= est.F.back() + 2.0 * (est.F_stderr.front() +
                                               est.F_stderr.back()));
}

TEST_CASE("doubling the shift count shrinks the error bars by about sqrt(2)") {
  EstimationConfig cfg = small_config(default_field_spec(2), 8, 251, 16);
  cfg.t_grid = resolve_t_grid(cfg, 17);
  const DensityCurve base = estimate_density(cfg);
  cfg.shifts = 32;  // same seed: the first 16 shifts are shared
  const DensityCurve doubled = estimate_density(cfg);
  double mean_base = 0.0, mean_doubled = 0.0;
  for (size_t i = 0; i < cfg.t_grid.size(); ++i) {
    mean_base += base.F_stderr[i];
    mean_doubled += doubled.F_stderr[i];
  }
  const double ratio = mean_doubled / mean_base;
  CHECK(std::abs(ratio * std::sqrt(2.0) - 1.0) <= 0.2);
}

TEST_CASE("plain Monte Carlo reference on the standard normal configuration") {
  EstimationConfig cfg = small_config(unit_phi_spec(), 2, 67, 4);
  cfg.t_grid = {0.0, 1.959963985};
  const DensityCurve mc = mc_reference(cfg, 1000000);
  CHECK(std::abs(mc.F[0] - 0.5) <= 3.0 * mc.F_stderr[0]);
  CHECK(mc.F_stderr[0] == doctest::Approx(0.0005).epsilon(0.05));
  CHECK(std::abs(mc.F[1] - 0.975) <= 3.0 * mc.F_stderr[1]);
  // finite-difference pdf reference at the mode, biased O(delta^2)
  CHECK(std::abs(mc.f[0] - 0.3989422804014327) <=
        3.0 * mc.f_stderr[0] + 0.01);

  CHECK_THROWS_AS(mc_reference(cfg, 10), std::invalid_argument);
}

TEST_CASE("estimates are bitwise deterministic across worker counts") {
  EstimationConfig cfg = small_config(default_field_spec(2), 16, 251, 6);
  cfg.t_grid = resolve_t_grid(cfg, 17);
  cfg.workers = 1;
  const DensityCurve one = estimate_density(cfg);
  for (int workers : {2, 5}) {
    cfg.workers = workers;
    const DensityCurve many = estimate_density(cfg);
    CHECK(many.F == one.F);
    CHECK(many.f == one.f);
    CHECK(many.F_stderr == one.F_stderr);
    CHECK(many.f_stderr == one.f_stderr);
  }
}

TEST_CASE("cdf/pdf consistency and density mass") {
  EstimationConfig cfg = small_config(default_field_spec(2), 16, 521, 8);
  const PilotMoments pm = pilot_moments(cfg);
  cfg.t_grid = resolve_t_grid(cfg, 33);
  const DensityCurve est = estimate_density(cfg);
  const double dt = cfg.t_grid[1] - cfg.t_grid[0];
  const double curvature = 1.0 / std::pow(pm.stddev, 3);
  for (size_t i = 1; i + 1 < est.t.size(); ++i) {
    const double central = (est.F[i + 1] - est.F[i - 1]) / (2.0 * dt);
    const double se_central =
        std::hypot(est.F_stderr[i + 1], est.F_stderr[i - 1]) / (2.0 * dt);
    const double budget =
        3.0 * std::hypot(se_central, est.f_stderr[i]) + curvature * dt * dt;
    CHECK(std::abs(central - est.f[i]) <= budget);
  }

  EstimationConfig wide = cfg;
  wide.t_grid = linspace(pm.mean - 8.0 * pm.stddev, pm.mean + 8.0 * pm.stddev, 65);
  const DensityCurve tail = estimate_density(wide);
  double mass = 0.0;
  for (size_t i = 1; i < tail.t.size(); ++i) {
    mass += 0.5 * (tail.f[i] + tail.f[i - 1]) * (tail.t[i] - tail.t[i - 1]);
  }
  CHECK(mass >= 0.99);
  CHECK(mass <= 1.01);
}

TEST_CASE("point-value and weighted-mean functionals run end to end") {
  for (int variant : {0, 1}) {
    EstimationConfig cfg = small_config(default_field_spec(2), 8, 251, 8);
    cfg.qoi = variant == 0
                  ? Qoi::point_value({0.5, 0.0})
                  : Qoi::weighted_mean(ScalarField::polynomial({1.0, 0.5}));
    cfg.t_grid = resolve_t_grid(cfg, 17);
    const DensityCurve est = estimate_density(cfg);
    const DensityCurve mc = mc_reference(cfg, 20000);
    for (size_t i = 0; i < est.t.size(); ++i) {
      CHECK(std::abs(est.F[i] - mc.F[i]) <=
            3.0 * std::hypot(est.F_stderr[i], mc.F_stderr[i]) + 1e-10);
    }
  }
}

TEST_CASE("two-dimensional estimation agrees with its MC reference") {
  EstimationConfig cfg = small_config(default_field_spec(2), 6, 251, 8);
  cfg.dimension = 2;
  cfg.workers = 2;
  cfg.t_grid = resolve_t_grid(cfg, 17);
  const DensityCurve est = estimate_density(cfg);
  const DensityCurve mc = mc_reference(cfg, 20000);
  for (size_t i = 0; i < est.t.size(); ++i) {
    CHECK(std::abs(est.F[i] - mc.F[i]) <=
          3.0 * std::hypot(est.F_stderr[i], mc.F_stderr[i]) + 1e-10);
    CHECK(est.f[i] >= 0.0);
  }
  CHECK(est.meta.h == doctest::Approx(std::sqrt(2.0) / 6.0).epsilon(1e-14));
}

TEST_CASE("mode restricts the computed targets") {
  EstimationConfig cfg = small_config(default_field_spec(2), 8, 67, 4);
  cfg.t_grid = {0.0, 0.1, 0.2};
  cfg.mode = CurveMode::Cdf;
  const DensityCurve c = estimate_density(cfg);
  CHECK(c.F.size() == 3);
  CHECK(c.f.empty());
  cfg.mode = CurveMode::Pdf;
  const DensityCurve p = estimate_density(cfg);
  CHECK(p.F.empty());
  CHECK(p.f.size() == 3);
}

TEST_CASE("study input validation") {
  EstimationConfig cfg = small_config(default_field_spec(2), 8, 67, 4);
  StudySpec study;
  study.axis = StudyAxis::MeshWidth;
  study.levels = {4, 8};
  study.reference = 64;
  CHECK_THROWS_AS(convergence_study(cfg, study), std::invalid_argument);

  study.levels = {4, 8, 16};
  study.reference = 32;  // less than 4x the finest level
  CHECK_THROWS_AS(convergence_study(cfg, study), std::invalid_argument);

  StudySpec mc_study;
  mc_study.axis = StudyAxis::PointCount;
  mc_study.levels = {67, 127, 257};
  mc_study.kind = EstimatorKind::PlainMc;  // needs a deterministic coefficient
  CHECK_THROWS_AS(convergence_study(cfg, mc_study), std::invalid_argument);
}

TEST_CASE("small mesh-axis study shows the quadratic trend") {
  EstimationConfig cfg = small_config(default_field_spec(2), 8, 127, 4);
  cfg.workers = 2;
  StudySpec study;
  study.axis = StudyAxis::MeshWidth;
  study.levels = {4, 8, 16};
  study.reference = 64;
  const StudyResult result = convergence_study(cfg, study);
  REQUIRE(result.cdf.size() == 3);
  CHECK(std::isnan(result.cdf[0].slope_running));
  CHECK(result.cdf_slope > 1.4);
  CHECK(result.cdf_slope < 2.6);
  for (size_t i = 1; i < result.cdf.size(); ++i) {
    CHECK(result.cdf[i].error < result.cdf[i - 1].error);
  }
}

TEST_CASE("small points-axis study shows better-than-MC decay") {
  EstimationConfig cfg = small_config(constant_field_spec(2), 8, 127, 8);
  cfg.workers = 2;
  StudySpec study;
  study.axis = StudyAxis::PointCount;
  study.levels = {67, 127, 257, 521};
  const StudyResult result = convergence_study(cfg, study);
  REQUIRE(result.cdf.size() == 4);
  CHECK(result.cdf_slope <= -0.55);
}

TEST_CASE("pilot grid is strictly increasing and centered") {
  EstimationConfig cfg = small_config(default_field_spec(2), 16, 127, 4);
  const PilotMoments pm = pilot_moments(cfg);
  CHECK(pm.stddev > 0.0);
  const std::vector<double> grid = resolve_t_grid(cfg, 33);
  REQUIRE(grid.size() == 33);
  for (size_t i = 1; i < grid.size(); ++i) CHECK(grid[i] > grid[i - 1]);
  CHECK(grid.front() == doctest::Approx(pm.mean - 3.0 * pm.stddev));
  CHECK(grid.back() == doctest::Approx(pm.mean + 3.0 * pm.stddev));
}

TEST_CASE("configuration guards") {
  EstimationConfig cfg = small_config(default_field_spec(2), 8, 66, 4);
  cfg.t_grid = {0.0, 1.0};
  CHECK_THROWS_AS(estimate_density(cfg), std::invalid_argument);  // 66 not prime
  cfg.n = 67;
  cfg.shifts = 1;
  CHECK_THROWS_AS(estimate_density(cfg), std::invalid_argument);
  cfg.shifts = 4;
  cfg.t_grid = {1.0, 0.0};
  CHECK_THROWS_AS(estimate_density(cfg), std::invalid_argument);
  cfg.t_grid.clear();
  CHECK_THROWS_AS(estimate_density(cfg), std::invalid_argument);
}

TEST_SUITE_END();
