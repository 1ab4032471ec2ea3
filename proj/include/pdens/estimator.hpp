#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pdens/fem.hpp"
#include "pdens/fields.hpp"
#include "pdens/qmc.hpp"

namespace pdens {

enum class CurveMode { Cdf, Pdf, Both };

/// Everything one cdf/pdf estimation run needs. t_grid must be resolved
/// (nonempty, strictly increasing) before calling estimate_density.
struct EstimationConfig {
  FieldSpec field;
  Qoi qoi;
  int dimension = 1;
  int cells = 64;
  uint64_t n = 2053;  // lattice size, prime
  int shifts = 16;
  uint64_t seed = 0;
  std::vector<double> t_grid;
  CurveMode mode = CurveMode::Both;
  std::vector<double> gamma;                // CBC weights, empty -> 1/j^2
  std::vector<uint32_t> generating_vector;  // empty -> CBC construction
  int workers = 0;                          // 0 -> hardware concurrency
};

struct CurveMeta {
  double h = 0.0;
  uint64_t n = 0;
  int shifts = 0;
  uint64_t seed = 0;
  double wall_time = 0.0;
};

/// Estimated curves on the t-grid with per-point standard errors over the
/// random shifts. Vectors for a target not requested by the mode are empty.
struct DensityCurve {
  std::vector<double> t;
  std::vector<double> F, F_stderr;
  std::vector<double> f, f_stderr;
  CurveMeta meta;
};

struct PilotMoments {
  double mean = 0.0;
  double stddev = 0.0;
};

enum class StudyAxis { MeshWidth, PointCount };
enum class EstimatorKind { Qmc, PlainMc };

struct StudySpec {
  StudyAxis axis = StudyAxis::MeshWidth;
  std::vector<int64_t> levels;  // cells_per_side (mesh axis) or N (points axis)
  int64_t reference = 0;        // mesh: reference cells (>= 4x finest level);
                                // points: 0 -> gaussian_oracle when the
                                // coefficient is deterministic, else a run at
                                // the given N
  EstimatorKind kind = EstimatorKind::Qmc;
};

struct StudyRow {
  int64_t level = 0;        // cells or N
  double x = 0.0;           // meshwidth h or N
  double error = 0.0;       // max over the t-grid (see axis semantics)
  double err_stderr = 0.0;
  double slope_running = 0.0;  // log-log LSQ slope over rows so far
};

struct StudyDetailRow {
  int64_t level = 0;
  double t = 0.0;
  double error_cdf = 0.0;
  double error_pdf = 0.0;
};

struct StudyResult {
  std::vector<StudyRow> cdf;
  std::vector<StudyRow> pdf;  // empty for the plain-MC control
  double cdf_slope = 0.0;
  double pdf_slope = 0.0;
  std::vector<StudyDetailRow> detail;
};

std::vector<double> linspace(double lo, double hi, int n);

/// Small deterministic pilot (N = 127, 2 shifts) estimating the mean and
/// standard deviation of the discrete quantity of interest.
PilotMoments pilot_moments(const EstimationConfig& config);

/// t-grid of `points` equispaced values across mean +- 3 stddev from the pilot.
std::vector<double> resolve_t_grid(const EstimationConfig& config, int points);

/// Randomly shifted lattice estimate of the cdf/pdf: one FE factorization and
/// s+2 solves per lattice point, reused across the whole t-grid and both
/// targets. Deterministic for fixed (config, seed) regardless of worker count.
DensityCurve estimate_density(const EstimationConfig& config);

/// Closed form when the coefficient is deterministic: the QoI is Gaussian
/// with mean phibar and variance sum_i phi_i^2.
DensityCurve gaussian_oracle(const QoiComponents& comps,
                             std::span<const double> t_grid);

/// Plain Monte Carlo reference: indicator average for the cdf, symmetric
/// finite difference of the empirical cdf for the pdf (bandwidth
/// 0.5 * sigma_hat * n^{-1/5}, documented O(delta^2) bias).
DensityCurve mc_reference(const EstimationConfig& config, int64_t sample_count);

/// Convergence study along one axis; errors are measured against the
/// reference as max over the t-grid of |curve - reference| (mesh axis) or of
/// the shift-RMSE (points axis). Requires at least 3 levels.
StudyResult convergence_study(const EstimationConfig& config,
                              const StudySpec& study);

}  // namespace pdens
