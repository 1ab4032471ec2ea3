#include "pdens/estimator.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "pdens/errors.hpp"
#include "pdens/normal.hpp"
#include "pdens/preintegrate.hpp"
#include "pdens/rng.hpp"
#include "pdens/summation.hpp"

namespace pdens {

namespace {

constexpr uint64_t kChunk = 512;       // lattice points per work unit
constexpr uint64_t kMcStream = 0x4d43'0000'0000'0000ULL;  // MC draw stream tag
constexpr int kPilotN = 127;
constexpr int kPilotShifts = 2;

void validate_config(const EstimationConfig& config, bool need_grid) {
  validate_field_spec(config.field, config.dimension);
  if (!is_prime(config.n)) {
    throw std::invalid_argument("EstimationConfig: N = " +
                                std::to_string(config.n) + " is not prime");
  }
  if (config.shifts < 2) {
    throw std::invalid_argument("EstimationConfig: shifts must be >= 2");
  }
  if (need_grid) {
    if (config.t_grid.empty()) {
      throw std::invalid_argument("EstimationConfig: empty t-grid");
    }
    for (size_t i = 0; i < config.t_grid.size(); ++i) {
      if (!std::isfinite(config.t_grid[i]) ||
          (i > 0 && !(config.t_grid[i] > config.t_grid[i - 1]))) {
        throw std::invalid_argument(
            "EstimationConfig: t-grid must be finite and strictly increasing");
      }
    }
  }
}

LatticeRule rule_for(const EstimationConfig& config) {
  const int dim = 2 * config.field.s;
  std::vector<double> gamma =
      config.gamma.empty() ? default_weights(dim) : config.gamma;
  if (static_cast<int>(gamma.size()) < dim) {
    throw std::invalid_argument("EstimationConfig: gamma needs 2s entries");
  }
  gamma.resize(dim);
  std::vector<uint32_t> genvec = config.generating_vector;
  if (genvec.empty()) {
    genvec = cbc_vector(dim, config.n, gamma);
  }
  return make_lattice_rule(config.n, std::move(genvec), std::move(gamma));
}

int worker_count(const EstimationConfig& config, uint64_t task_count) {
  int w = config.workers > 0
              ? config.workers
              : static_cast<int>(std::thread::hardware_concurrency());
  if (w < 1) w = 1;
  return static_cast<int>(std::min<uint64_t>(w, task_count));
}

double fit_loglog_slope(std::span<const double> x, std::span<const double> y) {
  const int n = static_cast<int>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    if (!(y[i] > 0.0) || !(x[i] > 0.0)) {
      throw NumericError("slope fit: nonpositive value in log-log fit");
    }
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

void fill_running_slopes(std::vector<StudyRow>& rows) {
  std::vector<double> xs, ys;
  for (size_t i = 0; i < rows.size(); ++i) {
    xs.push_back(rows[i].x);
    ys.push_back(rows[i].error);
    rows[i].slope_running =
        i == 0 ? std::numeric_limits<double>::quiet_NaN()
               : fit_loglog_slope(xs, ys);
  }
}

}  // namespace

std::vector<double> linspace(double lo, double hi, int n) {
  if (n < 1 || !(hi > lo)) {
    throw std::invalid_argument("linspace: need n >= 1 and hi > lo");
  }
  std::vector<double> t(n);
  if (n == 1) {
    t[0] = 0.5 * (lo + hi);
    return t;
  }
  for (int i = 0; i < n; ++i) {
    t[i] = lo + (hi - lo) * i / (n - 1);
  }
  return t;
}

PilotMoments pilot_moments(const EstimationConfig& config) {
  validate_config(config, false);
  const Mesh mesh = build_mesh(config.dimension, config.cells);
  ComponentSolver solver(mesh, config.field, config.qoi);
  const int s = config.field.s;
  const int dim = 2 * s;
  const LatticeRule rule =
      make_lattice_rule(kPilotN, cbc_vector(dim, kPilotN, default_weights(dim)),
                        default_weights(dim));
  const ShiftSet shifts = make_shifts(kPilotShifts, config.seed, dim);
  std::vector<double> u(dim), y(dim);
  KahanSum sum_m, sum_m2, sum_p0sq;
  int count = 0;
  for (int r = 0; r < shifts.count; ++r) {
    for (uint64_t k = 0; k < rule.n; ++k) {
      lattice_point(rule, k, shifts.shift(r), u);
      gaussian_map(u, y);
      const QoiComponents comps = solver.components({y.data() + s, size_t(s)});
      double m = comps.phibar;
      for (int i = 1; i <= s; ++i) m += y[i - 1] * comps.phi[i];
      sum_m.add(m);
      sum_m2.add(m * m);
      sum_p0sq.add(comps.phi[0] * comps.phi[0]);
      ++count;
    }
  }
  const double mean = sum_m.value() / count;
  const double var_m = std::max(0.0, sum_m2.value() / count - mean * mean);
  const double var = var_m + sum_p0sq.value() / count;
  return {mean, std::sqrt(var)};
}

std::vector<double> resolve_t_grid(const EstimationConfig& config, int points) {
  if (points < 2) {
    throw std::invalid_argument("resolve_t_grid: need at least 2 points");
  }
  const PilotMoments m = pilot_moments(config);
  return linspace(m.mean - 3.0 * m.stddev, m.mean + 3.0 * m.stddev, points);
}

DensityCurve estimate_density(const EstimationConfig& config) {
  const auto t_start = std::chrono::steady_clock::now();
  validate_config(config, true);
  const Mesh mesh = build_mesh(config.dimension, config.cells);
  const LatticeRule rule = rule_for(config);
  const int s = config.field.s;
  const int dim = rule.dim;
  const ShiftSet shift_set = make_shifts(config.shifts, config.seed, dim);
  const int nt = static_cast<int>(config.t_grid.size());
  const bool want_cdf = config.mode != CurveMode::Pdf;
  const bool want_pdf = config.mode != CurveMode::Cdf;

  const uint64_t chunks_per_shift = (rule.n + kChunk - 1) / kChunk;
  const uint64_t task_count = chunks_per_shift * config.shifts;

  // Per-task partial sums; tasks are merged in a fixed order afterwards, so
  // the result does not depend on the number of workers.
  std::vector<double> partial_cdf(want_cdf ? task_count * nt : 0, 0.0);
  std::vector<double> partial_pdf(want_pdf ? task_count * nt : 0, 0.0);

  std::atomic<uint64_t> next_task{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;

  auto worker = [&]() {
    try {
      ComponentSolver solver(mesh, config.field, config.qoi);
      std::vector<double> u(dim), y(dim);
      std::vector<KahanSum> acc_cdf(nt), acc_pdf(nt);
      for (;;) {
        const uint64_t task = next_task.fetch_add(1);
        if (task >= task_count || failed.load()) break;
        const int r = static_cast<int>(task / chunks_per_shift);
        const uint64_t chunk = task % chunks_per_shift;
        const uint64_t k_lo = chunk * kChunk;
        const uint64_t k_hi = std::min(rule.n, k_lo + kChunk);
        std::fill(acc_cdf.begin(), acc_cdf.end(), KahanSum{});
        std::fill(acc_pdf.begin(), acc_pdf.end(), KahanSum{});
        for (uint64_t k = k_lo; k < k_hi; ++k) {
          lattice_point(rule, k, shift_set.shift(r), u);
          gaussian_map(u, y);
          const std::span<const double> w_rest{y.data(), size_t(s)};
          const QoiComponents comps =
              solver.components({y.data() + s, size_t(s)});
          for (int it = 0; it < nt; ++it) {
            const double t = config.t_grid[it];
            if (want_cdf) acc_cdf[it].add(preintegrated_cdf(t, w_rest, comps));
            if (want_pdf) acc_pdf[it].add(preintegrated_pdf(t, w_rest, comps));
          }
        }
        for (int it = 0; it < nt; ++it) {
          if (want_cdf) partial_cdf[task * nt + it] = acc_cdf[it].value();
          if (want_pdf) partial_pdf[task * nt + it] = acc_pdf[it].value();
        }
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mutex);
      if (!error) error = std::current_exception();
      failed.store(true);
    }
  };

  const int n_workers = worker_count(config, task_count);
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (int i = 0; i < n_workers; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);

  // merge: chunk partials in chunk order per shift, then stats over shifts
  auto reduce = [&](const std::vector<double>& partial, std::vector<double>& mean,
                    std::vector<double>& stderr_out) {
    mean.assign(nt, 0.0);
    stderr_out.assign(nt, 0.0);
    std::vector<std::vector<double>> per_shift(
        config.shifts, std::vector<double>(nt, 0.0));
    for (int r = 0; r < config.shifts; ++r) {
      for (int it = 0; it < nt; ++it) {
        KahanSum acc;
        for (uint64_t c = 0; c < chunks_per_shift; ++c) {
          const uint64_t task = static_cast<uint64_t>(r) * chunks_per_shift + c;
          acc.add(partial[task * nt + it]);
        }
        per_shift[r][it] = acc.value() / static_cast<double>(rule.n);
      }
    }
    for (int it = 0; it < nt; ++it) {
      double m = 0.0;
      for (int r = 0; r < config.shifts; ++r) m += per_shift[r][it];
      m /= config.shifts;
      double ss = 0.0;
      for (int r = 0; r < config.shifts; ++r) {
        const double d = per_shift[r][it] - m;
        ss += d * d;
      }
      mean[it] = m;
      stderr_out[it] = std::sqrt(ss / (config.shifts - 1.0) / config.shifts);
    }
  };

  DensityCurve curve;
  curve.t = config.t_grid;
  if (want_cdf) reduce(partial_cdf, curve.F, curve.F_stderr);
  if (want_pdf) reduce(partial_pdf, curve.f, curve.f_stderr);
  curve.meta = {mesh.meshwidth, config.n, config.shifts, config.seed,
                std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                              t_start)
                    .count()};
  return curve;
}

DensityCurve gaussian_oracle(const QoiComponents& comps,
                             std::span<const double> t_grid) {
  double var = 0.0;
  for (double p : comps.phi) var += p * p;
  if (!(var > 0.0)) {
    throw NumericError("gaussian_oracle: zero variance");
  }
  const double sigma = std::sqrt(var);
  DensityCurve curve;
  curve.t.assign(t_grid.begin(), t_grid.end());
  const int nt = static_cast<int>(t_grid.size());
  curve.F.resize(nt);
  curve.f.resize(nt);
  curve.F_stderr.assign(nt, 0.0);
  curve.f_stderr.assign(nt, 0.0);
  for (int i = 0; i < nt; ++i) {
    const double xi = (t_grid[i] - comps.phibar) / sigma;
    curve.F[i] = normal_cdf(xi);
    curve.f[i] = normal_pdf(xi) / sigma;
  }
  return curve;
}

DensityCurve mc_reference(const EstimationConfig& config, int64_t sample_count) {
  const auto t_start = std::chrono::steady_clock::now();
  if (sample_count < 1000) {
    throw std::invalid_argument("mc_reference: need at least 10^3 samples");
  }
  validate_config(config, true);
  const Mesh mesh = build_mesh(config.dimension, config.cells);
  ComponentSolver solver(mesh, config.field, config.qoi);
  const int s = config.field.s;

  std::vector<double> x(sample_count);
  std::vector<double> z(s);
  KahanSum sum_x, sum_x2;
  for (int64_t i = 0; i < sample_count; ++i) {
    const uint64_t stream = kMcStream | static_cast<uint64_t>(i);
    for (int j = 0; j < s; ++j) {
      z[j] = counter_normal(config.seed, stream, s + 1 + j);
    }
    const QoiComponents comps = solver.components(z);
    double xi = comps.phibar;
    for (int j = 0; j <= s; ++j) {
      xi += counter_normal(config.seed, stream, j) * comps.phi[j];
    }
    x[i] = xi;
    sum_x.add(xi);
    sum_x2.add(xi * xi);
  }
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(sample_count);
  const double mean = sum_x.value() / n;
  const double sigma_hat =
      std::sqrt(std::max(0.0, sum_x2.value() / n - mean * mean));
  const double delta = 0.5 * sigma_hat * std::pow(n, -0.2);

  auto ecdf = [&](double t) {
    return static_cast<double>(std::upper_bound(x.begin(), x.end(), t) -
                               x.begin()) / n;
  };

  DensityCurve curve;
  curve.t = config.t_grid;
  const int nt = static_cast<int>(config.t_grid.size());
  curve.F.resize(nt);
  curve.F_stderr.resize(nt);
  curve.f.resize(nt);
  curve.f_stderr.resize(nt);
  for (int i = 0; i < nt; ++i) {
    const double t = config.t_grid[i];
    const double F = ecdf(t);
    curve.F[i] = F;
    curve.F_stderr[i] = std::sqrt(F * (1.0 - F) / n);
    const double p = ecdf(t + delta) - ecdf(t - delta);
    curve.f[i] = p / (2.0 * delta);
    curve.f_stderr[i] = std::sqrt(p * (1.0 - p) / n) / (2.0 * delta);
  }
  curve.meta = {mesh.meshwidth, static_cast<uint64_t>(sample_count), 1,
                config.seed,
                std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                              t_start)
                    .count()};
  return curve;
}

StudyResult convergence_study(const EstimationConfig& config,
                              const StudySpec& study) {
  if (study.levels.size() < 3) {
    throw std::invalid_argument("convergence_study: need at least 3 levels");
  }
  EstimationConfig base = config;
  StudyResult result;

  if (study.axis == StudyAxis::MeshWidth) {
    const int64_t finest =
        *std::max_element(study.levels.begin(), study.levels.end());
    if (study.reference < 4 * finest) {
      throw std::invalid_argument(
          "convergence_study: mesh reference must be at least 4x the finest "
          "level");
    }
    base.cells = static_cast<int>(study.reference);
    if (base.t_grid.empty()) base.t_grid = resolve_t_grid(base, 33);
    if (base.generating_vector.empty()) {
      base.generating_vector = rule_for(base).generating_vector;
    }
    const DensityCurve ref = estimate_density(base);
    const int nt = static_cast<int>(base.t_grid.size());
    for (int64_t level : study.levels) {
      EstimationConfig cfg = base;
      cfg.cells = static_cast<int>(level);
      const DensityCurve cur = estimate_density(cfg);
      StudyRow row_c{level, cur.meta.h, 0.0, 0.0, 0.0};
      StudyRow row_p = row_c;
      for (int i = 0; i < nt; ++i) {
        StudyDetailRow d{level, base.t_grid[i], 0.0, 0.0};
        const double ec = std::abs(cur.F[i] - ref.F[i]);
        d.error_cdf = ec;
        if (ec >= row_c.error) {
          row_c.error = ec;
          row_c.err_stderr = std::hypot(cur.F_stderr[i], ref.F_stderr[i]);
        }
        const double ep = std::abs(cur.f[i] - ref.f[i]);
        d.error_pdf = ep;
        if (ep >= row_p.error) {
          row_p.error = ep;
          row_p.err_stderr = std::hypot(cur.f_stderr[i], ref.f_stderr[i]);
        }
        result.detail.push_back(d);
      }
      result.cdf.push_back(row_c);
      result.pdf.push_back(row_p);
    }
  } else {
    if (base.t_grid.empty()) base.t_grid = resolve_t_grid(base, 33);
    const int nt = static_cast<int>(base.t_grid.size());
    const bool oracle_ref =
        study.reference == 0 && base.field.coefficient_is_deterministic();
    if (study.kind == EstimatorKind::PlainMc && !oracle_ref) {
      throw std::invalid_argument(
          "convergence_study: the plain-MC control needs a deterministic "
          "coefficient so the gaussian oracle is exact");
    }
    DensityCurve ref;
    if (oracle_ref) {
      const Mesh mesh = build_mesh(base.dimension, base.cells);
      const std::vector<double> z0(base.field.s, 0.0);
      ref = gaussian_oracle(qoi_components(mesh, base.field, base.qoi, z0),
                            base.t_grid);
    } else {
      EstimationConfig cfg = base;
      cfg.n = study.reference > 0
                  ? static_cast<uint64_t>(study.reference)
                  : static_cast<uint64_t>(*std::max_element(
                        study.levels.begin(), study.levels.end()));
      cfg.generating_vector.clear();
      ref = estimate_density(cfg);
    }
    const double repl = static_cast<double>(base.shifts);
    for (int64_t level : study.levels) {
      StudyRow row_c{level, static_cast<double>(level), 0.0, 0.0, 0.0};
      StudyRow row_p = row_c;
      if (study.kind == EstimatorKind::Qmc) {
        EstimationConfig cfg = base;
        cfg.n = static_cast<uint64_t>(level);
        cfg.generating_vector.clear();
        const DensityCurve cur = estimate_density(cfg);
        for (int i = 0; i < nt; ++i) {
          // E_shift[(Q_r - ref)^2] from the mean and the shift spread
          const double bc = cur.F[i] - ref.F[i];
          const double rc = std::sqrt(bc * bc +
                                      (repl - 1.0) * cur.F_stderr[i] *
                                          cur.F_stderr[i]);
          const double bp = cur.f[i] - ref.f[i];
          const double rp = std::sqrt(bp * bp +
                                      (repl - 1.0) * cur.f_stderr[i] *
                                          cur.f_stderr[i]);
          result.detail.push_back({level, base.t_grid[i], rc, rp});
          row_c.error = std::max(row_c.error, rc);
          row_p.error = std::max(row_p.error, rp);
        }
        row_c.err_stderr = row_c.error / std::sqrt(2.0 * (repl - 1.0));
        row_p.err_stderr = row_p.error / std::sqrt(2.0 * (repl - 1.0));
        result.pdf.push_back(row_p);
      } else {
        // plain-MC control: `shifts` independent replicates of size N
        std::vector<std::vector<double>> reps;
        for (int r = 0; r < base.shifts; ++r) {
          EstimationConfig cfg = base;
          cfg.seed = splitmix64(base.seed + 0x9E3779B97F4A7C15ULL *
                                                (static_cast<uint64_t>(r) + 1));
          reps.push_back(mc_reference(cfg, level).F);
        }
        for (int i = 0; i < nt; ++i) {
          double ms = 0.0;
          for (const auto& rep : reps) {
            const double d = rep[i] - ref.F[i];
            ms += d * d;
          }
          const double rc = std::sqrt(ms / repl);
          result.detail.push_back({level, base.t_grid[i], rc, 0.0});
          row_c.error = std::max(row_c.error, rc);
        }
        row_c.err_stderr = row_c.error / std::sqrt(2.0 * (repl - 1.0));
      }
      result.cdf.push_back(row_c);
    }
  }

  fill_running_slopes(result.cdf);
  result.cdf_slope = result.cdf.back().slope_running;
  if (!result.pdf.empty()) {
    fill_running_slopes(result.pdf);
    result.pdf_slope = result.pdf.back().slope_running;
  } else {
    result.pdf_slope = std::numeric_limits<double>::quiet_NaN();
  }
  return result;
}

}  // namespace pdens
