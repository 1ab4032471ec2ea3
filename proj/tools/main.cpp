#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pdens/config.hpp"
#include "pdens/errors.hpp"
#include "pdens/estimator.hpp"
#include "pdens/fem.hpp"
#include "pdens/mesh.hpp"
#include "pdens/rng.hpp"

namespace {

using namespace pdens;

constexpr uint64_t kValidateStream = 0x5641'4C00'0000'0000ULL;

struct CliArgs {
  std::string config_path;
  std::vector<std::string> sets;
  std::string out_prefix;
  uint64_t seed = 0;
  bool seed_given = false;
  int workers = 0;
};

RunConfig load_config(const CliArgs& args) {
  RunConfig cfg = parse_config_file(args.config_path);
  for (const std::string& s : args.sets) apply_override(cfg, s);
  if (args.seed_given) cfg.est.seed = args.seed;
  if (args.workers > 0) cfg.est.workers = args.workers;
  if (!args.out_prefix.empty()) cfg.out_prefix = args.out_prefix;
  return cfg;
}

int run_estimate(RunConfig cfg) {
  resolve_run(cfg);
  const DensityCurve curve = estimate_density(cfg.est);
  write_curve_csv(cfg.out_prefix + "curve.csv", curve);
  write_meta(cfg.out_prefix + "meta.txt", cfg, "estimate", curve.meta.wall_time);
  std::printf("wrote %scurve.csv (%zu grid points, h = %g, N = %llu, R = %d, %.2f s)\n",
              cfg.out_prefix.c_str(), curve.t.size(), curve.meta.h,
              static_cast<unsigned long long>(curve.meta.n), curve.meta.shifts,
              curve.meta.wall_time);
  return 0;
}

int run_study(RunConfig cfg, StudyAxis axis, const char* command) {
  if (!cfg.has_study) {
    throw ConfigError("study commands need a [study] section");
  }
  cfg.study.axis = axis;
  if (axis == StudyAxis::PointCount && !cfg.genvec_in.empty()) {
    throw ConfigError("genvec_in cannot be combined with a points-axis study "
                      "(N varies per level)");
  }
  // one shared t-grid across levels: pilot at the reference level on the
  // mesh axis, at the configured level on the points axis
  if (!cfg.has_t_range) {
    EstimationConfig pilot_cfg = cfg.est;
    if (axis == StudyAxis::MeshWidth) {
      pilot_cfg.cells = static_cast<int>(cfg.study.reference);
    }
    const std::vector<double> grid = resolve_t_grid(pilot_cfg, cfg.grid_points);
    cfg.t_min = grid.front();
    cfg.t_max = grid.back();
    cfg.has_t_range = true;
  }
  resolve_run(cfg);

  const auto t0 = std::chrono::steady_clock::now();
  const StudyResult result = convergence_study(cfg.est, cfg.study);
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  write_study_csv(cfg.out_prefix + "study_cdf.csv", result.cdf);
  if (!result.pdf.empty()) {
    write_study_csv(cfg.out_prefix + "study_pdf.csv", result.pdf);
  }
  write_study_detail_csv(cfg.out_prefix + "study_detail.csv", result.detail);
  write_meta(cfg.out_prefix + "meta.txt", cfg, command, wall);

  for (const StudyRow& r : result.cdf) {
    std::printf("level %6lld  x = %-12.6g  cdf error = %-12.6g  slope = %.3f\n",
                static_cast<long long>(r.level), r.x, r.error, r.slope_running);
  }
  std::printf("fitted cdf slope: %.4f\n", result.cdf_slope);
  if (!result.pdf.empty()) std::printf("fitted pdf slope: %.4f\n", result.pdf_slope);
  std::printf("wrote %sstudy_cdf.csv (%.2f s)\n", cfg.out_prefix.c_str(), wall);
  return 0;
}

int run_validate(RunConfig cfg) {
  cfg.est.mode = CurveMode::Both;
  resolve_run(cfg);
  const Mesh mesh = build_mesh(cfg.est.dimension, cfg.est.cells);
  const int s = cfg.est.field.s;
  bool all_ok = true;
  bool mono_ok = true;

  {
    bool ok = true;
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
      std::vector<double> z(s);
      for (int j = 0; j < s; ++j) {
        z[j] = counter_normal(cfg.est.seed, kValidateStream + i, j);
      }
      const SparseSystem sys = assemble_stiffness(mesh, cfg.est.field, z);
      const NonnegativeTypeReport rep = verify_nonnegative_type(sys);
      ok = ok && rep.ok();
      worst = std::max(worst, rep.worst_violation);
    }
    std::printf("%s nonnegative-type (20 random z, worst violation %.3g)\n",
                ok ? "PASS" : "FAIL", worst);
    all_ok = all_ok && ok;
  }

  {
    bool ok = true;
    double min_phi0 = std::numeric_limits<double>::infinity();
    ComponentSolver solver(mesh, cfg.est.field, cfg.est.qoi);
    for (int i = 0; i < 1000 && ok; ++i) {
      std::vector<double> z(s);
      for (int j = 0; j < s; ++j) {
        z[j] = counter_normal(cfg.est.seed, kValidateStream + 1000 + i, j);
      }
      try {
        min_phi0 = std::min(min_phi0, solver.components(z).phi[0]);
      } catch (const MonotonicityError&) {
        ok = false;
      }
    }
    std::printf("%s monotonicity (1000 random z, min phi_0 = %.6g)\n",
                ok ? "PASS" : "FAIL", ok ? min_phi0 : 0.0);
    all_ok = all_ok && ok;
    mono_ok = ok;
  }

  {
    const DensityCurve curve = estimate_density(cfg.est);
    const DensityCurve mc = mc_reference(cfg.est, cfg.mc_samples);
    bool ok = true;
    double worst = 0.0;
    for (size_t i = 0; i < curve.t.size(); ++i) {
      const double gap = std::abs(curve.F[i] - mc.F[i]);
      const double tol = 3.0 * std::hypot(curve.F_stderr[i], mc.F_stderr[i]);
      worst = std::max(worst, tol > 0.0 ? gap / tol : 0.0);
      ok = ok && gap <= tol;
    }
    std::printf("%s oracle agreement (preintegrated vs %lld-sample MC cdf, "
                "worst gap %.2f of 3-sigma budget)\n",
                ok ? "PASS" : "FAIL", static_cast<long long>(cfg.mc_samples),
                worst);
    all_ok = all_ok && ok;
  }

  if (all_ok) return 0;
  return mono_ok ? 4 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cdf/pdf estimation for elliptic PDEs with lognormal random "
               "diffusion, by preintegration and lattice QMC"};
  app.require_subcommand(1);

  CliArgs args;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", args.config_path, "run configuration file")
        ->required();
    sub->add_option("--set", args.sets, "override: section.key=value")
        ->take_all();
    sub->add_option("--out", args.out_prefix, "output path prefix");
    auto* seed_opt = sub->add_option("--seed", args.seed, "override qmc seed");
    sub->add_option("--workers", args.workers, "worker thread count");
    sub->parse_complete_callback(
        [&args, seed_opt]() { args.seed_given = seed_opt->count() > 0; });
    return sub;
  };

  CLI::App* cmd_estimate =
      add_common(app.add_subcommand("estimate", "estimate the cdf/pdf curve"));
  CLI::App* cmd_study_h = add_common(app.add_subcommand(
      "study-h", "convergence study over the mesh width"));
  CLI::App* cmd_study_n = add_common(app.add_subcommand(
      "study-n", "convergence study over the lattice size"));
  CLI::App* cmd_validate = add_common(app.add_subcommand(
      "validate", "run the invariant checks for a configuration"));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const RunConfig cfg = load_config(args);
    if (cmd_estimate->parsed()) return run_estimate(cfg);
    if (cmd_study_h->parsed()) return run_study(cfg, pdens::StudyAxis::MeshWidth, "study-h");
    if (cmd_study_n->parsed()) return run_study(cfg, pdens::StudyAxis::PointCount, "study-n");
    if (cmd_validate->parsed()) return run_validate(cfg);
    return 2;
  } catch (const pdens::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::domain_error& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const pdens::MonotonicityError& e) {
    std::fprintf(stderr, "monotonicity abort: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 4;
  }
}
