#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "pdens/estimator.hpp"

namespace pdens {

inline constexpr const char* kVersion = "0.1.0";

/// Invalid or unknown configuration input; message names the offending field.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Full run configuration: the estimation core plus command-specific options.
/// Parsed from the flat sectioned text format (one `key = value` per line,
/// `[section]` headers, `#` comments); unknown sections or keys are rejected.
struct RunConfig {
  EstimationConfig est;
  double t_min = 0.0;
  double t_max = 0.0;
  bool has_t_range = false;  // false -> pilot-resolved at run time
  int grid_points = 33;
  StudySpec study;
  bool has_study = false;
  int64_t mc_samples = 100000;
  std::string genvec_in;
  std::string genvec_out;
  std::string out_prefix = "pdens_";
};

RunConfig parse_config_text(const std::string& text);
RunConfig parse_config_file(const std::string& path);

/// Applies one `section.key=value` override on top of a parsed config.
void apply_override(RunConfig& config, const std::string& assignment);

/// Fills est.t_grid (pilot-based when no explicit range), imports/constructs
/// the generating vector, and exports it when requested.
void resolve_run(RunConfig& config);

/// Emits the resolved configuration in the same text format; reparsing the
/// result reproduces the run bit for bit. Reals carry 17 significant digits.
std::string emit_config(const RunConfig& config);

std::string format_double(double v);  // %.17g

void write_curve_csv(const std::string& path, const DensityCurve& curve);
void write_study_csv(const std::string& path,
                     const std::vector<StudyRow>& rows);
void write_study_detail_csv(const std::string& path,
                            const std::vector<StudyDetailRow>& rows);
void write_meta(const std::string& path, const RunConfig& config,
                const std::string& command, double wall_time);

}  // namespace pdens
