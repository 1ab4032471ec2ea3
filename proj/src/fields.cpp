#include "pdens/fields.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace pdens {

namespace {

constexpr double kPi = 3.14159265358979323846;

void check_dimension(int dimension) {
  if (dimension != 1 && dimension != 2) {
    throw std::invalid_argument("ScalarField: dimension must be 1 or 2");
  }
}

double poly_eval(const std::vector<double>& c, double x) {
  double v = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) v = v * x + *it;
  return v;
}

// Grid extrema of a field over the closed domain. Polynomials are univariate
// in x1, so a 1D sweep suffices in either dimension.
void sampled_extrema(const ScalarField& f, int dimension, int n, double* lo,
                     double* hi) {
  double mn = std::numeric_limits<double>::infinity();
  double mx = -mn;
  if (f.family == FieldFamily::Polynomial || dimension == 1) {
    for (int i = 0; i <= n; ++i) {
      const double v = f.eval({double(i) / n, 0.0}, 1);
      mn = std::min(mn, v);
      mx = std::max(mx, v);
    }
  } else {
    const int m = 64;
    for (int j = 0; j <= m; ++j) {
      for (int i = 0; i <= m; ++i) {
        const double v = f.eval({double(i) / m, double(j) / m}, 2);
        mn = std::min(mn, v);
        mx = std::max(mx, v);
      }
    }
  }
  *lo = mn;
  *hi = mx;
}

}  // namespace

ScalarField ScalarField::constant(double c) {
  if (!std::isfinite(c)) throw std::invalid_argument("constant: non-finite value");
  return {FieldFamily::Constant, {c}};
}

ScalarField ScalarField::polynomial(std::vector<double> coeffs) {
  if (coeffs.empty() || coeffs.size() > 5) {
    throw std::invalid_argument("polynomial: need 1..5 coefficients (degree <= 4)");
  }
  for (double c : coeffs) {
    if (!std::isfinite(c)) throw std::invalid_argument("polynomial: non-finite coefficient");
  }
  return {FieldFamily::Polynomial, std::move(coeffs)};
}

ScalarField ScalarField::sine_mode(double amplitude, int frequency, double decay) {
  if (!std::isfinite(amplitude)) throw std::invalid_argument("sine_mode: non-finite amplitude");
  if (frequency < 1) throw std::invalid_argument("sine_mode: frequency must be >= 1");
  if (!std::isfinite(decay)) throw std::invalid_argument("sine_mode: non-finite decay");
  return {FieldFamily::SineMode, {amplitude, double(frequency), decay}};
}

double ScalarField::eval(const Point& x, int dimension) const {
  switch (family) {
    case FieldFamily::Constant:
      return params[0];
    case FieldFamily::Polynomial:
      return poly_eval(params, x[0]);
    case FieldFamily::SineMode: {
      const double j = params[1];
      double v = params[0] * std::pow(j, -params[2]) * std::sin(j * kPi * x[0]);
      if (dimension == 2) v *= std::sin(j * kPi * x[1]);
      return v;
    }
  }
  return 0.0;
}

double ScalarField::sup_norm(int dimension) const {
  check_dimension(dimension);
  switch (family) {
    case FieldFamily::Constant:
      return std::abs(params[0]);
    case FieldFamily::SineMode:
      // |sin(j pi x)| attains 1 at x = 1/(2j) in (0,1), in each axis.
      return std::abs(params[0]) * std::pow(params[1], -params[2]);
    case FieldFamily::Polynomial: {
      double lo, hi;
      sampled_extrema(*this, dimension, 4096, &lo, &hi);
      return 1.01 * std::max(std::abs(lo), std::abs(hi));
    }
  }
  return 0.0;
}

double ScalarField::inf_value(int dimension) const {
  check_dimension(dimension);
  switch (family) {
    case FieldFamily::Constant:
      return params[0];
    case FieldFamily::SineMode: {
      const double scale = params[0] * std::pow(params[1], -params[2]);
      const int j = static_cast<int>(params[1]);
      // j = 1: sin(pi x) in [0,1] per axis, so the product ranges over
      // [0, 1] and the signed range is scale * [0, 1] (or [scale, 0] for
      // negative scale). j >= 2: the mode changes sign, range [-1, 1].
      if (j == 1) return std::min(scale, 0.0);
      return -std::abs(scale);
    }
    case FieldFamily::Polynomial: {
      double lo, hi;
      sampled_extrema(*this, dimension, 4096, &lo, &hi);
      return lo;
    }
  }
  return 0.0;
}

bool ScalarField::is_zero() const {
  switch (family) {
    case FieldFamily::Constant:
      return params[0] == 0.0;
    case FieldFamily::SineMode:
      return params[0] == 0.0;
    case FieldFamily::Polynomial:
      for (double c : params)
        if (c != 0.0) return false;
      return true;
  }
  return false;
}

bool FieldSpec::coefficient_is_deterministic() const {
  for (const auto& m : a_modes)
    if (!m.is_zero()) return false;
  return true;
}

void validate_field_spec(const FieldSpec& spec, int dimension) {
  check_dimension(dimension);
  if (spec.s < 1) throw std::invalid_argument("FieldSpec: s must be >= 1");
  if (static_cast<int>(spec.a_modes.size()) != spec.s) {
    throw std::invalid_argument("FieldSpec: expected s = " +
                                std::to_string(spec.s) + " coefficient modes, got " +
                                std::to_string(spec.a_modes.size()));
  }
  if (static_cast<int>(spec.ell_modes.size()) != spec.s + 1) {
    throw std::invalid_argument("FieldSpec: expected s + 1 = " +
                                std::to_string(spec.s + 1) + " source modes, got " +
                                std::to_string(spec.ell_modes.size()));
  }
  for (const auto& m : spec.a_modes) {
    if (!std::isfinite(m.sup_norm(dimension))) {
      throw std::invalid_argument("FieldSpec: coefficient mode with non-finite sup norm");
    }
  }
  // Strict positivity of ell_0: a ~10^3-point grid sample combined with the
  // family-specific analytic minimum where one exists.
  const ScalarField& ell0 = spec.ell_modes[0];
  double lo, hi;
  sampled_extrema(ell0, dimension, 1024, &lo, &hi);
  const double inf0 = std::min(lo, ell0.inf_value(dimension));
  if (!(inf0 > 0.0)) {
    throw std::invalid_argument(
        "FieldSpec: ell_0 must be strictly positive on the domain (inf = " +
        std::to_string(inf0) + ")");
  }
}

double eval_coefficient(const FieldSpec& spec, std::span<const double> z,
                        const Point& x, int dimension) {
  if (static_cast<int>(z.size()) != spec.s) {
    throw std::invalid_argument("eval_coefficient: z has length " +
                                std::to_string(z.size()) + ", spec has s = " +
                                std::to_string(spec.s));
  }
  double logval = spec.a0.eval(x, dimension);
  for (int j = 0; j < spec.s; ++j) {
    logval += z[j] * spec.a_modes[j].eval(x, dimension);
  }
  return std::exp(logval);
}

double eval_source(const FieldSpec& spec, std::span<const double> w,
                   const Point& x, int dimension) {
  if (static_cast<int>(w.size()) != spec.s + 1) {
    throw std::invalid_argument("eval_source: w has length " +
                                std::to_string(w.size()) + ", spec needs s + 1 = " +
                                std::to_string(spec.s + 1));
  }
  double v = spec.ell_bar.eval(x, dimension);
  for (int i = 0; i <= spec.s; ++i) {
    v += w[i] * spec.ell_modes[i].eval(x, dimension);
  }
  return v;
}

ParameterPoint make_parameter_point(const FieldSpec& spec, std::vector<double> w,
                                    std::vector<double> z) {
  if (static_cast<int>(w.size()) != spec.s + 1 ||
      static_cast<int>(z.size()) != spec.s) {
    throw std::invalid_argument(
        "ParameterPoint: need s + 1 = " + std::to_string(spec.s + 1) +
        " w entries and s = " + std::to_string(spec.s) + " z entries");
  }
  for (double v : w) {
    if (!std::isfinite(v)) throw std::invalid_argument("ParameterPoint: non-finite w");
  }
  for (double v : z) {
    if (!std::isfinite(v)) throw std::invalid_argument("ParameterPoint: non-finite z");
  }
  return {std::move(w), std::move(z)};
}

double eval_coefficient(const FieldSpec& spec, const ParameterPoint& y,
                        const Point& x, int dimension) {
  return eval_coefficient(spec, std::span<const double>(y.z), x, dimension);
}

double eval_source(const FieldSpec& spec, const ParameterPoint& y,
                   const Point& x, int dimension) {
  return eval_source(spec, std::span<const double>(y.w), x, dimension);
}

CoefficientExtremes coefficient_extremes(const FieldSpec& spec,
                                         std::span<const double> z,
                                         int dimension) {
  if (static_cast<int>(z.size()) != spec.s) {
    throw std::invalid_argument("coefficient_extremes: dimension mismatch");
  }
  double spread = 0.0;
  for (int j = 0; j < spec.s; ++j) {
    spread += std::abs(z[j]) * spec.a_modes[j].sup_norm(dimension);
  }
  return {std::exp(spec.a0.inf_value(dimension) - spread),
          std::exp(spec.a0.sup_norm(dimension) + spread)};
}

FieldSpec default_field_spec(int s) {
  FieldSpec spec;
  spec.s = s;
  spec.a0 = ScalarField::constant(0.0);
  for (int j = 1; j <= s; ++j) {
    spec.a_modes.push_back(ScalarField::sine_mode(0.1, j, 2.0));
  }
  spec.ell_bar = ScalarField::constant(1.0);
  spec.ell_modes.push_back(ScalarField::constant(1.0));
  for (int i = 1; i <= s; ++i) {
    spec.ell_modes.push_back(ScalarField::sine_mode(0.2, i, 2.0));
  }
  return spec;
}

FieldSpec constant_field_spec(int s) {
  FieldSpec spec = default_field_spec(s);
  for (auto& m : spec.a_modes) m = ScalarField::constant(0.0);
  return spec;
}

}  // namespace pdens
