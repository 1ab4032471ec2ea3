#pragma once

#include <span>
#include <vector>

#include "pdens/mesh.hpp"

namespace pdens {

enum class FieldFamily { Constant, Polynomial, SineMode };

/// Deterministic scalar field on the closed unit interval/square, restricted
/// to serializable parametric families:
///   constant c
///   polynomial c0 + c1*x1 + ... (degree <= 4; univariate in x1, constant
///     along x2 in 2D)
///   sine_mode amp * j^(-decay) * sin(j pi x1) (* sin(j pi x2) in 2D)
struct ScalarField {
  FieldFamily family = FieldFamily::Constant;
  std::vector<double> params;  // constant: {c}; polynomial: {c0..c4};
                               // sine_mode: {amplitude, j, decay}

  static ScalarField constant(double c);
  static ScalarField polynomial(std::vector<double> coeffs);
  static ScalarField sine_mode(double amplitude, int frequency, double decay);

  double eval(const Point& x, int dimension) const;
  /// Supremum of |field| over the closed domain. Analytic for constant and
  /// sine modes; sampled with a +1% margin for polynomials.
  double sup_norm(int dimension) const;
  /// Infimum of the field over the closed domain (signed). Analytic where
  /// available, otherwise a fine-grid sample.
  double inf_value(int dimension) const;
  bool is_zero() const;
};

/// The deterministic data of the random inputs: mean log-field a0, the s
/// log-field modes a_j, the mean source and the s+1 source modes ell_0..ell_s.
struct FieldSpec {
  int s = 0;
  ScalarField a0;
  std::vector<ScalarField> a_modes;    // size s
  ScalarField ell_bar;
  std::vector<ScalarField> ell_modes;  // size s+1

  bool coefficient_is_deterministic() const;  // all a_modes vanish
};

/// Combined parameter (w, z) with w in R^{s+1}, z in R^s.
struct ParameterPoint {
  std::vector<double> w;
  std::vector<double> z;
};

/// Validates entry counts against the field data and finiteness throughout.
ParameterPoint make_parameter_point(const FieldSpec& spec, std::vector<double> w,
                                    std::vector<double> z);

struct CoefficientExtremes {
  double amin = 0.0;
  double amax = 0.0;
};

/// Checks mode counts, polynomial degree, finiteness, and strict positivity
/// of ell_0 on the given domain dimension. Throws std::invalid_argument.
void validate_field_spec(const FieldSpec& spec, int dimension);

/// a(x,z) = exp(a0(x) + sum_j z_j a_j(x)), strictly positive.
double eval_coefficient(const FieldSpec& spec, std::span<const double> z,
                        const Point& x, int dimension);

/// ell(x,w) = ell_bar(x) + sum_{i=0}^s w_i ell_i(x).
double eval_source(const FieldSpec& spec, std::span<const double> w,
                   const Point& x, int dimension);

double eval_coefficient(const FieldSpec& spec, const ParameterPoint& y,
                        const Point& x, int dimension);
double eval_source(const FieldSpec& spec, const ParameterPoint& y,
                   const Point& x, int dimension);

/// Rigorous envelope exp(inf a0 -+ sum |z_j| ||a_j||_inf) containing a(.,z).
CoefficientExtremes coefficient_extremes(const FieldSpec& spec,
                                         std::span<const double> z,
                                         int dimension);

/// Lognormal demo spec: a_j = 0.1 j^-2 sine mode, ell_bar = ell_0 = 1,
/// ell_i = 0.2 i^-2 sine mode.
FieldSpec default_field_spec(int s);

/// Same source data with a deterministic unit coefficient (all a_modes zero),
/// so the quantity of interest is exactly Gaussian.
FieldSpec constant_field_spec(int s);

}  // namespace pdens
