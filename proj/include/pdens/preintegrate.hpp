#pragma once

#include <span>

#include "pdens/fem.hpp"

namespace pdens {

/// Unique root in w_0 of phibar + sum_i w_i phi_i = t at fixed (w_1..w_s):
///   xi_h(t, y) = (t - phibar - sum_{i=1}^s w_i phi_i) / phi_0.
/// Requires comps.phi[0] > 0 (MonotonicityError otherwise).
double discontinuity_point(double t, std::span<const double> w_rest,
                           const QoiComponents& comps);

/// Closed-form preintegral of the indicator over w_0: Phi(xi_h), in (0,1).
double preintegrated_cdf(double t, std::span<const double> w_rest,
                         const QoiComponents& comps);

/// Closed-form preintegral of the delta over w_0: rho(xi_h) / phi_0, >= 0.
double preintegrated_pdf(double t, std::span<const double> w_rest,
                         const QoiComponents& comps);

}  // namespace pdens
