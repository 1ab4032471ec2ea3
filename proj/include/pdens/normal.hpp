#pragma once

namespace pdens {

inline constexpr double kInvSqrt2Pi = 0.3989422804014326779399460599343819;

/// Standard normal cdf, computed from erfc for full relative accuracy in the
/// lower tail.
double normal_cdf(double x);

/// Standard normal density.
double normal_pdf(double x);

/// Standard normal inverse cdf on the open interval (0,1): rational initial
/// estimate plus one Newton polish step against normal_cdf. Throws
/// std::domain_error outside (0,1).
double normal_inv_cdf(double p);

}  // namespace pdens
