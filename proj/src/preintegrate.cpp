#include "pdens/preintegrate.hpp"

#include <stdexcept>
#include <string>

#include "pdens/errors.hpp"
#include "pdens/normal.hpp"

namespace pdens {

double discontinuity_point(double t, std::span<const double> w_rest,
                           const QoiComponents& comps) {
  const int s = static_cast<int>(comps.phi.size()) - 1;
  if (static_cast<int>(w_rest.size()) != s) {
    throw std::invalid_argument("discontinuity_point: w_rest has length " +
                                std::to_string(w_rest.size()) + ", expected " +
                                std::to_string(s));
  }
  if (!(comps.phi[0] > 0.0)) {
    throw MonotonicityError("discontinuity_point: phi[0] <= 0", comps.z);
  }
  double shift = comps.phibar;
  for (int i = 1; i <= s; ++i) shift += w_rest[i - 1] * comps.phi[i];
  return (t - shift) / comps.phi[0];
}

double preintegrated_cdf(double t, std::span<const double> w_rest,
                         const QoiComponents& comps) {
  return normal_cdf(discontinuity_point(t, w_rest, comps));
}

double preintegrated_pdf(double t, std::span<const double> w_rest,
                         const QoiComponents& comps) {
  return normal_pdf(discontinuity_point(t, w_rest, comps)) / comps.phi[0];
}

}  // namespace pdens
