#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace pdens {

/// Rank-1 lattice rule: point k of shift Delta is frac(k z_gen / N + Delta).
struct LatticeRule {
  uint64_t n = 0;
  int dim = 0;
  std::vector<uint32_t> generating_vector;  // components in {1..N-1}, coprime to N
  std::vector<double> weights;              // product weights, used by CBC
};

/// R independent uniform shifts in [0,1)^dim, reproducible from the seed via
/// a counter-based generator keyed by (seed, shift index, coordinate).
struct ShiftSet {
  int count = 0;
  uint64_t seed = 0;
  int dim = 0;
  std::vector<double> shifts;  // row-major, count x dim

  std::span<const double> shift(int r) const {
    return {shifts.data() + static_cast<size_t>(r) * dim,
            static_cast<size_t>(dim)};
  }
};

struct RandomizedEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::vector<double> per_shift;
};

bool is_prime(uint64_t n);

/// Default product weights gamma_j = 1/j^2.
std::vector<double> default_weights(int dim);

/// Validates component range and coprimality with N.
LatticeRule make_lattice_rule(uint64_t n, std::vector<uint32_t> generating_vector,
                              std::vector<double> weights);

/// Shift-averaged squared worst-case error of a lattice rule for product
/// weights, with the B2(x) = x^2 - x + 1/6 kernel per coordinate:
///   e^2 = -1 + (1/N) sum_k prod_j [1 + gamma_j B2({k z_j / N})].
double shift_avg_sq_error(std::span<const uint32_t> genvec, uint64_t n,
                          std::span<const double> weights);

/// Component-by-component construction minimizing shift_avg_sq_error greedily
/// per coordinate over {1..N-1} (ties -> smallest candidate). Requires N
/// prime; naive O(dim N^2).
std::vector<uint32_t> cbc_vector(int dim, uint64_t n,
                                 std::span<const double> weights);

/// Point k under the given shift, clamped away from exact zeros so the
/// Gaussian map stays finite.
void lattice_point(const LatticeRule& rule, uint64_t k,
                   std::span<const double> shift, std::span<double> out);

/// Componentwise inverse normal cdf; throws std::domain_error off (0,1).
void gaussian_map(std::span<const double> point, std::span<double> out);

ShiftSet make_shifts(int count, uint64_t seed, int dim);

/// Per-shift lattice averages of the integrand (evaluated at Gaussian-mapped
/// points), their mean, and the standard error over shifts. Non-finite
/// integrand values raise NumericError naming the offending point.
RandomizedEstimate randomized_estimate(
    const std::function<double(std::span<const double>)>& integrand,
    const LatticeRule& rule, const ShiftSet& shifts);

/// Plain-text export: first line "N dim", second line the components.
void write_generating_vector(const std::string& path, const LatticeRule& rule);
LatticeRule read_generating_vector(const std::string& path,
                                   std::vector<double> weights);

}  // namespace pdens
