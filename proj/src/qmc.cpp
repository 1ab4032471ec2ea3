#include "pdens/qmc.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "pdens/errors.hpp"
#include "pdens/normal.hpp"
#include "pdens/rng.hpp"
#include "pdens/summation.hpp"

namespace pdens {

namespace {

constexpr double kOriginClamp = 0x1.0p-53;

std::vector<double> b2_table(uint64_t n) {
  std::vector<double> t(n);
  for (uint64_t m = 0; m < n; ++m) {
    const double x = static_cast<double>(m) / static_cast<double>(n);
    t[m] = (x - 1.0) * x + 1.0 / 6.0;
  }
  return t;
}

void check_weights(std::span<const double> weights, int dim) {
  if (static_cast<int>(weights.size()) < dim) {
    throw std::invalid_argument("lattice weights: need one per coordinate");
  }
  for (int j = 0; j < dim; ++j) {
    if (!(weights[j] > 0.0)) {
      throw std::invalid_argument("lattice weights: must be positive");
    }
  }
}

}  // namespace

bool is_prime(uint64_t n) {
  if (n < 2) return false;
  for (uint64_t d = 2; d * d <= n; ++d) {
    if (n % d == 0) return false;
  }
  return true;
}

std::vector<double> default_weights(int dim) {
  std::vector<double> w(dim);
  for (int j = 0; j < dim; ++j) w[j] = 1.0 / ((j + 1.0) * (j + 1.0));
  return w;
}

LatticeRule make_lattice_rule(uint64_t n, std::vector<uint32_t> generating_vector,
                              std::vector<double> weights) {
  if (n < 2) throw std::invalid_argument("LatticeRule: N must be >= 2");
  if (generating_vector.empty()) {
    throw std::invalid_argument("LatticeRule: empty generating vector");
  }
  for (uint32_t c : generating_vector) {
    if (c < 1 || c >= n) {
      throw std::invalid_argument("LatticeRule: components must lie in {1..N-1}");
    }
    if (std::gcd(static_cast<uint64_t>(c), n) != 1) {
      throw std::invalid_argument("LatticeRule: component " + std::to_string(c) +
                                  " is not coprime to N = " + std::to_string(n));
    }
  }
  const int dim = static_cast<int>(generating_vector.size());
  if (weights.empty()) weights = default_weights(dim);
  check_weights(weights, dim);
  return {n, dim, std::move(generating_vector), std::move(weights)};
}

double shift_avg_sq_error(std::span<const uint32_t> genvec, uint64_t n,
                          std::span<const double> weights) {
  const int dim = static_cast<int>(genvec.size());
  check_weights(weights, dim);
  const std::vector<double> b2 = b2_table(n);
  double acc = 0.0;
  for (uint64_t k = 0; k < n; ++k) {
    double prod = 1.0;
    for (int j = 0; j < dim; ++j) {
      prod *= 1.0 + weights[j] * b2[(k * genvec[j]) % n];
    }
    acc += prod;
  }
  return acc / static_cast<double>(n) - 1.0;
}

std::vector<uint32_t> cbc_vector(int dim, uint64_t n,
                                 std::span<const double> weights) {
  if (dim < 1) throw std::invalid_argument("cbc_vector: dim must be >= 1");
  if (!is_prime(n)) {
    throw std::invalid_argument("cbc_vector: N = " + std::to_string(n) +
                                " is not prime");
  }
  check_weights(weights, dim);
  const std::vector<double> b2 = b2_table(n);
  std::vector<double> prod(n, 1.0);
  std::vector<uint32_t> genvec;
  genvec.reserve(dim);
  for (int j = 0; j < dim; ++j) {
    uint32_t best = 1;
    double best_err = 0.0;
    // first coordinate: every candidate generates the same point set, fix 1
    for (uint64_t cand = 1; j > 0 && cand < n; ++cand) {
      double acc = 0.0;
      uint64_t idx = 0;
      for (uint64_t k = 0; k < n; ++k) {
        acc += prod[k] * (1.0 + weights[j] * b2[idx]);
        idx += cand;
        if (idx >= n) idx -= n;
      }
      const double err = acc / static_cast<double>(n) - 1.0;
      if (cand == 1 || err < best_err) {
        best = static_cast<uint32_t>(cand);
        best_err = err;
      }
    }
    uint64_t idx = 0;
    for (uint64_t k = 0; k < n; ++k) {
      prod[k] *= 1.0 + weights[j] * b2[idx];
      idx += best;
      if (idx >= n) idx -= n;
    }
    genvec.push_back(best);
  }
  return genvec;
}

void lattice_point(const LatticeRule& rule, uint64_t k,
                   std::span<const double> shift, std::span<double> out) {
  if (k >= rule.n) {
    throw std::invalid_argument("lattice_point: k out of range");
  }
  if (static_cast<int>(shift.size()) != rule.dim ||
      static_cast<int>(out.size()) != rule.dim) {
    throw std::invalid_argument("lattice_point: dimension mismatch");
  }
  for (int j = 0; j < rule.dim; ++j) {
    const uint64_t kz = (k * rule.generating_vector[j]) % rule.n;
    double v = static_cast<double>(kz) / static_cast<double>(rule.n) + shift[j];
    if (v >= 1.0) v -= 1.0;
    if (v == 0.0) v = kOriginClamp;
    out[j] = v;
  }
}

void gaussian_map(std::span<const double> point, std::span<double> out) {
  if (point.size() != out.size()) {
    throw std::invalid_argument("gaussian_map: dimension mismatch");
  }
  for (size_t j = 0; j < point.size(); ++j) {
    if (!(point[j] > 0.0) || !(point[j] < 1.0)) {
      throw std::domain_error("gaussian_map: coordinate " + std::to_string(j) +
                              " outside (0,1)");
    }
    out[j] = normal_inv_cdf(point[j]);
  }
}

ShiftSet make_shifts(int count, uint64_t seed, int dim) {
  if (count < 1) throw std::invalid_argument("make_shifts: count must be >= 1");
  if (dim < 1) throw std::invalid_argument("make_shifts: dim must be >= 1");
  ShiftSet s;
  s.count = count;
  s.seed = seed;
  s.dim = dim;
  s.shifts.resize(static_cast<size_t>(count) * dim);
  for (int r = 0; r < count; ++r) {
    for (int j = 0; j < dim; ++j) {
      s.shifts[static_cast<size_t>(r) * dim + j] = counter_uniform(seed, r, j);
    }
  }
  return s;
}

RandomizedEstimate randomized_estimate(
    const std::function<double(std::span<const double>)>& integrand,
    const LatticeRule& rule, const ShiftSet& shifts) {
  if (shifts.dim != rule.dim) {
    throw std::invalid_argument("randomized_estimate: shift dimension mismatch");
  }
  RandomizedEstimate est;
  est.per_shift.resize(shifts.count);
  std::vector<double> u(rule.dim), y(rule.dim);
  for (int r = 0; r < shifts.count; ++r) {
    KahanSum acc;
    for (uint64_t k = 0; k < rule.n; ++k) {
      lattice_point(rule, k, shifts.shift(r), u);
      gaussian_map(u, y);
      const double v = integrand(y);
      if (!std::isfinite(v)) {
        std::ostringstream msg;
        msg << "randomized_estimate: integrand returned " << v << " at point (";
        for (int j = 0; j < rule.dim; ++j) msg << (j ? ", " : "") << y[j];
        msg << ")";
        throw NumericError(msg.str());
      }
      acc.add(v);
    }
    est.per_shift[r] = acc.value() / static_cast<double>(rule.n);
  }
  double mean = 0.0;
  for (double q : est.per_shift) mean += q;
  mean /= shifts.count;
  est.mean = mean;
  if (shifts.count >= 2) {
    double ss = 0.0;
    for (double q : est.per_shift) ss += (q - mean) * (q - mean);
    est.std_error = std::sqrt(ss / (shifts.count - 1.0) / shifts.count);
  }
  return est;
}

void write_generating_vector(const std::string& path, const LatticeRule& rule) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << rule.n << " " << rule.dim << "\n";
  for (int j = 0; j < rule.dim; ++j) {
    out << (j ? " " : "") << rule.generating_vector[j];
  }
  out << "\n";
}

LatticeRule read_generating_vector(const std::string& path,
                                   std::vector<double> weights) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  uint64_t n = 0;
  int dim = 0;
  if (!(in >> n >> dim) || dim < 1) {
    throw std::runtime_error("malformed generating-vector file " + path);
  }
  std::vector<uint32_t> genvec(dim);
  for (int j = 0; j < dim; ++j) {
    if (!(in >> genvec[j])) {
      throw std::runtime_error("generating-vector file " + path +
                               " has fewer than " + std::to_string(dim) +
                               " components");
    }
  }
  return make_lattice_rule(n, std::move(genvec), std::move(weights));
}

}  // namespace pdens
