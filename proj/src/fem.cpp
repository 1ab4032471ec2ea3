#include "pdens/fem.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "pdens/errors.hpp"

namespace pdens {

namespace {

struct QuadPoint {
  Point x;
  double weight;
  std::array<double, 3> basis;  // local hat values at x
};

// 2-point Gauss on a segment / 3-point edge-midpoint rule on a triangle;
// both integrate field*phi exactly when field is constant and are
// second-order accurate otherwise.
int element_quadrature(const Mesh& mesh, int e, QuadPoint out[3]) {
  if (mesh.dimension == 1) {
    const Point a = mesh.vertices[mesh.node_of(e, 0)];
    const Point b = mesh.vertices[mesh.node_of(e, 1)];
    const double len = b[0] - a[0];
    const double mid = 0.5 * (a[0] + b[0]);
    const double off = 0.5 * len / std::sqrt(3.0);
    for (int q = 0; q < 2; ++q) {
      const double xq = mid + (q == 0 ? -off : off);
      const double lam = (xq - a[0]) / len;
      out[q] = {{xq, 0.0}, 0.5 * len, {1.0 - lam, lam, 0.0}};
    }
    return 2;
  }
  const ElementGeometry g = element_geometry(mesh, e);
  const Point p0 = mesh.vertices[mesh.node_of(e, 0)];
  const Point p1 = mesh.vertices[mesh.node_of(e, 1)];
  const Point p2 = mesh.vertices[mesh.node_of(e, 2)];
  const double w = g.measure / 3.0;
  out[0] = {{0.5 * (p0[0] + p1[0]), 0.5 * (p0[1] + p1[1])}, w, {0.5, 0.5, 0.0}};
  out[1] = {{0.5 * (p1[0] + p2[0]), 0.5 * (p1[1] + p2[1])}, w, {0.0, 0.5, 0.5}};
  out[2] = {{0.5 * (p2[0] + p0[0]), 0.5 * (p2[1] + p0[1])}, w, {0.5, 0.0, 0.5}};
  return 3;
}

std::vector<int> boundary_slots(const Mesh& mesh) {
  std::vector<int> slot(mesh.vertices.size(), -1);
  for (int i = 0; i < static_cast<int>(mesh.boundary_nodes.size()); ++i) {
    slot[mesh.boundary_nodes[i]] = i;
  }
  return slot;
}

Eigen::VectorXd qoi_weight_vector(const Qoi& qoi, const Mesh& mesh) {
  switch (qoi.kind) {
    case Qoi::Kind::MeanValue:
      return assemble_load(mesh, ScalarField::constant(1.0));
    case Qoi::Kind::WeightedMean: {
      if (qoi.weight.inf_value(mesh.dimension) < 0.0 ||
          !(qoi.weight.sup_norm(mesh.dimension) > 0.0)) {
        throw std::invalid_argument(
            "Qoi: weighted_mean needs g >= 0 and not identically zero");
      }
      return assemble_load(mesh, qoi.weight);
    }
    case Qoi::Kind::PointValue: {
      constexpr double tol = 1e-12;
      for (int v = 0; v < static_cast<int>(mesh.vertices.size()); ++v) {
        const Point& p = mesh.vertices[v];
        if (std::abs(p[0] - qoi.location[0]) <= tol &&
            std::abs(p[1] - qoi.location[1]) <= tol) {
          const int ii = mesh.interior_index[v];
          if (ii < 0) {
            throw std::invalid_argument(
                "Qoi: point_value location is a boundary vertex; the "
                "functional must be positive");
          }
          Eigen::VectorXd w = Eigen::VectorXd::Zero(mesh.interior_nodes.size());
          w[ii] = 1.0;
          return w;
        }
      }
      throw std::invalid_argument("Qoi: point_value location is not a mesh vertex");
    }
  }
  throw std::logic_error("Qoi: unknown kind");
}

}  // namespace

Qoi Qoi::mean_value() { return {Kind::MeanValue, {}, ScalarField::constant(1.0)}; }

Qoi Qoi::point_value(Point x) { return {Kind::PointValue, x, ScalarField::constant(1.0)}; }

Qoi Qoi::weighted_mean(ScalarField g) { return {Kind::WeightedMean, {}, std::move(g)}; }

SparseSystem assemble_stiffness(const Mesh& mesh, const FieldSpec& spec,
                                std::span<const double> z) {
  validate_field_spec(spec, mesh.dimension);
  const int n_int = static_cast<int>(mesh.interior_nodes.size());
  const int n_bnd = static_cast<int>(mesh.boundary_nodes.size());
  const std::vector<int> bslot = boundary_slots(mesh);
  const int nloc = mesh.nodes_per_element();

  std::vector<Eigen::Triplet<double>> tin, tbn;
  SparseSystem sys;
  sys.dim = n_int;
  sys.full_row_sums.assign(n_int, 0.0);

  for (int e = 0; e < mesh.element_count(); ++e) {
    const ElementGeometry g = element_geometry(mesh, e);
    const double a_mid = eval_coefficient(spec, z, g.centroid, mesh.dimension);
    for (int k = 0; k < nloc; ++k) {
      const int rk = mesh.node_of(e, k);
      const int ri = mesh.interior_index[rk];
      if (ri < 0) continue;
      for (int m = 0; m < nloc; ++m) {
        const int cm = mesh.node_of(e, m);
        const double val = a_mid * g.measure *
                           (g.grad[k][0] * g.grad[m][0] + g.grad[k][1] * g.grad[m][1]);
        sys.full_row_sums[ri] += val;
        const int ci = mesh.interior_index[cm];
        if (ci >= 0) {
          tin.emplace_back(ri, ci, val);
        } else {
          tbn.emplace_back(ri, bslot[cm], val);
        }
      }
    }
  }
  sys.interior.resize(n_int, n_int);
  sys.interior.setFromTriplets(tin.begin(), tin.end());
  sys.interior.makeCompressed();
  sys.boundary.resize(n_int, n_bnd);
  sys.boundary.setFromTriplets(tbn.begin(), tbn.end());
  sys.boundary.makeCompressed();
  return sys;
}

Eigen::VectorXd assemble_load(const Mesh& mesh, const ScalarField& field) {
  Eigen::VectorXd load = Eigen::VectorXd::Zero(mesh.interior_nodes.size());
  const int nloc = mesh.nodes_per_element();
  QuadPoint qp[3];
  for (int e = 0; e < mesh.element_count(); ++e) {
    const int nq = element_quadrature(mesh, e, qp);
    for (int q = 0; q < nq; ++q) {
      const double fv = field.eval(qp[q].x, mesh.dimension) * qp[q].weight;
      for (int k = 0; k < nloc; ++k) {
        const int ii = mesh.interior_index[mesh.node_of(e, k)];
        if (ii >= 0) load[ii] += fv * qp[q].basis[k];
      }
    }
  }
  return load;
}

NonnegativeTypeReport verify_nonnegative_type(const SparseSystem& system,
                                              double tol) {
  NonnegativeTypeReport rep;
  rep.diag_ok = rep.offdiag_ok = rep.rowsum_ok = true;
  double worst = 0.0;
  for (int c = 0; c < system.interior.outerSize(); ++c) {
    bool diag_seen = false;
    for (Eigen::SparseMatrix<double>::InnerIterator it(system.interior, c); it; ++it) {
      if (it.row() == it.col()) {
        diag_seen = true;
        if (!(it.value() > 0.0)) {
          rep.diag_ok = false;
          worst = std::max(worst, -it.value());
        }
      } else if (it.value() > tol) {
        rep.offdiag_ok = false;
        worst = std::max(worst, it.value());
      }
    }
    if (!diag_seen) rep.diag_ok = false;
  }
  for (int c = 0; c < system.boundary.outerSize(); ++c) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(system.boundary, c); it; ++it) {
      if (it.value() > tol) {
        rep.offdiag_ok = false;
        worst = std::max(worst, it.value());
      }
    }
  }
  for (double rs : system.full_row_sums) {
    if (rs < -tol) {
      rep.rowsum_ok = false;
      worst = std::max(worst, -rs);
    }
  }
  rep.worst_violation = worst;
  return rep;
}

Eigen::VectorXd solve_system(const SparseSystem& system,
                             const Eigen::VectorXd& rhs) {
  if (rhs.size() != system.dim) {
    throw std::invalid_argument("solve_system: rhs size mismatch");
  }
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(system.interior);
  if (ldlt.info() != Eigen::Success) {
    throw NumericError("solve_system: factorization failed (matrix not SPD?)");
  }
  Eigen::VectorXd x = ldlt.solve(rhs);
  const double residual = (system.interior * x - rhs).norm();
  if (!x.allFinite() || !(residual <= 1e-10 * rhs.norm() + 1e-300)) {
    std::ostringstream msg;
    msg << "solve_system: residual " << residual << " exceeds contract for ||rhs|| = "
        << rhs.norm();
    throw NumericError(msg.str());
  }
  return x;
}

double apply_qoi(const Qoi& qoi, const Mesh& mesh,
                 const Eigen::VectorXd& coeffs) {
  if (coeffs.size() != static_cast<Eigen::Index>(mesh.interior_nodes.size())) {
    throw std::invalid_argument("apply_qoi: coefficient vector size mismatch");
  }
  return qoi_weight_vector(qoi, mesh).dot(coeffs);
}

ComponentSolver::ComponentSolver(const Mesh& mesh, const FieldSpec& spec,
                                 const Qoi& qoi)
    : s_(spec.s), n_interior_(static_cast<int>(mesh.interior_nodes.size())) {
  validate_field_spec(spec, mesh.dimension);
  const int nloc = mesh.nodes_per_element();
  const int n_elem = mesh.element_count();

  a0_mid_.resize(n_elem);
  mode_mid_.resize(static_cast<size_t>(s_) * n_elem);
  std::vector<Eigen::Triplet<double>> pattern;
  struct Pair {
    int e, ri, ci;
    double coeff;
  };
  std::vector<Pair> pairs;
  for (int e = 0; e < n_elem; ++e) {
    const ElementGeometry g = element_geometry(mesh, e);
    a0_mid_[e] = spec.a0.eval(g.centroid, mesh.dimension);
    for (int j = 0; j < s_; ++j) {
      mode_mid_[static_cast<size_t>(j) * n_elem + e] =
          spec.a_modes[j].eval(g.centroid, mesh.dimension);
    }
    for (int k = 0; k < nloc; ++k) {
      const int ri = mesh.interior_index[mesh.node_of(e, k)];
      if (ri < 0) continue;
      for (int m = 0; m < nloc; ++m) {
        const int ci = mesh.interior_index[mesh.node_of(e, m)];
        if (ci < 0) continue;
        const double c = g.measure * (g.grad[k][0] * g.grad[m][0] +
                                      g.grad[k][1] * g.grad[m][1]);
        pairs.push_back({e, ri, ci, c});
        pattern.emplace_back(ri, ci, 0.0);
      }
    }
  }
  matrix_.resize(n_interior_, n_interior_);
  matrix_.setFromTriplets(pattern.begin(), pattern.end());
  matrix_.makeCompressed();

  // map each element pair onto its slot in the compressed value array
  pair_slot_.reserve(pairs.size());
  pair_coeff_.reserve(pairs.size());
  pair_elem_.reserve(pairs.size());
  const int* outer = matrix_.outerIndexPtr();
  const int* inner = matrix_.innerIndexPtr();
  for (const Pair& p : pairs) {
    const int lo = outer[p.ci];
    const int hi = outer[p.ci + 1];
    const int* pos = std::lower_bound(inner + lo, inner + hi, p.ri);
    pair_slot_.push_back(static_cast<int>(pos - inner));
    pair_coeff_.push_back(p.coeff);
    pair_elem_.push_back(p.e);
  }

  loads_.resize(n_interior_, s_ + 2);
  loads_.col(0) = assemble_load(mesh, spec.ell_bar);
  for (int i = 0; i <= s_; ++i) {
    loads_.col(1 + i) = assemble_load(mesh, spec.ell_modes[i]);
  }
  load_norms_.resize(s_ + 2);
  for (int c = 0; c < s_ + 2; ++c) load_norms_[c] = loads_.col(c).norm();
  qoi_weights_ = qoi_weight_vector(qoi, mesh);
  ldlt_.analyzePattern(matrix_);
}

QoiComponents ComponentSolver::components(std::span<const double> z) {
  if (static_cast<int>(z.size()) != s_) {
    throw std::invalid_argument("ComponentSolver: z has wrong length");
  }
  const int n_elem = static_cast<int>(a0_mid_.size());
  std::vector<double> aval(a0_mid_);
  for (int j = 0; j < s_; ++j) {
    const double zj = z[j];
    const double* mj = mode_mid_.data() + static_cast<size_t>(j) * n_elem;
    for (int e = 0; e < n_elem; ++e) aval[e] += zj * mj[e];
  }
  for (int e = 0; e < n_elem; ++e) aval[e] = std::exp(aval[e]);

  double* values = matrix_.valuePtr();
  std::fill(values, values + matrix_.nonZeros(), 0.0);
  for (size_t p = 0; p < pair_slot_.size(); ++p) {
    values[pair_slot_[p]] += aval[pair_elem_[p]] * pair_coeff_[p];
  }

  ldlt_.factorize(matrix_);
  if (ldlt_.info() != Eigen::Success) {
    throw NumericError("ComponentSolver: factorization failed");
  }
  Eigen::MatrixXd sol = ldlt_.solve(loads_);
  Eigen::MatrixXd resid = matrix_ * sol - loads_;
  for (int c = 0; c < s_ + 2; ++c) {
    if (!sol.col(c).allFinite() ||
        !(resid.col(c).norm() <= 1e-10 * load_norms_[c] + 1e-300)) {
      throw NumericError("ComponentSolver: solve residual exceeds contract");
    }
  }

  QoiComponents comps;
  comps.phibar = qoi_weights_.dot(sol.col(0));
  comps.phi.resize(s_ + 1);
  for (int i = 0; i <= s_; ++i) comps.phi[i] = qoi_weights_.dot(sol.col(1 + i));
  comps.z.assign(z.begin(), z.end());
  if (!(comps.phi[0] > 0.0)) {
    std::ostringstream msg;
    msg << "qoi_components: monotonicity violated, phi[0] = " << comps.phi[0]
        << " at z = (";
    for (size_t j = 0; j < comps.z.size(); ++j) {
      msg << (j ? ", " : "") << comps.z[j];
    }
    msg << ")";
    throw MonotonicityError(msg.str(), comps.z);
  }
  return comps;
}

QoiComponents qoi_components(const Mesh& mesh, const FieldSpec& spec,
                             const Qoi& qoi, std::span<const double> z) {
  ComponentSolver solver(mesh, spec, qoi);
  return solver.components(z);
}

}  // namespace pdens
