#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <span>
#include <vector>

#include "pdens/fields.hpp"
#include "pdens/mesh.hpp"

namespace pdens {

/// Stiffness system over the interior nodes, plus the interior x boundary
/// coupling block and the row sums over all node columns (needed for the
/// nonnegative-type row-sum condition).
struct SparseSystem {
  int dim = 0;                              // interior-node count M_h
  Eigen::SparseMatrix<double> interior;     // M_h x M_h, symmetric
  Eigen::SparseMatrix<double> boundary;     // M_h x boundary-node count
  std::vector<double> full_row_sums;        // per interior row, all columns
};

struct NonnegativeTypeReport {
  bool diag_ok = false;     // A_kk > 0
  bool offdiag_ok = false;  // A_km <= tol for m != k, incl. boundary columns
  bool rowsum_ok = false;   // sum_m A_km >= -tol over all columns
  double worst_violation = 0.0;
  bool ok() const { return diag_ok && offdiag_ok && rowsum_ok; }
};

/// Positive linear functional applied to the FE solution.
struct Qoi {
  enum class Kind { MeanValue, PointValue, WeightedMean };
  Kind kind = Kind::MeanValue;
  Point location{};    // PointValue: must be an interior mesh vertex
  ScalarField weight;  // WeightedMean: g >= 0, not identically zero

  static Qoi mean_value();
  static Qoi point_value(Point x);
  static Qoi weighted_mean(ScalarField g);
};

/// The values phibar_h(z) and phi_{i,h}(z), i = 0..s, from s+2 solves at a
/// fixed z. phi[0] > 0 is enforced by the factory qoi_components().
struct QoiComponents {
  double phibar = 0.0;
  std::vector<double> phi;  // size s+1
  std::vector<double> z;
};

/// A_km(z) = int_D a(x,z) grad phi_k . grad phi_m, with midpoint (barycenter)
/// quadrature of the coefficient per element. Populates the boundary block
/// and full_row_sums.
SparseSystem assemble_stiffness(const Mesh& mesh, const FieldSpec& spec,
                                std::span<const double> z);

/// L_k = int_D field . phi_k with 2-point Gauss (1D) / 3-point edge-midpoint
/// (2D) quadrature, exact for piecewise-linear integrands.
Eigen::VectorXd assemble_load(const Mesh& mesh, const ScalarField& field);

NonnegativeTypeReport verify_nonnegative_type(const SparseSystem& system,
                                              double tol = 1e-12);

/// Direct sparse Cholesky-type solve; the residual contract
/// ||A u - rhs|| <= 1e-10 ||rhs|| is checked and NumericError thrown on
/// failure (singular or indefinite input included).
Eigen::VectorXd solve_system(const SparseSystem& system,
                             const Eigen::VectorXd& rhs);

/// Evaluates the functional from interior nodal coefficients (boundary
/// coefficients are zero). Exact for MeanValue; element quadrature for
/// WeightedMean; nodal read for PointValue.
double apply_qoi(const Qoi& qoi, const Mesh& mesh,
                 const Eigen::VectorXd& coeffs);

/// One stiffness assembly and factorization at z, s+2 solves with
/// right-hand sides ell_bar, ell_0..ell_s, mapped through the functional.
/// Throws MonotonicityError if phi[0] <= 0.
QoiComponents qoi_components(const Mesh& mesh, const FieldSpec& spec,
                             const Qoi& qoi, std::span<const double> z);

/// Reusable engine behind qoi_components: precomputes element geometry, mode
/// values at quadrature points, load vectors and the symbolic factorization,
/// so each z costs one numeric factorization plus s+2 back-solves.
/// Not thread-safe; use one instance per worker.
class ComponentSolver {
 public:
  ComponentSolver(const Mesh& mesh, const FieldSpec& spec, const Qoi& qoi);

  QoiComponents components(std::span<const double> z);
  int parameter_count() const { return s_; }

 private:
  int s_;
  int n_interior_;
  std::vector<double> a0_mid_;           // a0 at element barycenters
  std::vector<double> mode_mid_;         // [j * elems + e]
  std::vector<double> pair_coeff_;       // grad_k . grad_m * measure per element
  std::vector<int> pair_slot_;           // destination in the CSC value array
  std::vector<int> pair_elem_;           // owning element of each pair
  Eigen::SparseMatrix<double> matrix_;   // interior block, values rewritten per z
  Eigen::MatrixXd loads_;                // M_h x (s+2), z-independent
  Eigen::VectorXd qoi_weights_;          // functional as a vector over interior nodes
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
  std::vector<double> load_norms_;
};

}  // namespace pdens
