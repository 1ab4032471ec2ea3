#pragma once

#include <array>
#include <vector>

namespace pdens {

// Point in the closed unit interval/square; x[1] is 0 in 1D.
using Point = std::array<double, 2>;

/// Structured simplicial mesh of (0,1)^d, d = 1 or 2.
///
/// 1D: uniform segments. 2D: each grid cell of the uniform square grid is
/// split along the lower-left to upper-right diagonal, giving right triangles
/// with a fixed orientation. Immutable after construction.
struct Mesh {
  int dimension = 0;                     // 1 or 2
  std::vector<Point> vertices;
  std::vector<int> element_nodes;        // (dimension+1) vertex indices per element
  std::vector<int> interior_nodes;
  std::vector<int> boundary_nodes;
  std::vector<int> interior_index;       // vertex -> interior slot, -1 for boundary
  double meshwidth = 0.0;                // max element diameter

  int nodes_per_element() const { return dimension + 1; }
  int element_count() const {
    return static_cast<int>(element_nodes.size()) / nodes_per_element();
  }
  int node_of(int element, int local) const {
    return element_nodes[element * nodes_per_element() + local];
  }
};

/// Affine geometry of one element: barycentric-coordinate gradients,
/// measure (length/area) and centroid.
struct ElementGeometry {
  std::array<std::array<double, 2>, 3> grad{};  // grad[k] of local basis k
  double measure = 0.0;
  Point centroid{};
};

/// Builds the structured mesh with `cells_per_side` subdivisions per axis.
/// Requires dimension in {1,2} and cells_per_side >= 2 (at least one
/// interior node).
Mesh build_mesh(int dimension, int cells_per_side);

/// Gradients/measure/centroid of element `e`; throws on degenerate elements.
ElementGeometry element_geometry(const Mesh& mesh, int e);

/// Per-element maximal normalized inner product of distinct barycentric
/// gradients (the quantity controlling the nonnegative-type condition).
std::vector<double> sigma_per_element(const Mesh& mesh);

/// Mesh-level sigma(h) = max over elements of sigma(element), in [-1, 1].
double mesh_sigma(const Mesh& mesh);

}  // namespace pdens
