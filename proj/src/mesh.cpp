#include "pdens/mesh.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace pdens {

namespace {

Mesh build_interval_mesh(int cells) {
  Mesh m;
  m.dimension = 1;
  const double h = 1.0 / cells;
  m.vertices.reserve(cells + 1);
  for (int i = 0; i <= cells; ++i) {
    m.vertices.push_back({i * h, 0.0});
  }
  m.element_nodes.reserve(2 * cells);
  for (int i = 0; i < cells; ++i) {
    m.element_nodes.push_back(i);
    m.element_nodes.push_back(i + 1);
  }
  m.meshwidth = h;
  return m;
}

Mesh build_square_mesh(int cells) {
  Mesh m;
  m.dimension = 2;
  const int np = cells + 1;
  const double h = 1.0 / cells;
  m.vertices.reserve(np * np);
  for (int j = 0; j < np; ++j) {
    for (int i = 0; i < np; ++i) {
      m.vertices.push_back({i * h, j * h});
    }
  }
  auto vid = [np](int i, int j) { return j * np + i; };
  m.element_nodes.reserve(6 * cells * cells);
  for (int j = 0; j < cells; ++j) {
    for (int i = 0; i < cells; ++i) {
      const int v00 = vid(i, j);
      const int v10 = vid(i + 1, j);
      const int v01 = vid(i, j + 1);
      const int v11 = vid(i + 1, j + 1);
      // diagonal v00 -> v11 in every cell
      m.element_nodes.insert(m.element_nodes.end(), {v00, v10, v11});
      m.element_nodes.insert(m.element_nodes.end(), {v00, v11, v01});
    }
  }
  m.meshwidth = std::sqrt(2.0) * h;
  return m;
}

void classify_nodes(Mesh& m) {
  const int n = static_cast<int>(m.vertices.size());
  m.interior_index.assign(n, -1);
  for (int v = 0; v < n; ++v) {
    const auto& p = m.vertices[v];
    bool boundary = p[0] == 0.0 || p[0] == 1.0;
    if (m.dimension == 2) boundary = boundary || p[1] == 0.0 || p[1] == 1.0;
    if (boundary) {
      m.boundary_nodes.push_back(v);
    } else {
      m.interior_index[v] = static_cast<int>(m.interior_nodes.size());
      m.interior_nodes.push_back(v);
    }
  }
}

}  // namespace

Mesh build_mesh(int dimension, int cells_per_side) {
  if (dimension != 1 && dimension != 2) {
    throw std::invalid_argument("build_mesh: dimension must be 1 or 2, got " +
                                std::to_string(dimension));
  }
  if (cells_per_side < 2) {
    throw std::invalid_argument(
        "build_mesh: cells_per_side must be >= 2 so the mesh has interior "
        "nodes, got " + std::to_string(cells_per_side));
  }
  Mesh m = dimension == 1 ? build_interval_mesh(cells_per_side)
                          : build_square_mesh(cells_per_side);
  classify_nodes(m);
  if (m.interior_nodes.empty()) {
    throw std::invalid_argument("build_mesh: mesh has no interior nodes");
  }
  return m;
}

ElementGeometry element_geometry(const Mesh& mesh, int e) {
  ElementGeometry g;
  if (mesh.dimension == 1) {
    const Point a = mesh.vertices[mesh.node_of(e, 0)];
    const Point b = mesh.vertices[mesh.node_of(e, 1)];
    const double len = b[0] - a[0];
    if (!(std::abs(len) > 0.0)) {
      throw std::runtime_error("element_geometry: degenerate element " +
                               std::to_string(e));
    }
    g.grad[0] = {-1.0 / len, 0.0};
    g.grad[1] = {1.0 / len, 0.0};
    g.measure = std::abs(len);
    g.centroid = {0.5 * (a[0] + b[0]), 0.0};
    return g;
  }
  const Point p0 = mesh.vertices[mesh.node_of(e, 0)];
  const Point p1 = mesh.vertices[mesh.node_of(e, 1)];
  const Point p2 = mesh.vertices[mesh.node_of(e, 2)];
  // det = twice the signed area; barycentric lambda_k is affine with
  // grad components from the adjugate of the vertex matrix.
  const double det = (p1[0] - p0[0]) * (p2[1] - p0[1]) -
                     (p2[0] - p0[0]) * (p1[1] - p0[1]);
  if (!(std::abs(det) > 1e-300)) {
    throw std::runtime_error("element_geometry: degenerate element " +
                             std::to_string(e));
  }
  g.grad[0] = {(p1[1] - p2[1]) / det, (p2[0] - p1[0]) / det};
  g.grad[1] = {(p2[1] - p0[1]) / det, (p0[0] - p2[0]) / det};
  g.grad[2] = {(p0[1] - p1[1]) / det, (p1[0] - p0[0]) / det};
  g.measure = 0.5 * std::abs(det);
  g.centroid = {(p0[0] + p1[0] + p2[0]) / 3.0, (p0[1] + p1[1] + p2[1]) / 3.0};
  return g;
}

std::vector<double> sigma_per_element(const Mesh& mesh) {
  std::vector<double> out(mesh.element_count());
  const int nloc = mesh.nodes_per_element();
  for (int e = 0; e < mesh.element_count(); ++e) {
    const ElementGeometry g = element_geometry(mesh, e);
    double worst = -1.0;
    for (int k = 0; k < nloc; ++k) {
      for (int m = k + 1; m < nloc; ++m) {
        const double dot =
            g.grad[k][0] * g.grad[m][0] + g.grad[k][1] * g.grad[m][1];
        const double nk = std::hypot(g.grad[k][0], g.grad[k][1]);
        const double nm = std::hypot(g.grad[m][0], g.grad[m][1]);
        worst = std::max(worst, dot / (nk * nm));
      }
    }
    out[e] = worst;
  }
  return out;
}

double mesh_sigma(const Mesh& mesh) {
  double worst = -1.0;
  for (double s : sigma_per_element(mesh)) worst = std::max(worst, s);
  return worst;
}

}  // namespace pdens
