#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace vem {

/// Fixed geometric tolerance, in domain units, for coincidence and
/// collinearity decisions. The domain is always the unit square/cube.
inline constexpr double kGeomTol = 1e-12;

/// Partition of the unit square (dim=2) or unit cube (dim=3) into simple
/// polytopal cells. 2D cells are counter-clockwise vertex loops; 3D cells
/// are lists of faces, each an outward-oriented vertex loop. Immutable
/// after construction.
struct PolytopalMesh {
  int dim = 2;
  Eigen::MatrixXd vertices;                                // nv x dim
  std::vector<std::vector<int>> cells;                     // per cell: vertex ids (2D: CCW loop)
  std::vector<std::vector<std::vector<int>>> cell_faces;   // 3D only: per cell, face loops
  std::vector<bool> boundary_vertex;

  // geometry caches, filled by finalize_mesh()
  Eigen::VectorXd cell_diameter;   // h_K
  Eigen::VectorXd cell_measure;    // |K|
  Eigen::MatrixXd cell_centroid;   // nc x dim

  int num_vertices() const { return static_cast<int>(vertices.rows()); }
  int num_cells() const { return static_cast<int>(cells.size()); }
};

/// Conforming triangulation (dim=2) or tetrahedralization (dim=3) of a
/// PolytopalMesh using only the parent's vertices (no Steiner points), so
/// vertex indices coincide with the parent's.
struct SimplicialMesh {
  int dim = 2;
  Eigen::MatrixXd vertices;        // identical to the parent's array
  Eigen::MatrixXi simplices;       // ns x (dim+1), positive orientation
  std::vector<int> parent_cell;    // simplex -> parent polytopal cell
  std::vector<bool> boundary_vertex;  // copied from the parent

  int num_vertices() const { return static_cast<int>(vertices.rows()); }
  int num_simplices() const { return static_cast<int>(simplices.rows()); }
};

struct MeshQualityReport {
  double h_max = 0;
  double h_min = 0;
  double max_aspect_ratio = 0;   // max over cells of h_K / inradius estimate
  double measure_ratio = 0;      // max |K| / min |K|
};

/// Lloyd-relaxed clipped Voronoi mesh of the unit square with exactly
/// n_cells convex cells. Deterministic for fixed (n_cells, lloyd_iters,
/// seed). Coincident seeds are perturbed and retried a few times before
/// failing.
PolytopalMesh generate_voronoi_mesh(int n_cells, int lloyd_iters, std::uint64_t seed);

/// Same construction from caller-supplied seed points (n x 2, inside the
/// unit square).
PolytopalMesh voronoi_mesh_from_seeds(Eigen::MatrixXd seeds, int lloyd_iters);

/// n^3 congruent axis-aligned cubes of the unit cube, h = 1/n per axis.
PolytopalMesh generate_structured_hex_mesh(int n_per_axis);

/// Per-cell triangulation sharing the parent's vertex set. 2D polygons are
/// Delaunay-triangulated among their own vertices (ties broken by lowest
/// vertex index, ear-clipping fallback for non-convex cells); 3D cube cells
/// are split into six tetrahedra by the Kuhn split along the main diagonal.
SimplicialMesh triangulate(const PolytopalMesh& mesh);

MeshQualityReport mesh_quality(const PolytopalMesh& mesh);

/// Recomputes geometry caches and boundary flags, and validates cell
/// closure/orientation. Generators and the reader call this; call it again
/// after assembling a PolytopalMesh by hand.
void finalize_mesh(PolytopalMesh& mesh);

/// Reinterprets a 2D triangulation as a polytopal mesh of triangle cells
/// (each simplex becomes one cell).
PolytopalMesh as_polytopal(const SimplicialMesh& tri);

}  // namespace vem
