#include "vem/mesh.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <unordered_map>

namespace vem {

namespace {

using Eigen::Vector2d;
using Eigen::Vector3d;

// ---------------------------------------------------------------------------
// 2D polygon helpers
// ---------------------------------------------------------------------------

double polygon_area(const std::vector<Vector2d>& p) {
  double a = 0;
  const int n = static_cast<int>(p.size());
  for (int i = 0; i < n; ++i) {
    const Vector2d& u = p[i];
    const Vector2d& v = p[(i + 1) % n];
    a += u.x() * v.y() - v.x() * u.y();
  }
  return 0.5 * a;
}

Vector2d polygon_centroid(const std::vector<Vector2d>& p, double area) {
  Vector2d c = Vector2d::Zero();
  const int n = static_cast<int>(p.size());
  for (int i = 0; i < n; ++i) {
    const Vector2d& u = p[i];
    const Vector2d& v = p[(i + 1) % n];
    const double w = u.x() * v.y() - v.x() * u.y();
    c += w * (u + v);
  }
  return c / (6.0 * area);
}

// Clip a CCW polygon against the half-plane n.x <= c (Sutherland-Hodgman).
void clip_halfplane(std::vector<Vector2d>& poly, const Vector2d& n, double c,
                    std::vector<Vector2d>& scratch) {
  scratch.clear();
  const int m = static_cast<int>(poly.size());
  for (int i = 0; i < m; ++i) {
    const Vector2d& p = poly[i];
    const Vector2d& q = poly[(i + 1) % m];
    const double dp = n.dot(p) - c;
    const double dq = n.dot(q) - c;
    const bool in_p = dp <= kGeomTol;
    const bool in_q = dq <= kGeomTol;
    if (in_p) scratch.push_back(p);
    if (in_p != in_q) {
      const double t = dp / (dp - dq);
      scratch.push_back(p + t * (q - p));
    }
  }
  poly.swap(scratch);
}

void drop_duplicate_corners(std::vector<Vector2d>& poly) {
  std::vector<Vector2d> out;
  out.reserve(poly.size());
  for (const Vector2d& p : poly) {
    if (out.empty() || (p - out.back()).lpNorm<Eigen::Infinity>() > kGeomTol)
      out.push_back(p);
  }
  while (out.size() > 1 &&
         (out.front() - out.back()).lpNorm<Eigen::Infinity>() <= kGeomTol)
    out.pop_back();
  poly.swap(out);
}

std::vector<Vector2d> unit_square_polygon() {
  return {Vector2d(0, 0), Vector2d(1, 0), Vector2d(1, 1), Vector2d(0, 1)};
}

// ---------------------------------------------------------------------------
// Voronoi diagram by half-plane clipping with a uniform-grid prefilter
// ---------------------------------------------------------------------------

struct SeedGrid {
  int cells_per_axis = 1;
  double spacing = 1;
  std::vector<std::vector<int>> buckets;

  explicit SeedGrid(const Eigen::MatrixXd& seeds) {
    const int n = static_cast<int>(seeds.rows());
    cells_per_axis = std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(n)))));
    spacing = 1.0 / cells_per_axis;
    buckets.resize(static_cast<std::size_t>(cells_per_axis) * cells_per_axis);
    for (int i = 0; i < n; ++i)
      buckets[bucket_of(seeds(i, 0), seeds(i, 1))].push_back(i);
  }

  int clampi(int k) const { return std::min(std::max(k, 0), cells_per_axis - 1); }

  std::size_t bucket_of(double x, double y) const {
    const int ix = clampi(static_cast<int>(std::floor(x / spacing)));
    const int iy = clampi(static_cast<int>(std::floor(y / spacing)));
    return static_cast<std::size_t>(iy) * cells_per_axis + ix;
  }

  // Seed indices in the Chebyshev ring at distance `ring` around (ix, iy).
  void ring_members(int ix, int iy, int ring, std::vector<int>& out) const {
    out.clear();
    const int lo_x = ix - ring, hi_x = ix + ring;
    const int lo_y = iy - ring, hi_y = iy + ring;
    for (int by = lo_y; by <= hi_y; ++by) {
      if (by < 0 || by >= cells_per_axis) continue;
      for (int bx = lo_x; bx <= hi_x; ++bx) {
        if (bx < 0 || bx >= cells_per_axis) continue;
        if (ring > 0 && bx != lo_x && bx != hi_x && by != lo_y && by != hi_y) continue;
        const auto& b = buckets[static_cast<std::size_t>(by) * cells_per_axis + bx];
        out.insert(out.end(), b.begin(), b.end());
      }
    }
  }
};

double max_sq_distance(const Vector2d& s, const std::vector<Vector2d>& poly) {
  double r2 = 0;
  for (const Vector2d& p : poly) r2 = std::max(r2, (p - s).squaredNorm());
  return r2;
}

// Voronoi cell of seed i, clipped to the unit square. Only seeds within the
// security radius (bisector distance <= polygon radius) can cut the cell, so
// candidates are visited ring by ring in order of increasing distance.
std::vector<Vector2d> voronoi_cell(const Eigen::MatrixXd& seeds, int i,
                                   const SeedGrid& grid) {
  const Vector2d si = seeds.row(i).transpose();
  std::vector<Vector2d> poly = unit_square_polygon();
  std::vector<Vector2d> scratch;
  double r2 = max_sq_distance(si, poly);

  const int ix = grid.clampi(static_cast<int>(std::floor(si.x() / grid.spacing)));
  const int iy = grid.clampi(static_cast<int>(std::floor(si.y() / grid.spacing)));
  std::vector<int> members;
  std::vector<std::pair<double, int>> order;
  const int max_ring = 2 * grid.cells_per_axis;
  for (int ring = 0; ring <= max_ring; ++ring) {
    const double ring_min_dist = (ring - 1) * grid.spacing;
    if (ring > 1 && ring_min_dist * ring_min_dist > 4.0 * r2) break;
    grid.ring_members(ix, iy, ring, members);
    order.clear();
    for (int j : members) {
      if (j == i) continue;
      const Vector2d sj = seeds.row(j).transpose();
      order.emplace_back((sj - si).squaredNorm(), j);
    }
    std::sort(order.begin(), order.end());
    for (const auto& [d2, j] : order) {
      if (d2 > 4.0 * r2) break;
      const Vector2d sj = seeds.row(j).transpose();
      const Vector2d n = sj - si;
      const double c = 0.5 * n.dot(si + sj);
      clip_halfplane(poly, n, c, scratch);
      if (poly.size() < 3) return poly;
      r2 = max_sq_distance(si, poly);
    }
  }
  drop_duplicate_corners(poly);
  return poly;
}

// Deterministic uniform double in [0,1) from a raw 64-bit draw; avoids the
// implementation-defined std::uniform_real_distribution.
double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

void perturb_coincident_seeds(Eigen::MatrixXd& seeds, std::uint64_t salt) {
  const int n = static_cast<int>(seeds.rows());
  constexpr double min_sep = 1e-9;
  for (int attempt = 0; attempt < 10; ++attempt) {
    bool clean = true;
    for (int i = 0; i < n && clean; ++i)
      for (int j = i + 1; j < n; ++j) {
        if ((seeds.row(i) - seeds.row(j)).norm() >= min_sep) continue;
        std::mt19937_64 rng(salt + 0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(j) + 1) +
                            static_cast<std::uint64_t>(attempt));
        seeds(j, 0) = std::min(1.0, std::max(0.0, seeds(j, 0) + 1e-8 * (uniform01(rng) - 0.5)));
        seeds(j, 1) = std::min(1.0, std::max(0.0, seeds(j, 1) + 1e-8 * (uniform01(rng) - 0.5)));
        clean = false;
        break;
      }
    if (clean) return;
  }
  throw std::runtime_error("voronoi: seeds remain coincident after perturbation retries");
}

// ---------------------------------------------------------------------------
// Vertex merging: snap points within kGeomTol to one index via a hash grid.
// ---------------------------------------------------------------------------

class PointMerger {
 public:
  explicit PointMerger(int dim) : dim_(dim) {}

  int insert(const Eigen::Vector3d& p) {
    const Key key = key_of(p);
    Key probe;
    for (int dz = -zlo(); dz <= zhi(); ++dz)
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          probe = {key[0] + dx, key[1] + dy, key[2] + dz};
          auto it = table_.find(probe);
          if (it == table_.end()) continue;
          for (int idx : it->second) {
            bool match = true;
            for (int d = 0; d < dim_; ++d)
              if (std::abs(points_[idx][d] - p[d]) > kGeomTol) { match = false; break; }
            if (match) return idx;
          }
        }
    const int idx = static_cast<int>(points_.size());
    points_.push_back(p);
    table_[key].push_back(idx);
    return idx;
  }

  Eigen::MatrixXd matrix() const {
    Eigen::MatrixXd m(points_.size(), dim_);
    for (std::size_t i = 0; i < points_.size(); ++i)
      for (int d = 0; d < dim_; ++d) m(static_cast<Eigen::Index>(i), d) = points_[i][d];
    return m;
  }

 private:
  using Key = std::array<std::int64_t, 3>;
  struct KeyHash {
    std::size_t operator()(const Key& k) const {
      std::size_t h = 1469598103934665603ULL;
      for (std::int64_t v : k) {
        h ^= static_cast<std::size_t>(v);
        h *= 1099511628211ULL;
      }
      return h;
    }
  };

  int zlo() const { return dim_ == 3 ? 1 : 0; }
  int zhi() const { return dim_ == 3 ? 1 : 0; }

  Key key_of(const Eigen::Vector3d& p) const {
    constexpr double cell = 1e-6;
    Key k{0, 0, 0};
    for (int d = 0; d < dim_; ++d) k[d] = static_cast<std::int64_t>(std::floor(p[d] / cell));
    return k;
  }

  int dim_;
  std::vector<Eigen::Vector3d> points_;
  std::unordered_map<Key, std::vector<int>, KeyHash> table_;
};

PolytopalMesh mesh_from_polygons(const std::vector<std::vector<Vector2d>>& polys) {
  PointMerger merger(2);
  PolytopalMesh mesh;
  mesh.dim = 2;
  mesh.cells.reserve(polys.size());
  for (std::size_t c = 0; c < polys.size(); ++c) {
    std::vector<int> loop;
    loop.reserve(polys[c].size());
    for (const Vector2d& p : polys[c]) {
      const int idx = merger.insert(Eigen::Vector3d(p.x(), p.y(), 0.0));
      if (loop.empty() || loop.back() != idx) loop.push_back(idx);
    }
    while (loop.size() > 1 && loop.front() == loop.back()) loop.pop_back();
    if (loop.size() < 3)
      throw std::runtime_error("voronoi: degenerate cell " + std::to_string(c));
    mesh.cells.push_back(std::move(loop));
  }
  mesh.vertices = merger.matrix();
  finalize_mesh(mesh);
  return mesh;
}

// ---------------------------------------------------------------------------
// Geometry caches and validation
// ---------------------------------------------------------------------------

double loop_diameter(const Eigen::MatrixXd& v, const std::vector<int>& ids) {
  double d2 = 0;
  for (std::size_t a = 0; a < ids.size(); ++a)
    for (std::size_t b = a + 1; b < ids.size(); ++b)
      d2 = std::max(d2, (v.row(ids[a]) - v.row(ids[b])).squaredNorm());
  return std::sqrt(d2);
}

void finalize_2d(PolytopalMesh& mesh) {
  const int nc = mesh.num_cells();
  mesh.cell_measure.resize(nc);
  mesh.cell_diameter.resize(nc);
  mesh.cell_centroid.resize(nc, 2);

  for (int c = 0; c < nc; ++c) {
    const auto& loop = mesh.cells[c];
    if (loop.size() < 3)
      throw std::runtime_error("mesh: cell " + std::to_string(c) + " has fewer than 3 vertices");
    std::vector<Vector2d> poly;
    poly.reserve(loop.size());
    for (int vid : loop) {
      if (vid < 0 || vid >= mesh.num_vertices())
        throw std::runtime_error("mesh: cell " + std::to_string(c) + " references invalid vertex");
      poly.emplace_back(mesh.vertices(vid, 0), mesh.vertices(vid, 1));
    }
    const double area = polygon_area(poly);
    if (!(area > 0))
      throw std::runtime_error("mesh: cell " + std::to_string(c) +
                               " has non-positive area (is it counter-clockwise?)");
    mesh.cell_measure[c] = area;
    mesh.cell_centroid.row(c) = polygon_centroid(poly, area).transpose();
    mesh.cell_diameter[c] = loop_diameter(mesh.vertices, loop);
  }

  // Edge incidence: interior edges appear once per direction, boundary once.
  std::map<std::pair<int, int>, int> edge_count;
  for (const auto& loop : mesh.cells) {
    const int k = static_cast<int>(loop.size());
    for (int i = 0; i < k; ++i) {
      int a = loop[i], b = loop[(i + 1) % k];
      edge_count[{std::min(a, b), std::max(a, b)}] += 1;
    }
  }
  mesh.boundary_vertex.assign(mesh.num_vertices(), false);
  for (const auto& [e, cnt] : edge_count) {
    if (cnt > 2)
      throw std::runtime_error("mesh: edge shared by more than two cells");
    if (cnt == 1) {
      mesh.boundary_vertex[e.first] = true;
      mesh.boundary_vertex[e.second] = true;
    }
  }
}

Vector3d face_area_vector(const Eigen::MatrixXd& v, const std::vector<int>& face) {
  Vector3d area = Vector3d::Zero();
  const Vector3d p0 = v.row(face[0]).transpose();
  for (std::size_t i = 1; i + 1 < face.size(); ++i) {
    const Vector3d a = v.row(face[i]).transpose();
    const Vector3d b = v.row(face[i + 1]).transpose();
    area += 0.5 * (a - p0).cross(b - p0);
  }
  return area;
}

void finalize_3d(PolytopalMesh& mesh) {
  const int nc = static_cast<int>(mesh.cell_faces.size());
  mesh.cells.assign(nc, {});
  mesh.cell_measure.resize(nc);
  mesh.cell_diameter.resize(nc);
  mesh.cell_centroid.resize(nc, 3);

  for (int c = 0; c < nc; ++c) {
    const auto& faces = mesh.cell_faces[c];
    if (faces.empty())
      throw std::runtime_error("mesh: 3D cell " + std::to_string(c) + " has no faces");

    // Distinct vertex set, and per-cell edge closure: every edge of the cell
    // must be traversed once in each direction by the face loops.
    std::vector<int> verts;
    std::map<std::pair<int, int>, int> directed;
    for (const auto& face : faces) {
      if (face.size() < 3)
        throw std::runtime_error("mesh: cell " + std::to_string(c) + " has a degenerate face");
      const int k = static_cast<int>(face.size());
      for (int i = 0; i < k; ++i) {
        const int a = face[i], b = face[(i + 1) % k];
        if (a < 0 || a >= mesh.num_vertices())
          throw std::runtime_error("mesh: cell " + std::to_string(c) + " references invalid vertex");
        directed[{a, b}] += 1;
        verts.push_back(a);
      }
    }
    for (const auto& [e, cnt] : directed) {
      if (cnt != 1 || directed.count({e.second, e.first}) == 0)
        throw std::runtime_error("mesh: cell " + std::to_string(c) + " is not closed");
    }
    std::sort(verts.begin(), verts.end());
    verts.erase(std::unique(verts.begin(), verts.end()), verts.end());
    mesh.cells[c] = verts;

    // Divergence-theorem volume and centroid via tetrahedra against the origin.
    double vol = 0;
    Vector3d cent = Vector3d::Zero();
    for (const auto& face : faces) {
      const Vector3d p0 = mesh.vertices.row(face[0]).transpose();
      for (std::size_t i = 1; i + 1 < face.size(); ++i) {
        const Vector3d a = mesh.vertices.row(face[i]).transpose();
        const Vector3d b = mesh.vertices.row(face[i + 1]).transpose();
        const double v6 = p0.dot((a - p0).cross(b - p0));
        vol += v6 / 6.0;
        cent += (v6 / 24.0) * (p0 + a + b);   // + origin contribution of 0
      }
    }
    if (!(vol > 0))
      throw std::runtime_error("mesh: cell " + std::to_string(c) +
                               " has non-positive volume (check face orientation)");
    mesh.cell_measure[c] = vol;
    mesh.cell_centroid.row(c) = (cent / vol).transpose();
    mesh.cell_diameter[c] = loop_diameter(mesh.vertices, verts);
  }

  // Face incidence across cells: interior faces appear in exactly two cells
  // with opposite orientation, boundary faces in one.
  std::map<std::vector<int>, std::vector<std::vector<int>>> face_uses;  // sorted key -> loops
  for (const auto& faces : mesh.cell_faces)
    for (const auto& face : faces) {
      std::vector<int> key = face;
      std::sort(key.begin(), key.end());
      face_uses[key].push_back(face);
    }
  mesh.boundary_vertex.assign(mesh.num_vertices(), false);
  for (const auto& [key, uses] : face_uses) {
    if (uses.size() > 2)
      throw std::runtime_error("mesh: face shared by more than two cells");
    if (uses.size() == 1) {
      for (int vid : uses[0]) mesh.boundary_vertex[vid] = true;
    } else {
      // Same cyclic loop reversed: concatenate one loop with itself and look
      // for the reverse of the other.
      std::vector<int> doubled = uses[0];
      doubled.insert(doubled.end(), uses[0].begin(), uses[0].end());
      std::vector<int> rev = uses[1];
      std::reverse(rev.begin(), rev.end());
      const auto it = std::search(doubled.begin(), doubled.end(), rev.begin(), rev.end());
      if (uses[0].size() != uses[1].size() || it == doubled.end())
        throw std::runtime_error("mesh: interior face used with inconsistent orientation");
    }
  }
}

// ---------------------------------------------------------------------------
// In-polygon Delaunay triangulation (2D)
// ---------------------------------------------------------------------------

double orient2d(const Vector2d& a, const Vector2d& b, const Vector2d& c) {
  return (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
}

// > 0 when d lies strictly inside the circumcircle of CCW triangle (a,b,c).
double incircle(const Vector2d& a, const Vector2d& b, const Vector2d& c, const Vector2d& d) {
  const double adx = a.x() - d.x(), ady = a.y() - d.y();
  const double bdx = b.x() - d.x(), bdy = b.y() - d.y();
  const double cdx = c.x() - d.x(), cdy = c.y() - d.y();
  const double ad2 = adx * adx + ady * ady;
  const double bd2 = bdx * bdx + bdy * bdy;
  const double cd2 = cdx * cdx + cdy * cdy;
  return adx * (bdy * cd2 - cdy * bd2) - ady * (bdx * cd2 - cdx * bd2) +
         ad2 * (bdx * cdy - cdx * bdy);
}

bool polygon_is_convex(const std::vector<Vector2d>& p, double scale) {
  const int n = static_cast<int>(p.size());
  for (int i = 0; i < n; ++i) {
    if (orient2d(p[i], p[(i + 1) % n], p[(i + 2) % n]) < -kGeomTol * scale * scale)
      return false;
  }
  return true;
}

// Recursive Delaunay triangulation of the convex chain p[lo..hi]; emits
// local-index triangles. Base edge (lo,hi) is assumed to be a Delaunay edge.
void delaunay_chain(const std::vector<Vector2d>& p, int lo, int hi, double scale,
                    std::vector<std::array<int, 3>>& out) {
  if (hi - lo < 2) return;
  const double area_tol = kGeomTol * scale * scale;
  const double circ_tol = kGeomTol * scale * scale * scale * scale;
  int chosen = -1;
  for (int c = lo + 1; c < hi && chosen < 0; ++c) {
    if (orient2d(p[lo], p[c], p[hi]) <= area_tol) continue;  // degenerate sliver
    bool empty = true;
    for (int k = lo + 1; k < hi && empty; ++k) {
      if (k == c) continue;
      if (incircle(p[lo], p[c], p[hi], p[k]) > circ_tol) empty = false;
    }
    if (empty) chosen = c;
  }
  if (chosen < 0)
    throw std::runtime_error("triangulate: no valid Delaunay vertex on chain");
  out.push_back({lo, chosen, hi});
  delaunay_chain(p, lo, chosen, scale, out);
  delaunay_chain(p, chosen, hi, scale, out);
}

// Ear-clipping fallback for non-convex simple polygons.
void ear_clip(const std::vector<Vector2d>& p, double scale, int cell,
              std::vector<std::array<int, 3>>& out) {
  const double area_tol = kGeomTol * scale * scale;
  std::vector<int> chain(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) chain[i] = static_cast<int>(i);
  while (chain.size() > 3) {
    bool clipped = false;
    for (std::size_t i = 0; i < chain.size(); ++i) {
      const int a = chain[(i + chain.size() - 1) % chain.size()];
      const int b = chain[i];
      const int c = chain[(i + 1) % chain.size()];
      if (orient2d(p[a], p[b], p[c]) <= area_tol) continue;
      bool ear = true;
      for (int k : chain) {
        if (k == a || k == b || k == c) continue;
        if (orient2d(p[a], p[b], p[k]) >= -area_tol &&
            orient2d(p[b], p[c], p[k]) >= -area_tol &&
            orient2d(p[c], p[a], p[k]) >= -area_tol) { ear = false; break; }
      }
      if (!ear) continue;
      out.push_back({a, b, c});
      chain.erase(chain.begin() + static_cast<std::ptrdiff_t>(i));
      clipped = true;
      break;
    }
    if (!clipped)
      throw std::runtime_error("triangulate: ear clipping failed on cell " + std::to_string(cell));
  }
  out.push_back({chain[0], chain[1], chain[2]});
}

// ---------------------------------------------------------------------------
// Kuhn split of an axis-aligned cube cell
// ---------------------------------------------------------------------------

// Corner code ordering: bit 0 = x, bit 1 = y, bit 2 = z.
std::array<int, 8> cube_corner_ids(const PolytopalMesh& mesh, int cell) {
  const auto& verts = mesh.cells[cell];
  if (verts.size() != 8 || mesh.cell_faces[cell].size() != 6)
    throw std::runtime_error("triangulate: 3D cell " + std::to_string(cell) +
                             " is not a hexahedron");
  Vector3d lo = mesh.vertices.row(verts[0]).transpose();
  Vector3d hi = lo;
  for (int vid : verts) {
    lo = lo.cwiseMin(mesh.vertices.row(vid).transpose());
    hi = hi.cwiseMax(mesh.vertices.row(vid).transpose());
  }
  const double tol = kGeomTol * std::max(1.0, (hi - lo).norm());
  std::array<int, 8> corner;
  corner.fill(-1);
  for (int vid : verts) {
    int code = 0;
    for (int d = 0; d < 3; ++d) {
      const double x = mesh.vertices(vid, d);
      if (std::abs(x - hi[d]) <= tol) code |= (1 << d);
      else if (std::abs(x - lo[d]) > tol)
        throw std::runtime_error("triangulate: cell " + std::to_string(cell) +
                                 " is not an axis-aligned cube");
    }
    if (corner[static_cast<std::size_t>(code)] != -1)
      throw std::runtime_error("triangulate: cell " + std::to_string(cell) +
                               " has coincident corners");
    corner[static_cast<std::size_t>(code)] = vid;
  }
  for (int vid : corner)
    if (vid < 0)
      throw std::runtime_error("triangulate: cell " + std::to_string(cell) +
                               " is missing a cube corner");
  return corner;
}

double tet_signed_volume(const Eigen::MatrixXd& v, int a, int b, int c, int d) {
  const Vector3d p = v.row(a).transpose();
  const Vector3d q = v.row(b).transpose();
  const Vector3d r = v.row(c).transpose();
  const Vector3d s = v.row(d).transpose();
  return (q - p).cross(r - p).dot(s - p) / 6.0;
}

}  // namespace

// ---------------------------------------------------------------------------

void finalize_mesh(PolytopalMesh& mesh) {
  if (mesh.num_vertices() == 0) throw std::runtime_error("mesh: no vertices");
  if (mesh.dim == 2) {
    if (mesh.vertices.cols() != 2) throw std::runtime_error("mesh: vertex array is not 2D");
    finalize_2d(mesh);
  } else if (mesh.dim == 3) {
    if (mesh.vertices.cols() != 3) throw std::runtime_error("mesh: vertex array is not 3D");
    finalize_3d(mesh);
  } else {
    throw std::runtime_error("mesh: dim must be 2 or 3");
  }
  for (int c = 0; c < mesh.num_cells(); ++c)
    if (!(mesh.cell_diameter[c] > 0) || !(mesh.cell_measure[c] > 0))
      throw std::runtime_error("mesh: degenerate cell " + std::to_string(c));
}

PolytopalMesh voronoi_mesh_from_seeds(Eigen::MatrixXd seeds, int lloyd_iters) {
  const int n = static_cast<int>(seeds.rows());
  if (n < 1 || seeds.cols() != 2)
    throw std::invalid_argument("voronoi: seeds must be an n x 2 array, n >= 1");
  if (lloyd_iters < 0) throw std::invalid_argument("voronoi: lloyd_iters must be >= 0");
  if ((seeds.array() < 0.0).any() || (seeds.array() > 1.0).any())
    throw std::invalid_argument("voronoi: seeds must lie in the unit square");
  perturb_coincident_seeds(seeds, /*salt=*/0x56454d5052454331ULL);

  std::vector<std::vector<Vector2d>> polys(static_cast<std::size_t>(n));
  for (int iter = 0; iter <= lloyd_iters; ++iter) {
    SeedGrid grid(seeds);
    for (int i = 0; i < n; ++i) {
      polys[static_cast<std::size_t>(i)] = voronoi_cell(seeds, i, grid);
      if (polys[static_cast<std::size_t>(i)].size() < 3)
        throw std::runtime_error("voronoi: empty cell for seed " + std::to_string(i));
    }
    if (iter == lloyd_iters) break;
    for (int i = 0; i < n; ++i) {
      const auto& poly = polys[static_cast<std::size_t>(i)];
      seeds.row(i) = polygon_centroid(poly, polygon_area(poly)).transpose();
    }
  }
  return mesh_from_polygons(polys);
}

PolytopalMesh generate_voronoi_mesh(int n_cells, int lloyd_iters, std::uint64_t seed) {
  if (n_cells < 1) throw std::invalid_argument("voronoi: n_cells must be >= 1");
  std::mt19937_64 rng(seed);
  Eigen::MatrixXd seeds(n_cells, 2);
  for (int i = 0; i < n_cells; ++i) {
    seeds(i, 0) = uniform01(rng);
    seeds(i, 1) = uniform01(rng);
  }
  return voronoi_mesh_from_seeds(std::move(seeds), lloyd_iters);
}

PolytopalMesh generate_structured_hex_mesh(int n_per_axis) {
  if (n_per_axis < 1) throw std::invalid_argument("hex mesh: n_per_axis must be >= 1");
  const int n = n_per_axis;
  const int nv1 = n + 1;
  PolytopalMesh mesh;
  mesh.dim = 3;
  mesh.vertices.resize(static_cast<Eigen::Index>(nv1) * nv1 * nv1, 3);
  auto vid = [&](int i, int j, int k) { return i + nv1 * (j + nv1 * k); };
  for (int k = 0; k < nv1; ++k)
    for (int j = 0; j < nv1; ++j)
      for (int i = 0; i < nv1; ++i) {
        mesh.vertices(vid(i, j, k), 0) = static_cast<double>(i) / n;
        mesh.vertices(vid(i, j, k), 1) = static_cast<double>(j) / n;
        mesh.vertices(vid(i, j, k), 2) = static_cast<double>(k) / n;
      }
  mesh.cell_faces.reserve(static_cast<std::size_t>(n) * n * n);
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const int v000 = vid(i, j, k), v100 = vid(i + 1, j, k);
        const int v010 = vid(i, j + 1, k), v110 = vid(i + 1, j + 1, k);
        const int v001 = vid(i, j, k + 1), v101 = vid(i + 1, j, k + 1);
        const int v011 = vid(i, j + 1, k + 1), v111 = vid(i + 1, j + 1, k + 1);
        mesh.cell_faces.push_back({
            {v000, v010, v110, v100},   // z = lo
            {v001, v101, v111, v011},   // z = hi
            {v000, v100, v101, v001},   // y = lo
            {v010, v011, v111, v110},   // y = hi
            {v000, v001, v011, v010},   // x = lo
            {v100, v110, v111, v101},   // x = hi
        });
      }
  finalize_mesh(mesh);
  return mesh;
}

SimplicialMesh triangulate(const PolytopalMesh& mesh) {
  SimplicialMesh tri;
  tri.dim = mesh.dim;
  tri.vertices = mesh.vertices;
  tri.boundary_vertex = mesh.boundary_vertex;

  std::vector<std::array<int, 4>> simplices;  // global ids; [3] unused in 2D
  if (mesh.dim == 2) {
    std::vector<std::array<int, 3>> local;
    for (int c = 0; c < mesh.num_cells(); ++c) {
      const auto& loop = mesh.cells[c];
      std::vector<Vector2d> poly;
      poly.reserve(loop.size());
      for (int vid : loop) poly.emplace_back(mesh.vertices(vid, 0), mesh.vertices(vid, 1));
      local.clear();
      if (polygon_is_convex(poly, mesh.cell_diameter[c]))
        delaunay_chain(poly, 0, static_cast<int>(poly.size()) - 1, mesh.cell_diameter[c], local);
      else
        ear_clip(poly, mesh.cell_diameter[c], c, local);
      for (const auto& t : local) {
        simplices.push_back({loop[t[0]], loop[t[1]], loop[t[2]], -1});
        tri.parent_cell.push_back(c);
      }
    }
    tri.simplices.resize(static_cast<Eigen::Index>(simplices.size()), 3);
    for (std::size_t s = 0; s < simplices.size(); ++s)
      for (int d = 0; d < 3; ++d) tri.simplices(static_cast<Eigen::Index>(s), d) = simplices[s][d];
  } else {
    // Kuhn split: six tetrahedra around the main diagonal c000-c111, one per
    // axis permutation; the same diagonal direction in every cube keeps the
    // global mesh conforming.
    static constexpr int kPerms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                                         {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
    for (int c = 0; c < mesh.num_cells(); ++c) {
      const std::array<int, 8> corner = cube_corner_ids(mesh, c);
      for (const auto& perm : kPerms) {
        int code = 0;
        std::array<int, 4> tet;
        tet[0] = corner[0];
        for (int step = 0; step < 3; ++step) {
          code |= (1 << perm[step]);
          tet[static_cast<std::size_t>(step) + 1] = corner[static_cast<std::size_t>(code)];
        }
        if (tet_signed_volume(mesh.vertices, tet[0], tet[1], tet[2], tet[3]) < 0)
          std::swap(tet[1], tet[2]);
        simplices.push_back(tet);
        tri.parent_cell.push_back(c);
      }
    }
    tri.simplices.resize(static_cast<Eigen::Index>(simplices.size()), 4);
    for (std::size_t s = 0; s < simplices.size(); ++s)
      for (int d = 0; d < 4; ++d) tri.simplices(static_cast<Eigen::Index>(s), d) = simplices[s][d];
  }
  return tri;
}

MeshQualityReport mesh_quality(const PolytopalMesh& mesh) {
  MeshQualityReport rep;
  rep.h_max = mesh.cell_diameter.maxCoeff();
  rep.h_min = mesh.cell_diameter.minCoeff();
  rep.measure_ratio = mesh.cell_measure.maxCoeff() / mesh.cell_measure.minCoeff();
  rep.max_aspect_ratio = 0;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    double boundary_measure = 0;
    if (mesh.dim == 2) {
      const auto& loop = mesh.cells[c];
      const int k = static_cast<int>(loop.size());
      for (int i = 0; i < k; ++i)
        boundary_measure += (mesh.vertices.row(loop[(i + 1) % k]) - mesh.vertices.row(loop[i])).norm();
    } else {
      for (const auto& face : mesh.cell_faces[c])
        boundary_measure += face_area_vector(mesh.vertices, face).norm();
    }
    // Inradius estimate: dim * |K| / |boundary of K|, exact for squares/cubes.
    const double inradius = mesh.dim * mesh.cell_measure[c] / boundary_measure;
    rep.max_aspect_ratio = std::max(rep.max_aspect_ratio, mesh.cell_diameter[c] / inradius);
  }
  return rep;
}

PolytopalMesh as_polytopal(const SimplicialMesh& tri) {
  if (tri.dim != 2)
    throw std::invalid_argument("as_polytopal: only 2D triangulations supported");
  PolytopalMesh mesh;
  mesh.dim = 2;
  mesh.vertices = tri.vertices;
  mesh.cells.reserve(static_cast<std::size_t>(tri.num_simplices()));
  for (int s = 0; s < tri.num_simplices(); ++s)
    mesh.cells.push_back({tri.simplices(s, 0), tri.simplices(s, 1), tri.simplices(s, 2)});
  finalize_mesh(mesh);
  return mesh;
}

}  // namespace vem
