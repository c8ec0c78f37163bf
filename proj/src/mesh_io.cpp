#include "vem/mesh_io.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <map>
#include <sstream>
#include <utility>

namespace vem {

namespace {

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  // Next non-empty, non-comment line as a token stream.
  std::istringstream next(const char* what) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_;
      const auto first = line.find_first_not_of(" \t\r");
      if (first == std::string::npos || line[first] == '#') continue;
      return std::istringstream(line);
    }
    throw ParseError(line_, std::string("expected ") + what + ", got end of file");
  }

  int line() const { return line_; }

 private:
  std::istream& in_;
  int line_ = 0;
};

int read_count(std::istringstream& s, LineReader& lr, const char* what) {
  long long v = 0;
  if (!(s >> v) || v < 0)
    throw ParseError(lr.line(), std::string("malformed ") + what);
  return static_cast<int>(v);
}

int read_vertex_id(std::istringstream& s, LineReader& lr, int nv) {
  long long v = 0;
  if (!(s >> v)) throw ParseError(lr.line(), "malformed vertex index");
  if (v < 0 || v >= nv)
    throw ParseError(lr.line(), "vertex index " + std::to_string(v) + " out of range [0," +
                                    std::to_string(nv) + ")");
  return static_cast<int>(v);
}

void format_double(std::ostream& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out << buf;
}

}  // namespace

PolytopalMesh read_mesh(std::istream& in) {
  LineReader lr(in);
  PolytopalMesh mesh;

  {
    auto s = lr.next("header");
    std::string magic;
    int dim = 0;
    if (!(s >> magic >> dim) || magic != "polymesh" || (dim != 2 && dim != 3))
      throw ParseError(lr.line(), "expected header 'polymesh 2' or 'polymesh 3'");
    mesh.dim = dim;
  }

  int nv = 0, nc = 0;
  {
    auto s = lr.next("counts");
    nv = read_count(s, lr, "vertex count");
    nc = read_count(s, lr, "cell count");
    if (nv == 0 || nc == 0) throw ParseError(lr.line(), "malformed counts (zero entries)");
  }

  mesh.vertices.resize(nv, mesh.dim);
  for (int i = 0; i < nv; ++i) {
    auto s = lr.next("vertex coordinates");
    for (int d = 0; d < mesh.dim; ++d)
      if (!(s >> mesh.vertices(i, d)))
        throw ParseError(lr.line(), "malformed vertex coordinates");
  }

  if (mesh.dim == 2) {
    mesh.cells.reserve(static_cast<std::size_t>(nc));
    for (int c = 0; c < nc; ++c) {
      auto s = lr.next("cell");
      const int k = read_count(s, lr, "cell vertex count");
      if (k < 3) throw ParseError(lr.line(), "cell is not closed (fewer than 3 vertices)");
      std::vector<int> loop(static_cast<std::size_t>(k));
      for (int i = 0; i < k; ++i) loop[static_cast<std::size_t>(i)] = read_vertex_id(s, lr, nv);
      mesh.cells.push_back(std::move(loop));
    }
  } else {
    mesh.cell_faces.reserve(static_cast<std::size_t>(nc));
    for (int c = 0; c < nc; ++c) {
      auto s = lr.next("face count");
      const int nf = read_count(s, lr, "face count");
      if (nf < 4) throw ParseError(lr.line(), "cell is not closed (fewer than 4 faces)");
      const int cell_line = lr.line();
      std::vector<std::vector<int>> faces;
      faces.reserve(static_cast<std::size_t>(nf));
      for (int f = 0; f < nf; ++f) {
        auto fs = lr.next("face");
        const int k = read_count(fs, lr, "face vertex count");
        if (k < 3) throw ParseError(lr.line(), "degenerate face (fewer than 3 vertices)");
        std::vector<int> face(static_cast<std::size_t>(k));
        for (int i = 0; i < k; ++i) face[static_cast<std::size_t>(i)] = read_vertex_id(fs, lr, nv);
        faces.push_back(std::move(face));
      }
      // Closure: each cell edge must be traversed once in each direction.
      std::map<std::pair<int, int>, int> directed;
      for (const auto& face : faces) {
        const int k = static_cast<int>(face.size());
        for (int i = 0; i < k; ++i) directed[{face[i], face[(i + 1) % k]}] += 1;
      }
      for (const auto& [e, cnt] : directed)
        if (cnt != 1 || directed.count({e.second, e.first}) == 0)
          throw ParseError(cell_line, "cell " + std::to_string(c) + " is not closed");
      mesh.cell_faces.push_back(std::move(faces));
    }
  }

  finalize_mesh(mesh);
  return mesh;
}

PolytopalMesh read_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open mesh file: " + path);
  return read_mesh(in);
}

void write_mesh(const PolytopalMesh& mesh, std::ostream& out) {
  out << "polymesh " << mesh.dim << "\n";
  out << mesh.num_vertices() << " " << mesh.num_cells() << "\n";
  for (int i = 0; i < mesh.num_vertices(); ++i) {
    for (int d = 0; d < mesh.dim; ++d) {
      if (d) out << " ";
      format_double(out, mesh.vertices(i, d));
    }
    out << "\n";
  }
  if (mesh.dim == 2) {
    for (const auto& loop : mesh.cells) {
      out << loop.size();
      for (int vid : loop) out << " " << vid;
      out << "\n";
    }
  } else {
    for (const auto& faces : mesh.cell_faces) {
      out << faces.size() << "\n";
      for (const auto& face : faces) {
        out << face.size();
        for (int vid : face) out << " " << vid;
        out << "\n";
      }
    }
  }
}

void write_mesh(const PolytopalMesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open mesh file for writing: " + path);
  write_mesh(mesh, out);
}

}  // namespace vem
