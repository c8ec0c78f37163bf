#pragma once

#include "vem/mesh.hpp"

#include <iosfwd>
#include <stdexcept>
#include <string>

namespace vem {

/// Error raised by the mesh reader; carries the 1-based line number.
class ParseError : public std::runtime_error {
 public:
  ParseError(int line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

/// Text format, `#` starts a comment line:
///   2D: `polymesh 2`, then `nv nc`, nv lines `x y`, nc lines `k v0 ... v{k-1}`
///       (counter-clockwise, 0-based).
///   3D: `polymesh 3`, then `nv nc`, nv lines `x y z`, per cell a line `nf`
///       followed by nf face lines `k v0 ... v{k-1}` (outward-oriented).
/// Floats are written with 17 significant digits.
PolytopalMesh read_mesh(std::istream& in);
PolytopalMesh read_mesh(const std::string& path);
void write_mesh(const PolytopalMesh& mesh, std::ostream& out);
void write_mesh(const PolytopalMesh& mesh, const std::string& path);

}  // namespace vem
