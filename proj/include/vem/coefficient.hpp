#pragma once

#include "vem/mesh.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>

namespace vem {

/// Piecewise-constant diffusion coefficient, one positive value per cell.
struct CoefficientField {
  Eigen::VectorXd values;

  /// Jump ratio J(kappa) = max / min; 1 for constant fields.
  double jump() const { return values.maxCoeff() / values.minCoeff(); }
};

CoefficientField constant_field(const PolytopalMesh& mesh, double value);

/// kappa_K = 10^k with k drawn uniformly from the integers {k_min..k_max},
/// independently per cell, by a seeded deterministic generator.
CoefficientField random_exponent_field(const PolytopalMesh& mesh, std::uint64_t seed,
                                       int k_min = 0, int k_max = 6);

/// kappa_K = kappa1 on the inclusion boxes [0.25,0.5]^3 and [0.5,0.75]^3
/// (membership by cell centroid), 1 elsewhere. 3D meshes only.
CoefficientField inclusion_field_3d(const PolytopalMesh& mesh, double kappa1);

/// CSV dump `cell_index,kappa` for reproducibility records.
void write_coefficient_csv(const CoefficientField& coeff, std::ostream& out);

}  // namespace vem
