#pragma once

// Synthetic data factory: solve the conductivity equation div(gamma grad u) = 0
// with Dirichlet data from a fixed catalog, form power densities
// H_ij = (gamma grad u_i) . grad u_j, and expose the determinant diagnostics
// the reconstruction hypotheses are stated in terms of.

#include <array>
#include <string>
#include <vector>

#include "pdt/grid.hpp"
#include "pdt/stencil_op.hpp"

namespace pdt {

// Dirichlet boundary values, drawn from a closed catalog of expressions over
// (x,y,z): the three coordinates, the three quadratic shifts
// "x+1.5(z+2)^2" (cyclic), and the three products "(x+2)(y+2)" (cyclic).
struct BoundaryDatum {
    std::string key;
    double operator()(const Vec3& x) const;
};

// Throws Error for keys outside the catalog.
BoundaryDatum boundary_datum(const std::string& key);
const std::vector<std::string>& boundary_catalog();

// Galerkin stencil of div(gamma grad .) on trilinear hex cells, gamma taken
// cell-constant as the average of its 8 corner node values.  The assembled
// operator is symmetric by construction and positive definite on interior
// nodes for uniformly elliptic gamma.
Stencil27 assemble_conductivity(const SymTensorField& gamma);

// Solves with u = g on the boundary; g evaluated at every node also serves
// as the initial guess.
ScalarField solve_conductivity(const Stencil27& a, const BoundaryDatum& g,
                               const SolveOptions& opts = {}, SolveReport* report = nullptr);
ScalarField solve_conductivity(const SymTensorField& gamma, const BoundaryDatum& g,
                               const SolveOptions& opts = {}, SolveReport* report = nullptr);

// Same matrix action as assemble_conductivity + apply, computed by scattering
// cell contributions directly without forming the stencil.  Independent path
// kept for validating the assembly bookkeeping.
ScalarField apply_conductivity_reference(const SymTensorField& gamma, const ScalarField& u);

struct PowerDensitySet {
    SymTensorField basis;            // H_ij over the 3-solution basis
    std::vector<VectorField> cross;  // per extra solution k: (H_k1, H_k2, H_k3)
};

// solutions[0..2] form the basis, the rest contribute cross densities.
// All gradients via the field stencils; H_ij = H_ji holds bit-exactly
// because only the i <= j entries are ever computed.
PowerDensitySet power_densities(const SymTensorField& gamma,
                                const std::vector<ScalarField>& solutions);

// det [grad u1 | grad u2 | grad u3] per node.
ScalarField gradient_determinant(const ScalarField& u1, const ScalarField& u2,
                                 const ScalarField& u3);

struct DetStats {
    double min_value = 0;
    double max_value = 0;
    std::array<int, 3> argmin = {0, 0, 0};
    bool sign_change = false;  // attains both signs
};
DetStats det_stats(const ScalarField& f);

// Data-generation grid with doubled resolution (2n-1 nodes per axis) whose
// even-index nodes coincide with the nodes of g.
Grid3 oversampled_grid(const Grid3& g);

// Restriction to every second node; `fine.grid` must be oversampled(coarse).
ScalarField downsample(const ScalarField& fine, const Grid3& coarse);
VectorField downsample(const VectorField& fine, const Grid3& coarse);
SymTensorField downsample(const SymTensorField& fine, const Grid3& coarse);

}  // namespace pdt
