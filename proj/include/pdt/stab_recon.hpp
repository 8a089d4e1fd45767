#pragma once

// Stabilized anisotropic reconstruction.  The plain pointwise pipeline
// divides by det H and by the determinant of the extracted null direction,
// both of which degenerate when the basis gradients become linearly
// dependent somewhere in the volume.  This variant multiplies those
// divisions away: every voxel-local quantity is polynomial in the power
// densities, and several bases measured on the same conductivity are
// combined so that the final linear solve for grad log tau stays well
// posed as long as the bases never degenerate at the same point.

#include <string>
#include <vector>

#include "pdt/forward.hpp"
#include "pdt/grid.hpp"
#include "pdt/stencil_op.hpp"

namespace pdt {

// Cleared forms of the gradient-expansion coefficients: mu_tilde^(j) =
// -cof(H) * cross_j, i.e. det(H) times the coefficients the plain pipeline
// uses.  Polynomial in the data, no divisions, never throws.
std::vector<VectorField> stabilized_mu(const PowerDensitySet& pd);

// Cleared constraint matrices: column i of Z'_j is
// det(H) * grad(mu_tilde_i) - mu_tilde_i * grad(det H),
// which is det(H)^2 times the plain pipeline's grad(mu_i).  Only the
// measured fields (H and the cross densities) go through the difference
// stencils; grad(det H), grad(cof H) and grad(mu_tilde) are then assembled
// by exact product rules.  That keeps the truncation error proportional to
// third derivatives of the data instead of third derivatives of their cubic
// combinations, which is what matters where the conductivity walls are
// steep.
std::vector<Mat3Field> stabilized_constraints(const PowerDensitySet& pd);

// Per-voxel candidate extracted from one basis: the unit-Frobenius null
// direction b of the eight-matrix stack {Z'_1, Z'_1 H O_i, Z'_2, Z'_2 H O_i}
// (proportional to the scaled flux matrix, no determinant normalization),
// the quadratic form g = b cof(H) b^T, and the rank margin of the stack.
// Never throws: degenerate voxels just carry a small rank margin, and the
// combination step compensates.
struct LocalCandidate {
    Mat3Field b;
    SymTensorField g;
    ScalarField smin;
};
LocalCandidate local_candidate(const std::vector<Mat3Field>& z, const SymTensorField& h,
                               const SymTensorField& h_cof);

// Everything derived from one basis of measurements, kept together so the
// combination formulas can mix several bases voxel by voxel.
struct BasisBundle {
    std::string name;
    SymTensorField h;       // power densities of the basis triple
    ScalarField det_h;      // det H
    SymTensorField h_cof;   // cofactor matrix of H (= det H * H^{-1})
    // Stencil gradients of the six entries of H in the storage order
    // xx, xy, xz, yy, yz, zz; every derived gradient is assembled from
    // these by product rule.
    std::array<VectorField, 6> h_grad;
    Mat3Field b_prime;      // unit-Frobenius scaled flux direction
    SymTensorField g_prime; // b_prime cof(H) b_prime^T
    ScalarField smin;       // rank margin of the constraint stack
};
BasisBundle make_bundle(std::string name, const PowerDensitySet& pd);

// Unit-determinant anisotropy of a single basis: g_prime / det(g_prime)^{1/3}
// with the signed cube root and the denominator clamped away from zero.
// Voxels where det g_prime <= 0 produce garbage here; that is expected near
// basis degeneracies and is exactly what the combinations repair.
SymTensorField basis_gamma_tilde(const BasisBundle& bundle);

struct StabilizedSolution {
    ScalarField tau;             // recovered scale factor
    SymTensorField gamma_tilde_m;  // unit-det normalization of the combined form M
    VectorField w;               // assembled grad log tau field (diagnostic)
};

// Solves, voxel by voxel, M grad(log tau) = sum_k rhs_k with
//   M     = sum_k det(H_k) G'_k,
//   rhs_k = (2/3) det(H_k) <grad cof(H_k)_{jl}, B'_l> B'_j
//           - (1/3) G'_k grad(det H_k),
// grad cof(H) and grad det(H) assembled from each bundle's h_grad, then
// integrates grad(log tau) through a Poisson solve with the true tau on
// the boundary.  Throws HypothesisError{not_spd} naming the first voxel
// where M fails the eigenvalue test: the bases then degenerate jointly.
StabilizedSolution assemble_and_solve(const std::vector<BasisBundle>& bundles,
                                      const ScalarField& tau_boundary,
                                      const SolveOptions& opts = {},
                                      SolveReport* report = nullptr);

// A combined anisotropy plus bookkeeping about voxels whose determinant
// normalization hit a nonpositive value (clamped, flagged, never fatal).
struct CombinedTensor {
    SymTensorField field;
    std::size_t flagged = 0;
    std::array<int, 3> first_flagged = {-1, -1, -1};
};

// det-weighted combination: sum_k det(H_k) gamma_tilde_k, renormalized to
// unit determinant.  Inherits the per-basis blowups near degeneracies.
CombinedTensor combine_det_weighted(const std::vector<BasisBundle>& bundles);

// Frobenius combination: drop the basis with the largest Frobenius norm at
// each voxel (ties keep the lowest index), average the rest normalized to
// unit Frobenius norm, renormalize the average to unit determinant.
// Requires at least two bundles.
CombinedTensor combine_frobenius(const std::vector<BasisBundle>& bundles);

}  // namespace pdt
