#pragma once

// Pointwise anisotropic reconstruction from a 3-solution basis plus two
// extra solutions: linear-dependence coefficients mu, eight orthogonality
// constraint matrices, the null direction B approximating the rescaled
// gradient matrix, gamma_tilde = B H^{-1} B^T, and the scalar factor tau
// through a Poisson solve.

#include <array>
#include <vector>

#include "pdt/forward.hpp"
#include "pdt/grid.hpp"
#include "pdt/stencil_op.hpp"

namespace pdt {

// Coefficients of grad v_j = sum_i mu_i^{(j)} grad u_i rescaled by the
// conductivity: per extra solution j, the solution of H mu = -cross_j.
struct MuField {
    std::vector<VectorField> mu;  // mu[j].at(node) = (mu_1, mu_2, mu_3)
};

// Throws HypothesisError per voxel: sign_change when det H is substantially
// negative, rank_deficient when |det H| is small against the product of the
// diagonal (gradient basis degenerate; the stabilized pipeline handles that
// regime), not_spd when a diagonal entry is nonpositive.
MuField mu_coefficients(const PowerDensitySet& pd, double det_ratio_floor = 1e-4);

// Antisymmetric Omega_i = e_{i+1} (x) e_{i+2} - e_{i+2} (x) e_{i+1}
// (cyclic, 0-indexed).
Mat3 omega_matrix(int i);

// The eight constraint matrices Z_1, Z_1 H Omega_1..3, Z_2, Z_2 H Omega_1..3.
std::array<Mat3, 8> constraint_stack(const Mat3& z1, const Mat3& z2, const Mat3& h);

// Z_j per voxel, columns grad mu_i^{(j)}.
struct ConstraintField {
    Grid3 grid;
    std::vector<Mat3Field> z;
};
ConstraintField constraint_field(const MuField& mu, const Grid3& g);

// Null direction of the eight constraints, normalized so det B = sqrt(det H)
// (cube root extended with negative sign for negative arguments, so the
// normalization also fixes the sign).  Aborts with HypothesisError
// (rank_deficient) when the null direction is not isolated at some voxel.
// smin, when given, receives the relative rank margin per voxel.
Mat3Field recover_AS(const ConstraintField& cf, const SymTensorField& h,
                     ScalarField* smin = nullptr);

// gamma_tilde = B H^{-1} B^T, symmetrized and renormalized to det = 1.
SymTensorField gamma_tilde(const Mat3Field& b, const SymTensorField& h);

// Pointwise right-hand side grad log tau = 1/3 grad log|H|
// + 2/3 <grad H^{jl}, B_l> G^{-1} B_j with G = gamma_tilde and H^{jl} the
// inverse-matrix entry fields (differentiated with the field stencils).
VectorField log_tau_gradient(const Mat3Field& b, const SymTensorField& gamma_tilde,
                             const SymTensorField& h);

// Divergence + Poisson solve + exponential; only boundary entries of
// tau_boundary are read.
ScalarField recover_tau(const VectorField& w, const ScalarField& tau_boundary,
                        const SolveOptions& opts = {}, SolveReport* report = nullptr);

}  // namespace pdt
