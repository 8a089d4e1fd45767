#pragma once

// Isotropic reconstruction: transition matrix field T with T H T^T = I,
// connection coefficients V_ik = (grad t_ij) t^{jk}, a quaternion dynamical
// system integrated along grid lines recovering the rotation R = S T^T, and
// finally sigma through a Poisson solve.

#include <array>
#include <vector>

#include "pdt/grid.hpp"
#include "pdt/quat.hpp"
#include "pdt/stencil_op.hpp"

namespace pdt {

struct TransitionField {
    Mat3Field t;     // lower triangular, T H T^T = I
    Mat3Field tinv;  // entries t^{jk}, also lower triangular
};

// Throws HypothesisError(not_spd) with the first offending voxel when a
// leading minor of H fails to be positive.
TransitionField transition_field(const SymTensorField& h);

// V_ik = sum_j (grad t_ij) t^{jk} split into symmetric and antisymmetric
// parts.  Storage keeps one 3-vector per unordered pair, so the symmetry
// identities hold at the bit level by construction.
struct ConnectionField {
    Grid3 grid;
    std::vector<double> vs;  // 18 per node: pairs (0,0),(1,0),(1,1),(2,0),(2,1),(2,2)
    std::vector<double> va;  // 9 per node: pairs (1,0),(2,0),(2,1)

    ConnectionField() = default;
    explicit ConnectionField(const Grid3& g)
        : grid(g), vs(18 * g.num_nodes(), 0.0), va(9 * g.num_nodes(), 0.0) {}

    Vec3 sym(std::size_t node, int i, int k) const {  // V^s_ik = V^s_ki
        const int hi = i > k ? i : k, lo = i > k ? k : i;
        const double* p = &vs[18 * node + 3 * (hi * (hi + 1) / 2 + lo)];
        return {p[0], p[1], p[2]};
    }
    Vec3 asym(std::size_t node, int i, int k) const {  // V^a_ik = -V^a_ki
        if (i == k) return {0, 0, 0};
        const int hi = i > k ? i : k, lo = i > k ? k : i;
        const double s = i > k ? 1.0 : -1.0;
        const double* p = &va[9 * node + 3 * (hi * (hi - 1) / 2 + lo)];
        return {s * p[0], s * p[1], s * p[2]};
    }
    Vec3 full(std::size_t node, int i, int k) const { return sym(node, i, k) + asym(node, i, k); }
};

ConnectionField connection_field(const TransitionField& tf);

// Everything one integration step reads at one voxel.
struct ConnVoxel {
    Vec3 vs[3][3];
    Vec3 va[3][3];
    Vec3 glogdeth;  // grad log det H
};

ConnVoxel conn_voxel(const ConnectionField& conn, const VectorField& grad_log_det_h,
                     std::size_t node);
ConnVoxel midpoint(const ConnVoxel& a, const ConnVoxel& b);

// Coefficient vectors of the quaternion system dq/ds = (q a^m + b^m q)/2 for
// stepping along `axis` (m): a^m from the rotated symmetric connection parts
// and the antisymmetric parts, b^m = (1/6 grad log det H) x e_m.
StepMatrices step_coefficients(const Quaternion& q, const ConnVoxel& v, int axis);

struct RotationField {
    Grid3 grid;
    std::vector<double> q;  // 4 per node: w,x,y,z

    RotationField() = default;
    explicit RotationField(const Grid3& g) : grid(g), q(4 * g.num_nodes(), 0.0) {
        for (std::size_t p = 0; p < g.num_nodes(); ++p) q[4 * p] = 1;
    }
    Quaternion at(std::size_t node) const {
        return {q[4 * node], q[4 * node + 1], q[4 * node + 2], q[4 * node + 3]};
    }
    void set(std::size_t node, const Quaternion& v) {
        q[4 * node] = v.w;
        q[4 * node + 1] = v.x;
        q[4 * node + 2] = v.y;
        q[4 * node + 3] = v.z;
    }
};

Mat3Field to_rotation_field(const RotationField& q);

// Synthetic-data seeding convention: on the sweep entry face, R = S T^T with
// S = sqrt(gamma) grad u_i from the ground truth, projected to the nearest
// rotation and lifted to the hemisphere w >= 0; adjacent face quaternions are
// sign-aligned so the lift is continuous for midpoint averaging.
RotationField seed_from_truth(const SymTensorField& gamma,
                              const std::array<const ScalarField*, 3>& u, const Mat3Field& t,
                              int axis = 0, bool reverse = false);

// Integrates every grid line parallel to `axis` from its seed value with the
// norm-preserving exponential step, coefficients sampled at step midpoints
// (adjacent-voxel average, half-step predictor for the q-dependence).
// Throws when det_h is nonpositive anywhere or when the final norm drift on
// some line exceeds 1e-10.
RotationField integrate_rotation(const ConnectionField& conn, const ScalarField& det_h,
                                 const RotationField& seed, int axis = 0, bool reverse = false);

// Pointwise right-hand side of the scaled log-conductivity identity:
// component m is 4/3 sum_j c_j (rot(q~) e_m)_j with c_j = sum_i (rot(q~) V^s_ij)_i,
// equal to grad log(sigma / det(H)^{1/3}) for exact data.
VectorField scaled_log_sigma_gradient(const ConnectionField& conn, const RotationField& q);

// Poisson solve of div(w) with boundary value log(sigma_b det(H)^{-1/3}),
// then sigma = det(H)^{1/3} exp(v).  Only boundary entries of sigma_boundary
// are read.
ScalarField reconstruct_sigma(const VectorField& w, const ScalarField& det_h,
                              const ScalarField& sigma_boundary, const SolveOptions& opts = {},
                              SolveReport* report = nullptr);

}  // namespace pdt
