#pragma once

// Assembled 27-point node stencils on a Grid3 and the Dirichlet solver that
// runs on them.  One operator instance stores 27 coefficients per node
// (offset order o = (dx+1) + 3(dy+1) + 9(dz+1)); rows of boundary nodes are
// never used by the solver, which treats boundary values as fixed.

#include <array>
#include <vector>

#include "pdt/grid.hpp"

namespace pdt {

struct Stencil27 {
    Grid3 grid;
    std::vector<double> w;  // 27 per node

    Stencil27() = default;
    explicit Stencil27(const Grid3& g) : grid(g), w(27 * g.num_nodes(), 0.0) {}

    double diag(std::size_t node) const { return w[27 * node + 13]; }

    // out = A u over all nodes (boundary rows included, single code path).
    void apply(const double* u, double* out) const;
    // Same arithmetic without OpenMP; reference for the kernel tests.
    void apply_serial(const double* u, double* out) const;
};

// Trilinear hexahedral element stiffness split by tensor component:
// k[alpha][beta][p][q] integrates d_alpha N_p d_beta N_q over one cell, so a
// cell with constant tensor g has stiffness sum_ab g_ab k[a][b].  Node p of a
// cell is ordered p = a + 2b + 4c for corner (a,b,c) in {0,1}^3.
struct ElementTemplates {
    double k[3][3][8][8];
};
ElementTemplates element_templates(double hx, double hy, double hz);

// Adds one cell stiffness into the stencil rows of its 8 corner nodes.
void add_cell_stiffness(Stencil27& s, int ci, int cj, int ck, const double kc[8][8]);

struct SolveOptions {
    double tol = 1e-10;  // on ||r|| relative to the initial residual
    int max_iters = 0;   // 0: 20 * max nodes-per-axis
    enum class Precond { ssor, jacobi, none };
    Precond precond = Precond::ssor;
};

struct SolveReport {
    int iterations = 0;
    double rel_residual = 0;
    bool converged = false;
};

// Conjugate gradients on the interior unknowns with the boundary entries of
// `boundary_and_guess` held fixed (its interior entries are the initial
// guess).  rhs may be null for a zero right-hand side.  Throws SolverError
// when the iteration cap is reached before the residual drops below tol.
ScalarField solve_dirichlet(const Stencil27& a, const ScalarField& boundary_and_guess,
                            const ScalarField* rhs, const SolveOptions& opts,
                            SolveReport* report);

}  // namespace pdt
