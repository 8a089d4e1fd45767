#pragma once

// Dirichlet Poisson solver on the uniform grid: the final step of every
// reconstruction pipeline.  The operator is the classic 7-point Laplacian.

#include "pdt/grid.hpp"
#include "pdt/stencil_op.hpp"

namespace pdt {

// 7-point finite-difference stencil of -Laplace (positive definite form).
Stencil27 assemble_laplacian(const Grid3& g);

// Solves Laplace(v) = f with v equal to `boundary` on the boundary nodes
// (its interior entries serve as the initial guess).
ScalarField solve_poisson(const ScalarField& f, const ScalarField& boundary,
                          const SolveOptions& opts = {}, SolveReport* report = nullptr);

// exp of the potential of a gradient field: solves Laplace(v) = div(w) with
// v = log_boundary on the boundary and returns exp(v) nodewise.  Taking the
// divergence first projects out any curl part of w.
ScalarField exp_gradient_potential(const VectorField& w, const ScalarField& log_boundary,
                                   const SolveOptions& opts = {}, SolveReport* report = nullptr);

}  // namespace pdt
