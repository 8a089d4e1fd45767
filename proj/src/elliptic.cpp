#include "pdt/elliptic.hpp"

#include <cmath>

#include "pdt/errors.hpp"
#include "pdt/stencils.hpp"

namespace pdt {

Stencil27 assemble_laplacian(const Grid3& g) {
    Stencil27 s(g);
    const double cx = 1.0 / (g.spacing[0] * g.spacing[0]);
    const double cy = 1.0 / (g.spacing[1] * g.spacing[1]);
    const double cz = 1.0 / (g.spacing[2] * g.spacing[2]);
    const std::size_t nn = g.num_nodes();
    for (std::size_t p = 0; p < nn; ++p) {
        double* w = &s.w[27 * p];
        w[13] = 2 * (cx + cy + cz);  // offset (0,0,0)
        w[12] = w[14] = -cx;         // (-1,0,0), (+1,0,0)
        w[10] = w[16] = -cy;         // (0,-1,0), (0,+1,0)
        w[4] = w[22] = -cz;          // (0,0,-1), (0,0,+1)
    }
    return s;
}

ScalarField solve_poisson(const ScalarField& f, const ScalarField& boundary,
                          const SolveOptions& opts, SolveReport* report) {
    const Grid3& g = f.grid;
    if (!(boundary.grid == g)) throw Error("solve_poisson: grid mismatch");
    const Stencil27 a = assemble_laplacian(g);
    // Laplace(v) = f  <=>  (-Laplace) v = -f.
    ScalarField rhs(g);
    for (std::size_t p = 0; p < g.num_nodes(); ++p) rhs.data[p] = -f.data[p];
    return solve_dirichlet(a, boundary, &rhs, opts, report);
}

ScalarField exp_gradient_potential(const VectorField& w, const ScalarField& log_boundary,
                                   const SolveOptions& opts, SolveReport* report) {
    const ScalarField f = divergence(w);
    ScalarField v = solve_poisson(f, log_boundary, opts, report);
    for (double& t : v.data) t = std::exp(t);
    return v;
}

}  // namespace pdt
