#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "pdt/elliptic.hpp"
#include "pdt/stencils.hpp"
#include "support/oracles.hpp"

using namespace pdt;

TEST_CASE("seven-point stencil layout") {
    const Grid3 g = Grid3::cube(5);
    const Stencil27 a = assemble_laplacian(g);
    const double h2 = g.spacing[0] * g.spacing[0];
    const std::size_t n = g.index(2, 2, 2);
    CHECK(a.w[27 * n + 13] == doctest::Approx(6.0 / h2));
    // The six face neighbors carry -1/h^2, all other offsets vanish.
    for (int dz = -1; dz <= 1; ++dz)
        for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
                const int o = (dx + 1) + 3 * (dy + 1) + 9 * (dz + 1);
                const int manhattan = std::abs(dx) + std::abs(dy) + std::abs(dz);
                if (manhattan == 1)
                    CHECK(a.w[27 * n + o] == doctest::Approx(-1.0 / h2));
                else if (manhattan > 1)
                    CHECK(a.w[27 * n + o] == 0.0);
            }
}

TEST_CASE("poisson solve is exact for quadratics") {
    // v = x^2 - y^2 is harmonic; v = x^2 has Laplacian 2.  The 7-point
    // stencil is exact on quadratics, so both reproduce nodal values.
    const Grid3 g = Grid3::cube(9);
    ScalarField f(g), bc(g);
    for (int k = 0; k < g.n[2]; ++k)
        for (int j = 0; j < g.n[1]; ++j)
            for (int i = 0; i < g.n[0]; ++i) {
                const Vec3 p = g.point(i, j, k);
                f(i, j, k) = 2.0;
                if (g.boundary(i, j, k)) bc(i, j, k) = p[0] * p[0];
            }
    SolveOptions o;
    o.tol = 1e-13;
    SolveReport rep;
    const ScalarField v = solve_poisson(f, bc, o, &rep);
    CHECK(rep.converged);
    for (int k = 0; k < g.n[2]; ++k)
        for (int j = 0; j < g.n[1]; ++j)
            for (int i = 0; i < g.n[0]; ++i) {
                const Vec3 p = g.point(i, j, k);
                CHECK(v(i, j, k) == doctest::Approx(p[0] * p[0]).epsilon(1e-8));
            }
}

TEST_CASE("gradient potential recovers the scalar and ignores curl parts") {
    // w = grad(x^2 + y) + curl part (-y, x, 0): div w = 2, and the potential
    // of the gradient part is recovered because div annihilates the rest.
    const Grid3 g = Grid3::cube(17);
    VectorField w(g);
    ScalarField logb(g);
    for (int k = 0; k < g.n[2]; ++k)
        for (int j = 0; j < g.n[1]; ++j)
            for (int i = 0; i < g.n[0]; ++i) {
                const Vec3 p = g.point(i, j, k);
                w.set(i, j, k, Vec3{2 * p[0] - p[1], 1 + p[0], 0});
                if (g.boundary(i, j, k)) logb(i, j, k) = p[0] * p[0] + p[1];
            }
    SolveOptions o;
    o.tol = 1e-12;
    const ScalarField s = exp_gradient_potential(w, logb, o);
    for (int k = 0; k < g.n[2]; ++k)
        for (int j = 0; j < g.n[1]; ++j)
            for (int i = 0; i < g.n[0]; ++i) {
                const Vec3 p = g.point(i, j, k);
                CHECK(s(i, j, k) ==
                      doctest::Approx(std::exp(p[0] * p[0] + p[1])).epsilon(1e-7));
            }
}

TEST_CASE("poisson convergence is second order on a smooth solution") {
    double err[2];
    int idx = 0;
    for (int n : {9, 17}) {
        const Grid3 g = Grid3::cube(n);
        ScalarField f(g), bc(g);
        const double pi = 3.14159265358979323846;
        for (int k = 0; k < g.n[2]; ++k)
            for (int j = 0; j < g.n[1]; ++j)
                for (int i = 0; i < g.n[0]; ++i) {
                    const Vec3 p = g.point(i, j, k);
                    const double v = std::sin(pi * p[0]) * std::sin(pi * p[1]) *
                                     std::sin(pi * p[2]);
                    f(i, j, k) = -3.0 * pi * pi * v;
                    if (g.boundary(i, j, k)) bc(i, j, k) = v;
                }
        SolveOptions o;
        o.tol = 1e-12;
        const ScalarField v = solve_poisson(f, bc, o);
        double worst = 0;
        for (int k = 0; k < g.n[2]; ++k)
            for (int j = 0; j < g.n[1]; ++j)
                for (int i = 0; i < g.n[0]; ++i) {
                    const Vec3 p = g.point(i, j, k);
                    const double want = std::sin(pi * p[0]) * std::sin(pi * p[1]) *
                                        std::sin(pi * p[2]);
                    worst = std::max(worst, std::abs(v(i, j, k) - want));
                }
        err[idx++] = worst;
    }
    CHECK(err[0] / err[1] > 3.2);
    CHECK(err[0] / err[1] < 4.8);
}
