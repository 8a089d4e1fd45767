#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "doctest.h"
#include "pdt/errors.hpp"
#include "pdt/forward.hpp"
#include "pdt/phantom.hpp"
#include "pdt/stencils.hpp"
#include "support/oracles.hpp"

using namespace pdt;

namespace {

SymTensorField identity_gamma(const Grid3& g) {
    SymTensorField t(g);
    for (std::size_t n = 0; n < g.num_nodes(); ++n) t.set(n, Mat3::identity());
    return t;
}

}  // namespace

TEST_CASE("boundary catalog") {
    const auto& cat = boundary_catalog();
    REQUIRE(cat.size() == 9);
    CHECK(cat[0] == "x");
    CHECK(cat[1] == "y");
    CHECK(cat[2] == "z");
    CHECK(cat[3] == "x+1.5(z+2)^2");
    CHECK(cat[4] == "y+1.5(x+2)^2");
    CHECK(cat[5] == "z+1.5(y+2)^2");
    CHECK(cat[6] == "(x+2)(y+2)");
    CHECK(cat[7] == "(y+2)(z+2)");
    CHECK(cat[8] == "(z+2)(x+2)");

    const Vec3 p{0.5, -0.25, 1.0};
    CHECK(boundary_datum("x")(p) == doctest::Approx(0.5));
    CHECK(boundary_datum("y")(p) == doctest::Approx(-0.25));
    CHECK(boundary_datum("z")(p) == doctest::Approx(1.0));
    CHECK(boundary_datum("x+1.5(z+2)^2")(p) == doctest::Approx(0.5 + 1.5 * 9.0));
    CHECK(boundary_datum("y+1.5(x+2)^2")(p) == doctest::Approx(-0.25 + 1.5 * 6.25));
    CHECK(boundary_datum("z+1.5(y+2)^2")(p) == doctest::Approx(1.0 + 1.5 * 3.0625));
    CHECK(boundary_datum("(x+2)(y+2)")(p) == doctest::Approx(2.5 * 1.75));
    CHECK(boundary_datum("(y+2)(z+2)")(p) == doctest::Approx(1.75 * 3.0));
    CHECK(boundary_datum("(z+2)(x+2)")(p) == doctest::Approx(3.0 * 2.5));
    CHECK_THROWS_AS(boundary_datum("x^2"), Error);
}

TEST_CASE("uniform conductivity reproduces coordinate solutions exactly") {
    const Grid3 g = Grid3::cube(9);
    const SymTensorField gamma = identity_gamma(g);
    const Stencil27 a = assemble_conductivity(gamma);
    for (const char* key : {"x", "y", "z"}) {
        SolveReport rep;
        const ScalarField u = solve_conductivity(a, boundary_datum(key), {}, &rep);
        CHECK(rep.converged);
        CHECK(rep.iterations == 0);  // the boundary extension already solves the system
        for (int k = 0; k < g.n[2]; ++k)
            for (int j = 0; j < g.n[1]; ++j)
                for (int i = 0; i < g.n[0]; ++i)
                    CHECK(u(i, j, k) ==
                          doctest::Approx(boundary_datum(key)(g.point(i, j, k))).epsilon(1e-12));
    }
    // Bilinear product data is also an exact discrete solution for gamma = Id.
    SolveReport rep;
    const ScalarField v = solve_conductivity(a, boundary_datum("(x+2)(y+2)"), {}, &rep);
    CHECK(rep.iterations == 0);
    for (std::size_t n = 0; n < g.num_nodes(); ++n) CHECK(std::isfinite(v.data[n]));
}

TEST_CASE("assembled operator is symmetric and matches the reference action") {
    const Grid3 g = testing::box_grid(6, 5, 7);
    const PhantomBuild pb = build_phantom(phantom_gamma2(), g);
    const Stencil27 a = assemble_conductivity(pb.gamma);

    std::mt19937 rng(3);
    std::uniform_real_distribution<double> un(-1, 1);
    std::vector<double> u(g.num_nodes()), v(g.num_nodes()), au(g.num_nodes()), av(g.num_nodes());
    for (auto& x : u) x = un(rng);
    for (auto& x : v) x = un(rng);
    a.apply(u.data(), au.data());
    a.apply(v.data(), av.data());
    double uav = 0, vau = 0;
    for (std::size_t n = 0; n < g.num_nodes(); ++n) {
        uav += u[n] * av[n];
        vau += v[n] * au[n];
    }
    CHECK(uav == doctest::Approx(vau).epsilon(1e-11));

    // Independent cell-scatter path.
    ScalarField uf(g);
    uf.data = u;
    const ScalarField ref = apply_conductivity_reference(pb.gamma, uf);
    for (std::size_t n = 0; n < g.num_nodes(); ++n)
        CHECK(au[n] == doctest::Approx(ref.data[n]).epsilon(1e-11));

    // Interior diagonal is positive for elliptic gamma.
    for (int k = 1; k + 1 < g.n[2]; ++k)
        for (int j = 1; j + 1 < g.n[1]; ++j)
            for (int i = 1; i + 1 < g.n[0]; ++i) CHECK(a.diag(g.index(i, j, k)) > 0);
}

TEST_CASE("power densities match the direct bilinear form") {
    const Grid3 g = Grid3::cube(9);
    const PhantomBuild pb = build_phantom(phantom_gamma2(), g);
    // Analytic solution stand-ins; power_densities only needs fields.
    std::vector<ScalarField> sols;
    for (const char* key : {"x", "y", "z", "(x+2)(y+2)", "(z+2)(x+2)"}) {
        ScalarField f(g);
        const BoundaryDatum bd = boundary_datum(key);
        for (int k = 0; k < g.n[2]; ++k)
            for (int j = 0; j < g.n[1]; ++j)
                for (int i = 0; i < g.n[0]; ++i) f(i, j, k) = bd(g.point(i, j, k));
        sols.push_back(std::move(f));
    }
    const PowerDensitySet pd = power_densities(pb.gamma, sols);
    REQUIRE(pd.cross.size() == 2);

    std::vector<VectorField> grads;
    for (const auto& s : sols) grads.push_back(gradient(s));
    for (std::size_t n = 0; n < g.num_nodes(); ++n) {
        const Mat3 gm = pb.gamma.at(n);
        const Mat3 h = pd.basis.at(n);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                const double want = dot(gm * grads[i].at(n), grads[j].at(n));
                CHECK(h(i, j) == doctest::Approx(want).epsilon(1e-11));
            }
        for (int x = 0; x < 2; ++x) {
            const Vec3 c = pd.cross[x].at(n);
            for (int j = 0; j < 3; ++j) {
                const double want = dot(gm * grads[3 + x].at(n), grads[j].at(n));
                CHECK(c[j] == doctest::Approx(want).epsilon(1e-11));
            }
        }
    }
}

TEST_CASE("gradient determinant and statistics") {
    const Grid3 g = Grid3::cube(7);
    ScalarField u1(g), u2(g), u3(g);
    for (int k = 0; k < g.n[2]; ++k)
        for (int j = 0; j < g.n[1]; ++j)
            for (int i = 0; i < g.n[0]; ++i) {
                const Vec3 p = g.point(i, j, k);
                u1(i, j, k) = p[0];
                u2(i, j, k) = p[1];
                u3(i, j, k) = p[2];
            }
    const ScalarField det = gradient_determinant(u1, u2, u3);
    for (std::size_t n = 0; n < g.num_nodes(); ++n)
        CHECK(det.data[n] == doctest::Approx(1.0).epsilon(1e-12));
    const DetStats st = det_stats(det);
    CHECK(st.min_value == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(st.max_value == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_FALSE(st.sign_change);

    ScalarField f(g);
    for (std::size_t n = 0; n < g.num_nodes(); ++n) f.data[n] = 1.0;
    f(3, 2, 1) = -4.0;
    f(1, 1, 1) = 9.0;
    const DetStats st2 = det_stats(f);
    CHECK(st2.min_value == doctest::Approx(-4.0));
    CHECK(st2.max_value == doctest::Approx(9.0));
    CHECK(st2.argmin == std::array<int, 3>{3, 2, 1});
    CHECK(st2.sign_change);
}

TEST_CASE("oversampled grid and downsampling") {
    const Grid3 coarse = Grid3::cube(9);
    const Grid3 fine = oversampled_grid(coarse);
    CHECK(fine.n[0] == 17);
    CHECK(fine.spacing[0] == doctest::Approx(coarse.spacing[0] / 2));
    // Even fine nodes coincide with coarse nodes.
    for (int k = 0; k < coarse.n[2]; ++k)
        for (int i = 0; i < coarse.n[0]; ++i) {
            const Vec3 a = coarse.point(i, 4, k);
            const Vec3 b = fine.point(2 * i, 8, 2 * k);
            for (int d = 0; d < 3; ++d) CHECK(a[d] == doctest::Approx(b[d]).epsilon(1e-14));
        }

    ScalarField sf(fine);
    for (int k = 0; k < fine.n[2]; ++k)
        for (int j = 0; j < fine.n[1]; ++j)
            for (int i = 0; i < fine.n[0]; ++i) {
                const Vec3 p = fine.point(i, j, k);
                sf(i, j, k) = std::sin(p[0]) + p[1] * p[2];
            }
    const ScalarField sc = downsample(sf, coarse);
    CHECK(sc.grid == coarse);
    for (int k = 0; k < coarse.n[2]; ++k)
        for (int j = 0; j < coarse.n[1]; ++j)
            for (int i = 0; i < coarse.n[0]; ++i)
                CHECK(sc(i, j, k) == sf(2 * i, 2 * j, 2 * k));

    // Mismatched grids are rejected.
    CHECK_THROWS_AS(downsample(ScalarField(coarse), coarse), Error);
}
