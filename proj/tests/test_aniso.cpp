#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "doctest.h"
#include "pdt/aniso_recon.hpp"
#include "pdt/errors.hpp"
#include "pdt/forward.hpp"
#include "support/oracles.hpp"

using namespace pdt;

namespace {

// Identity conductivity with solutions x, y, z and extras (x+2)(y+2),
// (z+2)(x+2): every downstream quantity has a closed form.
struct IdentityData {
    Grid3 grid;
    PowerDensitySet pd;
    IdentityData() : grid(Grid3::cube(9)) {
        SymTensorField gamma(grid);
        for (std::size_t n = 0; n < grid.num_nodes(); ++n) gamma.set(n, Mat3::identity());
        std::vector<ScalarField> sols;
        for (const char* key : {"x", "y", "z", "(x+2)(y+2)", "(z+2)(x+2)"}) {
            ScalarField f(grid);
            const BoundaryDatum bd = boundary_datum(key);
            for (int k = 0; k < grid.n[2]; ++k)
                for (int j = 0; j < grid.n[1]; ++j)
                    for (int i = 0; i < grid.n[0]; ++i) f(i, j, k) = bd(grid.point(i, j, k));
            sols.push_back(std::move(f));
        }
        pd = power_densities(gamma, sols);
    }
};

SymTensorField constant_h(const Grid3& g, const Mat3& m) {
    SymTensorField h(g);
    for (std::size_t n = 0; n < g.num_nodes(); ++n) h.set(n, m);
    return h;
}

}  // namespace

TEST_CASE("omega matrices") {
    for (int i = 0; i < 3; ++i) {
        const Mat3 o = omega_matrix(i);
        const int p = (i + 1) % 3, q = (i + 2) % 3;
        CHECK(o(p, q) == 1.0);
        CHECK(o(q, p) == -1.0);
        double sum = 0;
        for (int e = 0; e < 9; ++e) sum += std::abs(o.m[e]);
        CHECK(sum == 2.0);
    }
}

TEST_CASE("mu coefficients solve H mu = -cross exactly on identity data") {
    const IdentityData d;
    const MuField mf = mu_coefficients(d.pd);
    REQUIRE(mf.mu.size() == 2);
    for (int k = 0; k < d.grid.n[2]; ++k)
        for (int j = 0; j < d.grid.n[1]; ++j)
            for (int i = 0; i < d.grid.n[0]; ++i) {
                const Vec3 p = d.grid.point(i, j, k);
                // grad v1 = (y+2, x+2, 0), H = Id, so mu^(1) = -grad v1.
                const Vec3 m1 = mf.mu[0].at(i, j, k);
                CHECK(m1[0] == doctest::Approx(-(p[1] + 2)).epsilon(1e-12));
                CHECK(m1[1] == doctest::Approx(-(p[0] + 2)).epsilon(1e-12));
                CHECK(std::abs(m1[2]) < 1e-12);
                const Vec3 m2 = mf.mu[1].at(i, j, k);
                CHECK(m2[0] == doctest::Approx(-(p[2] + 2)).epsilon(1e-12));
                CHECK(std::abs(m2[1]) < 1e-12);
                CHECK(m2[2] == doctest::Approx(-(p[0] + 2)).epsilon(1e-12));
            }
}

TEST_CASE("mu coefficients classify bad voxels") {
    const Grid3 g = Grid3::cube(5);
    auto make_pd = [&](const Mat3& at_center) {
        PowerDensitySet pd;
        pd.basis = constant_h(g, Mat3::identity());
        pd.basis.set(2, 2, 2, at_center);
        pd.cross.assign(2, VectorField(g));
        for (std::size_t n = 0; n < g.num_nodes(); ++n) {
            pd.cross[0].set(n, Vec3{1, 0, 0});
            pd.cross[1].set(n, Vec3{0, 1, 0});
        }
        return pd;
    };

    Mat3 neg = Mat3::identity();
    neg(1, 1) = -1.0;  // diagonal entry fails first
    try {
        mu_coefficients(make_pd(neg));
        FAIL("expected not_spd");
    } catch (const HypothesisError& e) {
        CHECK(e.kind == HypothesisError::Kind::not_spd);
        CHECK(e.voxel == std::array<int, 3>{2, 2, 2});
    }

    Mat3 indef;  // positive diagonal, det = -3
    indef(0, 0) = indef(1, 1) = 1;
    indef(2, 2) = 1;
    indef(0, 1) = indef(1, 0) = 2;
    try {
        mu_coefficients(make_pd(indef));
        FAIL("expected sign_change");
    } catch (const HypothesisError& e) {
        CHECK(e.kind == HypothesisError::Kind::sign_change);
        CHECK(e.value == doctest::Approx(-3.0));
    }

    Mat3 nearsing = Mat3::identity();  // two nearly parallel gradients
    nearsing(0, 1) = nearsing(1, 0) = 0.99999;  // Hadamard ratio ~2e-5 < 1e-4
    try {
        mu_coefficients(make_pd(nearsing));
        FAIL("expected rank_deficient");
    } catch (const HypothesisError& e) {
        CHECK(e.kind == HypothesisError::Kind::rank_deficient);
        CHECK(std::string(e.what()).find("stabilized") != std::string::npos);
    }
}

TEST_CASE("constraint stack layout") {
    std::mt19937 rng(3);
    const Mat3 z1 = testing::random_mat3(rng);
    const Mat3 z2 = testing::random_mat3(rng);
    const Mat3 h = testing::random_spd(rng);
    const auto stack = constraint_stack(z1, z2, h);
    for (int e = 0; e < 9; ++e) {
        CHECK(stack[0].m[e] == z1.m[e]);
        CHECK(stack[4].m[e] == z2.m[e]);
    }
    for (int i = 0; i < 3; ++i) {
        const Mat3 w1 = z1 * h * omega_matrix(i);
        const Mat3 w2 = z2 * h * omega_matrix(i);
        for (int e = 0; e < 9; ++e) {
            CHECK(stack[1 + i].m[e] == doctest::Approx(w1.m[e]).epsilon(1e-13));
            CHECK(stack[5 + i].m[e] == doctest::Approx(w2.m[e]).epsilon(1e-13));
        }
    }
}

TEST_CASE("identity data: AS = Id, gamma_tilde = Id, tau = 1") {
    const IdentityData d;
    const MuField mf = mu_coefficients(d.pd);
    const ConstraintField cf = constraint_field(mf, d.grid);
    REQUIRE(cf.z.size() == 2);
    // Z_1 = -(e1 e2^T + e2 e1^T), Z_2 = -(e1 e3^T + e3 e1^T) exactly.
    for (std::size_t n = 0; n < d.grid.num_nodes(); ++n) {
        const Mat3 z1 = cf.z[0].at(n);
        const Mat3 z2 = cf.z[1].at(n);
        CHECK(z1(0, 1) == doctest::Approx(-1).epsilon(1e-12));
        CHECK(z1(1, 0) == doctest::Approx(-1).epsilon(1e-12));
        CHECK(std::abs(z1(0, 0)) + std::abs(z1(1, 1)) + std::abs(z1(2, 2)) < 1e-12);
        CHECK(z2(0, 2) == doctest::Approx(-1).epsilon(1e-12));
        CHECK(z2(2, 0) == doctest::Approx(-1).epsilon(1e-12));
    }

    ScalarField smin;
    const Mat3Field as = recover_AS(cf, d.pd.basis, &smin);
    for (std::size_t n = 0; n < d.grid.num_nodes(); ++n) {
        const Mat3 b = as.at(n);
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c)
                CHECK(b(r, c) == doctest::Approx(r == c ? 1.0 : 0.0).epsilon(1e-12));
        CHECK(smin.data[n] > 1e-3);
    }

    const SymTensorField gt = gamma_tilde(as, d.pd.basis);
    for (std::size_t n = 0; n < d.grid.num_nodes(); ++n) {
        const Mat3 m = gt.at(n);
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c)
                CHECK(m(r, c) == doctest::Approx(r == c ? 1.0 : 0.0).epsilon(1e-12));
    }

    const VectorField w = log_tau_gradient(as, gt, d.pd.basis);
    for (double v : w.data) CHECK(std::abs(v) < 1e-12);

    ScalarField tb(d.grid);
    for (auto& v : tb.data) v = 1.0;
    const ScalarField tau = recover_tau(w, tb);
    for (double v : tau.data) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("recover_AS aborts when the stack loses rank") {
    const IdentityData d;
    const MuField mf = mu_coefficients(d.pd);
    ConstraintField cf = constraint_field(mf, d.grid);
    cf.z[1] = cf.z[0];  // duplicated extra solution: only 4 independent constraints
    CHECK_THROWS_AS(recover_AS(cf, d.pd.basis, nullptr), HypothesisError);
    try {
        recover_AS(cf, d.pd.basis, nullptr);
    } catch (const HypothesisError& e) {
        CHECK(e.kind == HypothesisError::Kind::rank_deficient);
    }
}

TEST_CASE("gamma_tilde has unit determinant and is sign blind in B") {
    std::mt19937 rng(11);
    const Grid3 g = Grid3::cube(3);
    Mat3Field b(g), bneg(g);
    SymTensorField h(g);
    for (std::size_t n = 0; n < g.num_nodes(); ++n) {
        Mat3 m = testing::random_mat3(rng);
        if (det3(m) < 0) m = m * -1.0;
        b.set(n, m);
        bneg.set(n, m * -1.0);
        h.set(n, testing::random_spd(rng));
    }
    const SymTensorField g1 = gamma_tilde(b, h);
    const SymTensorField g2 = gamma_tilde(bneg, h);
    for (std::size_t n = 0; n < g.num_nodes(); ++n) {
        CHECK(det3(g1.at(n)) == doctest::Approx(1.0).epsilon(1e-8));
        const auto ev = sym3_eigenvalues(g1.at(n));
        CHECK(ev[0] > 0);
    }
    // Flipping the sign of B leaves both outputs bitwise unchanged.
    for (std::size_t e = 0; e < g1.data.size(); ++e) CHECK(g1.data[e] == g2.data[e]);
    const VectorField w1 = log_tau_gradient(b, g1, h);
    const VectorField w2 = log_tau_gradient(bneg, g2, h);
    for (std::size_t e = 0; e < w1.data.size(); ++e) CHECK(w1.data[e] == w2.data[e]);
}
