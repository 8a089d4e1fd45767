#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "doctest.h"
#include "pdt/errors.hpp"
#include "pdt/phantom.hpp"
#include "pdt/stencils.hpp"
#include "support/oracles.hpp"

using namespace pdt;

namespace {

// Independent torus distance: decompose x - center into an axial offset zeta
// and an in-plane radius rho; the squared distance to the ring is
// (rho - ring_radius)^2 + zeta^2.
double ring_distance_sq(const Torus& t, const Vec3& x) {
    const Vec3 d = x - t.center;
    const double zeta = dot(d, t.axis);
    const Vec3 radial = d - zeta * t.axis;
    const double rho = norm(radial);
    return (rho - t.ring_radius) * (rho - t.ring_radius) + zeta * zeta;
}

double kernel_oracle(const Torus& t, const Vec3& x) {
    return std::exp(-ring_distance_sq(t, x) / (2.0 * t.tube_radius * t.tube_radius));
}

}  // namespace

TEST_CASE("project_to_circle lands on the ring and minimizes the distance") {
    const Torus t{{0.1, -0.2, 0.3}, {0, 0, 1}, 0.5, 0.1};
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int trial = 0; trial < 100; ++trial) {
        const Vec3 x{u(rng), u(rng), u(rng)};
        const Vec3 p = project_to_circle(t, x);
        // On the ring: |p - c| = R and orthogonal to the axis.
        const Vec3 d = p - t.center;
        CHECK(norm(d) == doctest::Approx(t.ring_radius).epsilon(1e-12));
        CHECK(dot(d, t.axis) == doctest::Approx(0.0).epsilon(1e-12));
        // No sampled ring point is closer.
        const Vec3 dx = x - p;
        const double best = dot(dx, dx);
        for (int s = 0; s < 64; ++s) {
            const double th = 2 * 3.14159265358979323846 * s / 64;
            const Vec3 q = t.center + Vec3{t.ring_radius * std::cos(th),
                                           t.ring_radius * std::sin(th), 0.0};
            const Vec3 dq = x - q;
            CHECK(best <= dot(dq, dq) + 1e-12);
        }
        CHECK(kernel(t, x) == doctest::Approx(kernel_oracle(t, x)).epsilon(1e-12));
    }
    // Axis point: projection still lands on the ring deterministically.
    const Vec3 p = project_to_circle(t, t.center);
    CHECK(norm(p - t.center) == doctest::Approx(t.ring_radius).epsilon(1e-12));
}

TEST_CASE("rank_one_tensor is PSD with trace equal to the kernel") {
    const Torus t{{0, 0, 0.5}, {0, 1, 0}, 0.8, 0.1};
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int trial = 0; trial < 100; ++trial) {
        const Vec3 x{u(rng), u(rng), u(rng)};
        const Mat3 m = rank_one_tensor(t, x);
        CHECK(trace(m) == doctest::Approx(kernel(t, x)).epsilon(1e-10));
        // The closed-form eigenvalue solve carries ~1e-9 absolute error.
        const auto ev = sym3_eigenvalues(m);
        CHECK(ev[0] > -1e-8);
        CHECK(ev[1] < 1e-8);  // rank one: two eigenvalues vanish
        // Fiber direction is tangent: orthogonal to the axis and to the
        // radial direction.
        const Vec3 d = x - t.center;
        const Vec3 md = m * t.axis;
        CHECK(norm(md) < 1e-12);
        const Vec3 mr = m * (d - dot(d, t.axis) * t.axis);
        CHECK(norm(mr) < 1e-10);
    }
}

TEST_CASE("json round trip") {
    const PhantomSpec s = phantom_gamma2();
    const nlohmann::json j = to_json(s);
    const PhantomSpec r = phantom_from_json(j);
    CHECK(r.base == s.base);
    REQUIRE(r.terms.size() == s.terms.size());
    for (std::size_t i = 0; i < s.terms.size(); ++i) {
        CHECK(r.terms[i].amplitude == s.terms[i].amplitude);
        CHECK(r.terms[i].isotropic == s.terms[i].isotropic);
        CHECK(r.terms[i].torus.ring_radius == s.terms[i].torus.ring_radius);
        for (int c = 0; c < 3; ++c)
            CHECK(r.terms[i].torus.center[c] == s.terms[i].torus.center[c]);
    }
    nlohmann::json bad = j;
    bad["terms"][0]["ring_radius"] = -1.0;
    CHECK_THROWS_AS(phantom_from_json(bad), Error);
    nlohmann::json missing = j;
    missing.erase("base");
    CHECK_THROWS_AS(phantom_from_json(missing), Error);
}

TEST_CASE("scalar phantom profile along the x line through (y,z) = (0, 0.25)") {
    const PhantomSpec s = phantom_gamma1();
    const Grid3 g = Grid3::cube(17);
    const PhantomBuild b = build_phantom(s, g);
    const ScalarField gamma = scalar_part(b.gamma);
    // (y,z) = (0, 0.25) is the node line j = 8, k = 10.
    const std::vector<double> line = sample_line(gamma, 0, {0, 8, 10});
    REQUIRE(line.size() == 17);
    // Independent oracle for every sample.
    for (int i = 0; i < 17; ++i) {
        const Vec3 x = g.point(i, 8, 10);
        double want = s.base;
        for (const PhantomTerm& t : s.terms) want += t.amplitude * kernel_oracle(t.torus, x);
        CHECK(line[i] == doctest::Approx(want).epsilon(1e-12));
    }
    // The line crosses near the lower ring once: a single interior maximum at
    // x = 0 of height about 2.769.
    int maxima = 0;
    for (int i = 1; i < 16; ++i)
        if (line[i] > line[i - 1] && line[i] > line[i + 1]) ++maxima;
    CHECK(maxima == 1);
    CHECK(line[8] == doctest::Approx(2.76937).epsilon(1e-4));
    for (int i = 0; i < 17; ++i) CHECK(line[i] >= 1.0);
}

TEST_CASE("anisotropic phantom keeps unit lower ellipticity bound") {
    const PhantomBuild b = build_phantom(phantom_gamma2(), Grid3::cube(33));
    CHECK(b.lambda_min == doctest::Approx(1.0).epsilon(1e-7));
    CHECK(b.lambda_max > 2.5);
    CHECK(b.lambda_max < 3.05);
    CHECK(b.kappa == doctest::Approx(b.lambda_max / b.lambda_min));
    CHECK_THROWS_AS(scalar_part(b.gamma), Error);

    const PhantomBuild b3 = build_phantom(phantom_gamma3(), Grid3::cube(17));
    CHECK(b3.lambda_min == doctest::Approx(1.0).epsilon(1e-7));
    CHECK(b3.lambda_max > 15.0);
}

TEST_CASE("build rejects phantoms that lose positivity") {
    PhantomSpec s = phantom_gamma1();
    s.base = -0.5;
    CHECK_THROWS_AS(build_phantom(s, Grid3::cube(9)), HypothesisError);
}
