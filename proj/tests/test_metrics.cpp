#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include <json.hpp>

#include "doctest.h"
#include "pdt/errors.hpp"
#include "pdt/metrics.hpp"

using namespace pdt;

namespace {

ScalarField ramp(const Grid3& g, double scale, double offset) {
    ScalarField f(g);
    for (int k = 0; k < g.n[2]; ++k)
        for (int j = 0; j < g.n[1]; ++j)
            for (int i = 0; i < g.n[0]; ++i) {
                const Vec3 p = g.point(i, j, k);
                f(i, j, k) = scale * (2.0 + p[0] + 0.5 * p[1]) + offset;
            }
    return f;
}

}  // namespace

TEST_CASE("identical fields give all-zero reports") {
    const Grid3 g = Grid3::cube(7);
    const ScalarField t = ramp(g, 1.0, 0.0);
    const ReconstructionReport r = relative_errors(t, t);
    CHECK(r.rel_l1 == 0.0);
    CHECK(r.rel_l2 == 0.0);
    CHECK(r.rel_linf == 0.0);
    CHECK(r.max_pointwise_rel == 0.0);
    CHECK(volume_fraction_above(t, t, 0.0) == 0.0);
}

TEST_CASE("doubling the field gives unit relative errors") {
    const Grid3 g = Grid3::cube(5);
    const ScalarField t = ramp(g, 1.0, 0.0);
    ScalarField r2 = t;
    for (auto& v : r2.data) v *= 2.0;
    const ReconstructionReport r = relative_errors(r2, t);
    CHECK(r.rel_l1 == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(r.rel_l2 == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(r.rel_linf == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(r.max_pointwise_rel == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(volume_fraction_above(r2, t, 0.5) == 1.0);
    CHECK(volume_fraction_above(r2, t, 1.5) == 0.0);
}

TEST_CASE("rel_linf and max pointwise differ on localized errors") {
    const Grid3 g = Grid3::cube(5);
    ScalarField t(g);
    for (auto& v : t.data) v = 1.0;
    t(0, 0, 0) = 100.0;  // max |truth| = 100
    ScalarField rec = t;
    rec(2, 2, 2) = 1.5;  // error 0.5 where truth is 1
    const ReconstructionReport r = relative_errors(rec, t);
    CHECK(r.rel_linf == doctest::Approx(0.5 / 100.0).epsilon(1e-13));
    CHECK(r.max_pointwise_rel == doctest::Approx(0.5).epsilon(1e-13));
    // Exactly one voxel of 125 exceeds 40%.
    CHECK(volume_fraction_above(rec, t, 0.4) == doctest::Approx(1.0 / 125.0));
}

TEST_CASE("tensor variant uses the frobenius norm with symmetric weights") {
    const Grid3 g = Grid3::cube(3);
    SymTensorField truth(g), rec(g);
    Mat3 m;
    m(0, 0) = 1;
    m(1, 1) = 2;
    m(2, 2) = 2;
    m(0, 1) = m(1, 0) = 0.5;
    for (std::size_t n = 0; n < g.num_nodes(); ++n) {
        truth.set(n, m);
        rec.set(n, m * 1.25);
    }
    const ReconstructionReport r = relative_errors(rec, truth);
    CHECK(r.rel_l1 == doctest::Approx(0.25).epsilon(1e-13));
    CHECK(r.rel_l2 == doctest::Approx(0.25).epsilon(1e-13));
    CHECK(r.rel_linf == doctest::Approx(0.25).epsilon(1e-13));
    CHECK(r.max_pointwise_rel == doctest::Approx(0.25).epsilon(1e-13));

    // Scale equivariance: scaling both fields leaves every ratio unchanged.
    SymTensorField truth2 = truth, rec2 = rec;
    for (auto& v : truth2.data) v *= 7.0;
    for (auto& v : rec2.data) v *= 7.0;
    const ReconstructionReport r2 = relative_errors(rec2, truth2);
    CHECK(r2.rel_l1 == doctest::Approx(r.rel_l1).epsilon(1e-13));
    CHECK(r2.max_pointwise_rel == doctest::Approx(r.max_pointwise_rel).epsilon(1e-13));

    // Off-diagonal-only difference exercises the multiplicity-2 weights:
    // adding d to the (0,1) entry changes the squared Frobenius norm by 2d^2.
    SymTensorField rec3 = truth;
    Mat3 m3 = m;
    m3(0, 1) = m3(1, 0) = 0.5 + 0.3;
    rec3.set(std::size_t(0), m3);
    const ReconstructionReport r3 = relative_errors(rec3, truth);
    const double fro_truth = std::sqrt(1 + 4 + 4 + 2 * 0.25);
    CHECK(r3.max_pointwise_rel ==
          doctest::Approx(std::sqrt(2 * 0.09) / fro_truth).epsilon(1e-12));
}

TEST_CASE("zero truth is rejected, near-zero voxels are skipped") {
    const Grid3 g = Grid3::cube(3);
    ScalarField z(g);
    CHECK_THROWS_AS(relative_errors(z, z), Error);
    ScalarField t(g);
    for (auto& v : t.data) v = 1.0;
    t(1, 1, 1) = 0.0;  // below the pointwise floor: skipped in ratios
    ScalarField rec = t;
    rec(1, 1, 1) = 0.25;
    const ReconstructionReport r = relative_errors(rec, t);
    CHECK(r.max_pointwise_rel == 0.0);
    CHECK(volume_fraction_above(rec, t, 0.1) == 0.0);
    CHECK(r.rel_l1 == doctest::Approx(0.25 / 26.0).epsilon(1e-12));
}

TEST_CASE("csv and json tabulation") {
    ReconstructionReport a;
    a.rel_l1 = 0.0123;
    a.rel_l2 = 0.0234;
    a.rel_linf = 0.0345;
    a.max_pointwise_rel = 0.0456;
    ReconstructionReport b;
    b.rel_l1 = 0.5;
    const MetricsTable table{{"sigma", a}, {"tau", b}};

    const std::string csv = metrics_csv(table);
    CHECK(csv.find("Metric,sigma,tau") != std::string::npos);
    CHECK(csv.find("Rel. L1 error") != std::string::npos);
    CHECK(csv.find("Rel. L2 error") != std::string::npos);
    CHECK(csv.find("Rel. Linf error") != std::string::npos);
    CHECK(csv.find("Max. pointwise rel. error") != std::string::npos);
    CHECK(csv.find("0.01230000") != std::string::npos);
    CHECK(csv.find("0.50000000") != std::string::npos);

    const nlohmann::json j = nlohmann::json::parse(metrics_json(table));
    CHECK(j.at("sigma").at("Rel. L1 error").get<double>() == doctest::Approx(0.0123));
    CHECK(j.at("sigma").at("Max. pointwise rel. error").get<double>() == doctest::Approx(0.0456));
    CHECK(j.at("tau").at("Rel. L1 error").get<double>() == doctest::Approx(0.5));
}
