#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "pdt/experiments.hpp"

using namespace pdt;

TEST_CASE("config json round trip") {
    ExperimentConfig c = exp2_config(33);
    c.tol = 1e-8;
    c.data_mode = DataMode::oversampled;
    c.sweep_axis = 2;
    c.sweep_reverse = true;
    c.out = "/tmp/somewhere";
    const nlohmann::ordered_json j = to_json(c);
    const ExperimentConfig r = config_from_json(j);
    CHECK(r.n == 33);
    CHECK(r.tol == doctest::Approx(1e-8));
    CHECK(r.out == c.out);
    CHECK(r.data_mode == DataMode::oversampled);
    CHECK(r.sweep_axis == 2);
    CHECK(r.sweep_reverse);
    CHECK_FALSE(r.sweep_average);
    REQUIRE(r.solutions.size() == c.solutions.size());
    for (std::size_t i = 0; i < c.solutions.size(); ++i) CHECK(r.solutions[i] == c.solutions[i]);
    REQUIRE(r.pairings.size() == c.pairings.size());
    CHECK(r.pairings[0].basis == c.pairings[0].basis);
    CHECK(r.pairings[0].extras == c.pairings[0].extras);
    CHECK(r.phantom.terms.size() == c.phantom.terms.size());
}

TEST_CASE("config validation") {
    const nlohmann::ordered_json good = to_json(exp2_config(17));

    nlohmann::json j = good;
    j["n"] = 3;
    CHECK_THROWS_AS(config_from_json(j), Error);

    j = good;
    j["tol"] = 0.0;
    CHECK_THROWS_AS(config_from_json(j), Error);

    j = good;
    j["sweep_axis"] = 5;
    CHECK_THROWS_AS(config_from_json(j), Error);

    j = good;
    j["solutions"][0] = "x^3";  // outside the catalog
    CHECK_THROWS_AS(config_from_json(j), Error);

    j = good;
    j["pairings"][0]["extras"][0] = 99;  // out of range
    CHECK_THROWS_AS(config_from_json(j), Error);

    j = good;
    j["pairings"][0]["basis"] = {0, 0, 1};  // repeated basis index
    CHECK_THROWS_AS(config_from_json(j), Error);

    j = good;
    j["data_mode"] = "sideways";
    CHECK_THROWS_AS(config_from_json(j), Error);

    CHECK_THROWS_AS(config_from_json(nlohmann::json::parse("[1,2]")), Error);
}

TEST_CASE("stock configurations") {
    const ExperimentConfig c1 = exp1_config();
    CHECK(c1.n == 64);
    REQUIRE(c1.solutions.size() == 3);
    CHECK(c1.solutions[0] == "x");
    CHECK(c1.solutions[1] == "y");
    CHECK(c1.solutions[2] == "z");
    CHECK(c1.pairings.empty());
    CHECK(c1.phantom.terms.size() == 2);
    CHECK(c1.phantom.terms[0].isotropic);
    CHECK(c1.phantom.terms[0].amplitude == 2.0);

    const ExperimentConfig c2 = exp2_config();
    CHECK(c2.n == 64);
    REQUIRE(c2.solutions.size() == 5);
    CHECK(c2.solutions[3] == "(x+2)(y+2)");
    CHECK(c2.solutions[4] == "(z+2)(x+2)");
    REQUIRE(c2.pairings.size() == 1);
    CHECK(c2.pairings[0].basis == std::array<int, 3>{0, 1, 2});
    CHECK(c2.pairings[0].extras == std::array<int, 2>{3, 4});
    CHECK_FALSE(c2.phantom.terms[0].isotropic);

    const ExperimentConfig c3 = exp3_config();
    CHECK(c3.n == 48);
    REQUIRE(c3.solutions.size() == 9);
    CHECK(c3.solutions[3] == "x+1.5(z+2)^2");
    CHECK(c3.solutions[4] == "y+1.5(x+2)^2");
    CHECK(c3.solutions[5] == "z+1.5(y+2)^2");
    CHECK(c3.solutions[6] == "(x+2)(y+2)");
    CHECK(c3.solutions[7] == "(y+2)(z+2)");
    CHECK(c3.solutions[8] == "(z+2)(x+2)");
    REQUIRE(c3.pairings.size() == 4);
    CHECK(c3.pairings[0].basis == std::array<int, 3>{0, 1, 2});
    CHECK(c3.pairings[0].extras == std::array<int, 2>{6, 7});
    CHECK(c3.pairings[1].basis == std::array<int, 3>{3, 1, 2});
    CHECK(c3.pairings[1].extras == std::array<int, 2>{7, 8});
    CHECK(c3.pairings[2].basis == std::array<int, 3>{0, 4, 2});
    CHECK(c3.pairings[2].extras == std::array<int, 2>{6, 7});
    CHECK(c3.pairings[3].basis == std::array<int, 3>{0, 1, 5});
    CHECK(c3.pairings[3].extras == std::array<int, 2>{7, 8});
    CHECK(c3.phantom.terms[0].amplitude == 20.0);
}

TEST_CASE("sampled truth satisfies the factorization identities") {
    const Grid3 g = Grid3::cube(9);
    const Truth t = sample_truth(phantom_gamma2(), g);
    for (std::size_t n = 0; n < g.num_nodes(); ++n) {
        const Mat3 gm = t.gamma.at(n);
        const double tau = t.tau.data[n];
        CHECK(tau > 0);
        CHECK(tau * tau * tau == doctest::Approx(det3(gm)).epsilon(1e-10));
        CHECK(det3(t.gamma_tilde.at(n)) == doctest::Approx(1.0).epsilon(1e-10));
        const Mat3 recomposed = tau * t.gamma_tilde.at(n);
        for (int e = 0; e < 9; ++e)
            CHECK(recomposed.m[e] == doctest::Approx(gm.m[e]).epsilon(1e-10));
    }
}

TEST_CASE("small scalar experiment end to end") {
    ExperimentConfig cfg = exp1_config(17);
    const Exp1Result r = run_exp1(cfg);
    CHECK(r.grid.n[0] == 17);
    CHECK(r.forward.solves.size() == 3);
    for (const SolveReport& s : r.forward.solves) CHECK(s.converged);
    CHECK(r.poisson.converged);
    CHECK(r.basis_det.min_value > 0);
    // Coarse grid: just expect a sane reconstruction, tight bounds live in
    // the acceptance suite at full resolution.
    CHECK(r.sigma_report.rel_l1 < 0.10);
    CHECK(r.sigma_report.rel_l1 >= 0.0);
    for (double v : r.sigma.data) CHECK(v > 0);
    CHECK(r.total_seconds > 0);
}

TEST_CASE("small anisotropic experiment end to end") {
    ExperimentConfig cfg = exp2_config(17);
    const Exp2Result r = run_exp2(cfg);
    CHECK(r.forward.solves.size() == 5);
    CHECK(r.basis_det.min_value > 0);
    CHECK(r.gamma_tilde_report.rel_l1 < 0.15);
    CHECK(r.tau_report.rel_l1 < 0.05);
    CHECK(r.gamma_report.rel_l1 < 0.20);
    for (std::size_t n = 0; n < r.grid.num_nodes(); ++n)
        CHECK(det3(r.gamma_tilde_rec.at(n)) == doctest::Approx(1.0).epsilon(1e-7));
}

TEST_CASE("oversampled data mode stays consistent") {
    ExperimentConfig cfg = exp1_config(9);
    cfg.data_mode = DataMode::oversampled;
    const Exp1Result r = run_exp1(cfg);
    CHECK(r.grid.n[0] == 9);
    CHECK(r.sigma.grid.n[0] == 9);
    CHECK(r.sigma_report.rel_l1 < 0.2);
}
