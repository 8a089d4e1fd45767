#include "pdt/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "pdt/aniso_recon.hpp"
#include "pdt/elliptic.hpp"
#include "pdt/iso_recon.hpp"
#include "pdt/parallel.hpp"
#include "pdt/stencils.hpp"

namespace pdt {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

const char* data_mode_name(DataMode m) {
    return m == DataMode::same_grid ? "same-grid" : "oversampled";
}

DataMode data_mode_from_name(const std::string& s) {
    if (s == "same-grid") return DataMode::same_grid;
    if (s == "oversampled") return DataMode::oversampled;
    throw Error("unknown data mode '" + s + "' (same-grid|oversampled)");
}

ScalarField det_field(const SymTensorField& h) {
    ScalarField d(h.grid);
    const std::size_t nn = h.grid.num_nodes();
#pragma omp parallel for schedule(static)
    for (long long node = 0; node < (long long)nn; ++node) d.data[node] = det3(h.at(node));
    return d;
}

SymTensorField scale_tensor(const ScalarField& s, const SymTensorField& t) {
    SymTensorField out(t.grid);
    const std::size_t nn = t.grid.num_nodes();
#pragma omp parallel for schedule(static)
    for (long long node = 0; node < (long long)nn; ++node)
        for (int c = 0; c < 6; ++c)
            out.data[6 * node + c] = s.data[node] * t.data[6 * node + c];
    return out;
}

// Everything the reconstructions consume, already on the reconstruction
// grid.  In oversampled mode the solves run on the doubled grid and the
// derived fields are restricted.
struct Acquired {
    Grid3 grid;                         // reconstruction grid
    std::vector<ScalarField> u;         // solutions restricted to `grid`
    std::vector<PowerDensitySet> pd;    // one per pairing (or one basis set)
    std::vector<ScalarField> basis_det; // det grad U per pairing
    ForwardSummary forward;
};

Acquired acquire(const ExperimentConfig& cfg) {
    if (cfg.solutions.size() < 3) throw Error("experiment needs at least 3 solutions");
    const Grid3 grid = Grid3::cube(cfg.n);
    const bool over = cfg.data_mode == DataMode::oversampled;
    const Grid3 solve_grid = over ? oversampled_grid(grid) : grid;

    const Clock::time_point t0 = Clock::now();
    const PhantomBuild pb = build_phantom(cfg.phantom, solve_grid);
    const Stencil27 a = assemble_conductivity(pb.gamma);
    SolveOptions opts;
    opts.tol = cfg.tol;

    Acquired acq;
    acq.grid = grid;
    std::vector<ScalarField> u_solve;
    for (const std::string& key : cfg.solutions) {
        SolveReport rep;
        u_solve.push_back(solve_conductivity(a, boundary_datum(key), opts, &rep));
        acq.forward.solves.push_back(rep);
    }

    // Pairings; the scalar experiment uses the first three solutions.
    std::vector<BasisPairing> pairings = cfg.pairings;
    if (pairings.empty()) pairings.push_back({{0, 1, 2}, {-1, -1}});

    for (const BasisPairing& p : pairings) {
        std::vector<ScalarField> subset = {u_solve[p.basis[0]], u_solve[p.basis[1]],
                                           u_solve[p.basis[2]]};
        for (int e : p.extras)
            if (e >= 0) subset.push_back(u_solve[e]);
        PowerDensitySet pd = power_densities(pb.gamma, subset);
        ScalarField det = gradient_determinant(u_solve[p.basis[0]], u_solve[p.basis[1]],
                                               u_solve[p.basis[2]]);
        if (over) {
            PowerDensitySet c;
            c.basis = downsample(pd.basis, grid);
            for (const VectorField& v : pd.cross) c.cross.push_back(downsample(v, grid));
            pd = std::move(c);
            det = downsample(det, grid);
        }
        acq.pd.push_back(std::move(pd));
        acq.basis_det.push_back(std::move(det));
    }

    for (ScalarField& us : u_solve)
        acq.u.push_back(over ? downsample(us, grid) : std::move(us));
    acq.forward.seconds = seconds_since(t0);
    return acq;
}

}  // namespace

Truth sample_truth(const PhantomSpec& spec, const Grid3& g) {
    Truth t;
    t.gamma = build_phantom(spec, g).gamma;
    t.tau = ScalarField(g);
    t.gamma_tilde = SymTensorField(g);
    const std::size_t nn = g.num_nodes();
#pragma omp parallel for schedule(static)
    for (long long node = 0; node < (long long)nn; ++node) {
        const double tau = std::cbrt(det3(t.gamma.at(node)));
        t.tau.data[node] = tau;
        for (int c = 0; c < 6; ++c)
            t.gamma_tilde.data[6 * node + c] = t.gamma.data[6 * node + c] / tau;
    }
    return t;
}

nlohmann::ordered_json to_json(const ExperimentConfig& c) {
    nlohmann::ordered_json j;
    j["n"] = c.n;
    j["tol"] = c.tol;
    j["out"] = c.out;
    j["phantom"] = to_json(c.phantom);
    j["solutions"] = c.solutions;
    nlohmann::ordered_json ps = nlohmann::ordered_json::array();
    for (const BasisPairing& p : c.pairings) {
        nlohmann::ordered_json pj;
        pj["basis"] = p.basis;
        pj["extras"] = p.extras;
        ps.push_back(pj);
    }
    j["pairings"] = ps;
    j["data_mode"] = data_mode_name(c.data_mode);
    j["sweep_axis"] = c.sweep_axis;
    j["sweep_reverse"] = c.sweep_reverse;
    j["sweep_average"] = c.sweep_average;
    j["threads"] = c.threads;
    return j;
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
    ExperimentConfig c;
    try {
        c.n = j.at("n").get<int>();
        c.tol = j.at("tol").get<double>();
        if (j.contains("out")) c.out = j.at("out").get<std::string>();
        c.phantom = phantom_from_json(j.at("phantom"));
        c.solutions = j.at("solutions").get<std::vector<std::string>>();
        if (j.contains("pairings"))
            for (const auto& pj : j.at("pairings")) {
                BasisPairing p;
                p.basis = pj.at("basis").get<std::array<int, 3>>();
                p.extras = pj.at("extras").get<std::array<int, 2>>();
                c.pairings.push_back(p);
            }
        if (j.contains("data_mode"))
            c.data_mode = data_mode_from_name(j.at("data_mode").get<std::string>());
        if (j.contains("sweep_axis")) c.sweep_axis = j.at("sweep_axis").get<int>();
        if (j.contains("sweep_reverse")) c.sweep_reverse = j.at("sweep_reverse").get<bool>();
        if (j.contains("sweep_average")) c.sweep_average = j.at("sweep_average").get<bool>();
        if (j.contains("threads")) c.threads = j.at("threads").get<int>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("config: ") + e.what());
    }
    if (c.n < 5) throw Error("config: n must be at least 5");
    if (!(c.tol > 0)) throw Error("config: tol must be positive");
    if (c.sweep_axis < 0 || c.sweep_axis > 2) throw Error("config: sweep_axis must be 0..2");
    const auto& catalog = boundary_catalog();
    for (const std::string& key : c.solutions)
        if (std::find(catalog.begin(), catalog.end(), key) == catalog.end())
            throw Error("config: unknown boundary datum '" + key + "'");
    const int m = int(c.solutions.size());
    for (const BasisPairing& p : c.pairings) {
        for (int b : p.basis)
            if (b < 0 || b >= m) throw Error("config: basis index out of range");
        for (int e : p.extras)
            if (e < 0 || e >= m) throw Error("config: extras index out of range");
        if (p.basis[0] == p.basis[1] || p.basis[0] == p.basis[2] || p.basis[1] == p.basis[2])
            throw Error("config: basis indices must be distinct");
    }
    return c;
}

ExperimentConfig exp1_config(int n) {
    ExperimentConfig c;
    c.n = n;
    c.phantom = phantom_gamma1();
    c.solutions = {"x", "y", "z"};
    return c;
}

ExperimentConfig exp2_config(int n) {
    ExperimentConfig c;
    c.n = n;
    c.phantom = phantom_gamma2();
    c.solutions = {"x", "y", "z", "(x+2)(y+2)", "(z+2)(x+2)"};
    c.pairings = {{{0, 1, 2}, {3, 4}}};
    return c;
}

ExperimentConfig exp3_config(int n) {
    ExperimentConfig c;
    c.n = n;
    c.phantom = phantom_gamma3();
    c.solutions = {"x",
                   "y",
                   "z",
                   "x+1.5(z+2)^2",
                   "y+1.5(x+2)^2",
                   "z+1.5(y+2)^2",
                   "(x+2)(y+2)",
                   "(y+2)(z+2)",
                   "(z+2)(x+2)"};
    c.pairings = {{{0, 1, 2}, {6, 7}},
                  {{3, 1, 2}, {7, 8}},
                  {{0, 4, 2}, {6, 7}},
                  {{0, 1, 5}, {7, 8}}};
    return c;
}

Exp1Result run_exp1(const ExperimentConfig& cfg) {
    if (cfg.threads > 0) set_threads(cfg.threads);
    const Clock::time_point t0 = Clock::now();
    Acquired acq = acquire(cfg);

    Exp1Result r;
    r.grid = acq.grid;
    r.forward = acq.forward;
    r.basis_det = det_stats(acq.basis_det[0]);
    const Truth truth = sample_truth(cfg.phantom, acq.grid);
    r.sigma_true = scalar_part(truth.gamma);

    const Clock::time_point t1 = Clock::now();
    const SymTensorField& h = acq.pd[0].basis;
    const TransitionField tf = transition_field(h);
    const ConnectionField conn = connection_field(tf);
    const ScalarField det_h = det_field(h);
    const std::array<const ScalarField*, 3> uptr = {&acq.u[0], &acq.u[1], &acq.u[2]};

    VectorField w(acq.grid);
    int sweeps = 0;
    for (int axis = 0; axis < 3; ++axis)
        for (int rev = 0; rev < 2; ++rev) {
            if (!cfg.sweep_average && (axis != cfg.sweep_axis || bool(rev) != cfg.sweep_reverse))
                continue;
            const RotationField seed = seed_from_truth(truth.gamma, uptr, tf.t, axis, rev);
            const RotationField q = integrate_rotation(conn, det_h, seed, axis, rev);
            const VectorField ws = scaled_log_sigma_gradient(conn, q);
            for (std::size_t i = 0; i < w.data.size(); ++i) w.data[i] += ws.data[i];
            ++sweeps;
        }
    for (double& v : w.data) v /= sweeps;

    SolveOptions opts;
    opts.tol = cfg.tol;
    r.sigma = reconstruct_sigma(w, det_h, r.sigma_true, opts, &r.poisson);
    r.sigma_report = relative_errors(r.sigma, r.sigma_true);
    r.recon_seconds = seconds_since(t1);
    r.total_seconds = seconds_since(t0);
    return r;
}

Exp2Result run_exp2(const ExperimentConfig& cfg) {
    if (cfg.threads > 0) set_threads(cfg.threads);
    if (cfg.pairings.empty()) throw Error("run_exp2: config has no pairing");
    const Clock::time_point t0 = Clock::now();
    Acquired acq = acquire(cfg);

    Exp2Result r;
    r.grid = acq.grid;
    r.forward = acq.forward;
    r.basis_det = det_stats(acq.basis_det[0]);
    r.truth = sample_truth(cfg.phantom, acq.grid);

    const Clock::time_point t1 = Clock::now();
    const PowerDensitySet& pd = acq.pd[0];
    const MuField mu = mu_coefficients(pd);
    const ConstraintField cf = constraint_field(mu, acq.grid);
    const Mat3Field b = recover_AS(cf, pd.basis);
    r.gamma_tilde_rec = gamma_tilde(b, pd.basis);
    const VectorField w = log_tau_gradient(b, r.gamma_tilde_rec, pd.basis);
    SolveOptions opts;
    opts.tol = cfg.tol;
    r.tau_rec = recover_tau(w, r.truth.tau, opts, &r.poisson);
    r.gamma_rec = scale_tensor(r.tau_rec, r.gamma_tilde_rec);

    r.gamma_tilde_report = relative_errors(r.gamma_tilde_rec, r.truth.gamma_tilde);
    r.tau_report = relative_errors(r.tau_rec, r.truth.tau);
    r.gamma_report = relative_errors(r.gamma_rec, r.truth.gamma);
    r.recon_seconds = seconds_since(t1);
    r.total_seconds = seconds_since(t0);
    return r;
}

Exp3Result run_exp3(const ExperimentConfig& cfg) {
    if (cfg.threads > 0) set_threads(cfg.threads);
    if (cfg.pairings.size() < 2) throw Error("run_exp3: config needs at least 2 pairings");
    const Clock::time_point t0 = Clock::now();
    Acquired acq = acquire(cfg);

    Exp3Result r;
    r.grid = acq.grid;
    r.forward = acq.forward;
    r.truth = sample_truth(cfg.phantom, acq.grid);

    ScalarField det_sq(acq.grid);
    for (std::size_t k = 0; k < acq.pd.size(); ++k) {
        r.basis_dets.push_back(det_stats(acq.basis_det[k]));
        for (std::size_t node = 0; node < acq.grid.num_nodes(); ++node)
            det_sq.data[node] += acq.basis_det[k].data[node] * acq.basis_det[k].data[node];
    }
    r.min_det_sum_sq = *std::min_element(det_sq.data.begin(), det_sq.data.end());

    // The pointwise pipeline is expected to violate its hypotheses here.
    try {
        const MuField mu = mu_coefficients(acq.pd[0]);
        const ConstraintField cf = constraint_field(mu, acq.grid);
        recover_AS(cf, acq.pd[0].basis);
        r.plain_aborted = false;
    } catch (const HypothesisError& e) {
        r.plain_aborted = true;
        r.plain_kind = e.kind;
        r.plain_what = e.what();
    }

    const Clock::time_point t1 = Clock::now();
    std::vector<BasisBundle> bundles;
    for (std::size_t k = 0; k < acq.pd.size(); ++k)
        bundles.push_back(make_bundle("U" + std::to_string(k + 1), acq.pd[k]));

    SolveOptions opts;
    opts.tol = cfg.tol;
    StabilizedSolution sol = assemble_and_solve(bundles, r.truth.tau, opts, &r.poisson);
    r.tau_rec = std::move(sol.tau);
    r.gamma_tilde_h = combine_det_weighted(bundles);
    r.gamma_tilde_f = combine_frobenius(bundles);
    r.gamma_rec = scale_tensor(r.tau_rec, r.gamma_tilde_f.field);

    r.gamma_tilde_h_report = relative_errors(r.gamma_tilde_h.field, r.truth.gamma_tilde);
    r.gamma_tilde_f_report = relative_errors(r.gamma_tilde_f.field, r.truth.gamma_tilde);
    r.tau_report = relative_errors(r.tau_rec, r.truth.tau);
    r.gamma_report = relative_errors(r.gamma_rec, r.truth.gamma);
    r.recon_seconds = seconds_since(t1);
    r.total_seconds = seconds_since(t0);
    return r;
}

}  // namespace pdt
