// Command-line front end: phantoms, forward data, the three reconstruction
// pipelines, error metrics, and the exp1/exp2/exp3 presets.  Every run
// writes a manifest with a config hash and per-output content hashes so
// single-threaded reruns can be compared bit for bit.

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "pdt/aniso_recon.hpp"
#include "pdt/elliptic.hpp"
#include "pdt/errors.hpp"
#include "pdt/experiments.hpp"
#include "pdt/field_io.hpp"
#include "pdt/forward.hpp"
#include "pdt/iso_recon.hpp"
#include "pdt/metrics.hpp"
#include "pdt/parallel.hpp"
#include "pdt/phantom.hpp"
#include "pdt/stab_recon.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr const char* kVersion = "1.0.0";

// Exit codes: 0 ok, 1 generic failure, 2 solver cap, 3..5 hypothesis kinds.
constexpr int kExitSolver = 2;
constexpr int kExitNotSpd = 3;
constexpr int kExitRankDeficient = 4;
constexpr int kExitSignChange = 5;

std::uint64_t fnv1a(const unsigned char* p, std::size_t n,
                    std::uint64_t h = 1469598103934665603ULL) {
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 1099511628211ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", (unsigned long long)v);
    return buf;
}

std::string hash_string(const std::string& s) {
    return hex64(fnv1a(reinterpret_cast<const unsigned char*>(s.data()), s.size()));
}

std::string hash_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw pdt::Error("cannot read back " + p.string());
    std::uint64_t h = 1469598103934665603ULL;
    char buf[1 << 16];
    while (in.read(buf, sizeof buf) || in.gcount() > 0)
        h = fnv1a(reinterpret_cast<const unsigned char*>(buf), std::size_t(in.gcount()), h);
    return hex64(h);
}

// Collects output hashes and timings, then lands as <out>/manifest.json.
struct Manifest {
    fs::path dir;
    ordered_json j;

    Manifest(const std::string& out, const std::string& subcommand,
             const pdt::ExperimentConfig& cfg)
        : dir(out) {
        fs::create_directories(dir);
        j["tool"] = "pdt";
        j["version"] = kVersion;
        j["compiler"] = __VERSION__;
        j["subcommand"] = subcommand;
        j["threads"] = pdt::max_threads();
        // The hash identifies the computation, so the output location is
        // blanked: reruns into different directories hash identically.
        pdt::ExperimentConfig keyed = cfg;
        keyed.out.clear();
        j["config_hash"] = hash_string(pdt::to_json(keyed).dump());
        j["config"] = pdt::to_json(cfg);
        j["timings"] = ordered_json::object();
        j["diagnostics"] = ordered_json::object();
        j["outputs"] = ordered_json::object();
    }

    fs::path path(const std::string& name) const { return dir / name; }

    void note_output(const std::string& name) { j["outputs"][name] = hash_file(dir / name); }

    void write_text(const std::string& name, const std::string& text) {
        std::ofstream out(dir / name, std::ios::binary);
        out << text;
        out.close();
        note_output(name);
    }

    void finish() {
        // One hash over all output hashes: reruns are bit-identical exactly
        // when this value matches.
        std::string cat;
        for (const auto& [name, h] : j["outputs"].items()) cat += name + ":" + h.get<std::string>() + ";";
        j["outputs_hash"] = hash_string(cat);
        std::ofstream out(dir / "manifest.json", std::ios::binary);
        out << j.dump(2) << "\n";
    }
};

struct CommonOpts {
    std::string config_path;
    std::string preset;
    int n = 0;
    double tol = 0;
    std::string out;
    int threads = -1;
    std::string data_mode;
    std::string sweep;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool with_preset = true) {
    cmd->add_option("--config", o.config_path, "JSON config file");
    if (with_preset)
        cmd->add_option("--preset", o.preset, "start from a preset config: exp1|exp2|exp3");
    // 0 means "keep the config/preset value"; negatives are never meaningful
    // and would otherwise fall back silently, so reject them at parse time.
    cmd->add_option("--n", o.n, "nodes per axis of the reconstruction grid")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--tol", o.tol, "linear solver tolerance")->check(CLI::NonNegativeNumber);
    cmd->add_option("--out", o.out, "output directory");
    cmd->add_option("--threads", o.threads, "thread count (0 = runtime default)")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--data-mode", o.data_mode, "same-grid | oversampled");
    cmd->add_option("--sweep", o.sweep, "x|y|z with optional leading '-', or 'avg'");
}

pdt::ExperimentConfig preset_config(const std::string& name) {
    if (name == "exp1") return pdt::exp1_config();
    if (name == "exp2") return pdt::exp2_config();
    if (name == "exp3") return pdt::exp3_config();
    throw pdt::Error("unknown preset '" + name + "' (exp1|exp2|exp3)");
}

pdt::ExperimentConfig resolve_config(const CommonOpts& o, const std::string& fallback_preset,
                                     const std::string& default_out) {
    pdt::ExperimentConfig cfg;
    if (!o.config_path.empty()) {
        std::ifstream in(o.config_path);
        if (!in) throw pdt::Error("cannot open config " + o.config_path);
        nlohmann::json j;
        in >> j;
        cfg = pdt::config_from_json(j);
    } else if (!o.preset.empty()) {
        cfg = preset_config(o.preset);
    } else if (!fallback_preset.empty()) {
        cfg = preset_config(fallback_preset);
    } else {
        throw pdt::Error("need --config or --preset");
    }
    if (o.n > 0) cfg.n = o.n;
    if (o.tol > 0) cfg.tol = o.tol;
    if (!o.out.empty()) cfg.out = o.out;
    if (cfg.out.empty()) cfg.out = default_out;
    if (o.threads >= 0) {
        cfg.threads = o.threads;
    } else if (cfg.threads == 0) {
        if (const char* env = std::getenv("PDT_THREADS")) cfg.threads = std::atoi(env);
    }
    if (!o.data_mode.empty()) {
        if (o.data_mode == "same-grid")
            cfg.data_mode = pdt::DataMode::same_grid;
        else if (o.data_mode == "oversampled")
            cfg.data_mode = pdt::DataMode::oversampled;
        else
            throw pdt::Error("unknown data mode '" + o.data_mode + "'");
    }
    if (!o.sweep.empty()) {
        std::string s = o.sweep;
        cfg.sweep_average = (s == "avg" || s == "average");
        if (!cfg.sweep_average) {
            cfg.sweep_reverse = s.size() > 1 && s[0] == '-';
            if (cfg.sweep_reverse) s = s.substr(1);
            if (s == "x") cfg.sweep_axis = 0;
            else if (s == "y") cfg.sweep_axis = 1;
            else if (s == "z") cfg.sweep_axis = 2;
            else throw pdt::Error("unknown sweep '" + o.sweep + "'");
        }
    }
    pdt::set_threads(cfg.threads);
    return cfg;
}

ordered_json solve_reports_json(const pdt::ForwardSummary& fwd) {
    ordered_json arr = ordered_json::array();
    for (const pdt::SolveReport& r : fwd.solves) {
        ordered_json e;
        e["iterations"] = r.iterations;
        e["rel_residual"] = r.rel_residual;
        e["converged"] = r.converged;
        arr.push_back(e);
    }
    return arr;
}

ordered_json det_stats_json(const pdt::DetStats& s) {
    ordered_json e;
    e["min"] = s.min_value;
    e["max"] = s.max_value;
    e["argmin"] = s.argmin;
    e["sign_change"] = s.sign_change;
    return e;
}

template <class Field>
void emit(Manifest& m, const std::string& name, const Field& f, bool vtk = false) {
    pdt::write_field(m.path(name + ".pdt").string(), f);
    m.note_output(name + ".pdt");
    if (vtk) {
        pdt::write_vtk(m.path(name + ".vtk").string(), name, f);
        m.note_output(name + ".vtk");
    }
}

void emit_metrics(Manifest& m, const pdt::MetricsTable& table) {
    m.write_text("metrics.csv", pdt::metrics_csv(table));
    m.write_text("metrics.json", pdt::metrics_json(table));
    std::cout << pdt::metrics_csv(table);
}

int cmd_phantom(const CommonOpts& o) {
    pdt::ExperimentConfig cfg = resolve_config(o, "", "out_phantom");
    Manifest m(cfg.out, "phantom", cfg);
    const pdt::PhantomBuild pb = pdt::build_phantom(cfg.phantom, pdt::Grid3::cube(cfg.n));
    emit(m, "gamma", pb.gamma, true);
    m.j["diagnostics"]["lambda_min"] = pb.lambda_min;
    m.j["diagnostics"]["lambda_max"] = pb.lambda_max;
    m.j["diagnostics"]["kappa"] = pb.kappa;
    m.finish();
    return 0;
}

int cmd_forward(const CommonOpts& o) {
    pdt::ExperimentConfig cfg = resolve_config(o, "", "out_forward");
    Manifest m(cfg.out, "forward", cfg);
    const auto t0 = std::chrono::steady_clock::now();
    const pdt::Grid3 grid = pdt::Grid3::cube(cfg.n);
    const bool over = cfg.data_mode == pdt::DataMode::oversampled;
    const pdt::Grid3 solve_grid = over ? pdt::oversampled_grid(grid) : grid;
    const pdt::PhantomBuild pb = pdt::build_phantom(cfg.phantom, solve_grid);
    const pdt::Stencil27 a = pdt::assemble_conductivity(pb.gamma);
    pdt::SolveOptions opts;
    opts.tol = cfg.tol;

    pdt::ForwardSummary fwd;
    std::vector<pdt::ScalarField> u;
    for (std::size_t i = 0; i < cfg.solutions.size(); ++i) {
        pdt::SolveReport rep;
        u.push_back(pdt::solve_conductivity(a, pdt::boundary_datum(cfg.solutions[i]), opts, &rep));
        fwd.solves.push_back(rep);
        emit(m, "u_" + std::to_string(i), over ? pdt::downsample(u.back(), grid) : u.back());
    }

    std::vector<pdt::BasisPairing> pairings = cfg.pairings;
    if (pairings.empty()) pairings.push_back({{0, 1, 2}, {-1, -1}});
    for (std::size_t k = 0; k < pairings.size(); ++k) {
        const pdt::BasisPairing& p = pairings[k];
        std::vector<pdt::ScalarField> subset = {u[p.basis[0]], u[p.basis[1]], u[p.basis[2]]};
        for (int e : p.extras)
            if (e >= 0) subset.push_back(u[e]);
        pdt::PowerDensitySet pd = pdt::power_densities(pb.gamma, subset);
        pdt::ScalarField det =
            pdt::gradient_determinant(u[p.basis[0]], u[p.basis[1]], u[p.basis[2]]);
        const std::string tag = std::to_string(k);
        emit(m, "H_" + tag, over ? pdt::downsample(pd.basis, grid) : pd.basis);
        for (std::size_t j = 0; j < pd.cross.size(); ++j)
            emit(m, "cross_" + tag + "_" + std::to_string(j),
                 over ? pdt::downsample(pd.cross[j], grid) : pd.cross[j]);
        emit(m, "det_" + tag, over ? pdt::downsample(det, grid) : det);
        m.j["diagnostics"]["det_" + tag] = det_stats_json(pdt::det_stats(det));
    }
    m.j["solves"] = solve_reports_json(fwd);
    m.j["timings"]["total_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    m.finish();
    return 0;
}

int cmd_exp1(const CommonOpts& o, const std::string& fallback, const std::string& name) {
    pdt::ExperimentConfig cfg = resolve_config(o, fallback, "out_" + name);
    Manifest m(cfg.out, name, cfg);
    const pdt::Exp1Result r = pdt::run_exp1(cfg);
    emit(m, "sigma", r.sigma, true);
    emit(m, "sigma_true", r.sigma_true);
    emit_metrics(m, {{"sigma", r.sigma_report}});
    m.j["diagnostics"]["basis_det"] = det_stats_json(r.basis_det);
    m.j["solves"] = solve_reports_json(r.forward);
    m.j["timings"]["forward_seconds"] = r.forward.seconds;
    m.j["timings"]["recon_seconds"] = r.recon_seconds;
    m.j["timings"]["total_seconds"] = r.total_seconds;
    m.finish();
    return 0;
}

int cmd_exp2(const CommonOpts& o, const std::string& fallback, const std::string& name) {
    pdt::ExperimentConfig cfg = resolve_config(o, fallback, "out_" + name);
    Manifest m(cfg.out, name, cfg);
    const pdt::Exp2Result r = pdt::run_exp2(cfg);
    emit(m, "gamma_tilde", r.gamma_tilde_rec, true);
    emit(m, "tau", r.tau_rec, true);
    emit(m, "gamma", r.gamma_rec, true);
    emit(m, "gamma_true", r.truth.gamma);
    emit_metrics(m, {{"gamma_tilde", r.gamma_tilde_report},
                     {"tau", r.tau_report},
                     {"gamma", r.gamma_report}});
    m.j["diagnostics"]["basis_det"] = det_stats_json(r.basis_det);
    m.j["solves"] = solve_reports_json(r.forward);
    m.j["timings"]["forward_seconds"] = r.forward.seconds;
    m.j["timings"]["recon_seconds"] = r.recon_seconds;
    m.j["timings"]["total_seconds"] = r.total_seconds;
    m.finish();
    return 0;
}

int cmd_exp3(const CommonOpts& o, const std::string& fallback, const std::string& name) {
    pdt::ExperimentConfig cfg = resolve_config(o, fallback, "out_" + name);
    Manifest m(cfg.out, name, cfg);
    const pdt::Exp3Result r = pdt::run_exp3(cfg);
    emit(m, "tau", r.tau_rec, true);
    emit(m, "gamma_tilde_H", r.gamma_tilde_h.field);
    emit(m, "gamma_tilde_F", r.gamma_tilde_f.field, true);
    emit(m, "gamma", r.gamma_rec, true);
    emit(m, "gamma_true", r.truth.gamma);
    emit_metrics(m, {{"gamma_tilde_H", r.gamma_tilde_h_report},
                     {"gamma_tilde_F", r.gamma_tilde_f_report},
                     {"tau", r.tau_report},
                     {"gamma", r.gamma_report}});
    ordered_json dets = ordered_json::array();
    for (const pdt::DetStats& s : r.basis_dets) dets.push_back(det_stats_json(s));
    m.j["diagnostics"]["basis_dets"] = dets;
    m.j["diagnostics"]["min_det_sum_sq"] = r.min_det_sum_sq;
    m.j["diagnostics"]["plain_pipeline_aborted"] = r.plain_aborted;
    m.j["diagnostics"]["plain_pipeline_error"] = r.plain_what;
    m.j["diagnostics"]["flagged_H"] = r.gamma_tilde_h.flagged;
    m.j["diagnostics"]["flagged_F"] = r.gamma_tilde_f.flagged;
    m.j["solves"] = solve_reports_json(r.forward);
    m.j["timings"]["forward_seconds"] = r.forward.seconds;
    m.j["timings"]["recon_seconds"] = r.recon_seconds;
    m.j["timings"]["total_seconds"] = r.total_seconds;
    m.finish();
    return 0;
}

int cmd_metrics(const std::string& rec_path, const std::string& truth_path,
                const std::string& out, const std::string& label) {
    const std::string kind = pdt::probe_field_kind(rec_path);
    if (kind != pdt::probe_field_kind(truth_path))
        throw pdt::Error("metrics: field kinds differ");
    pdt::ReconstructionReport rep;
    pdt::Grid3 grid;
    if (kind == "scalar") {
        const pdt::ScalarField rec = pdt::read_scalar_field(rec_path);
        const pdt::ScalarField truth = pdt::read_scalar_field(truth_path);
        rep = pdt::relative_errors(rec, truth);
        grid = truth.grid;
    } else if (kind == "tensor6") {
        const pdt::SymTensorField rec = pdt::read_tensor_field(rec_path);
        const pdt::SymTensorField truth = pdt::read_tensor_field(truth_path);
        rep = pdt::relative_errors(rec, truth);
        grid = truth.grid;
    } else {
        throw pdt::Error("metrics: unsupported field kind " + kind);
    }
    pdt::ExperimentConfig cfg;  // minimal config stub for the manifest
    cfg.n = grid.n[0];
    cfg.out = out;
    cfg.solutions = {"x", "y", "z"};
    Manifest m(out, "metrics", cfg);
    emit_metrics(m, {{label, rep}});
    m.finish();
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"conductivity reconstruction from interior power densities"};
    app.require_subcommand(1);

    CommonOpts o;
    std::string rec_path, truth_path, metrics_out = "out_metrics", metrics_label = "field";

    CLI::App* phantom = app.add_subcommand("phantom", "sample a phantom conductivity");
    add_common(phantom, o);
    CLI::App* forward = app.add_subcommand("forward", "solve boundary data, emit power densities");
    add_common(forward, o);
    CLI::App* riso = app.add_subcommand("recon-iso", "scalar rotation-field reconstruction");
    add_common(riso, o);
    CLI::App* raniso = app.add_subcommand("recon-aniso", "pointwise 3+2 reconstruction");
    add_common(raniso, o);
    CLI::App* rstab = app.add_subcommand("recon-stab", "stabilized multi-basis reconstruction");
    add_common(rstab, o);
    CLI::App* metrics = app.add_subcommand("metrics", "error report between two field files");
    metrics->add_option("--rec", rec_path, "reconstructed field file")->required();
    metrics->add_option("--truth", truth_path, "ground truth field file")->required();
    metrics->add_option("--out", metrics_out, "output directory");
    metrics->add_option("--label", metrics_label, "column label");
    CLI::App* exp1 = app.add_subcommand("exp1", "scalar phantom preset");
    add_common(exp1, o, false);
    CLI::App* exp2 = app.add_subcommand("exp2", "anisotropic phantom preset");
    add_common(exp2, o, false);
    CLI::App* exp3 = app.add_subcommand("exp3", "stabilized multi-basis preset");
    add_common(exp3, o, false);

    CLI11_PARSE(app, argc, argv);

    try {
        if (phantom->parsed()) return cmd_phantom(o);
        if (forward->parsed()) return cmd_forward(o);
        if (riso->parsed()) return cmd_exp1(o, "", "recon-iso");
        // recon-aniso runs the plain pointwise pipeline; on data violating
        // its hypotheses it exits with the matching nonzero code.
        if (raniso->parsed()) return cmd_exp2(o, "", "recon-aniso");
        if (rstab->parsed()) return cmd_exp3(o, "", "recon-stab");
        if (metrics->parsed()) return cmd_metrics(rec_path, truth_path, metrics_out, metrics_label);
        if (exp1->parsed()) return cmd_exp1(o, "exp1", "exp1");
        if (exp2->parsed()) return cmd_exp2(o, "exp2", "exp2");
        if (exp3->parsed()) return cmd_exp3(o, "exp3", "exp3");
    } catch (const pdt::HypothesisError& e) {
        std::cerr << "hypothesis violation: " << e.what() << "\n  voxel: (" << e.voxel[0] << ", "
                  << e.voxel[1] << ", " << e.voxel[2] << ")  value: " << e.value << "\n";
        switch (e.kind) {
            case pdt::HypothesisError::Kind::not_spd: return kExitNotSpd;
            case pdt::HypothesisError::Kind::rank_deficient: return kExitRankDeficient;
            case pdt::HypothesisError::Kind::sign_change: return kExitSignChange;
        }
        return 1;
    } catch (const pdt::SolverError& e) {
        std::cerr << "solver failure: " << e.what() << "\n  residual " << e.achieved_residual
                  << " after " << e.iterations << " iterations\n";
        return kExitSolver;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
