#pragma once

// End-to-end experiment drivers: phantom -> forward solves -> power
// densities -> reconstruction -> error reports.  Three stock setups:
//   1. scalar phantom, coordinate boundary data, rotation-field pipeline;
//   2. anisotropic phantom, 3+2 solutions, pointwise pipeline;
//   3. strongly anisotropic phantom, four overlapping 3+2 bases,
//      stabilized pipeline plus the two combination formulas.

#include <array>
#include <string>
#include <vector>

#include <json.hpp>

#include "pdt/errors.hpp"
#include "pdt/forward.hpp"
#include "pdt/grid.hpp"
#include "pdt/metrics.hpp"
#include "pdt/phantom.hpp"
#include "pdt/stab_recon.hpp"

namespace pdt {

// same_grid evaluates the power densities on the reconstruction grid (the
// data is then consistent with the discrete forward operator); oversampled
// computes them on a grid of doubled resolution and restricts.
enum class DataMode { same_grid, oversampled };

// One 3+2 basis: indices into the experiment's solution list.
struct BasisPairing {
    std::array<int, 3> basis;
    std::array<int, 2> extras;
};

struct ExperimentConfig {
    int n = 64;        // nodes per axis of the reconstruction grid
    double tol = 1e-10;  // linear solver tolerance
    std::string out;   // output directory for the CLI; unused by run_*
    PhantomSpec phantom;
    std::vector<std::string> solutions;  // boundary catalog keys, solved once
    std::vector<BasisPairing> pairings;  // empty for the scalar experiment
    DataMode data_mode = DataMode::same_grid;
    int sweep_axis = 0;
    bool sweep_reverse = false;
    bool sweep_average = false;  // average the gradient field over all 6 sweeps
    int threads = 0;             // 0 keeps the current setting
};

nlohmann::ordered_json to_json(const ExperimentConfig& c);
// Validates ranges, catalog membership and pairing indices; throws Error.
ExperimentConfig config_from_json(const nlohmann::json& j);

ExperimentConfig exp1_config(int n = 64);
ExperimentConfig exp2_config(int n = 64);
ExperimentConfig exp3_config(int n = 48);

struct ForwardSummary {
    std::vector<SolveReport> solves;  // one per boundary datum
    double seconds = 0;
};

// Ground truth sampled on the reconstruction grid.
struct Truth {
    SymTensorField gamma;
    ScalarField tau;              // det(gamma)^{1/3}
    SymTensorField gamma_tilde;   // gamma / tau
};
Truth sample_truth(const PhantomSpec& spec, const Grid3& g);

struct Exp1Result {
    Grid3 grid;
    ScalarField sigma;
    ScalarField sigma_true;
    DetStats basis_det;  // det of the basis gradient matrix
    ReconstructionReport sigma_report;
    ForwardSummary forward;
    SolveReport poisson;
    double recon_seconds = 0;
    double total_seconds = 0;
};
Exp1Result run_exp1(const ExperimentConfig& cfg);

struct Exp2Result {
    Grid3 grid;
    SymTensorField gamma_tilde_rec;
    ScalarField tau_rec;
    SymTensorField gamma_rec;
    Truth truth;
    DetStats basis_det;
    ReconstructionReport gamma_tilde_report, tau_report, gamma_report;
    ForwardSummary forward;
    SolveReport poisson;
    double recon_seconds = 0;
    double total_seconds = 0;
};
Exp2Result run_exp2(const ExperimentConfig& cfg);

struct Exp3Result {
    Grid3 grid;
    ScalarField tau_rec;
    CombinedTensor gamma_tilde_h;  // det-weighted combination
    CombinedTensor gamma_tilde_f;  // Frobenius combination
    SymTensorField gamma_rec;      // tau_rec * gamma_tilde_f
    Truth truth;
    std::vector<DetStats> basis_dets;  // per pairing, det of the basis gradients
    double min_det_sum_sq = 0;         // min over voxels of sum_k det_k^2
    // Outcome of running the plain pointwise pipeline on the first basis:
    // expected to abort by hypothesis violation on this phantom.
    bool plain_aborted = false;
    HypothesisError::Kind plain_kind = HypothesisError::Kind::rank_deficient;
    std::string plain_what;
    ReconstructionReport gamma_tilde_h_report, gamma_tilde_f_report, tau_report, gamma_report;
    ForwardSummary forward;
    SolveReport poisson;
    double recon_seconds = 0;
    double total_seconds = 0;
};
Exp3Result run_exp3(const ExperimentConfig& cfg);

}  // namespace pdt
