#pragma once

// Error metrics between reconstructed and true fields, and tabulation of the
// results.  All reductions run serially in node order so reports are
// bit-identical across thread counts.

#include <string>
#include <utility>
#include <vector>

#include "pdt/grid.hpp"

namespace pdt {

struct ReconstructionReport {
    double rel_l1 = 0;            // sum |diff| / sum |truth|
    double rel_l2 = 0;            // sqrt(sum diff^2 / sum truth^2)
    double rel_linf = 0;          // max |diff| / max |truth|
    double max_pointwise_rel = 0; // max over voxels of |diff| / |truth|
};

// Scalar fields use |.|; tensor fields use the Frobenius norm per voxel.
// The pointwise ratio skips voxels whose truth magnitude is below 1e-14.
ReconstructionReport relative_errors(const ScalarField& approx, const ScalarField& truth);
ReconstructionReport relative_errors(const SymTensorField& approx, const SymTensorField& truth);

// Fraction of all voxels whose pointwise relative error exceeds threshold
// (voxels with truth magnitude below 1e-14 never count).
double volume_fraction_above(const ScalarField& approx, const ScalarField& truth,
                             double threshold);
double volume_fraction_above(const SymTensorField& approx, const SymTensorField& truth,
                             double threshold);

using MetricsTable = std::vector<std::pair<std::string, ReconstructionReport>>;

// CSV with one row per metric ("Rel. L1 error", "Rel. L2 error",
// "Rel. Linf error", "Max. pointwise rel. error") and one column per entry.
std::string metrics_csv(const MetricsTable& table);

// Same content as a JSON object keyed by column label.
std::string metrics_json(const MetricsTable& table);

}  // namespace pdt
