#include "pdt/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <functional>

#include "json.hpp"
#include "pdt/errors.hpp"

namespace pdt {

namespace {

constexpr double kTruthFloor = 1e-14;

// Shared accumulation over per-voxel magnitudes |diff| and |truth|.
ReconstructionReport accumulate(std::size_t nn,
                                const std::function<void(std::size_t, double&, double&)>& mags) {
    double sum_d = 0, sum_t = 0, sum_d2 = 0, sum_t2 = 0;
    double max_d = 0, max_t = 0, max_rel = 0;
    for (std::size_t node = 0; node < nn; ++node) {
        double d = 0, t = 0;
        mags(node, d, t);
        sum_d += d;
        sum_t += t;
        sum_d2 += d * d;
        sum_t2 += t * t;
        if (d > max_d) max_d = d;
        if (t > max_t) max_t = t;
        if (t >= kTruthFloor && d / t > max_rel) max_rel = d / t;
    }
    if (sum_t <= 0) throw Error("relative_errors: truth field is identically zero");
    ReconstructionReport r;
    r.rel_l1 = sum_d / sum_t;
    r.rel_l2 = std::sqrt(sum_d2 / sum_t2);
    r.rel_linf = max_d / max_t;
    r.max_pointwise_rel = max_rel;
    return r;
}

double fraction_above(std::size_t nn,
                      const std::function<void(std::size_t, double&, double&)>& mags,
                      double threshold) {
    std::size_t count = 0;
    for (std::size_t node = 0; node < nn; ++node) {
        double d = 0, t = 0;
        mags(node, d, t);
        if (t >= kTruthFloor && d / t > threshold) ++count;
    }
    return double(count) / double(nn);
}

std::function<void(std::size_t, double&, double&)> scalar_mags(const ScalarField& a,
                                                               const ScalarField& t) {
    if (!(a.grid == t.grid)) throw Error("relative_errors: grid mismatch");
    return [&a, &t](std::size_t node, double& d, double& tt) {
        d = std::abs(a.data[node] - t.data[node]);
        tt = std::abs(t.data[node]);
    };
}

std::function<void(std::size_t, double&, double&)> tensor_mags(const SymTensorField& a,
                                                               const SymTensorField& t) {
    if (!(a.grid == t.grid)) throw Error("relative_errors: grid mismatch");
    return [&a, &t](std::size_t node, double& d, double& tt) {
        // Frobenius norms; off-diagonal components count twice.
        const double* pa = &a.data[6 * node];
        const double* pt = &t.data[6 * node];
        static const double w[6] = {1, 2, 2, 1, 2, 1};
        double d2 = 0, t2 = 0;
        for (int c = 0; c < 6; ++c) {
            const double dc = pa[c] - pt[c];
            d2 += w[c] * dc * dc;
            t2 += w[c] * pt[c] * pt[c];
        }
        d = std::sqrt(d2);
        tt = std::sqrt(t2);
    };
}

const char* kRowLabels[4] = {"Rel. L1 error", "Rel. L2 error", "Rel. Linf error",
                             "Max. pointwise rel. error"};

double row_value(const ReconstructionReport& r, int row) {
    switch (row) {
        case 0: return r.rel_l1;
        case 1: return r.rel_l2;
        case 2: return r.rel_linf;
        default: return r.max_pointwise_rel;
    }
}

std::string format_value(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.8f", v);
    return buf;
}

}  // namespace

ReconstructionReport relative_errors(const ScalarField& approx, const ScalarField& truth) {
    return accumulate(truth.grid.num_nodes(), scalar_mags(approx, truth));
}

ReconstructionReport relative_errors(const SymTensorField& approx, const SymTensorField& truth) {
    return accumulate(truth.grid.num_nodes(), tensor_mags(approx, truth));
}

double volume_fraction_above(const ScalarField& approx, const ScalarField& truth,
                             double threshold) {
    return fraction_above(truth.grid.num_nodes(), scalar_mags(approx, truth), threshold);
}

double volume_fraction_above(const SymTensorField& approx, const SymTensorField& truth,
                             double threshold) {
    return fraction_above(truth.grid.num_nodes(), tensor_mags(approx, truth), threshold);
}

std::string metrics_csv(const MetricsTable& table) {
    std::string out = "Metric";
    for (const auto& [label, rep] : table) {
        (void)rep;
        out += "," + label;
    }
    out += "\n";
    for (int row = 0; row < 4; ++row) {
        out += kRowLabels[row];
        for (const auto& [label, rep] : table) {
            (void)label;
            out += "," + format_value(row_value(rep, row));
        }
        out += "\n";
    }
    return out;
}

std::string metrics_json(const MetricsTable& table) {
    nlohmann::ordered_json j;
    for (const auto& [label, rep] : table) {
        nlohmann::ordered_json col;
        for (int row = 0; row < 4; ++row) col[kRowLabels[row]] = row_value(rep, row);
        j[label] = col;
    }
    return j.dump(2);
}

}  // namespace pdt
