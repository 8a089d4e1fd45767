#include "pdt/stab_recon.hpp"

#include <cmath>

#include "pdt/aniso_recon.hpp"
#include "pdt/elliptic.hpp"
#include "pdt/errors.hpp"
#include "pdt/stencils.hpp"

namespace pdt {

namespace {

std::array<int, 3> unflatten(const Grid3& g, std::size_t node) {
    const int i = int(node % g.n[0]);
    const int j = int((node / g.n[0]) % g.n[1]);
    const int k = int(node / (std::size_t(g.n[0]) * g.n[1]));
    return {i, j, k};
}

int sympair(int r, int c) {
    static const int map[3][3] = {{0, 1, 2}, {1, 3, 4}, {2, 4, 5}};
    return map[r][c];
}

// 1 / signed_cbrt(x) with the magnitude clamped, so nonpositive inputs stay
// finite.  Callers flag those voxels.
double inv_signed_cbrt(double x) {
    double c = signed_cbrt(x);
    if (std::abs(c) < 1e-30) c = (c < 0) ? -1e-30 : 1e-30;
    return 1.0 / c;
}

struct FlagCollector {
    std::size_t count = 0;
    std::size_t first = SIZE_MAX;

    void merge(std::size_t local_count, std::size_t local_first) {
#pragma omp critical
        {
            count += local_count;
            if (local_first < first) first = local_first;
        }
    }

    void fill(const Grid3& g, CombinedTensor& out) const {
        out.flagged = count;
        if (first != SIZE_MAX) out.first_flagged = unflatten(g, first);
    }
};

ScalarField det_field(const SymTensorField& h) {
    ScalarField d(h.grid);
    const std::size_t nn = h.grid.num_nodes();
#pragma omp parallel for schedule(static)
    for (long long node = 0; node < (long long)nn; ++node) d.data[node] = det3(h.at(node));
    return d;
}

SymTensorField cofactor_field(const SymTensorField& h) {
    SymTensorField c(h.grid);
    const std::size_t nn = h.grid.num_nodes();
#pragma omp parallel for schedule(static)
    for (long long node = 0; node < (long long)nn; ++node) c.set(node, cofactor3(h.at(node)));
    return c;
}

std::array<VectorField, 6> entry_gradients(const SymTensorField& f) {
    const Grid3& g = f.grid;
    std::array<VectorField, 6> out;
    for (int t = 0; t < 6; ++t) {
        ScalarField comp(g);
        for (std::size_t node = 0; node < g.num_nodes(); ++node)
            comp.data[node] = f.data[6 * node + t];
        out[t] = gradient(comp);
    }
    return out;
}

std::array<VectorField, 3> entry_gradients(const VectorField& f) {
    const Grid3& g = f.grid;
    std::array<VectorField, 3> out;
    for (int i = 0; i < 3; ++i) {
        ScalarField comp(g);
        for (std::size_t node = 0; node < g.num_nodes(); ++node)
            comp.data[node] = f.data[3 * node + i];
        out[i] = gradient(comp);
    }
    return out;
}

// Partial derivative of H along axis m at a node, read back from the six
// entry gradients.
Mat3 entry_slice(const std::array<VectorField, 6>& gh, std::size_t node, int m) {
    Mat3 d;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) d(r, c) = gh[sympair(r, c)].at(node)[m];
    return d;
}

std::vector<Mat3Field> constraints_from(const PowerDensitySet& pd,
                                        const std::array<VectorField, 6>& gh) {
    const Grid3& g = pd.basis.grid;
    if (pd.cross.size() < 2) throw Error("stabilized_constraints: need at least 2 extra solutions");
    std::vector<std::array<VectorField, 3>> gcross;
    for (const VectorField& cr : pd.cross) {
        if (!(cr.grid == g)) throw Error("stabilized_constraints: grid mismatch");
        gcross.push_back(entry_gradients(cr));
    }
    std::vector<Mat3Field> out;
    for (std::size_t j = 0; j < pd.cross.size(); ++j) out.emplace_back(g);
    const std::size_t nn = g.num_nodes();
#pragma omp parallel for schedule(static)
    for (long long node = 0; node < (long long)nn; ++node) {
        const Mat3 h = pd.basis.at(node);
        const Mat3 cof = cofactor3(h);
        const double det = det3(h);
        Mat3 dcof[3];
        Vec3 ddet;
        for (int m = 0; m < 3; ++m) {
            const Mat3 dh = entry_slice(gh, node, m);
            dcof[m] = cofactor_differential(h, dh);
            ddet[m] = frobenius_inner(cof, dh);  // Jacobi's formula
        }
        for (std::size_t j = 0; j < pd.cross.size(); ++j) {
            const Vec3 cr = pd.cross[j].at(node);
            const Vec3 mu = -(cof * cr);
            Vec3 dmu[3];
            for (int m = 0; m < 3; ++m) {
                Vec3 dcr;
                for (int i = 0; i < 3; ++i) dcr[i] = gcross[j][i].at(node)[m];
                dmu[m] = -(dcof[m] * cr) - cof * dcr;
            }
            Mat3 zz;
            for (int i = 0; i < 3; ++i) {
                Vec3 gmi;
                for (int m = 0; m < 3; ++m) gmi[m] = dmu[m][i];
                zz.set_col(i, det * gmi - mu[i] * ddet);
            }
            out[j].set(node, zz);
        }
    }
    return out;
}

}  // namespace

std::vector<VectorField> stabilized_mu(const PowerDensitySet& pd) {
    const Grid3& g = pd.basis.grid;
    if (pd.cross.size() < 2) throw Error("stabilized_mu: need at least 2 extra solutions");
    std::vector<VectorField> mu;
    for (std::size_t j = 0; j < pd.cross.size(); ++j) mu.emplace_back(g);
    const std::size_t nn = g.num_nodes();
#pragma omp parallel for schedule(static)
    for (long long node = 0; node < (long long)nn; ++node) {
        const Mat3 cof = cofactor3(pd.basis.at(node));
        for (std::size_t j = 0; j < pd.cross.size(); ++j)
            mu[j].set(node, -(cof * pd.cross[j].at(node)));
    }
    return mu;
}

std::vector<Mat3Field> stabilized_constraints(const PowerDensitySet& pd) {
    return constraints_from(pd, entry_gradients(pd.basis));
}

LocalCandidate local_candidate(const std::vector<Mat3Field>& z, const SymTensorField& h,
                               const SymTensorField& h_cof) {
    const Grid3& g = h.grid;
    if (z.size() < 2) throw Error("local_candidate: need two constraint sets");
    LocalCandidate lc{Mat3Field(g), SymTensorField(g), ScalarField(g)};
    const std::size_t nn = g.num_nodes();
#pragma omp parallel for schedule(static)
    for (long long node = 0; node < (long long)nn; ++node) {
        const NullDirection nd =
            null_direction(constraint_stack(z[0].at(node), z[1].at(node), h.at(node)));
        lc.b.set(node, nd.b);
        lc.smin.data[node] = nd.gap;
        const Mat3 raw = nd.b * h_cof.at(node) * transpose(nd.b);
        lc.g.set(node, raw);
    }
    return lc;
}

BasisBundle make_bundle(std::string name, const PowerDensitySet& pd) {
    BasisBundle bundle;
    bundle.name = std::move(name);
    bundle.h = pd.basis;
    bundle.det_h = det_field(pd.basis);
    bundle.h_cof = cofactor_field(pd.basis);
    bundle.h_grad = entry_gradients(pd.basis);
    const std::vector<Mat3Field> z = constraints_from(pd, bundle.h_grad);
    LocalCandidate lc = local_candidate(z, bundle.h, bundle.h_cof);
    bundle.b_prime = std::move(lc.b);
    bundle.g_prime = std::move(lc.g);
    bundle.smin = std::move(lc.smin);
    return bundle;
}

SymTensorField basis_gamma_tilde(const BasisBundle& bundle) {
    const Grid3& g = bundle.h.grid;
    SymTensorField gt(g);
    const std::size_t nn = g.num_nodes();
#pragma omp parallel for schedule(static)
    for (long long node = 0; node < (long long)nn; ++node) {
        const Mat3 gp = bundle.g_prime.at(node);
        gt.set(node, gp * inv_signed_cbrt(det3(gp)));
    }
    return gt;
}

StabilizedSolution assemble_and_solve(const std::vector<BasisBundle>& bundles,
                                      const ScalarField& tau_boundary,
                                      const SolveOptions& opts, SolveReport* report) {
    if (bundles.empty()) throw Error("assemble_and_solve: no bundles");
    const Grid3& g = bundles[0].h.grid;
    for (const BasisBundle& b : bundles)
        if (!(b.h.grid == g)) throw Error("assemble_and_solve: grid mismatch");
    if (!(tau_boundary.grid == g)) throw Error("assemble_and_solve: grid mismatch");

    const std::size_t m = bundles.size();
    StabilizedSolution sol;
    sol.w = VectorField(g);
    sol.gamma_tilde_m = SymTensorField(g);
    const std::size_t nn = g.num_nodes();
    struct Bad {
        bool found = false;
        std::size_t node = 0;
        double value = 0;
    } bad;
#pragma omp parallel for schedule(static)
    for (long long node = 0; node < (long long)nn; ++node) {
        Mat3 msum;
        Vec3 rhs{0, 0, 0};
        for (std::size_t k = 0; k < m; ++k) {
            const double det = bundles[k].det_h.data[node];
            const Mat3 cof = bundles[k].h_cof.at(node);
            const Mat3 gp = bundles[k].g_prime.at(node);
            const Mat3 bp = bundles[k].b_prime.at(node);
            msum += det * gp;
            Mat3 dcof[3];
            Vec3 ddet;
            for (int mm = 0; mm < 3; ++mm) {
                const Mat3 dh = entry_slice(bundles[k].h_grad, node, mm);
                dcof[mm] = cofactor_differential(bundles[k].h.at(node), dh);
                ddet[mm] = frobenius_inner(cof, dh);
            }
            Vec3 acc{0, 0, 0};
            for (int j = 0; j < 3; ++j) {
                double cj = 0;
                for (int l = 0; l < 3; ++l) {
                    Vec3 gjl;
                    for (int mm = 0; mm < 3; ++mm) gjl[mm] = dcof[mm](j, l);
                    cj += dot(gjl, bp.col(l));
                }
                acc += cj * bp.col(j);
            }
            rhs += (2.0 / 3.0) * det * acc - (1.0 / 3.0) * (gp * ddet);
        }
        const std::array<double, 3> lam = sym3_eigenvalues(msum);
        if (!(lam[0] > 1e-10 * std::abs(trace(msum)))) {
#pragma omp critical
            {
                if (!bad.found || std::size_t(node) < bad.node) {
                    bad.found = true;
                    bad.node = node;
                    bad.value = lam[0];
                }
            }
            continue;
        }
        sol.w.set(node, inv3(msum) * rhs);
        sol.gamma_tilde_m.set(node, msum * (1.0 / std::cbrt(det3(msum))));
    }
    if (bad.found)
        throw HypothesisError(HypothesisError::Kind::not_spd,
                              "assemble_and_solve: combined form M is not positive definite "
                              "(all bases degenerate jointly)",
                              unflatten(g, bad.node), bad.value);

    ScalarField vb(g);
    for (int k = 0; k < g.n[2]; ++k)
        for (int j = 0; j < g.n[1]; ++j)
            for (int i = 0; i < g.n[0]; ++i)
                if (g.boundary(i, j, k)) vb(i, j, k) = std::log(tau_boundary(i, j, k));
    sol.tau = exp_gradient_potential(sol.w, vb, opts, report);
    return sol;
}

CombinedTensor combine_det_weighted(const std::vector<BasisBundle>& bundles) {
    if (bundles.empty()) throw Error("combine_det_weighted: no bundles");
    const Grid3& g = bundles[0].h.grid;
    CombinedTensor out;
    out.field = SymTensorField(g);
    const std::size_t nn = g.num_nodes();
    FlagCollector flags;
#pragma omp parallel
    {
        std::size_t local_count = 0, local_first = SIZE_MAX;
#pragma omp for schedule(static)
        for (long long node = 0; node < (long long)nn; ++node) {
            Mat3 sum;
            bool clamped = false;
            for (const BasisBundle& b : bundles) {
                const Mat3 gp = b.g_prime.at(node);
                const double det = det3(gp);
                if (det <= 0) clamped = true;
                sum += b.det_h.data[node] * (gp * inv_signed_cbrt(det));
            }
            const double ds = det3(sum);
            if (ds <= 0) clamped = true;
            out.field.set(node, sum * inv_signed_cbrt(ds));
            if (clamped) {
                ++local_count;
                if (std::size_t(node) < local_first) local_first = node;
            }
        }
        flags.merge(local_count, local_first);
    }
    flags.fill(g, out);
    return out;
}

CombinedTensor combine_frobenius(const std::vector<BasisBundle>& bundles) {
    if (bundles.size() < 2) throw Error("combine_frobenius: need at least two bundles");
    const Grid3& g = bundles[0].h.grid;
    const std::size_t m = bundles.size();
    CombinedTensor out;
    out.field = SymTensorField(g);
    const std::size_t nn = g.num_nodes();
    FlagCollector flags;
#pragma omp parallel
    {
        std::size_t local_count = 0, local_first = SIZE_MAX;
        std::vector<Mat3> gt(m);
        std::vector<double> fn(m);
#pragma omp for schedule(static)
        for (long long node = 0; node < (long long)nn; ++node) {
            bool clamped = false;
            for (std::size_t k = 0; k < m; ++k) {
                const Mat3 gp = bundles[k].g_prime.at(node);
                const double det = det3(gp);
                if (det <= 0) clamped = true;
                gt[k] = gp * inv_signed_cbrt(det);
                fn[k] = frobenius_norm(gt[k]);
            }
            // Drop the basis whose normalized tensor has the largest
            // Frobenius norm; strict > keeps the lowest index on ties.
            std::size_t drop = 0;
            for (std::size_t k = 1; k < m; ++k)
                if (fn[k] > fn[drop]) drop = k;
            Mat3 sum;
            for (std::size_t k = 0; k < m; ++k) {
                if (k == drop) continue;
                if (fn[k] < 1e-30) {
                    clamped = true;
                    continue;
                }
                sum += gt[k] * (1.0 / fn[k]);
            }
            const double ds = det3(sum);
            if (ds <= 0) clamped = true;
            out.field.set(node, sum * inv_signed_cbrt(ds));
            if (clamped) {
                ++local_count;
                if (std::size_t(node) < local_first) local_first = node;
            }
        }
        flags.merge(local_count, local_first);
    }
    flags.fill(g, out);
    return out;
}

}  // namespace pdt
