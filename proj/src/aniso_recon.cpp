#include "pdt/aniso_recon.hpp"

#include <cmath>

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

// Index of the (r,c) entry in the symmetric component order xx,xy,xz,yy,yz,zz.
int sympair(int r, int c) {
    static const int map[3][3] = {{0, 1, 2}, {1, 3, 4}, {2, 4, 5}};
    return map[r][c];
}

struct BadVoxel {
    bool found = false;
    std::size_t node = 0;
    HypothesisError::Kind kind = HypothesisError::Kind::not_spd;
    double value = 0;
};

[[noreturn]] void throw_bad(const Grid3& g, const BadVoxel& bad, const std::string& what) {
    throw HypothesisError(bad.kind, what, unflatten(g, bad.node), bad.value);
}

}  // namespace

MuField mu_coefficients(const PowerDensitySet& pd, double det_ratio_floor) {
    const Grid3& g = pd.basis.grid;
    if (pd.cross.size() < 2) throw Error("mu_coefficients: need at least 2 extra solutions");
    MuField out;
    for (std::size_t j = 0; j < pd.cross.size(); ++j) out.mu.emplace_back(g);

    const std::size_t nn = g.num_nodes();
    BadVoxel bad;
#pragma omp parallel for schedule(static)
    for (long long node = 0; node < (long long)nn; ++node) {
        const Mat3 h = pd.basis.at(node);
        const double det = det3(h);
        const double diag = h(0, 0) * h(1, 1) * h(2, 2);
        HypothesisError::Kind kind;
        double value = 0;
        bool ok = true;
        if (h(0, 0) <= 0 || h(1, 1) <= 0 || h(2, 2) <= 0) {
            ok = false;
            kind = HypothesisError::Kind::not_spd;
            value = std::min({h(0, 0), h(1, 1), h(2, 2)});
        } else if (det < -det_ratio_floor * diag) {
            ok = false;
            kind = HypothesisError::Kind::sign_change;
            value = det;
        } else if (det < det_ratio_floor * diag) {
            // Hadamard ratio det/(H11 H22 H33) measures how far the basis
            // gradients are from degeneracy, scale-free.  Tiny negative
            // determinants land here too: they are degeneracy, not a true
            // sign change (H is a Gram matrix up to rounding).
            ok = false;
            kind = HypothesisError::Kind::rank_deficient;
            value = det / diag;
        }
        if (!ok) {
#pragma omp critical
            {
                if (!bad.found || std::size_t(node) < bad.node) {
                    bad.found = true;
                    bad.node = node;
                    bad.kind = kind;
                    bad.value = value;
                }
            }
            continue;
        }
        const Mat3 hinv = cofactor3(h) * (1.0 / det);
        for (std::size_t j = 0; j < pd.cross.size(); ++j)
            out.mu[j].set(node, -(hinv * pd.cross[j].at(node)));
    }
    if (bad.found)
        throw_bad(g, bad,
                  "mu_coefficients: power density matrix degenerate (use the stabilized "
                  "pipeline)");
    return out;
}

Mat3 omega_matrix(int i) {
    const int p = (i + 1) % 3, q = (i + 2) % 3;
    Mat3 m;
    m(p, q) = 1;
    m(q, p) = -1;
    return m;
}

std::array<Mat3, 8> constraint_stack(const Mat3& z1, const Mat3& z2, const Mat3& h) {
    std::array<Mat3, 8> s;
    const Mat3 c1 = z1 * h, c2 = z2 * h;
    s[0] = z1;
    for (int i = 0; i < 3; ++i) s[1 + i] = c1 * omega_matrix(i);
    s[4] = z2;
    for (int i = 0; i < 3; ++i) s[5 + i] = c2 * omega_matrix(i);
    return s;
}

ConstraintField constraint_field(const MuField& mu, const Grid3& g) {
    ConstraintField cf;
    cf.grid = g;
    for (const VectorField& m : mu.mu) {
        if (!(m.grid == g)) throw Error("constraint_field: grid mismatch");
        VectorField gm[3];
        for (int i = 0; i < 3; ++i) {
            ScalarField comp(g);
            for (std::size_t node = 0; node < g.num_nodes(); ++node)
                comp.data[node] = m.data[3 * node + i];
            gm[i] = gradient(comp);
        }
        Mat3Field z(g);
        const std::size_t nn = g.num_nodes();
#pragma omp parallel for schedule(static)
        for (long long node = 0; node < (long long)nn; ++node) {
            Mat3 zz;
            for (int i = 0; i < 3; ++i) zz.set_col(i, gm[i].at(node));
            z.set(node, zz);
        }
        cf.z.push_back(std::move(z));
    }
    return cf;
}

Mat3Field recover_AS(const ConstraintField& cf, const SymTensorField& h, ScalarField* smin) {
    const Grid3& g = cf.grid;
    if (!(h.grid == g)) throw Error("recover_AS: grid mismatch");
    if (cf.z.size() < 2) throw Error("recover_AS: need two constraint sets");
    Mat3Field b(g);
    if (smin) *smin = ScalarField(g);
    const std::size_t nn = g.num_nodes();
    BadVoxel bad;
#pragma omp parallel for schedule(static)
    for (long long node = 0; node < (long long)nn; ++node) {
        const Mat3 hm = h.at(node);
        const NullDirection nd =
            null_direction(constraint_stack(cf.z[0].at(node), cf.z[1].at(node), hm));
        if (smin) smin->data[node] = nd.gap;
        const double det_h = det3(hm);
        const double det_b = det3(nd.b);
        bool ok = true;
        HypothesisError::Kind kind;
        double value = 0;
        if (!nd.isolated || std::abs(det_b) < 1e-8) {
            ok = false;
            kind = HypothesisError::Kind::rank_deficient;
            value = nd.isolated ? det_b : nd.gap;
        } else if (det_h <= 0) {
            ok = false;
            kind = HypothesisError::Kind::sign_change;
            value = det_h;
        }
        if (!ok) {
#pragma omp critical
            {
                if (!bad.found || std::size_t(node) < bad.node) {
                    bad.found = true;
                    bad.node = node;
                    bad.kind = kind;
                    bad.value = value;
                }
            }
            continue;
        }
        b.set(node, signed_cbrt(std::sqrt(det_h) / det_b) * nd.b);
    }
    if (bad.found)
        throw_bad(g, bad,
                  "recover_AS: constraint stack has no usable null direction (use the "
                  "stabilized pipeline)");
    return b;
}

SymTensorField gamma_tilde(const Mat3Field& b, const SymTensorField& h) {
    const Grid3& g = b.grid;
    if (!(h.grid == g)) throw Error("gamma_tilde: grid mismatch");
    SymTensorField gt(g);
    const std::size_t nn = g.num_nodes();
    BadVoxel bad;
#pragma omp parallel for schedule(static)
    for (long long node = 0; node < (long long)nn; ++node) {
        const Mat3 hm = h.at(node);
        const double det = det3(hm);
        if (det <= 0) {
#pragma omp critical
            {
                if (!bad.found || std::size_t(node) < bad.node) {
                    bad.found = true;
                    bad.node = node;
                    bad.kind = HypothesisError::Kind::sign_change;
                    bad.value = det;
                }
            }
            continue;
        }
        const Mat3 hinv = cofactor3(hm) * (1.0 / det);
        const Mat3 bm = b.at(node);
        const Mat3 raw = bm * hinv * transpose(bm);
        Mat3 sym = 0.5 * (raw + transpose(raw));
        const double d = det3(sym);
        if (d <= 0) {
#pragma omp critical
            {
                if (!bad.found || std::size_t(node) < bad.node) {
                    bad.found = true;
                    bad.node = node;
                    bad.kind = HypothesisError::Kind::sign_change;
                    bad.value = d;
                }
            }
            continue;
        }
        gt.set(node, sym * (1.0 / std::cbrt(d)));
    }
    if (bad.found) throw_bad(g, bad, "gamma_tilde: nonpositive determinant");
    return gt;
}

VectorField log_tau_gradient(const Mat3Field& b, const SymTensorField& gamma_tilde,
                             const SymTensorField& h) {
    const Grid3& g = b.grid;
    if (!(gamma_tilde.grid == g) || !(h.grid == g)) throw Error("log_tau_gradient: grid mismatch");
    const std::size_t nn = g.num_nodes();

    // H^{jl} entry fields and log|H|.
    ScalarField hinv_comp[6];
    for (int t = 0; t < 6; ++t) hinv_comp[t] = ScalarField(g);
    ScalarField logdet(g);
    BadVoxel bad;
#pragma omp parallel for schedule(static)
    for (long long node = 0; node < (long long)nn; ++node) {
        const Mat3 hm = h.at(node);
        const double det = det3(hm);
        if (det <= 0) {
#pragma omp critical
            {
                if (!bad.found || std::size_t(node) < bad.node) {
                    bad.found = true;
                    bad.node = node;
                    bad.kind = HypothesisError::Kind::sign_change;
                    bad.value = det;
                }
            }
            continue;
        }
        const Mat3 hinv = cofactor3(hm) * (1.0 / det);
        hinv_comp[0].data[node] = hinv(0, 0);
        hinv_comp[1].data[node] = hinv(0, 1);
        hinv_comp[2].data[node] = hinv(0, 2);
        hinv_comp[3].data[node] = hinv(1, 1);
        hinv_comp[4].data[node] = hinv(1, 2);
        hinv_comp[5].data[node] = hinv(2, 2);
        logdet.data[node] = std::log(det);
    }
    if (bad.found) throw_bad(g, bad, "log_tau_gradient: nonpositive det H");

    VectorField ghi[6];
    for (int t = 0; t < 6; ++t) ghi[t] = gradient(hinv_comp[t]);
    const VectorField gld = gradient(logdet);

    VectorField w(g);
#pragma omp parallel for schedule(static)
    for (long long node = 0; node < (long long)nn; ++node) {
        const Mat3 bm = b.at(node);
        Vec3 acc{0, 0, 0};
        for (int j = 0; j < 3; ++j) {
            double cj = 0;
            for (int l = 0; l < 3; ++l)
                cj += dot(ghi[sympair(j, l)].at(node), bm.col(l));
            acc += cj * bm.col(j);
        }
        const Mat3 ginv = inv3(gamma_tilde.at(node));
        w.set(node, (1.0 / 3.0) * gld.at(node) + (2.0 / 3.0) * (ginv * acc));
    }
    return w;
}

ScalarField recover_tau(const VectorField& w, const ScalarField& tau_boundary,
                        const SolveOptions& opts, SolveReport* report) {
    const Grid3& g = w.grid;
    if (!(tau_boundary.grid == g)) throw Error("recover_tau: grid mismatch");
    ScalarField vb(g);
    for (int k = 0; k < g.n[2]; ++k)
        for (int j = 0; j < g.n[1]; ++j)
            for (int i = 0; i < g.n[0]; ++i)
                if (g.boundary(i, j, k)) vb(i, j, k) = std::log(tau_boundary(i, j, k));
    return exp_gradient_potential(w, vb, opts, report);
}

}  // namespace pdt
