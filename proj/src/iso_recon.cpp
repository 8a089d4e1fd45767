#include "pdt/iso_recon.hpp"

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

// Inverse of a lower-triangular matrix with positive diagonal.
Mat3 lower_tri_inverse(const Mat3& t) {
    const double a = t(0, 0), b = t(1, 0), c = t(1, 1), d = t(2, 0), e = t(2, 1), f = t(2, 2);
    Mat3 r;
    r(0, 0) = 1 / a;
    r(1, 1) = 1 / c;
    r(2, 2) = 1 / f;
    r(1, 0) = -b / (a * c);
    r(2, 1) = -e / (c * f);
    r(2, 0) = (b * e - d * c) / (a * c * f);
    return r;
}

}  // namespace

TransitionField transition_field(const SymTensorField& h) {
    const Grid3& g = h.grid;
    TransitionField tf{Mat3Field(g), Mat3Field(g)};
    const std::size_t nn = g.num_nodes();
    bool found = false;
    std::size_t bad_node = 0;
    double bad_minor = 0;
#pragma omp parallel for schedule(static)
    for (long long node = 0; node < (long long)nn; ++node) {
        const Mat3 hm = h.at(node);
        const std::array<double, 3> m = leading_minors(hm);
        if (m[0] <= 0 || m[1] <= 0 || m[2] <= 0) {
#pragma omp critical
            {
                if (!found || std::size_t(node) < bad_node) {
                    found = true;
                    bad_node = node;
                    bad_minor = m[0] <= 0 ? m[0] : (m[1] <= 0 ? m[1] : m[2]);
                }
            }
            continue;
        }
        const Mat3 t = transition_matrix(hm);
        tf.t.set(node, t);
        tf.tinv.set(node, lower_tri_inverse(t));
    }
    if (found) {
        const std::array<int, 3> v = unflatten(g, bad_node);
        throw HypothesisError(HypothesisError::Kind::not_spd,
                              "transition_field: power density matrix not positive definite", v,
                              bad_minor);
    }
    return tf;
}

ConnectionField connection_field(const TransitionField& tf) {
    const Grid3& g = tf.t.grid;
    const std::size_t nn = g.num_nodes();

    // Six lower-triangular entries of T as scalar fields, pair order
    // (0,0),(1,0),(1,1),(2,0),(2,1),(2,2).
    const int tri_r[6] = {0, 1, 1, 2, 2, 2};
    const int tri_c[6] = {0, 0, 1, 0, 1, 2};
    std::vector<VectorField> gt;
    gt.reserve(6);
    for (int p = 0; p < 6; ++p) {
        ScalarField entry(g);
        for (std::size_t node = 0; node < nn; ++node)
            entry.data[node] = tf.t.data[9 * node + 3 * tri_c[p] + tri_r[p]];
        gt.push_back(gradient(entry));
    }

    ConnectionField conn(g);
#pragma omp parallel for schedule(static)
    for (long long node = 0; node < (long long)nn; ++node) {
        const Mat3 tinv = tf.tinv.at(node);
        Vec3 v[3][3];
        for (int i = 0; i < 3; ++i)
            for (int k = 0; k <= i; ++k) {
                Vec3 s{0, 0, 0};
                for (int j = k; j <= i; ++j)
                    s += gt[i * (i + 1) / 2 + j].at(node) * tinv(j, k);
                v[i][k] = s;
            }
        for (int i = 0; i < 3; ++i)
            for (int k = i + 1; k < 3; ++k) v[i][k] = Vec3{0, 0, 0};
        for (int i = 0; i < 3; ++i)
            for (int k = 0; k <= i; ++k) {
                const Vec3 s = 0.5 * (v[i][k] + v[k][i]);
                double* p = &conn.vs[18 * node + 3 * (i * (i + 1) / 2 + k)];
                p[0] = s.v[0];
                p[1] = s.v[1];
                p[2] = s.v[2];
                if (i > k) {
                    const Vec3 a = 0.5 * (v[i][k] - v[k][i]);
                    double* pa = &conn.va[9 * node + 3 * (i * (i - 1) / 2 + k)];
                    pa[0] = a.v[0];
                    pa[1] = a.v[1];
                    pa[2] = a.v[2];
                }
            }
    }
    return conn;
}

ConnVoxel conn_voxel(const ConnectionField& conn, const VectorField& grad_log_det_h,
                     std::size_t node) {
    ConnVoxel v;
    for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k) {
            v.vs[i][k] = conn.sym(node, i, k);
            v.va[i][k] = conn.asym(node, i, k);
        }
    v.glogdeth = grad_log_det_h.at(node);
    return v;
}

ConnVoxel midpoint(const ConnVoxel& a, const ConnVoxel& b) {
    ConnVoxel m;
    for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k) {
            m.vs[i][k] = 0.5 * (a.vs[i][k] + b.vs[i][k]);
            m.va[i][k] = 0.5 * (a.va[i][k] + b.va[i][k]);
        }
    m.glogdeth = 0.5 * (a.glogdeth + b.glogdeth);
    return m;
}

StepMatrices step_coefficients(const Quaternion& q, const ConnVoxel& v, int axis) {
    const Quaternion qc = conj(q);
    Vec3 e{0, 0, 0};
    e.v[axis] = 1;
    const Vec3 t = rotate(qc, e);
    Vec3 rs[3][3];
    for (int i = 0; i < 3; ++i)
        for (int k = 0; k <= i; ++k) {
            rs[i][k] = rotate(qc, v.vs[i][k]);
            if (k < i) rs[k][i] = rs[i][k];
        }
    double ds[3];
    for (int i = 0; i < 3; ++i) ds[i] = rs[i][0].v[0] + rs[i][1].v[1] + rs[i][2].v[2];

    StepMatrices s;
    for (int c = 0; c < 3; ++c) {
        const int p = (c + 1) % 3, r = (c + 2) % 3;
        double acc = v.va[p][r].v[axis];
        for (int k = 0; k < 3; ++k) acc += t.v[k] * (rs[r][k].v[p] - rs[p][k].v[r]);
        acc += (2.0 / 3.0) * (ds[p] * t.v[r] - ds[r] * t.v[p]);
        s.a.v[c] = acc;
    }
    s.b = cross((1.0 / 6.0) * v.glogdeth, e);
    return s;
}

Mat3Field to_rotation_field(const RotationField& q) {
    Mat3Field r(q.grid);
    const std::size_t nn = q.grid.num_nodes();
#pragma omp parallel for schedule(static)
    for (long long node = 0; node < (long long)nn; ++node)
        r.set(node, to_rotation(normalized(q.at(node))));
    return r;
}

namespace {

double dot4(const Quaternion& a, const Quaternion& b) {
    return a.w * b.w + a.x * b.x + a.y * b.y + a.z * b.z;
}

}  // namespace

RotationField seed_from_truth(const SymTensorField& gamma,
                              const std::array<const ScalarField*, 3>& u, const Mat3Field& t,
                              int axis, bool reverse) {
    const Grid3& g = gamma.grid;
    const VectorField du[3] = {gradient(*u[0]), gradient(*u[1]), gradient(*u[2])};
    RotationField seed(g);

    const int a = axis, b = (axis + 1) % 3, c = (axis + 2) % 3;
    const int face = reverse ? g.n[a] - 1 : 0;
    for (int jc = 0; jc < g.n[c]; ++jc)
        for (int jb = 0; jb < g.n[b]; ++jb) {
            int idx[3];
            idx[a] = face;
            idx[b] = jb;
            idx[c] = jc;
            const std::size_t node = g.index(idx[0], idx[1], idx[2]);
            const Mat3 sq = sqrtm_spd(gamma.at(node));
            Mat3 s;
            for (int i = 0; i < 3; ++i) s.set_col(i, sq * du[i].at(node));
            const Mat3 r = polar_rotation(s * transpose(t.at(node)));
            Quaternion q = from_rotation(r);
            // Sign-align with the already-seeded neighbor so the lift stays
            // continuous along the face.
            if (jb > 0) {
                idx[b] = jb - 1;
                const Quaternion prev = seed.at(g.index(idx[0], idx[1], idx[2]));
                if (dot4(q, prev) < 0) q = {-q.w, -q.x, -q.y, -q.z};
            } else if (jc > 0) {
                idx[c] = jc - 1;
                const Quaternion prev = seed.at(g.index(idx[0], idx[1], idx[2]));
                if (dot4(q, prev) < 0) q = {-q.w, -q.x, -q.y, -q.z};
            }
            seed.set(node, q);
        }
    return seed;
}

RotationField integrate_rotation(const ConnectionField& conn, const ScalarField& det_h,
                                 const RotationField& seed, int axis, bool reverse) {
    const Grid3& g = conn.grid;
    if (!(det_h.grid == g) || !(seed.grid == g)) throw Error("integrate_rotation: grid mismatch");

    ScalarField logdet(g);
    for (std::size_t p = 0; p < g.num_nodes(); ++p) {
        if (!(det_h.data[p] > 0)) {
            const std::array<int, 3> v = unflatten(g, p);
            throw HypothesisError(HypothesisError::Kind::not_spd,
                                  "integrate_rotation: det H not positive", v, det_h.data[p]);
        }
        logdet.data[p] = std::log(det_h.data[p]);
    }
    const VectorField glogdeth = gradient(logdet);

    RotationField out(g);
    const int a = axis, b = (axis + 1) % 3, c = (axis + 2) % 3;
    const int na = g.n[a], nb = g.n[b], nc = g.n[c];
    const int start = reverse ? na - 1 : 0;
    const int dir = reverse ? -1 : 1;
    const double h = dir * g.spacing[a];
    double drift = 0;

#pragma omp parallel for schedule(static) reduction(max : drift)
    for (long long jc = 0; jc < nc; ++jc)
        for (int jb = 0; jb < nb; ++jb) {
            int idx[3];
            idx[b] = jb;
            idx[c] = int(jc);
            idx[a] = start;
            std::size_t node = g.index(idx[0], idx[1], idx[2]);
            Quaternion q = seed.at(node);
            out.set(node, q);
            for (int s = start; s != (reverse ? 0 : na - 1); s += dir) {
                idx[a] = s + dir;
                const std::size_t next = g.index(idx[0], idx[1], idx[2]);
                const ConnVoxel cv0 = conn_voxel(conn, glogdeth, node);
                const ConnVoxel cv1 = conn_voxel(conn, glogdeth, next);
                const Quaternion qh = exp_step(q, step_coefficients(q, cv0, axis), h / 2);
                q = exp_step(q, step_coefficients(qh, midpoint(cv0, cv1), axis), h);
                out.set(next, q);
                node = next;
            }
            const double d = std::abs(norm(q) - 1.0);
            if (d > drift) drift = d;
        }
    if (drift > 1e-10)
        throw Error("integrate_rotation: quaternion norm drift " + std::to_string(drift));
    return out;
}

VectorField scaled_log_sigma_gradient(const ConnectionField& conn, const RotationField& q) {
    const Grid3& g = conn.grid;
    if (!(q.grid == g)) throw Error("scaled_log_sigma_gradient: grid mismatch");
    VectorField w(g);
    const std::size_t nn = g.num_nodes();
#pragma omp parallel for schedule(static)
    for (long long node = 0; node < (long long)nn; ++node) {
        const Quaternion qc = conj(q.at(node));
        Vec3 cj{0, 0, 0};
        for (int j = 0; j < 3; ++j) {
            double s = 0;
            for (int i = 0; i < 3; ++i) s += rotate(qc, conn.sym(node, i, j)).v[i];
            cj.v[j] = s;
        }
        Vec3 wm;
        for (int m = 0; m < 3; ++m) {
            Vec3 e{0, 0, 0};
            e.v[m] = 1;
            wm.v[m] = (4.0 / 3.0) * dot(cj, rotate(qc, e));
        }
        w.set(node, wm);
    }
    return w;
}

ScalarField reconstruct_sigma(const VectorField& w, const ScalarField& det_h,
                              const ScalarField& sigma_boundary, const SolveOptions& opts,
                              SolveReport* report) {
    const Grid3& g = w.grid;
    if (!(det_h.grid == g) || !(sigma_boundary.grid == g))
        throw Error("reconstruct_sigma: grid mismatch");
    ScalarField vb(g);
    for (int k = 0; k < g.n[2]; ++k)
        for (int j = 0; j < g.n[1]; ++j)
            for (int i = 0; i < g.n[0]; ++i)
                if (g.boundary(i, j, k))
                    vb(i, j, k) = std::log(sigma_boundary(i, j, k)) -
                                  std::log(det_h(i, j, k)) / 3.0;
    const ScalarField f = divergence(w);
    ScalarField v = solve_poisson(f, vb, opts, report);
    for (std::size_t p = 0; p < g.num_nodes(); ++p)
        v.data[p] = std::cbrt(det_h.data[p]) * std::exp(v.data[p]);
    return v;
}

}  // namespace pdt
