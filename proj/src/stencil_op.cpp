#include "pdt/stencil_op.hpp"

#include <cmath>
#include <string>

#include "pdt/errors.hpp"

namespace pdt {

namespace {

inline void apply_row(const Grid3& g, const std::vector<double>& w, const double* u,
                      double* out, int i, int j, int k, const long* noff) {
    const std::size_t p = g.index(i, j, k);
    const double* wp = &w[27 * p];
    const bool interior = i > 0 && j > 0 && k > 0 && i < g.n[0] - 1 && j < g.n[1] - 1 &&
                          k < g.n[2] - 1;
    double s = 0;
    if (interior) {
        for (int o = 0; o < 27; ++o) s += wp[o] * u[p + noff[o]];
    } else {
        int o = 0;
        for (int dz = -1; dz <= 1; ++dz)
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx, ++o) {
                    const int ii = i + dx, jj = j + dy, kk = k + dz;
                    if (ii < 0 || jj < 0 || kk < 0 || ii >= g.n[0] || jj >= g.n[1] ||
                        kk >= g.n[2])
                        continue;
                    s += wp[o] * u[p + noff[o]];
                }
    }
    out[p] = s;
}

void make_offsets(const Grid3& g, long noff[27]) {
    int o = 0;
    for (int dz = -1; dz <= 1; ++dz)
        for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx, ++o)
                noff[o] = dx + long(g.n[0]) * dy + long(g.n[0]) * g.n[1] * dz;
}

}  // namespace

void Stencil27::apply(const double* u, double* out) const {
    long noff[27];
    make_offsets(grid, noff);
    const int nx = grid.n[0], ny = grid.n[1], nz = grid.n[2];
#pragma omp parallel for schedule(static)
    for (int k = 0; k < nz; ++k)
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) apply_row(grid, w, u, out, i, j, k, noff);
}

void Stencil27::apply_serial(const double* u, double* out) const {
    long noff[27];
    make_offsets(grid, noff);
    for (int k = 0; k < grid.n[2]; ++k)
        for (int j = 0; j < grid.n[1]; ++j)
            for (int i = 0; i < grid.n[0]; ++i) apply_row(grid, w, u, out, i, j, k, noff);
}

ElementTemplates element_templates(double hx, double hy, double hz) {
    ElementTemplates t{};
    const double h[3] = {hx, hy, hz};
    // 2-point Gauss nodes on [0,1]; exact for the polynomial integrands here
    const double ga = 0.5 - 0.5 / std::sqrt(3.0);
    const double gb = 0.5 + 0.5 / std::sqrt(3.0);
    const double gp[2] = {ga, gb};

    auto shape_deriv = [](int node, int axis, double x, double y, double z) {
        const int a = node & 1, b = (node >> 1) & 1, c = (node >> 2) & 1;
        const double fx = a ? x : 1 - x, dfx = a ? 1 : -1;
        const double fy = b ? y : 1 - y, dfy = b ? 1 : -1;
        const double fz = c ? z : 1 - z, dfz = c ? 1 : -1;
        if (axis == 0) return dfx * fy * fz;
        if (axis == 1) return fx * dfy * fz;
        return fx * fy * dfz;
    };

    for (int gz = 0; gz < 2; ++gz)
        for (int gy = 0; gy < 2; ++gy)
            for (int gx = 0; gx < 2; ++gx) {
                const double x = gp[gx], y = gp[gy], z = gp[gz];
                double d[3][8];
                for (int p = 0; p < 8; ++p)
                    for (int a = 0; a < 3; ++a) d[a][p] = shape_deriv(p, a, x, y, z);
                for (int a = 0; a < 3; ++a)
                    for (int b = 0; b < 3; ++b) {
                        const double scale = 0.125 * hx * hy * hz / (h[a] * h[b]);
                        for (int p = 0; p < 8; ++p)
                            for (int q = 0; q < 8; ++q)
                                t.k[a][b][p][q] += scale * d[a][p] * d[b][q];
                    }
            }
    return t;
}

void add_cell_stiffness(Stencil27& s, int ci, int cj, int ck, const double kc[8][8]) {
    const Grid3& g = s.grid;
    for (int p = 0; p < 8; ++p) {
        const int pi = ci + (p & 1), pj = cj + ((p >> 1) & 1), pk = ck + ((p >> 2) & 1);
        double* row = &s.w[27 * g.index(pi, pj, pk)];
        for (int q = 0; q < 8; ++q) {
            const int dx = (q & 1) - (p & 1);
            const int dy = ((q >> 1) & 1) - ((p >> 1) & 1);
            const int dz = ((q >> 2) & 1) - ((p >> 2) & 1);
            row[(dx + 1) + 3 * (dy + 1) + 9 * (dz + 1)] += kc[p][q];
        }
    }
}

namespace {

struct ColorSets {
    std::array<std::vector<int>, 8> nodes;  // interior nodes by parity class
};

ColorSets make_colors(const Grid3& g) {
    ColorSets cs;
    for (int k = 1; k < g.n[2] - 1; ++k)
        for (int j = 1; j < g.n[1] - 1; ++j)
            for (int i = 1; i < g.n[0] - 1; ++i)
                cs.nodes[(i & 1) | ((j & 1) << 1) | ((k & 1) << 2)].push_back(
                    static_cast<int>(g.index(i, j, k)));
    return cs;
}

inline double row_dot(const std::vector<double>& w, const double* v, long p,
                      const long noff[27]) {
    const double* wp = &w[27 * p];
    double s = 0;
    for (int o = 0; o < 27; ++o) s += wp[o] * v[p + noff[o]];
    return s;
}

// z = M^{-1} r with M the symmetric Gauss-Seidel splitting in 8-color order.
// Within a color no two nodes are stencil neighbors, so each half sweep only
// reads values finished in previous colors; entries outside the interior stay
// zero throughout.
void ssor_apply(const Stencil27& a, const ColorSets& cs, const long noff[27], const double* r,
                double* y, double* z) {
    const std::size_t n = a.grid.num_nodes();
    std::fill(y, y + n, 0.0);
    for (int c = 0; c < 8; ++c) {
        const auto& nodes = cs.nodes[c];
        const long m = static_cast<long>(nodes.size());
#pragma omp parallel for schedule(static)
        for (long t = 0; t < m; ++t) {
            const long p = nodes[t];
            y[p] = (r[p] - row_dot(a.w, y, p, noff)) / a.w[27 * p + 13];
        }
    }
    std::fill(z, z + n, 0.0);
    for (int c = 7; c >= 0; --c) {
        const auto& nodes = cs.nodes[c];
        const long m = static_cast<long>(nodes.size());
#pragma omp parallel for schedule(static)
        for (long t = 0; t < m; ++t) {
            const long p = nodes[t];
            z[p] = y[p] - row_dot(a.w, z, p, noff) / a.w[27 * p + 13];
        }
    }
}

double dot_all(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0;
    const long n = static_cast<long>(a.size());
#pragma omp parallel for schedule(static) reduction(+ : s)
    for (long i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

}  // namespace

ScalarField solve_dirichlet(const Stencil27& a, const ScalarField& boundary_and_guess,
                            const ScalarField* rhs, const SolveOptions& opts,
                            SolveReport* report) {
    const Grid3& g = a.grid;
    if (!(boundary_and_guess.grid == g)) throw Error("solve_dirichlet: grid mismatch");
    if (rhs && !(rhs->grid == g)) throw Error("solve_dirichlet: rhs grid mismatch");

    const std::size_t n = g.num_nodes();
    long noff[27];
    make_offsets(g, noff);
    const ColorSets cs = make_colors(g);
    const long ni = static_cast<long>(cs.nodes[0].size() + cs.nodes[1].size() +
                                      cs.nodes[2].size() + cs.nodes[3].size() +
                                      cs.nodes[4].size() + cs.nodes[5].size() +
                                      cs.nodes[6].size() + cs.nodes[7].size());
    if (ni == 0) throw Error("solve_dirichlet: no interior nodes");

    ScalarField x = boundary_and_guess;
    std::vector<double> r(n, 0.0), zv(n, 0.0), p(n, 0.0), q(n, 0.0), tmp(n, 0.0);

    auto mask_boundary = [&](std::vector<double>& v) {
        const int nx = g.n[0], ny = g.n[1], nz = g.n[2];
#pragma omp parallel for schedule(static)
        for (int k = 0; k < nz; ++k)
            for (int j = 0; j < ny; ++j)
                for (int i = 0; i < nx; ++i)
                    if (g.boundary(i, j, k)) v[g.index(i, j, k)] = 0.0;
    };

    a.apply(x.data.data(), q.data());
    const long nn = static_cast<long>(n);
#pragma omp parallel for schedule(static)
    for (long i = 0; i < nn; ++i) r[i] = (rhs ? rhs->data[i] : 0.0) - q[i];
    mask_boundary(r);

    const double r0 = std::sqrt(dot_all(r, r));
    // Absolute stagnation floor: when the guess already solves the system to
    // roundoff, the relative criterion against r0 would chase noise forever.
    // ||diag(A)|| * max|x0| bounds the roundoff incurred in forming A x0.
#pragma omp parallel for schedule(static)
    for (long i = 0; i < nn; ++i) tmp[i] = a.w[27 * i + 13];
    mask_boundary(tmp);
    const double sdiag = std::sqrt(dot_all(tmp, tmp));
    double xmax = 0;
#pragma omp parallel for schedule(static) reduction(max : xmax)
    for (long i = 0; i < nn; ++i) xmax = std::max(xmax, std::abs(x.data[i]));
    double rhsn = 0;
    if (rhs) {
        tmp = rhs->data;
        mask_boundary(tmp);
        rhsn = std::sqrt(dot_all(tmp, tmp));
    }
    const double atol = 1e-14 * (sdiag * xmax + rhsn);
    SolveReport rep;
    if (!(r0 > atol)) {
        rep.converged = true;
        rep.rel_residual = 0;
        if (report) *report = rep;
        return x;
    }

    auto precondition = [&](const std::vector<double>& rin, std::vector<double>& zout) {
        switch (opts.precond) {
            case SolveOptions::Precond::ssor:
                ssor_apply(a, cs, noff, rin.data(), tmp.data(), zout.data());
                break;
            case SolveOptions::Precond::jacobi:
#pragma omp parallel for schedule(static)
                for (long i = 0; i < nn; ++i)
                    zout[i] = rin[i] / a.w[27 * i + 13];
                mask_boundary(zout);
                break;
            case SolveOptions::Precond::none:
                zout = rin;
                break;
        }
    };

    precondition(r, zv);
    p = zv;
    double rz = dot_all(r, zv);

    const int max_iters =
        opts.max_iters > 0 ? opts.max_iters
                           : 20 * std::max(g.n[0], std::max(g.n[1], g.n[2]));
    double rel = 1.0;
    for (int it = 1; it <= max_iters; ++it) {
        a.apply(p.data(), q.data());
        mask_boundary(q);
        const double pq = dot_all(p, q);
        if (!(pq > 0))
            throw SolverError("solve_dirichlet: operator lost positive definiteness (p.Ap = " +
                                  std::to_string(pq) + ")",
                              rel, it);
        const double alpha = rz / pq;
#pragma omp parallel for schedule(static)
        for (long i = 0; i < nn; ++i) {
            x.data[i] += alpha * p[i];
            r[i] -= alpha * q[i];
        }
        const double rn = std::sqrt(dot_all(r, r));
        rel = rn / r0;
        if (rel <= opts.tol || rn <= atol) {
            rep.iterations = it;
            rep.rel_residual = rel;
            rep.converged = true;
            if (report) *report = rep;
            return x;
        }
        precondition(r, zv);
        const double rz_new = dot_all(r, zv);
        const double beta = rz_new / rz;
        rz = rz_new;
#pragma omp parallel for schedule(static)
        for (long i = 0; i < nn; ++i) p[i] = zv[i] + beta * p[i];
    }
    throw SolverError("solve_dirichlet: no convergence in " + std::to_string(max_iters) +
                          " iterations (relative residual " + std::to_string(rel) + ")",
                      rel, max_iters);
}

}  // namespace pdt
