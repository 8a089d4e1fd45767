#include "pdt/forward.hpp"

#include <cmath>

#include "pdt/errors.hpp"
#include "pdt/stencils.hpp"

namespace pdt {

namespace {

double sq(double t) { return t * t; }

double eval_catalog(const std::string& key, const Vec3& p) {
    const double x = p.v[0], y = p.v[1], z = p.v[2];
    if (key == "x") return x;
    if (key == "y") return y;
    if (key == "z") return z;
    if (key == "x+1.5(z+2)^2") return x + 1.5 * sq(z + 2);
    if (key == "y+1.5(x+2)^2") return y + 1.5 * sq(x + 2);
    if (key == "z+1.5(y+2)^2") return z + 1.5 * sq(y + 2);
    if (key == "(x+2)(y+2)") return (x + 2) * (y + 2);
    if (key == "(y+2)(z+2)") return (y + 2) * (z + 2);
    if (key == "(z+2)(x+2)") return (z + 2) * (x + 2);
    throw Error("unknown boundary datum key: " + key);
}

}  // namespace

double BoundaryDatum::operator()(const Vec3& x) const { return eval_catalog(key, x); }

BoundaryDatum boundary_datum(const std::string& key) {
    BoundaryDatum d{key};
    d(Vec3{0, 0, 0});  // validates the key
    return d;
}

const std::vector<std::string>& boundary_catalog() {
    static const std::vector<std::string> keys = {
        "x", "y", "z", "x+1.5(z+2)^2", "y+1.5(x+2)^2", "z+1.5(y+2)^2",
        "(x+2)(y+2)", "(y+2)(z+2)", "(z+2)(x+2)"};
    return keys;
}

namespace {

// Cell-averaged tensor (6 components) and its 8x8 stiffness.
void cell_stiffness(const SymTensorField& gamma, const ElementTemplates& et, int ci, int cj,
                    int ck, double kc[8][8]) {
    const Grid3& g = gamma.grid;
    double avg[6] = {0, 0, 0, 0, 0, 0};
    for (int c = 0; c < 2; ++c)
        for (int b = 0; b < 2; ++b)
            for (int a = 0; a < 2; ++a) {
                const double* p = &gamma.data[6 * g.index(ci + a, cj + b, ck + c)];
                for (int t = 0; t < 6; ++t) avg[t] += p[t];
            }
    for (int t = 0; t < 6; ++t) avg[t] *= 0.125;
    // avg order xx,xy,xz,yy,yz,zz -> full tensor g_ab
    const double gab[3][3] = {{avg[0], avg[1], avg[2]},
                              {avg[1], avg[3], avg[4]},
                              {avg[2], avg[4], avg[5]}};
    for (int p = 0; p < 8; ++p)
        for (int q = 0; q < 8; ++q) {
            double s = 0;
            for (int a = 0; a < 3; ++a)
                for (int b = 0; b < 3; ++b) s += gab[a][b] * et.k[a][b][p][q];
            kc[p][q] = s;
        }
}

}  // namespace

Stencil27 assemble_conductivity(const SymTensorField& gamma) {
    const Grid3& g = gamma.grid;
    Stencil27 s(g);
    const ElementTemplates et = element_templates(g.spacing[0], g.spacing[1], g.spacing[2]);
    double kc[8][8];
    for (int ck = 0; ck < g.n[2] - 1; ++ck)
        for (int cj = 0; cj < g.n[1] - 1; ++cj)
            for (int ci = 0; ci < g.n[0] - 1; ++ci) {
                cell_stiffness(gamma, et, ci, cj, ck, kc);
                add_cell_stiffness(s, ci, cj, ck, kc);
            }
    return s;
}

ScalarField solve_conductivity(const Stencil27& a, const BoundaryDatum& g,
                               const SolveOptions& opts, SolveReport* report) {
    const Grid3& grid = a.grid;
    ScalarField u(grid);
    for (int k = 0; k < grid.n[2]; ++k)
        for (int j = 0; j < grid.n[1]; ++j)
            for (int i = 0; i < grid.n[0]; ++i) u(i, j, k) = g(grid.point(i, j, k));
    return solve_dirichlet(a, u, nullptr, opts, report);
}

ScalarField solve_conductivity(const SymTensorField& gamma, const BoundaryDatum& g,
                               const SolveOptions& opts, SolveReport* report) {
    return solve_conductivity(assemble_conductivity(gamma), g, opts, report);
}

ScalarField apply_conductivity_reference(const SymTensorField& gamma, const ScalarField& u) {
    const Grid3& g = gamma.grid;
    if (!(u.grid == g)) throw Error("apply_conductivity_reference: grid mismatch");
    ScalarField out(g);
    const ElementTemplates et = element_templates(g.spacing[0], g.spacing[1], g.spacing[2]);
    double kc[8][8];
    for (int ck = 0; ck < g.n[2] - 1; ++ck)
        for (int cj = 0; cj < g.n[1] - 1; ++cj)
            for (int ci = 0; ci < g.n[0] - 1; ++ci) {
                cell_stiffness(gamma, et, ci, cj, ck, kc);
                std::size_t node[8];
                double uv[8];
                for (int c = 0; c < 2; ++c)
                    for (int b = 0; b < 2; ++b)
                        for (int a = 0; a < 2; ++a) {
                            const int p = a + 2 * b + 4 * c;
                            node[p] = g.index(ci + a, cj + b, ck + c);
                            uv[p] = u.data[node[p]];
                        }
                for (int p = 0; p < 8; ++p) {
                    double s = 0;
                    for (int q = 0; q < 8; ++q) s += kc[p][q] * uv[q];
                    out.data[node[p]] += s;
                }
            }
    return out;
}

PowerDensitySet power_densities(const SymTensorField& gamma,
                                const std::vector<ScalarField>& solutions) {
    const Grid3& g = gamma.grid;
    if (solutions.size() < 3) throw Error("power_densities: need at least 3 solutions");
    for (const ScalarField& u : solutions)
        if (!(u.grid == g)) throw Error("power_densities: grid mismatch");

    std::vector<VectorField> grads;
    grads.reserve(solutions.size());
    for (const ScalarField& u : solutions) grads.push_back(gradient(u));

    PowerDensitySet pd;
    pd.basis = SymTensorField(g);
    for (std::size_t k = 3; k < solutions.size(); ++k) pd.cross.emplace_back(g);

    const std::size_t nn = g.num_nodes();
#pragma omp parallel for schedule(static)
    for (long long node = 0; node < (long long)nn; ++node) {
        const Mat3 gm = gamma.at(node);
        Vec3 du[3], flux[3];
        for (int i = 0; i < 3; ++i) {
            du[i] = grads[i].at(node);
            flux[i] = gm * du[i];
        }
        double* h = &pd.basis.data[6 * node];
        h[0] = dot(flux[0], du[0]);
        h[1] = dot(flux[0], du[1]);
        h[2] = dot(flux[0], du[2]);
        h[3] = dot(flux[1], du[1]);
        h[4] = dot(flux[1], du[2]);
        h[5] = dot(flux[2], du[2]);
        for (std::size_t k = 0; k < pd.cross.size(); ++k) {
            const Vec3 dv = grads[3 + k].at(node);
            const Vec3 fv = gm * dv;
            pd.cross[k].set(node, {dot(fv, du[0]), dot(fv, du[1]), dot(fv, du[2])});
        }
    }
    return pd;
}

ScalarField gradient_determinant(const ScalarField& u1, const ScalarField& u2,
                                 const ScalarField& u3) {
    const Grid3& g = u1.grid;
    if (!(u2.grid == g) || !(u3.grid == g)) throw Error("gradient_determinant: grid mismatch");
    const VectorField d1 = gradient(u1), d2 = gradient(u2), d3 = gradient(u3);
    ScalarField det(g);
    const std::size_t nn = g.num_nodes();
#pragma omp parallel for schedule(static)
    for (long long node = 0; node < (long long)nn; ++node) {
        Mat3 m;
        m.set_col(0, d1.at(node));
        m.set_col(1, d2.at(node));
        m.set_col(2, d3.at(node));
        det.data[node] = det3(m);
    }
    return det;
}

DetStats det_stats(const ScalarField& f) {
    const Grid3& g = f.grid;
    DetStats st;
    st.min_value = st.max_value = f.data[0];
    for (int k = 0; k < g.n[2]; ++k)
        for (int j = 0; j < g.n[1]; ++j)
            for (int i = 0; i < g.n[0]; ++i) {
                const double v = f(i, j, k);
                if (v < st.min_value) {
                    st.min_value = v;
                    st.argmin = {i, j, k};
                }
                if (v > st.max_value) st.max_value = v;
            }
    st.sign_change = st.min_value < 0 && st.max_value > 0;
    return st;
}

Grid3 oversampled_grid(const Grid3& g) {
    return Grid3({2 * g.n[0] - 1, 2 * g.n[1] - 1, 2 * g.n[2] - 1}, g.origin,
                 {g.spacing[0] / 2, g.spacing[1] / 2, g.spacing[2] / 2});
}

namespace {

void check_oversampled(const Grid3& fine, const Grid3& coarse) {
    if (!(fine == oversampled_grid(coarse)))
        throw Error("downsample: fine grid is not the oversampling of the coarse grid");
}

}  // namespace

ScalarField downsample(const ScalarField& fine, const Grid3& coarse) {
    check_oversampled(fine.grid, coarse);
    ScalarField out(coarse);
    for (int k = 0; k < coarse.n[2]; ++k)
        for (int j = 0; j < coarse.n[1]; ++j)
            for (int i = 0; i < coarse.n[0]; ++i) out(i, j, k) = fine(2 * i, 2 * j, 2 * k);
    return out;
}

VectorField downsample(const VectorField& fine, const Grid3& coarse) {
    check_oversampled(fine.grid, coarse);
    VectorField out(coarse);
    for (int k = 0; k < coarse.n[2]; ++k)
        for (int j = 0; j < coarse.n[1]; ++j)
            for (int i = 0; i < coarse.n[0]; ++i)
                out.set(coarse.index(i, j, k), fine.at(2 * i, 2 * j, 2 * k));
    return out;
}

SymTensorField downsample(const SymTensorField& fine, const Grid3& coarse) {
    check_oversampled(fine.grid, coarse);
    SymTensorField out(coarse);
    for (int k = 0; k < coarse.n[2]; ++k)
        for (int j = 0; j < coarse.n[1]; ++j)
            for (int i = 0; i < coarse.n[0]; ++i) {
                const std::size_t src = fine.grid.index(2 * i, 2 * j, 2 * k);
                const std::size_t dst = coarse.index(i, j, k);
                for (int t = 0; t < 6; ++t) out.data[6 * dst + t] = fine.data[6 * src + t];
            }
    return out;
}

}  // namespace pdt
