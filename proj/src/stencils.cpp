#include "pdt/stencils.hpp"

#include <string>

#include "pdt/errors.hpp"

namespace pdt {

namespace {

// d/dx_axis of a node-indexed accessor at position p along its axis, line
// length n, spacing h.  get(t) reads the value at offset t along the axis.
template <class Get>
inline double axis_derivative(const Get& get, int p, int n, double h) {
    if (p == 0) return (-3.0 * get(0) + 4.0 * get(1) - get(2)) / (2.0 * h);
    if (p == n - 1) return (3.0 * get(n - 1) - 4.0 * get(n - 2) + get(n - 3)) / (2.0 * h);
    return (get(p + 1) - get(p - 1)) / (2.0 * h);
}

inline Vec3 gradient_at(const ScalarField& f, int i, int j, int k) {
    const Grid3& g = f.grid;
    Vec3 r;
    r.v[0] = axis_derivative([&](int t) { return f(t, j, k); }, i, g.n[0], g.spacing[0]);
    r.v[1] = axis_derivative([&](int t) { return f(i, t, k); }, j, g.n[1], g.spacing[1]);
    r.v[2] = axis_derivative([&](int t) { return f(i, j, t); }, k, g.n[2], g.spacing[2]);
    return r;
}

inline double divergence_at(const VectorField& w, int i, int j, int k) {
    const Grid3& g = w.grid;
    auto comp = [&](int ii, int jj, int kk, int c) { return w.data[3 * g.index(ii, jj, kk) + c]; };
    double s = 0;
    s += axis_derivative([&](int t) { return comp(t, j, k, 0); }, i, g.n[0], g.spacing[0]);
    s += axis_derivative([&](int t) { return comp(i, t, k, 1); }, j, g.n[1], g.spacing[1]);
    s += axis_derivative([&](int t) { return comp(i, j, t, 2); }, k, g.n[2], g.spacing[2]);
    return s;
}

}  // namespace

VectorField gradient(const ScalarField& f) {
    const Grid3& g = f.grid;
    VectorField out(g);
    const int nx = g.n[0], ny = g.n[1], nz = g.n[2];
#pragma omp parallel for schedule(static)
    for (int k = 0; k < nz; ++k)
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) out.set(i, j, k, gradient_at(f, i, j, k));
    return out;
}

VectorField gradient_serial(const ScalarField& f) {
    const Grid3& g = f.grid;
    VectorField out(g);
    for (int k = 0; k < g.n[2]; ++k)
        for (int j = 0; j < g.n[1]; ++j)
            for (int i = 0; i < g.n[0]; ++i) out.set(i, j, k, gradient_at(f, i, j, k));
    return out;
}

ScalarField divergence(const VectorField& w) {
    const Grid3& g = w.grid;
    ScalarField out(g);
    const int nx = g.n[0], ny = g.n[1], nz = g.n[2];
#pragma omp parallel for schedule(static)
    for (int k = 0; k < nz; ++k)
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) out(i, j, k) = divergence_at(w, i, j, k);
    return out;
}

ScalarField divergence_serial(const VectorField& w) {
    const Grid3& g = w.grid;
    ScalarField out(g);
    for (int k = 0; k < g.n[2]; ++k)
        for (int j = 0; j < g.n[1]; ++j)
            for (int i = 0; i < g.n[0]; ++i) out(i, j, k) = divergence_at(w, i, j, k);
    return out;
}

std::vector<double> sample_line(const ScalarField& f, int axis, std::array<int, 3> through) {
    const Grid3& g = f.grid;
    if (axis < 0 || axis > 2) throw Error("sample_line: axis must be 0, 1 or 2");
    for (int a = 0; a < 3; ++a)
        if (through[a] < 0 || through[a] >= g.n[a])
            throw Error("sample_line: node index out of range on axis " + std::to_string(a));
    std::vector<double> out(g.n[axis]);
    std::array<int, 3> p = through;
    for (int t = 0; t < g.n[axis]; ++t) {
        p[axis] = t;
        out[t] = f(p[0], p[1], p[2]);
    }
    return out;
}

}  // namespace pdt
