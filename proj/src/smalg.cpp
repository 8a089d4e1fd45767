#include "pdt/smalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

namespace pdt {

double det3(const Mat3& a) {
    return a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) -
           a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0)) +
           a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
}

Mat3 cofactor3(const Mat3& a) {
    Mat3 c;
    c(0, 0) = a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1);
    c(0, 1) = -(a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0));
    c(0, 2) = a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0);
    c(1, 0) = -(a(0, 1) * a(2, 2) - a(0, 2) * a(2, 1));
    c(1, 1) = a(0, 0) * a(2, 2) - a(0, 2) * a(2, 0);
    c(1, 2) = -(a(0, 0) * a(2, 1) - a(0, 1) * a(2, 0));
    c(2, 0) = a(0, 1) * a(1, 2) - a(0, 2) * a(1, 1);
    c(2, 1) = -(a(0, 0) * a(1, 2) - a(0, 2) * a(1, 0));
    c(2, 2) = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
    return c;
}

Mat3 cofactor_differential(const Mat3& a, const Mat3& da) {
    // d adj(A)[dA] from the Cayley-Hamilton form; cofactor is its transpose.
    Mat3 d = a * da + da * a - trace(da) * a - trace(a) * da;
    const double c = trace(a) * trace(da) - trace(a * da);
    d.m[0] += c;
    d.m[4] += c;
    d.m[8] += c;
    return transpose(d);
}

Mat3 inv3(const Mat3& a, double det_floor) {
    const double d = det3(a);
    if (std::abs(d) < det_floor)
        throw Error("inv3: matrix near singular, |det| = " + std::to_string(std::abs(d)) +
                    " below floor " + std::to_string(det_floor));
    return transpose(cofactor3(a)) * (1.0 / d);
}

double signed_cbrt(double x) { return std::cbrt(x); }

std::array<double, 3> leading_minors(const Mat3& h) {
    const double m1 = h(0, 0);
    const double m2 = h(0, 0) * h(1, 1) - h(0, 1) * h(1, 0);
    const double m3 = det3(h);
    return {m1, m2, m3};
}

Mat3 transition_matrix(const Mat3& h) {
    const auto m = leading_minors(h);
    for (int i = 0; i < 3; ++i)
        if (!(m[i] > 0))
            throw Error("transition_matrix: leading minor " + std::to_string(i + 1) +
                        " nonpositive (" + std::to_string(m[i]) + ")");
    const double s11 = std::sqrt(h(0, 0));
    const double d = std::sqrt(m[1]);
    const double dd = std::sqrt(m[2]);
    Mat3 t;
    t(0, 0) = 1.0 / s11;
    t(1, 0) = -h(0, 1) / (s11 * d);
    t(1, 1) = s11 / d;
    t(2, 0) = (h(0, 1) * h(1, 2) - h(1, 1) * h(0, 2)) / (d * dd);
    t(2, 1) = (h(0, 1) * h(0, 2) - h(0, 0) * h(1, 2)) / (d * dd);
    t(2, 2) = d / dd;
    return t;
}

void jacobi_eig(int n, double* a, double* vec, double* lam) {
    auto at = [&](int r, int c) -> double& { return a[c * n + r]; };
    auto vt = [&](int r, int c) -> double& { return vec[c * n + r]; };
    for (int c = 0; c < n; ++c)
        for (int r = 0; r < n; ++r) vt(r, c) = (r == c) ? 1.0 : 0.0;

    double scale = 0;
    for (int i = 0; i < n * n; ++i) scale = std::max(scale, std::abs(a[i]));
    if (scale == 0) {
        for (int i = 0; i < n; ++i) lam[i] = 0;
        return;
    }

    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off += at(p, q) * at(p, q);
        if (std::sqrt(off) <= 1e-15 * scale * n) break;
        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = at(p, q);
                if (std::abs(apq) <= 1e-18 * scale) continue;
                const double app = at(p, p), aqq = at(q, q);
                const double theta = (aqq - app) / (2 * apq);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1));
                const double c = 1.0 / std::sqrt(t * t + 1);
                const double s = t * c;
                for (int k = 0; k < n; ++k) {
                    const double akp = at(k, p), akq = at(k, q);
                    at(k, p) = c * akp - s * akq;
                    at(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const double apk = at(p, k), aqk = at(q, k);
                    at(p, k) = c * apk - s * aqk;
                    at(q, k) = s * apk + c * aqk;
                }
                for (int k = 0; k < n; ++k) {
                    const double vkp = vt(k, p), vkq = vt(k, q);
                    vt(k, p) = c * vkp - s * vkq;
                    vt(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    for (int i = 0; i < n; ++i) lam[i] = at(i, i);
    // selection sort ascending, swapping eigenvector columns along
    for (int i = 0; i < n - 1; ++i) {
        int jmin = i;
        for (int j = i + 1; j < n; ++j)
            if (lam[j] < lam[jmin]) jmin = j;
        if (jmin != i) {
            std::swap(lam[i], lam[jmin]);
            for (int r = 0; r < n; ++r) std::swap(vt(r, i), vt(r, jmin));
        }
    }
}

std::array<double, 3> sym3_eigenvalues(const Mat3& a) {
    // Closed-form characteristic solve for a symmetric 3x3 matrix.
    const double p1 = a(0, 1) * a(0, 1) + a(0, 2) * a(0, 2) + a(1, 2) * a(1, 2);
    if (p1 == 0) {
        std::array<double, 3> e = {a(0, 0), a(1, 1), a(2, 2)};
        std::sort(e.begin(), e.end());
        return e;
    }
    const double q = trace(a) / 3.0;
    const double p2 = (a(0, 0) - q) * (a(0, 0) - q) + (a(1, 1) - q) * (a(1, 1) - q) +
                      (a(2, 2) - q) * (a(2, 2) - q) + 2 * p1;
    const double p = std::sqrt(p2 / 6.0);
    Mat3 b = (a - q * Mat3::identity()) * (1.0 / p);
    double r = det3(b) / 2.0;
    r = std::clamp(r, -1.0, 1.0);
    const double phi = std::acos(r) / 3.0;
    const double e3 = q + 2 * p * std::cos(phi);
    const double e1 = q + 2 * p * std::cos(phi + 2 * M_PI / 3.0);
    const double e2 = 3 * q - e1 - e3;
    std::array<double, 3> e = {e1, e2, e3};
    std::sort(e.begin(), e.end());
    return e;
}

Mat3 sqrtm_spd(const Mat3& a) {
    double buf[9], vec[9], lam[3];
    std::memcpy(buf, a.m, sizeof buf);
    jacobi_eig(3, buf, vec, lam);
    Mat3 r;
    for (int i = 0; i < 3; ++i) {
        if (lam[i] < -1e-12 * std::abs(lam[2]))
            throw Error("sqrtm_spd: negative eigenvalue " + std::to_string(lam[i]));
        const double s = std::sqrt(std::max(lam[i], 0.0));
        const Vec3 v{vec[i * 3], vec[i * 3 + 1], vec[i * 3 + 2]};
        r += s * outer(v, v);
    }
    return r;
}

Mat3 polar_rotation(const Mat3& a) {
    if (!(det3(a) > 0)) throw Error("polar_rotation: determinant not positive");
    Mat3 x = a;
    for (int it = 0; it < 60; ++it) {
        const Mat3 xi = transpose(inv3(x, 1e-300));
        Mat3 next;
        for (int i = 0; i < 9; ++i) next.m[i] = 0.5 * (x.m[i] + xi.m[i]);
        double delta = 0;
        for (int i = 0; i < 9; ++i) delta = std::max(delta, std::abs(next.m[i] - x.m[i]));
        x = next;
        if (delta < 1e-15) break;
    }
    return x;
}

NullDirection null_direction(const std::array<Mat3, 8>& stack) {
    // Normal matrix N = K K^T of the 9x8 stack; its eigenpairs give the
    // singular structure.  The two small residuals are then re-evaluated
    // against the stack itself: forming N floors eigenvalues at roundoff
    // times |N|, so sqrt(lambda) cannot resolve residuals below about 1e-8,
    // while <c_i, v> keeps its relative accuracy.
    double nmat[81] = {0};
    for (const Mat3& c : stack)
        for (int i = 0; i < 9; ++i)
            for (int j = 0; j <= i; ++j) nmat[j * 9 + i] += c.m[i] * c.m[j];
    for (int i = 0; i < 9; ++i)
        for (int j = 0; j < i; ++j) nmat[i * 9 + j] = nmat[j * 9 + i];

    double vec[81], lam[9];
    jacobi_eig(9, nmat, vec, lam);

    const auto residual = [&stack](const double* v) {
        double s = 0;
        for (const Mat3& c : stack) {
            double ip = 0;
            for (int i = 0; i < 9; ++i) ip += c.m[i] * v[i];
            s += ip * ip;
        }
        return std::sqrt(s);
    };

    NullDirection r;
    const double s1 = std::sqrt(std::max(lam[8], 0.0));
    r.sigma_null = residual(vec);
    r.sigma_small = residual(vec + 9);
    r.gap = s1 > 0 ? (r.sigma_small - r.sigma_null) / s1 : 0.0;
    r.isolated = r.gap >= 1e-8;

    int imax = 0;
    for (int i = 1; i < 9; ++i)
        if (std::abs(vec[i]) > std::abs(vec[imax])) imax = i;
    const double sign = vec[imax] >= 0 ? 1.0 : -1.0;
    double nrm = 0;
    for (int i = 0; i < 9; ++i) nrm += vec[i] * vec[i];
    nrm = std::sqrt(nrm);
    for (int i = 0; i < 9; ++i) r.b.m[i] = sign * vec[i] / nrm;
    return r;
}

}  // namespace pdt
