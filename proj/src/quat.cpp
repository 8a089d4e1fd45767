#include "pdt/quat.hpp"

#include <cmath>
#include <string>

#include "pdt/errors.hpp"

namespace pdt {

Quaternion hmul(const Quaternion& a, const Quaternion& b) {
    return {a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
            a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
            a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
            a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w};
}

double norm(const Quaternion& q) {
    return std::sqrt(q.w * q.w + q.x * q.x + q.y * q.y + q.z * q.z);
}

Quaternion normalized(const Quaternion& q) {
    const double n = norm(q);
    if (!(n > 0)) throw Error("normalized: zero quaternion");
    return {q.w / n, q.x / n, q.y / n, q.z / n};
}

Vec3 rotate(const Quaternion& q, const Vec3& v) {
    if (std::abs(norm(q) - 1.0) > 1e-8)
        throw Error("rotate: quaternion norm " + std::to_string(norm(q)) + " not unit");
    const Vec3 u = q.vec();
    const Vec3 t = cross(u, v);
    return v + 2.0 * q.w * t + 2.0 * cross(u, t);
}

Mat3 to_rotation(const Quaternion& q) {
    Mat3 r;
    r.set_col(0, rotate(q, {1, 0, 0}));
    r.set_col(1, rotate(q, {0, 1, 0}));
    r.set_col(2, rotate(q, {0, 0, 1}));
    return r;
}

Quaternion from_rotation(const Mat3& r) {
    const double t = trace(r);
    Quaternion q;
    if (t > 0) {
        const double s = std::sqrt(t + 1.0) * 2;
        q = {0.25 * s, (r(2, 1) - r(1, 2)) / s, (r(0, 2) - r(2, 0)) / s,
             (r(1, 0) - r(0, 1)) / s};
    } else if (r(0, 0) > r(1, 1) && r(0, 0) > r(2, 2)) {
        const double s = std::sqrt(1.0 + r(0, 0) - r(1, 1) - r(2, 2)) * 2;
        q = {(r(2, 1) - r(1, 2)) / s, 0.25 * s, (r(0, 1) + r(1, 0)) / s,
             (r(0, 2) + r(2, 0)) / s};
    } else if (r(1, 1) > r(2, 2)) {
        const double s = std::sqrt(1.0 + r(1, 1) - r(0, 0) - r(2, 2)) * 2;
        q = {(r(0, 2) - r(2, 0)) / s, (r(0, 1) + r(1, 0)) / s, 0.25 * s,
             (r(1, 2) + r(2, 1)) / s};
    } else {
        const double s = std::sqrt(1.0 + r(2, 2) - r(0, 0) - r(1, 1)) * 2;
        q = {(r(1, 0) - r(0, 1)) / s, (r(0, 2) + r(2, 0)) / s, (r(1, 2) + r(2, 1)) / s,
             0.25 * s};
    }
    q = normalized(q);
    if (q.w < 0) q = {-q.w, -q.x, -q.y, -q.z};
    return q;
}

namespace {

// exp(h u / 2) for a pure vector u: cos(t) + sin(t)/t * (h/2) u, t = h|u|/2.
Quaternion exp_factor(const Vec3& u, double h) {
    const double t = 0.5 * h * norm(u);
    double sinc;
    if (std::abs(t) < 1e-4) {
        const double t2 = t * t;
        sinc = 1.0 - t2 / 6.0 + t2 * t2 / 120.0;
    } else {
        sinc = std::sin(t) / t;
    }
    return {std::cos(t), (0.5 * h * sinc) * u};
}

}  // namespace

Quaternion exp_step(const Quaternion& q, const StepMatrices& s, double h) {
    const Quaternion ea = exp_factor(s.a, h);
    const Quaternion eb = exp_factor(s.b, h);
    return hmul(hmul(eb, q), ea);
}

std::array<double, 16> right_mul_matrix(const Vec3& a) {
    const double a1 = a.v[0], a2 = a.v[1], a3 = a.v[2];
    // row-major literal, transposed into column-major storage below
    const double rm[16] = {0, -a1, -a2, -a3,   //
                           a1, 0,  a3,  -a2,   //
                           a2, -a3, 0,  a1,    //
                           a3, a2,  -a1, 0};
    std::array<double, 16> cm{};
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) cm[c * 4 + r] = rm[r * 4 + c];
    return cm;
}

std::array<double, 16> left_mul_matrix(const Vec3& b) {
    const double b1 = b.v[0], b2 = b.v[1], b3 = b.v[2];
    const double rm[16] = {0, -b1, -b2, -b3,   //
                           b1, 0,  -b3, b2,    //
                           b2, b3,  0,  -b1,   //
                           b3, -b2, b1, 0};
    std::array<double, 16> cm{};
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) cm[c * 4 + r] = rm[r * 4 + c];
    return cm;
}

}  // namespace pdt
