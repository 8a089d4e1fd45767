#pragma once

// Quaternion algebra and the norm-preserving exponential step used to
// integrate the rotation frame.  Hamilton convention: e1*e2 = e3.

#include <array>

#include "pdt/smalg.hpp"

namespace pdt {

struct Quaternion {
    double w = 1, x = 0, y = 0, z = 0;

    Quaternion() = default;
    Quaternion(double w_, double x_, double y_, double z_) : w(w_), x(x_), y(y_), z(z_) {}
    Quaternion(double scalar, const Vec3& vec) : w(scalar), x(vec.v[0]), y(vec.v[1]), z(vec.v[2]) {}
    Vec3 vec() const { return {x, y, z}; }
};

// Hamilton product.
Quaternion hmul(const Quaternion& a, const Quaternion& b);

inline Quaternion conj(const Quaternion& q) { return {q.w, -q.x, -q.y, -q.z}; }
double norm(const Quaternion& q);
Quaternion normalized(const Quaternion& q);

// v -> q v q^-1 for unit q.  Rejects |q| off unity by more than 1e-8; note
// rotate(-q, v) == rotate(q, v).
Vec3 rotate(const Quaternion& q, const Vec3& v);

// Columns are rotate(q, e_i).
Mat3 to_rotation(const Quaternion& q);

// Unit quaternion lift of a rotation matrix, scalar part >= 0.
Quaternion from_rotation(const Mat3& r);

// One step of dq/ds = (q*a + b*q)/2 with a, b frozen pure vectors:
// q(s+h) = exp(h b/2) * q * exp(h a/2), evaluated through the commuting
// left/right multiplication matrices.  Both factors are unit quaternions, so
// the step preserves |q| exactly up to roundoff; a = 0 or b = 0 reduce the
// corresponding factor to the identity through the series limit of sin(t)/t.
struct StepMatrices {
    Vec3 a;
    Vec3 b;
};
Quaternion exp_step(const Quaternion& q, const StepMatrices& s, double h);

// 4x4 matrices (column-major, acting on (w,x,y,z)) of right multiplication
// by a pure vector a and left multiplication by a pure vector b.  Exposed for
// the algebraic checks A^2 = -|a|^2 I, B^2 = -|b|^2 I, AB = BA.
std::array<double, 16> right_mul_matrix(const Vec3& a);
std::array<double, 16> left_mul_matrix(const Vec3& b);

}  // namespace pdt
