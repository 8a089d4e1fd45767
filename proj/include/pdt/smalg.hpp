#pragma once

// Small fixed-size linear algebra used throughout: 3-vectors, 3x3 matrices
// (column-major), the transition matrix of a positive definite 3x3 matrix,
// and the null-direction extraction for stacks of eight 3x3 constraint
// matrices.  Everything here is voxel-local.

#include <array>
#include <cmath>

#include "pdt/errors.hpp"

namespace pdt {

struct Vec3 {
    double v[3] = {0, 0, 0};

    Vec3() = default;
    Vec3(double a, double b, double c) : v{a, b, c} {}
    double& operator[](int i) { return v[i]; }
    double operator[](int i) const { return v[i]; }

    Vec3 operator+(const Vec3& o) const { return {v[0] + o.v[0], v[1] + o.v[1], v[2] + o.v[2]}; }
    Vec3 operator-(const Vec3& o) const { return {v[0] - o.v[0], v[1] - o.v[1], v[2] - o.v[2]}; }
    Vec3 operator*(double s) const { return {v[0] * s, v[1] * s, v[2] * s}; }
    Vec3 operator-() const { return {-v[0], -v[1], -v[2]}; }
    Vec3& operator+=(const Vec3& o) {
        v[0] += o.v[0];
        v[1] += o.v[1];
        v[2] += o.v[2];
        return *this;
    }
};

inline Vec3 operator*(double s, const Vec3& a) { return a * s; }

inline double dot(const Vec3& a, const Vec3& b) {
    return a.v[0] * b.v[0] + a.v[1] * b.v[1] + a.v[2] * b.v[2];
}

inline Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a.v[1] * b.v[2] - a.v[2] * b.v[1],
            a.v[2] * b.v[0] - a.v[0] * b.v[2],
            a.v[0] * b.v[1] - a.v[1] * b.v[0]};
}

inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

// Column-major 3x3 matrix: m[c * 3 + r].
struct Mat3 {
    double m[9] = {0, 0, 0, 0, 0, 0, 0, 0, 0};

    double& operator()(int r, int c) { return m[c * 3 + r]; }
    double operator()(int r, int c) const { return m[c * 3 + r]; }

    Vec3 col(int c) const { return {m[c * 3], m[c * 3 + 1], m[c * 3 + 2]}; }
    void set_col(int c, const Vec3& a) {
        m[c * 3] = a.v[0];
        m[c * 3 + 1] = a.v[1];
        m[c * 3 + 2] = a.v[2];
    }

    static Mat3 identity() {
        Mat3 r;
        r.m[0] = r.m[4] = r.m[8] = 1;
        return r;
    }

    Mat3 operator+(const Mat3& o) const {
        Mat3 r;
        for (int i = 0; i < 9; ++i) r.m[i] = m[i] + o.m[i];
        return r;
    }
    Mat3 operator-(const Mat3& o) const {
        Mat3 r;
        for (int i = 0; i < 9; ++i) r.m[i] = m[i] - o.m[i];
        return r;
    }
    Mat3 operator*(double s) const {
        Mat3 r;
        for (int i = 0; i < 9; ++i) r.m[i] = m[i] * s;
        return r;
    }
    Mat3& operator+=(const Mat3& o) {
        for (int i = 0; i < 9; ++i) m[i] += o.m[i];
        return *this;
    }
};

inline Mat3 operator*(double s, const Mat3& a) { return a * s; }

inline Vec3 operator*(const Mat3& a, const Vec3& x) {
    return {a.m[0] * x.v[0] + a.m[3] * x.v[1] + a.m[6] * x.v[2],
            a.m[1] * x.v[0] + a.m[4] * x.v[1] + a.m[7] * x.v[2],
            a.m[2] * x.v[0] + a.m[5] * x.v[1] + a.m[8] * x.v[2]};
}

inline Mat3 operator*(const Mat3& a, const Mat3& b) {
    Mat3 r;
    for (int c = 0; c < 3; ++c)
        for (int rr = 0; rr < 3; ++rr) {
            double s = 0;
            for (int k = 0; k < 3; ++k) s += a(rr, k) * b(k, c);
            r(rr, c) = s;
        }
    return r;
}

inline Mat3 transpose(const Mat3& a) {
    Mat3 r;
    for (int c = 0; c < 3; ++c)
        for (int rr = 0; rr < 3; ++rr) r(rr, c) = a(c, rr);
    return r;
}

inline Mat3 outer(const Vec3& a, const Vec3& b) {
    Mat3 r;
    for (int c = 0; c < 3; ++c)
        for (int rr = 0; rr < 3; ++rr) r(rr, c) = a.v[rr] * b.v[c];
    return r;
}

inline double trace(const Mat3& a) { return a.m[0] + a.m[4] + a.m[8]; }

inline double frobenius_inner(const Mat3& a, const Mat3& b) {
    double s = 0;
    for (int i = 0; i < 9; ++i) s += a.m[i] * b.m[i];
    return s;
}

inline double frobenius_norm(const Mat3& a) { return std::sqrt(frobenius_inner(a, a)); }

double det3(const Mat3& a);

// Cofactor matrix C with A^{-1} = C^T / det(A).  Symmetric input gives a
// symmetric cofactor matrix.
Mat3 cofactor3(const Mat3& a);

// Directional derivative of cofactor3 at a along da, from the
// Cayley-Hamilton form adj(A) = A^2 - tr(A) A + (tr(A)^2 - tr(A^2))/2 I.
// Exact: cofactor entries are quadratic in the entries of a.
Mat3 cofactor_differential(const Mat3& a, const Mat3& da);

// Throws Error when |det| < det_floor.
Mat3 inv3(const Mat3& a, double det_floor = 1e-12);

// Real cube root preserving sign: (-8)^{1/3} = -2.
double signed_cbrt(double x);

// Leading principal minors of a symmetric matrix (Sylvester test inputs).
std::array<double, 3> leading_minors(const Mat3& h);

// Lower-triangular T with T H T^T = I for symmetric positive definite H.
// Throws Error naming the first nonpositive leading minor otherwise.
Mat3 transition_matrix(const Mat3& h);

// Eigendecomposition of a symmetric n x n matrix (n <= 9) by cyclic Jacobi
// rotations.  a is column-major n x n and is destroyed; eigenvalues come out
// ascending in lam with matching eigenvector columns in vec.
void jacobi_eig(int n, double* a, double* vec, double* lam);

// Eigenvalues only, ascending, by the closed-form characteristic solve.
std::array<double, 3> sym3_eigenvalues(const Mat3& a);

// Principal square root of a symmetric positive semidefinite matrix.
Mat3 sqrtm_spd(const Mat3& a);

// Orthogonal polar factor of a matrix with positive determinant.
Mat3 polar_rotation(const Mat3& a);

// Null direction of a stack of eight constraint matrices.  The stack is the
// 9x8 matrix whose columns are the constraints vectorized column-major; its
// rank is at most 8, so a unit left-null direction b always exists.  b is
// determined up to sign; the sign here is fixed so that the entry of largest
// magnitude is positive.  sigma_small is the smallest singular value of the
// stack (the 8th), sigma_null the residual norm of the stack against the
// extracted direction; both are evaluated directly against the stack, not
// through the squared normal matrix.  gap is their difference relative to
// the largest singular value.  isolated is false when gap < 1e-8: the
// direction is then ambiguous and downstream consumers must treat the voxel
// as rank-deficient.
struct NullDirection {
    Mat3 b;
    double sigma_small = 0;
    double sigma_null = 0;
    double gap = 0;
    bool isolated = false;
};
NullDirection null_direction(const std::array<Mat3, 8>& stack);

}  // namespace pdt
