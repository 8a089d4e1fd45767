#pragma once

// Synthetic conductivity phantoms on (-1,1)^3: smooth bumps supported near
// interlocked torus rings, either isotropic or rank-one anisotropic with the
// fiber direction tangent to the ring.

#include <string>
#include <vector>

#include <json.hpp>

#include "pdt/grid.hpp"

namespace pdt {

struct Torus {
    Vec3 center;
    Vec3 axis;          // unit normal of the plane holding the ring
    double ring_radius;
    double tube_radius;
};

// Closest point to x on the ring of t.  For x on the axis line every ring
// point is equidistant; the convention here picks the ring point in the
// direction of a fixed unit vector orthogonal to the axis (the kernel is
// vanishingly small there, only determinism matters).
Vec3 project_to_circle(const Torus& t, const Vec3& x);

// exp(-|x - P(x)|^2 / (2 tube_radius^2)), equal to 1 on the ring.
double kernel(const Torus& t, const Vec3& x);

// kernel(x) * w(x) w(x)^T with w = unit(x - center) x axis: the tangent line
// field of the ring extended along its own level sets.  Returns zero at
// x == center where the direction is undefined (the kernel is negligible
// there for any sensible geometry).
Mat3 rank_one_tensor(const Torus& t, const Vec3& x);

struct PhantomTerm {
    Torus torus;
    double amplitude = 1;
    bool isotropic = false;  // true: amplitude * kernel * Id; false: rank-one
};

struct PhantomSpec {
    double base = 1;  // multiplies the identity
    std::vector<PhantomTerm> terms;
};

nlohmann::json to_json(const PhantomSpec& s);
PhantomSpec phantom_from_json(const nlohmann::json& j);

// The three stock phantoms: a scalar pair of interlocked tori (amplitude 2),
// the anisotropic pair with larger rings (amplitude 2), and the same rings
// at amplitude 20.
PhantomSpec phantom_gamma1();
PhantomSpec phantom_gamma2();
PhantomSpec phantom_gamma3();

struct PhantomBuild {
    SymTensorField gamma;
    double lambda_min = 0;  // smallest eigenvalue over all nodes
    double lambda_max = 0;  // largest eigenvalue over all nodes
    double kappa = 0;       // lambda_max / lambda_min
};

// Samples the phantom at every node and records the uniform ellipticity
// bounds.  Throws HypothesisError when positivity fails at some node.
PhantomBuild build_phantom(const PhantomSpec& s, const Grid3& g);

// Scalar part of an isotropic tensor field; throws when the field has
// off-diagonal entries or unequal diagonal entries beyond 1e-12.
ScalarField scalar_part(const SymTensorField& gamma);

}  // namespace pdt
