#pragma once

// Finite-difference stencils on node-centered grids: second-order central
// differences in the interior, second-order three-point one-sided stencils on
// the faces.  Both reproduce affine fields exactly, boundaries included.
// The _serial variants run the same arithmetic without OpenMP and exist as
// reference implementations for the kernel comparison tests.

#include <vector>

#include "pdt/grid.hpp"

namespace pdt {

VectorField gradient(const ScalarField& f);
VectorField gradient_serial(const ScalarField& f);

ScalarField divergence(const VectorField& w);
ScalarField divergence_serial(const VectorField& w);

// Values of f along the grid line parallel to `axis` through node `through`
// (the coordinates of `through` on the other two axes stay fixed).
std::vector<double> sample_line(const ScalarField& f, int axis, std::array<int, 3> through);

}  // namespace pdt
