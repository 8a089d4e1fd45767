#pragma once

#include <array>
#include <stdexcept>
#include <string>

namespace pdt {

// Generic failure: bad arguments, malformed files, inconsistent shapes.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Linear solver did not reach the requested residual within the iteration cap.
struct SolverError : Error {
    double achieved_residual;
    int iterations;
    SolverError(const std::string& what, double res, int iters)
        : Error(what), achieved_residual(res), iterations(iters) {}
};

// A pointwise assumption on the data failed (loss of ellipticity, rank
// deficiency of the constraint stack, sign change of a determinant, singular
// weight matrix).  Carries the first offending voxel so the user can inspect
// the data there.
struct HypothesisError : Error {
    enum class Kind {
        not_spd,          // power density / weight matrix not positive definite
        rank_deficient,   // constraint stack has no isolated null direction
        sign_change,      // determinant changed sign or left its valid range
    };
    Kind kind;
    std::array<int, 3> voxel;
    double value;  // the offending quantity (minor, gap, determinant)
    HypothesisError(Kind k, const std::string& what, std::array<int, 3> v, double val)
        : Error(what), kind(k), voxel(v), value(val) {}
};

}  // namespace pdt
