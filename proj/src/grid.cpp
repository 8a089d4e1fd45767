#include "pdt/grid.hpp"

#include <cmath>
#include <string>

#include "pdt/errors.hpp"

namespace pdt {

Grid3::Grid3(std::array<int, 3> nodes, std::array<double, 3> org, std::array<double, 3> sp)
    : n(nodes), origin(org), spacing(sp) {
    for (int a = 0; a < 3; ++a) {
        if (n[a] < 3)
            throw Error("Grid3: need at least 3 nodes per axis, got " + std::to_string(n[a]));
        if (!(spacing[a] > 0)) throw Error("Grid3: spacing must be positive");
        // the grid must cover [-1,1] exactly along each axis
        if (std::abs(origin[a] + 1.0) > 1e-12 ||
            std::abs(origin[a] + spacing[a] * (n[a] - 1) - 1.0) > 1e-12)
            throw Error("Grid3: grid must span [-1,1] per axis");
    }
}

Grid3 Grid3::cube(int nodes_per_axis) {
    const double h = 2.0 / (nodes_per_axis - 1);
    return Grid3({nodes_per_axis, nodes_per_axis, nodes_per_axis}, {-1, -1, -1}, {h, h, h});
}

namespace detail {

void check_finite(const std::vector<double>& data, const char* what) {
    for (double x : data)
        if (!std::isfinite(x)) throw Error(std::string(what) + ": non-finite entry");
}

void check_size(std::size_t got, std::size_t want, const char* what) {
    if (got != want)
        throw Error(std::string(what) + ": data size " + std::to_string(got) +
                    " does not match grid (" + std::to_string(want) + ")");
}

}  // namespace detail

}  // namespace pdt
