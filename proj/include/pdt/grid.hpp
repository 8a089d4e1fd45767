#pragma once

// Uniform node-centered grids on [-1,1]^3 and the field containers living on
// them.  Storage order is x fastest, then y, then z.  Multi-component fields
// keep the components of one node contiguous.

#include <array>
#include <cstddef>
#include <vector>

#include "pdt/smalg.hpp"

namespace pdt {

struct Grid3 {
    std::array<int, 3> n = {0, 0, 0};
    std::array<double, 3> origin = {-1, -1, -1};
    std::array<double, 3> spacing = {0, 0, 0};

    Grid3() = default;
    Grid3(std::array<int, 3> nodes, std::array<double, 3> org, std::array<double, 3> sp);
    static Grid3 cube(int nodes_per_axis);

    std::size_t num_nodes() const {
        return std::size_t(n[0]) * std::size_t(n[1]) * std::size_t(n[2]);
    }
    std::size_t index(int i, int j, int k) const {
        return std::size_t(i) + std::size_t(n[0]) * (std::size_t(j) + std::size_t(n[1]) * k);
    }
    Vec3 point(int i, int j, int k) const {
        return {origin[0] + spacing[0] * i, origin[1] + spacing[1] * j,
                origin[2] + spacing[2] * k};
    }
    bool boundary(int i, int j, int k) const {
        return i == 0 || j == 0 || k == 0 || i == n[0] - 1 || j == n[1] - 1 || k == n[2] - 1;
    }
    bool operator==(const Grid3& o) const {
        return n == o.n && origin == o.origin && spacing == o.spacing;
    }
};

namespace detail {
void check_finite(const std::vector<double>& data, const char* what);
void check_size(std::size_t got, std::size_t want, const char* what);
}  // namespace detail

struct ScalarField {
    Grid3 grid;
    std::vector<double> data;

    ScalarField() = default;
    explicit ScalarField(const Grid3& g) : grid(g), data(g.num_nodes(), 0.0) {}
    ScalarField(const Grid3& g, std::vector<double> d) : grid(g), data(std::move(d)) {
        detail::check_size(data.size(), g.num_nodes(), "ScalarField");
        detail::check_finite(data, "ScalarField");
    }
    double& operator()(int i, int j, int k) { return data[grid.index(i, j, k)]; }
    double operator()(int i, int j, int k) const { return data[grid.index(i, j, k)]; }
};

struct VectorField {
    Grid3 grid;
    std::vector<double> data;  // 3 per node

    VectorField() = default;
    explicit VectorField(const Grid3& g) : grid(g), data(3 * g.num_nodes(), 0.0) {}
    VectorField(const Grid3& g, std::vector<double> d) : grid(g), data(std::move(d)) {
        detail::check_size(data.size(), 3 * g.num_nodes(), "VectorField");
        detail::check_finite(data, "VectorField");
    }
    Vec3 at(std::size_t node) const {
        return {data[3 * node], data[3 * node + 1], data[3 * node + 2]};
    }
    Vec3 at(int i, int j, int k) const { return at(grid.index(i, j, k)); }
    void set(std::size_t node, const Vec3& v) {
        data[3 * node] = v.v[0];
        data[3 * node + 1] = v.v[1];
        data[3 * node + 2] = v.v[2];
    }
    void set(int i, int j, int k, const Vec3& v) { set(grid.index(i, j, k), v); }
};

// Symmetric 3x3 tensor per node, components ordered xx, xy, xz, yy, yz, zz.
struct SymTensorField {
    Grid3 grid;
    std::vector<double> data;  // 6 per node

    SymTensorField() = default;
    explicit SymTensorField(const Grid3& g) : grid(g), data(6 * g.num_nodes(), 0.0) {}
    SymTensorField(const Grid3& g, std::vector<double> d) : grid(g), data(std::move(d)) {
        detail::check_size(data.size(), 6 * g.num_nodes(), "SymTensorField");
        detail::check_finite(data, "SymTensorField");
    }
    Mat3 at(std::size_t node) const {
        const double* p = &data[6 * node];
        Mat3 m;
        m(0, 0) = p[0];
        m(0, 1) = m(1, 0) = p[1];
        m(0, 2) = m(2, 0) = p[2];
        m(1, 1) = p[3];
        m(1, 2) = m(2, 1) = p[4];
        m(2, 2) = p[5];
        return m;
    }
    Mat3 at(int i, int j, int k) const { return at(grid.index(i, j, k)); }
    // Stores the symmetric part of m.
    void set(std::size_t node, const Mat3& m) {
        double* p = &data[6 * node];
        p[0] = m(0, 0);
        p[1] = 0.5 * (m(0, 1) + m(1, 0));
        p[2] = 0.5 * (m(0, 2) + m(2, 0));
        p[3] = m(1, 1);
        p[4] = 0.5 * (m(1, 2) + m(2, 1));
        p[5] = m(2, 2);
    }
    void set(int i, int j, int k, const Mat3& m) { set(grid.index(i, j, k), m); }
};

// General 3x3 matrix per node, column-major.
struct Mat3Field {
    Grid3 grid;
    std::vector<double> data;  // 9 per node

    Mat3Field() = default;
    explicit Mat3Field(const Grid3& g) : grid(g), data(9 * g.num_nodes(), 0.0) {}
    Mat3Field(const Grid3& g, std::vector<double> d) : grid(g), data(std::move(d)) {
        detail::check_size(data.size(), 9 * g.num_nodes(), "Mat3Field");
        detail::check_finite(data, "Mat3Field");
    }
    Mat3 at(std::size_t node) const {
        Mat3 m;
        for (int i = 0; i < 9; ++i) m.m[i] = data[9 * node + i];
        return m;
    }
    Mat3 at(int i, int j, int k) const { return at(grid.index(i, j, k)); }
    void set(std::size_t node, const Mat3& m) {
        for (int i = 0; i < 9; ++i) data[9 * node + i] = m.m[i];
    }
    void set(int i, int j, int k, const Mat3& m) { set(grid.index(i, j, k), m); }
};

}  // namespace pdt
