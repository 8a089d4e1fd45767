#pragma once

// Binary field container: 8-byte magic "PDTFLD01", a 4-byte little-endian
// length-prefixed UTF-8 JSON header carrying n, origin, spacing and kind
// (scalar | vector | tensor6 | mat9), then the payload as little-endian
// float64 in storage order (x fastest, node components contiguous).
// Plus a legacy-VTK STRUCTURED_POINTS ASCII export for quick inspection.

#include <string>

#include "pdt/grid.hpp"

namespace pdt {

void write_field(const std::string& path, const ScalarField& f);
void write_field(const std::string& path, const VectorField& f);
void write_field(const std::string& path, const SymTensorField& f);
void write_field(const std::string& path, const Mat3Field& f);

// "scalar", "vector", "tensor6" or "mat9"; throws on anything unreadable.
std::string probe_field_kind(const std::string& path);

ScalarField read_scalar_field(const std::string& path);
VectorField read_vector_field(const std::string& path);
SymTensorField read_tensor_field(const std::string& path);
Mat3Field read_mat3_field(const std::string& path);

void write_vtk(const std::string& path, const std::string& name, const ScalarField& f);
void write_vtk(const std::string& path, const std::string& name, const VectorField& f);
void write_vtk(const std::string& path, const std::string& name, const SymTensorField& f);
void write_vtk(const std::string& path, const std::string& name, const Mat3Field& f);

}  // namespace pdt
