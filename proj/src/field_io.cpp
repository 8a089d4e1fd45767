#include "pdt/field_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include <json.hpp>

#include "pdt/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "field container assumes a little-endian host");

namespace pdt {

namespace {

constexpr char kMagic[8] = {'P', 'D', 'T', 'F', 'L', 'D', '0', '1'};

int components_for_kind(const std::string& kind) {
    if (kind == "scalar") return 1;
    if (kind == "vector") return 3;
    if (kind == "tensor6") return 6;
    if (kind == "mat9") return 9;
    throw Error("field container: unknown kind '" + kind + "'");
}

void write_raw(const std::string& path, const Grid3& g, const std::string& kind,
               const std::vector<double>& payload) {
    nlohmann::json header = {{"n", g.n},
                             {"origin", g.origin},
                             {"spacing", g.spacing},
                             {"kind", kind}};
    const std::string hs = header.dump();
    if (hs.size() > UINT32_MAX) throw Error("field container: header too large");
    const uint32_t hlen = static_cast<uint32_t>(hs.size());

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("field container: cannot open '" + path + "' for writing");
    out.write(kMagic, 8);
    out.write(reinterpret_cast<const char*>(&hlen), 4);
    out.write(hs.data(), hlen);
    out.write(reinterpret_cast<const char*>(payload.data()),
              static_cast<std::streamsize>(payload.size() * sizeof(double)));
    if (!out) throw Error("field container: write to '" + path + "' failed");
}

struct RawField {
    Grid3 grid;
    std::string kind;
    std::vector<double> payload;
};

RawField read_raw(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("field container: cannot open '" + path + "'");
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kMagic, 8) != 0)
        throw Error("field container: '" + path + "' has no PDTFLD01 magic");
    uint32_t hlen = 0;
    in.read(reinterpret_cast<char*>(&hlen), 4);
    if (!in) throw Error("field container: '" + path + "' truncated header length");
    std::string hs(hlen, '\0');
    in.read(hs.data(), hlen);
    if (!in) throw Error("field container: '" + path + "' truncated header");

    nlohmann::json header;
    try {
        header = nlohmann::json::parse(hs);
    } catch (const nlohmann::json::exception& e) {
        throw Error("field container: bad JSON header in '" + path + "': " + e.what());
    }

    RawField r;
    try {
        std::array<int, 3> n = header.at("n");
        std::array<double, 3> origin = header.at("origin");
        std::array<double, 3> spacing = header.at("spacing");
        r.grid = Grid3(n, origin, spacing);
        r.kind = header.at("kind");
    } catch (const nlohmann::json::exception& e) {
        throw Error("field container: incomplete header in '" + path + "': " + e.what());
    }

    const std::size_t count = r.grid.num_nodes() * components_for_kind(r.kind);
    r.payload.resize(count);
    in.read(reinterpret_cast<char*>(r.payload.data()),
            static_cast<std::streamsize>(count * sizeof(double)));
    if (static_cast<std::size_t>(in.gcount()) != count * sizeof(double))
        throw Error("field container: '" + path + "' payload truncated");
    return r;
}

RawField read_expect(const std::string& path, const std::string& kind) {
    RawField r = read_raw(path);
    if (r.kind != kind)
        throw Error("field container: '" + path + "' holds kind '" + r.kind + "', expected '" +
                    kind + "'");
    return r;
}

}  // namespace

void write_field(const std::string& path, const ScalarField& f) {
    write_raw(path, f.grid, "scalar", f.data);
}
void write_field(const std::string& path, const VectorField& f) {
    write_raw(path, f.grid, "vector", f.data);
}
void write_field(const std::string& path, const SymTensorField& f) {
    write_raw(path, f.grid, "tensor6", f.data);
}
void write_field(const std::string& path, const Mat3Field& f) {
    write_raw(path, f.grid, "mat9", f.data);
}

std::string probe_field_kind(const std::string& path) { return read_raw(path).kind; }

ScalarField read_scalar_field(const std::string& path) {
    RawField r = read_expect(path, "scalar");
    return ScalarField(r.grid, std::move(r.payload));
}
VectorField read_vector_field(const std::string& path) {
    RawField r = read_expect(path, "vector");
    return VectorField(r.grid, std::move(r.payload));
}
SymTensorField read_tensor_field(const std::string& path) {
    RawField r = read_expect(path, "tensor6");
    return SymTensorField(r.grid, std::move(r.payload));
}
Mat3Field read_mat3_field(const std::string& path) {
    RawField r = read_expect(path, "mat9");
    return Mat3Field(r.grid, std::move(r.payload));
}

namespace {

std::ofstream vtk_open(const std::string& path, const Grid3& g) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error("vtk export: cannot open '" + path + "'");
    out.precision(12);
    out << "# vtk DataFile Version 3.0\n"
        << "pdt field\n"
        << "ASCII\n"
        << "DATASET STRUCTURED_POINTS\n"
        << "DIMENSIONS " << g.n[0] << " " << g.n[1] << " " << g.n[2] << "\n"
        << "ORIGIN " << g.origin[0] << " " << g.origin[1] << " " << g.origin[2] << "\n"
        << "SPACING " << g.spacing[0] << " " << g.spacing[1] << " " << g.spacing[2] << "\n"
        << "POINT_DATA " << g.num_nodes() << "\n";
    return out;
}

}  // namespace

void write_vtk(const std::string& path, const std::string& name, const ScalarField& f) {
    auto out = vtk_open(path, f.grid);
    out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    for (double x : f.data) out << x << "\n";
    if (!out) throw Error("vtk export: write failed");
}

void write_vtk(const std::string& path, const std::string& name, const VectorField& f) {
    auto out = vtk_open(path, f.grid);
    out << "VECTORS " << name << " double\n";
    const std::size_t n = f.grid.num_nodes();
    for (std::size_t p = 0; p < n; ++p)
        out << f.data[3 * p] << " " << f.data[3 * p + 1] << " " << f.data[3 * p + 2] << "\n";
    if (!out) throw Error("vtk export: write failed");
}

void write_vtk(const std::string& path, const std::string& name, const SymTensorField& f) {
    auto out = vtk_open(path, f.grid);
    out << "TENSORS " << name << " double\n";
    const std::size_t n = f.grid.num_nodes();
    for (std::size_t p = 0; p < n; ++p) {
        const Mat3 m = f.at(p);
        for (int r = 0; r < 3; ++r)
            out << m(r, 0) << " " << m(r, 1) << " " << m(r, 2) << "\n";
        out << "\n";
    }
    if (!out) throw Error("vtk export: write failed");
}

void write_vtk(const std::string& path, const std::string& name, const Mat3Field& f) {
    auto out = vtk_open(path, f.grid);
    out << "TENSORS " << name << " double\n";
    const std::size_t n = f.grid.num_nodes();
    for (std::size_t p = 0; p < n; ++p) {
        const Mat3 m = f.at(p);
        for (int r = 0; r < 3; ++r)
            out << m(r, 0) << " " << m(r, 1) << " " << m(r, 2) << "\n";
        out << "\n";
    }
    if (!out) throw Error("vtk export: write failed");
}

}  // namespace pdt
