#include "pdt/phantom.hpp"

#include <cmath>

#include "pdt/errors.hpp"

namespace pdt {

namespace {

// Deterministic unit vector orthogonal to a.
Vec3 any_orthogonal(const Vec3& a) {
    const Vec3 u = std::abs(a.v[0]) <= std::abs(a.v[1]) && std::abs(a.v[0]) <= std::abs(a.v[2])
                       ? Vec3{1, 0, 0}
                       : (std::abs(a.v[1]) <= std::abs(a.v[2]) ? Vec3{0, 1, 0} : Vec3{0, 0, 1});
    Vec3 w = cross(a, u);
    return w * (1.0 / norm(w));
}

}  // namespace

Vec3 project_to_circle(const Torus& t, const Vec3& x) {
    const Vec3 d = x - t.center;
    Vec3 radial = d - dot(d, t.axis) * t.axis;
    const double rn = norm(radial);
    if (rn < 1e-14) radial = any_orthogonal(t.axis);
    else radial = radial * (1.0 / rn);
    return t.center + t.ring_radius * radial;
}

double kernel(const Torus& t, const Vec3& x) {
    const Vec3 d = x - project_to_circle(t, x);
    return std::exp(-dot(d, d) / (2.0 * t.tube_radius * t.tube_radius));
}

Mat3 rank_one_tensor(const Torus& t, const Vec3& x) {
    const Vec3 d = x - t.center;
    const double dn = norm(d);
    if (dn < 1e-14) return Mat3{};
    Vec3 w = cross(d * (1.0 / dn), t.axis);
    const double wn = norm(w);
    if (wn < 1e-14) return Mat3{};  // x on the axis: tangent direction undefined
    w = w * (1.0 / wn);
    return kernel(t, x) * outer(w, w);
}

nlohmann::json to_json(const PhantomSpec& s) {
    nlohmann::json terms = nlohmann::json::array();
    for (const PhantomTerm& t : s.terms) {
        terms.push_back({{"center", {t.torus.center[0], t.torus.center[1], t.torus.center[2]}},
                         {"axis", {t.torus.axis[0], t.torus.axis[1], t.torus.axis[2]}},
                         {"ring_radius", t.torus.ring_radius},
                         {"tube_radius", t.torus.tube_radius},
                         {"amplitude", t.amplitude},
                         {"isotropic", t.isotropic}});
    }
    return {{"base", s.base}, {"terms", terms}};
}

PhantomSpec phantom_from_json(const nlohmann::json& j) {
    PhantomSpec s;
    try {
        s.base = j.at("base");
        for (const auto& jt : j.at("terms")) {
            PhantomTerm t;
            std::array<double, 3> c = jt.at("center");
            std::array<double, 3> a = jt.at("axis");
            t.torus.center = {c[0], c[1], c[2]};
            t.torus.axis = {a[0], a[1], a[2]};
            const double an = norm(t.torus.axis);
            if (!(an > 0)) throw Error("phantom: zero torus axis");
            t.torus.axis = t.torus.axis * (1.0 / an);
            t.torus.ring_radius = jt.at("ring_radius");
            t.torus.tube_radius = jt.at("tube_radius");
            if (!(t.torus.ring_radius > 0) || !(t.torus.tube_radius > 0))
                throw Error("phantom: radii must be positive");
            t.amplitude = jt.at("amplitude");
            t.isotropic = jt.at("isotropic");
            s.terms.push_back(t);
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("phantom: bad JSON spec: ") + e.what());
    }
    return s;
}

namespace {

PhantomSpec interlocked(double amplitude, double center_z, double ring_radius, bool isotropic) {
    PhantomSpec s;
    s.base = 1;
    PhantomTerm up;
    up.torus = {{0, 0, center_z}, {1, 0, 0}, ring_radius, 0.1};
    up.amplitude = amplitude;
    up.isotropic = isotropic;
    PhantomTerm down;
    down.torus = {{0, 0, -center_z}, {0, 1, 0}, ring_radius, 0.1};
    down.amplitude = amplitude;
    down.isotropic = isotropic;
    s.terms = {up, down};
    return s;
}

}  // namespace

PhantomSpec phantom_gamma1() { return interlocked(2, 0.2, 0.4, true); }
PhantomSpec phantom_gamma2() { return interlocked(2, 0.5, 0.8, false); }
PhantomSpec phantom_gamma3() { return interlocked(20, 0.5, 0.8, false); }

PhantomBuild build_phantom(const PhantomSpec& s, const Grid3& g) {
    PhantomBuild out;
    out.gamma = SymTensorField(g);
    const int nx = g.n[0], ny = g.n[1], nz = g.n[2];
    double lmin = 1e300, lmax = -1e300;
    std::array<int, 3> worst = {0, 0, 0};
#pragma omp parallel
    {
        double tmin = 1e300, tmax = -1e300;
        std::array<int, 3> tworst = {0, 0, 0};
#pragma omp for schedule(static)
        for (int k = 0; k < nz; ++k)
            for (int j = 0; j < ny; ++j)
                for (int i = 0; i < nx; ++i) {
                    const Vec3 x = g.point(i, j, k);
                    Mat3 m = s.base * Mat3::identity();
                    for (const PhantomTerm& t : s.terms) {
                        if (t.isotropic)
                            m += (t.amplitude * kernel(t.torus, x)) * Mat3::identity();
                        else
                            m += t.amplitude * rank_one_tensor(t.torus, x);
                    }
                    out.gamma.set(i, j, k, m);
                    const auto ev = sym3_eigenvalues(m);
                    if (ev[0] < tmin) {
                        tmin = ev[0];
                        tworst = {i, j, k};
                    }
                    tmax = std::max(tmax, ev[2]);
                }
#pragma omp critical
        {
            if (tmin < lmin) {
                lmin = tmin;
                worst = tworst;
            }
            lmax = std::max(lmax, tmax);
        }
    }
    out.lambda_min = lmin;
    out.lambda_max = lmax;
    if (!(lmin > 0))
        throw HypothesisError(HypothesisError::Kind::not_spd,
                              "phantom not uniformly elliptic: smallest eigenvalue " +
                                  std::to_string(lmin),
                              worst, lmin);
    out.kappa = lmax / lmin;
    return out;
}

ScalarField scalar_part(const SymTensorField& gamma) {
    ScalarField out(gamma.grid);
    const std::size_t n = gamma.grid.num_nodes();
    for (std::size_t p = 0; p < n; ++p) {
        const double* c = &gamma.data[6 * p];
        if (std::abs(c[1]) > 1e-12 || std::abs(c[2]) > 1e-12 || std::abs(c[4]) > 1e-12 ||
            std::abs(c[0] - c[3]) > 1e-12 || std::abs(c[0] - c[5]) > 1e-12)
            throw Error("scalar_part: tensor field is not isotropic");
        out.data[p] = c[0];
    }
    return out;
}

}  // namespace pdt
