#ifndef NMKDV_SCATTERING_DATA_HPP
#define NMKDV_SCATTERING_DATA_HPP

#include <cmath>
#include <optional>
#include <sstream>
#include <string>

#include "core_model.hpp"
#include "detail/text_io.hpp"
#include "direct_scattering.hpp"

namespace nmkdv {

// Reflection data on the real z grid, valid at `time`.
// b holds b(time; z); a and d do not evolve.
struct ScatteringData {
    SpectralGrid spectral;
    int sigma;
    double time;
    cvec a, d, b, r1, r2;
};

// e^{-8 i z^3 t}: the factor r1 and b pick up after time t
inline cplx evolution_phase(double z, double t)
{
    return std::polar(1.0, -8.0 * z * z * z * t);
}

// r1 = b/a and r2 = -sigma c/d. Without c the real-potential symmetry
// c(z) = -sigma conj(b(-z)) is used, i.e. r2 = conj(b(-z))/d.
inline ScatteringData reflection_coefficients(const SpectralGrid& spectral, int sigma, const cvec& a, const cvec& b,
                                              const cvec& d, const std::optional<cvec>& c = std::nullopt)
{
    const int n = spectral.size();
    if (a.size() != n || b.size() != n || d.size() != n || (c && c->size() != n))
        throw AdmissibilityError(Stage::data, "coefficient arrays do not match the spectral grid");
    for (int j = 0; j < n; ++j) {
        if (std::abs(a[j]) < 1e-12 || std::abs(d[j]) < 1e-12) {
            std::ostringstream os;
            os << "zero crossing of " << (std::abs(a[j]) < 1e-12 ? "a" : "d") << " at z = " << spectral.z(j)
               << " (possible spectral singularity)";
            throw AdmissibilityError(Stage::data, os.str());
        }
    }
    ScatteringData sd{spectral, sigma, 0.0, a, d, b, cvec(n), cvec(n)};
    for (int j = 0; j < n; ++j) {
        sd.r1[j] = b[j] / a[j];
        sd.r2[j] = c ? -static_cast<double>(sigma) * (*c)[j] / d[j] : std::conj(b[spectral.mirror(j)]) / d[j];
    }
    return sd;
}

inline ScatteringData reflection_coefficients(const ScatteringCoefficients& sc)
{
    return reflection_coefficients(sc.spectral, sc.sigma, sc.a, sc.b, sc.d, sc.c);
}

// r1 -> r1 e^{-8iz^3 t}, r2 -> r2 e^{8iz^3 t}, b -> b e^{-8iz^3 t}; time += t
inline ScatteringData time_evolve(const ScatteringData& sd, double t)
{
    ScatteringData out = sd;
    for (int j = 0; j < sd.spectral.size(); ++j) {
        const cplx e = evolution_phase(sd.spectral.z(j), t);
        out.b[j] *= e;
        out.r1[j] *= e;
        out.r2[j] *= std::conj(e);
    }
    out.time = sd.time + t;
    return out;
}

struct DataAudit {
    double determinant = 0;     // |a d + s b0(z) conj(b0(-z)) - 1|, b0 = b at time 0
    double determinant_r = 0;   // |a d (1 + s r1 r2) - 1|, valid for complex potentials too
    double a_symmetry = 0;      // |a(z) - conj(a(-z))|
    double d_symmetry = 0;
    double r1_relation = 0;     // |r1 a - b|
    double r2_relation = 0;     // |r2(0) d - conj(b0(-z))|
    double max_r1 = 0, max_r2 = 0;
};

inline DataAudit symmetry_and_identity_audit(const ScatteringData& sd)
{
    const int n = sd.spectral.size();
    const double s = sd.sigma;
    cvec b0(n), r20(n);
    for (int j = 0; j < n; ++j) {
        const cplx e = evolution_phase(sd.spectral.z(j), sd.time);
        b0[j] = sd.b[j] / e;
        r20[j] = sd.r2[j] * e;
    }
    DataAudit r;
    for (int j = 0; j < n; ++j) {
        const int m = sd.spectral.mirror(j);
        r.determinant = std::max(r.determinant, std::abs(sd.a[j] * sd.d[j] + s * b0[j] * std::conj(b0[m]) - 1.0));
        r.determinant_r = std::max(r.determinant_r, std::abs(sd.a[j] * sd.d[j] * (1.0 + s * sd.r1[j] * sd.r2[j]) - 1.0));
        r.a_symmetry = std::max(r.a_symmetry, std::abs(sd.a[j] - std::conj(sd.a[m])));
        r.d_symmetry = std::max(r.d_symmetry, std::abs(sd.d[j] - std::conj(sd.d[m])));
        r.r1_relation = std::max(r.r1_relation, std::abs(sd.r1[j] * sd.a[j] - sd.b[j]));
        r.r2_relation = std::max(r.r2_relation, std::abs(r20[j] * sd.d[j] - std::conj(b0[m])));
        r.max_r1 = std::max(r.max_r1, std::abs(sd.r1[j]));
        r.max_r2 = std::max(r.max_r2, std::abs(sd.r2[j]));
    }
    return r;
}

// ---------------------------------------------------------------------------
// text format

inline void write_scattering(std::ostream& out, const ScatteringData& sd)
{
    using detail::fmt17;
    out << "# nmkdv-scattering v1 sigma=" << detail::fmt_sigma(sd.sigma) << " Z=" << fmt17(sd.spectral.half_width())
        << " N=" << sd.spectral.size() << " t=" << fmt17(sd.time) << "\n";
    for (int j = 0; j < sd.spectral.size(); ++j) {
        out << fmt17(sd.spectral.z(j));
        for (const cvec* v : {&sd.a, &sd.d, &sd.b, &sd.r1, &sd.r2})
            out << ' ' << fmt17((*v)[j].real()) << ' ' << fmt17((*v)[j].imag());
        out << '\n';
    }
}

inline void write_scattering(const std::string& path, const ScatteringData& sd)
{
    auto out = detail::open_out(path);
    write_scattering(out, sd);
    if (!out) throw IoError("write failed for '" + path + "'");
}

inline ScatteringData read_scattering(std::istream& in)
{
    std::string header;
    if (!std::getline(in, header)) throw IoError("empty scattering file");
    auto kv = detail::parse_header(header, "nmkdv-scattering");
    const int sigma = detail::parse_sigma(detail::require_key(kv, "sigma"));
    const double Z = detail::to_double(detail::require_key(kv, "Z"), "Z");
    const int n = detail::to_int(detail::require_key(kv, "N"), "N");
    const double t = detail::to_double(detail::require_key(kv, "t"), "t");
    SpectralGrid grid(Z, n);
    ScatteringData sd{grid, sigma, t, cvec(n), cvec(n), cvec(n), cvec(n), cvec(n)};
    std::vector<double> row;
    for (int j = 0; j < n; ++j) {
        if (!detail::read_row(in, row)) throw IoError("scattering file ends early");
        if (row.size() != 11) throw IoError("scattering row must have 11 columns");
        if (std::abs(row[0] - grid.z(j)) > 1e-12 * std::max(1.0, Z))
            throw IoError("z column does not match the uniform grid at row " + std::to_string(j));
        cvec* cols[5] = {&sd.a, &sd.d, &sd.b, &sd.r1, &sd.r2};
        for (int k = 0; k < 5; ++k) (*cols[k])[j] = cplx(row[1 + 2 * k], row[2 + 2 * k]);
    }
    if (detail::read_row(in, row)) throw IoError("scattering file has extra rows");
    return sd;
}

inline ScatteringData read_scattering(const std::string& path)
{
    auto in = detail::open_in(path);
    return read_scattering(in);
}

} // namespace nmkdv

#endif
