#ifndef NMKDV_CONFIG_HPP
#define NMKDV_CONFIG_HPP

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "reconstruction.hpp"

namespace nmkdv {

// gaussian(A, w, c) | box(A, ell) | file:path
struct PotentialSpec {
    enum class Kind { gaussian, box, file } kind = Kind::gaussian;
    double amplitude = 0.1, width = 1.0, center = 0.0, ell = 1.0;
    std::string path;
};

struct RunConfig {
    int sigma = 1;
    double L = 20.0;
    int N_x = 1024;
    double Z = 20.0;
    int N_z = 1024;
    double tail_tol = 1e-12;
    SolverMode solver_mode = SolverMode::automatic;
    std::vector<double> times{0.0};
    PotentialSpec potential;

    SpaceGrid space() const { return SpaceGrid(L, N_x); }
    SpectralGrid spectral() const { return SpectralGrid(Z, N_z); }

    // grid and phase-resolution checks
    void validate() const
    {
        if (N_x < 2 || N_z < 2 || !(L > 0.0) || !(Z > 0.0))
            throw AdmissibilityError(Stage::model, "config needs positive L, Z and N_x, N_z >= 2");
        if (!(tail_tol > 0.0)) throw AdmissibilityError(Stage::model, "tail_tol must be positive");
        require_phase_resolution(space(), spectral());
    }
};

namespace detail {

inline std::string trim(const std::string& s)
{
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> out;
    std::string tok;
    std::istringstream is(s);
    while (std::getline(is, tok, sep)) out.push_back(trim(tok));
    return out;
}

inline SolverMode parse_mode(const std::string& s)
{
    if (s == "auto") return SolverMode::automatic;
    if (s == "direct") return SolverMode::direct;
    if (s == "neumann") return SolverMode::neumann;
    if (s == "gmres") return SolverMode::gmres;
    throw IoError("solver_mode must be auto, direct, neumann or gmres, got '" + s + "'");
}

} // namespace detail

inline PotentialSpec parse_potential(const std::string& text)
{
    const std::string s = detail::trim(text);
    PotentialSpec p;
    if (s.rfind("file:", 0) == 0) {
        p.kind = PotentialSpec::Kind::file;
        p.path = detail::trim(s.substr(5));
        if (p.path.empty()) throw IoError("potential 'file:' needs a path");
        return p;
    }
    const auto open = s.find('('), close = s.rfind(')');
    if (open == std::string::npos || close != s.size() - 1)
        throw IoError("potential must be gaussian(A,w,c), box(A,ell) or file:path, got '" + s + "'");
    const std::string name = detail::trim(s.substr(0, open));
    const auto args = detail::split(s.substr(open + 1, close - open - 1), ',');
    std::vector<double> v;
    for (auto& a : args) v.push_back(detail::to_double(a, "potential parameter"));
    if (name == "gaussian" && (v.size() == 2 || v.size() == 3)) {
        p.kind = PotentialSpec::Kind::gaussian;
        p.amplitude = v[0];
        p.width = v[1];
        p.center = v.size() == 3 ? v[2] : 0.0;
        if (!(p.width > 0.0)) throw AdmissibilityError(Stage::model, "gaussian width must be positive");
    } else if (name == "box" && v.size() == 2) {
        p.kind = PotentialSpec::Kind::box;
        p.amplitude = v[0];
        p.ell = v[1];
        if (!(p.ell > 0.0)) throw AdmissibilityError(Stage::model, "box length must be positive");
    } else {
        throw IoError("unknown potential '" + s + "'");
    }
    return p;
}

inline void apply_setting(RunConfig& c, const std::string& key, const std::string& value)
{
    using detail::to_double;
    using detail::to_int;
    if (key == "sigma") c.sigma = detail::parse_sigma(value);
    else if (key == "L") c.L = to_double(value, key);
    else if (key == "N_x") c.N_x = to_int(value, key);
    else if (key == "Z") c.Z = to_double(value, key);
    else if (key == "N_z") c.N_z = to_int(value, key);
    else if (key == "tail_tol") c.tail_tol = to_double(value, key);
    else if (key == "solver_mode") c.solver_mode = detail::parse_mode(value);
    else if (key == "times") {
        c.times.clear();
        for (auto& t : detail::split(value, ',')) c.times.push_back(to_double(t, "times"));
        if (c.times.empty()) throw IoError("times must list at least one value");
    } else if (key == "potential") c.potential = parse_potential(value);
    else throw IoError("unknown config key '" + key + "'");
}

// flat key = value lines; '#' starts a comment
inline RunConfig parse_config(std::istream& in)
{
    RunConfig c;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        line = detail::trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) throw IoError("config line " + std::to_string(lineno) + " lacks '='");
        apply_setting(c, detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
    }
    return c;
}

inline RunConfig read_config(const std::string& path)
{
    auto in = detail::open_in(path);
    return parse_config(in);
}

inline SampledPotential make_potential(const RunConfig& c)
{
    const SpaceGrid g = c.space();
    switch (c.potential.kind) {
    case PotentialSpec::Kind::gaussian:
        return gaussian_potential(g, c.sigma, c.potential.amplitude, c.potential.width, c.potential.center);
    case PotentialSpec::Kind::box:
        return box_potential(g, c.sigma, c.potential.amplitude, c.potential.ell);
    case PotentialSpec::Kind::file: {
        SampledPotential u = read_potential(c.potential.path);
        if (u.grid().size() != c.N_x || std::abs(u.grid().half_width() - c.L) > 1e-12 * c.L)
            throw AdmissibilityError(Stage::model, "potential file grid does not match L and N_x of the config");
        return SampledPotential(u.grid(), u.values(), c.sigma);
    }
    }
    throw IoError("unreachable potential kind");
}

} // namespace nmkdv

#endif
