#ifndef NMKDV_ERRORS_HPP
#define NMKDV_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace nmkdv {

// Pipeline stage that raised an error; printed as a tag by the CLI.
enum class Stage { model, direct, data, cauchy, rh, reconstruction, oracle, io, validate };

inline const char* stage_name(Stage s)
{
    switch (s) {
    case Stage::model: return "model";
    case Stage::direct: return "direct";
    case Stage::data: return "data";
    case Stage::cauchy: return "cauchy";
    case Stage::rh: return "rh";
    case Stage::reconstruction: return "reconstruction";
    case Stage::oracle: return "oracle";
    case Stage::io: return "io";
    case Stage::validate: return "validate";
    }
    return "?";
}

class Error : public std::runtime_error {
public:
    Error(Stage stage, int code, const std::string& what)
    : std::runtime_error(what), stage_(stage), code_(code) {}

    Stage stage() const { return stage_; }
    int exit_code() const { return code_; }

private:
    Stage stage_;
    int code_;
};

// exit 2: input violates a hypothesis (bad grid, non-finite data, tails, zero crossings)
class AdmissibilityError : public Error {
public:
    AdmissibilityError(Stage s, const std::string& w) : Error(s, 2, w) {}
};

// step size too coarse for the fastest phase; carries the offending z
class RefinementError : public AdmissibilityError {
public:
    RefinementError(double z, const std::string& w)
    : AdmissibilityError(Stage::direct, w), z_(z) {}
    double z() const { return z_; }

private:
    double z_;
};

// exit 3: RH problem not uniquely solvable (positivity, degenerate jump, no convergence)
class SolvabilityError : public Error {
public:
    SolvabilityError(Stage s, const std::string& w) : Error(s, 3, w) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& w) : Error(Stage::io, 4, w) {}
};

// exit 5: an internal consistency gate failed
class ValidationError : public Error {
public:
    ValidationError(Stage s, const std::string& w) : Error(s, 5, w) {}
};

} // namespace nmkdv

#endif
