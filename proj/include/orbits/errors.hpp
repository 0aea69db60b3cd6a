#pragma once

#include <stdexcept>
#include <string>

namespace orbits {

/// Error categories shared by the C++ core and the C API status codes.
/// Values are stable; the C header mirrors them.
enum class Err : int {
    Ok = 0,
    Config = 1,              // bad model / config input
    Io = 2,                  // file read/write failure
    OutsideEnergyShell = 10, // no root of H(x1,y1,x2,.) = E
    BranchViolation = 11,    // dH/dy2 vanishes at the root (shell boundary)
    MomentumSolveFailure = 12,
    NewtonDivergence = 13,
    BvpNonConvergence = 14,
    StripExit = 15,
    EnergyDriftExceeded = 16,
    NotClosed = 17,
    NoMinimumFound = 18,
    StepFailure = 19,
    NonUniqueMinimizer = 20,
    CriterionDisagreement = 30, // variational vs monodromy verdicts differ
    AuditMismatch = 31,         // cold-start audit found an unexplained minimum
    Internal = 99,
};

class OrbitsError : public std::runtime_error {
public:
    OrbitsError(Err code, const std::string& what)
        : std::runtime_error(what), code_(code) {}
    Err code() const { return code_; }

private:
    Err code_;
};

[[noreturn]] inline void raise(Err code, const std::string& what) {
    throw OrbitsError(code, what);
}

const char* err_name(Err code);

/// Process exit code the CLI maps a failure category to.
/// 0 success, 2 config/validation, 3 I/O, 4 property or solve violation.
int exit_code_for(Err code);

} // namespace orbits
