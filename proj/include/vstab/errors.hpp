#pragma once

#include <stdexcept>
#include <string>

namespace vstab {

/// Error codes for every structured failure the library can raise.
enum class Errc {
    // network construction
    CycleDetected,
    DisconnectedBus,
    DuplicateEdge,
    NonpositiveImpedancePair,
    BadIndex,
    // linear algebra / assembly
    DimensionMismatch,
    SingularIncidence,
    // stability analysis
    OutsideRegion,
    NonpositiveDiagonal,
    RhoOutOfRange,
    NoConvergence,
    // consensus simulation
    DisconnectedGraph,
    WeightDegenerate,
    // experiments
    ZeroDirection,
    InitialPointInfeasible,
    // case files
    ParseError,
    ValidationError,
};

const char* errc_name(Errc code) noexcept;

/// Exception carrying a typed error code plus a human-readable message.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message)
        : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

}  // namespace vstab
