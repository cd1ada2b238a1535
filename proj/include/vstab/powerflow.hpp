#pragma once

#include <Eigen/Core>
#include <optional>

#include "vstab/network.hpp"

namespace vstab {

/// Fixed inputs of a power flow case: squared slack voltage plus the
/// net active/reactive demand at each PQ bus (per-unit).
struct SystemParameters {
    double v0 = 1.0;
    Eigen::VectorXd p;  // buses 1..n, index bus-1
    Eigen::VectorXd q;

    static SystemParameters zero_load(int n, double v0 = 1.0);

    /// Nonnegative demand everywhere; the approximation guarantees assume it.
    bool assumption1() const { return (p.array() >= 0.0).all() && (q.array() >= 0.0).all(); }
};

/// Branch-flow state: sending-end powers and squared currents per edge,
/// squared voltages per PQ bus, and the slack injections. 4n+2 scalars.
struct SystemState {
    Eigen::VectorXd pbar;  // edge order (child bus ascending)
    Eigen::VectorXd qbar;
    Eigen::VectorXd ell;
    Eigen::VectorXd v;  // buses 1..n
    double p0 = 0.0;    // slack injection into the feeder (positive toward loads)
    double q0 = 0.0;

    /// Zero flows, every squared voltage equal to v0. Solves the zero-load case.
    static SystemState flat(int n, double v0 = 1.0);

    int n() const { return static_cast<int>(v.size()); }

    Eigen::VectorXd to_vector() const;
    static SystemState from_vector(const Eigen::VectorXd& u, int n);

    /// Squared voltage at any bus, slack included.
    double voltage_sq(int bus, double v0) const { return bus == 0 ? v0 : v[bus - 1]; }
};

enum class SolveFailure { MaxIterations, SingularJacobian, DivergedNaN, NonPhysical };

const char* solve_failure_name(SolveFailure f) noexcept;

struct SolveOutcome {
    std::optional<SystemState> state;  // engaged iff converged
    bool converged = false;
    int iterations = 0;
    double final_residual_norm = 0.0;
    SolveFailure failure_kind = SolveFailure::MaxIterations;
};

struct SolveOptions {
    double tol = 1e-10;  // infinity norm of the residual
    int max_iter = 50;
    std::optional<SystemState> initial;  // flat start when absent
};

/// Residual of the relaxed branch-flow equations, each row written as
/// LHS minus RHS. Row blocks: active balance (buses 0..n), reactive
/// balance (buses 0..n), voltage drop (edges), current definition (edges).
/// Zero iff `u` solves the power flow for `params`.
Eigen::VectorXd residual(const RadialNetwork& net, const IncidenceSet& inc, const SystemState& u,
                         const SystemParameters& params);

/// Exact Jacobian of residual() with respect to the state vector
/// (pbar, qbar, ell, v, p0, q0). The first three row blocks are constant;
/// the last depends on pbar, qbar, ell and v. v0 enters the rows of edges
/// leaving the slack.
Eigen::MatrixXd full_jacobian(const RadialNetwork& net, const IncidenceSet& inc, const SystemState& u,
                              double v0 = 1.0);

/// Newton's method with LU partial pivoting and step halving.
SolveOutcome solve(const RadialNetwork& net, const IncidenceSet& inc, const SystemParameters& params,
                   const SolveOptions& options = {});

}  // namespace vstab
