#pragma once

#include <vector>

#include "vstab/stability.hpp"

namespace vstab {

/// Per-bus demand increment applied per unit of the load multiplier lambda.
struct LoadDirection {
    Eigen::VectorXd dp;
    Eigen::VectorXd dq;

    /// Validated constructor: matching sizes, at least one nonzero entry,
    /// and (in strict mode) no negative increment.
    static LoadDirection make(Eigen::VectorXd dp, Eigen::VectorXd dq, bool strict = true);
};

struct TrajectoryPoint {
    double lambda = 0.0;
    StabilityReport report;
    int solve_iterations = 0;
};

struct ContinuationOptions {
    double lambda_step = 0.05;
    double step_min = 1e-4;
    double lambda_max = 1e9;
    bool warm_start = true;
    SolveOptions solve;
};

struct ContinuationResult {
    std::vector<TrajectoryPoint> points;  // strictly increasing lambda
    double collapse_lambda = 0.0;         // last solvable lambda
    bool collapsed = false;               // false if lambda_max was reached first
};

/// March lambda from 0 toward collapse along xi(lambda) = xi0 + lambda * dir,
/// warm-starting each solve, halving the step on failure until step_min.
ContinuationResult continuation(const RadialNetwork& net, const IncidenceSet& inc,
                                const SystemParameters& xi0, const LoadDirection& dir,
                                const ContinuationOptions& options = {});

struct BisectionOptions {
    double tol_lambda = 1e-6;
    double lambda_hint = 1.0;  // initial bracket probe, doubled until infeasible
    double lambda_max = 1e9;
    SolveOptions solve;
};

/// Bisect the solvability boundary along the ray; returns the midpoint of the
/// final bracket.
double collapse_bisection(const RadialNetwork& net, const IncidenceSet& inc,
                          const SystemParameters& xi0, const LoadDirection& dir,
                          const BisectionOptions& options = {});

struct ScanCell {
    bool solvable = false;
    double vsi = std::numeric_limits<double>::quiet_NaN();
    double vsia = std::numeric_limits<double>::quiet_NaN();
};

struct ScanResult {
    int rows = 0, cols = 0;
    std::vector<ScanCell> cells;  // row-major

    const ScanCell& at(int i, int j) const { return cells[static_cast<std::size_t>(i) * cols + j]; }
};

/// Evaluate xi0 + a*axis1 + b*axis2 on a regular grid, a in [0, extent1],
/// b in [0, extent2]. Points are independent; failures are recorded, not thrown.
ScanResult region_scan(const RadialNetwork& net, const IncidenceSet& inc, const SystemParameters& xi0,
                       const LoadDirection& axis1, const LoadDirection& axis2, int grid1, int grid2,
                       double extent1, double extent2, const SolveOptions& solve = {});

}  // namespace vstab
