#pragma once

#include <Eigen/Core>
#include <utility>

#include "vstab/jacobian.hpp"

namespace vstab {

/// Independent region diagnostics. in_region is defined by det_positive;
/// the other three corroborate it under nonnegative demands.
struct RegionFlags {
    bool det_positive = false;
    bool diag_positive = false;
    bool rho_lt_one = false;
    bool z_matrix = false;
};

struct StabilityReport {
    int n = 0;
    double vsi = std::numeric_limits<double>::quiet_NaN();
    double vsia = std::numeric_limits<double>::quiet_NaN();
    double rho = std::numeric_limits<double>::quiet_NaN();
    double bound_loose = std::numeric_limits<double>::quiet_NaN();  // -rho ln(1-rho)
    double bound_tight = std::numeric_limits<double>::quiet_NaN();  // bound_loose / n
    double trace_error = std::numeric_limits<double>::quiet_NaN();
    double trace_tail_bound = std::numeric_limits<double>::quiet_NaN();
    int trace_terms = 0;
    LogDet logdet;
    LogDet logdet_diag;
    RegionFlags flags;
    bool in_region = false;
    bool assumption1_satisfied = false;
};

struct PowerIterationOptions {
    double tol = 1e-10;
    int max_iter = 10000;
};

/// ln(det) / n of the reduced Jacobian. Throws OutsideRegion unless the
/// determinant is strictly positive.
double vsi(const ReducedJacobian& J);

/// Mean of ln(diag_j): the diagonal approximation of vsi(). Throws
/// NonpositiveDiagonal if any entry is <= 0.
double vsia(const Eigen::VectorXd& diag);

/// Spectral radius of D^{-1} Off by power iteration on the entrywise
/// nonnegative -D^{-1} Off, all-ones start vector.
double spectral_radius(const ReducedJacobian& J, const PowerIterationOptions& options = {});

/// (-rho ln(1-rho), same / n). Throws RhoOutOfRange for rho outside [0, 1).
std::pair<double, double> error_bounds(double rho, int n);

/// Truncated series for the approximation error:
///   sum_{i=2..terms} trace((-D^{-1} Off)^i) / i, divided by n.
double trace_error(const ReducedJacobian& J, int terms = 50);

/// Tail bound n rho^{K+1} / ((K+1)(1-rho)) on the truncation of trace_error.
double trace_error_tail_bound(double rho, int n, int terms);

RegionFlags region_check(const ReducedJacobian& J);

/// Full report for a converged state. Out-of-region and nonpositive-diagonal
/// conditions are reported through flags and NaN/-inf fields, not exceptions.
StabilityReport assess(const RadialNetwork& net, const IncidenceSet& inc, const SystemState& u,
                       const SystemParameters& params, int trace_terms = 50);

}  // namespace vstab
