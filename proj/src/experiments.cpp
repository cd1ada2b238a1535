#include "vstab/experiments.hpp"

#include <cmath>
#include <string>
#include <utility>

namespace vstab {

namespace {

SystemParameters along_ray(const SystemParameters& xi0, const LoadDirection& dir, double lambda) {
    SystemParameters xi = xi0;
    xi.p += lambda * dir.dp;
    xi.q += lambda * dir.dq;
    return xi;
}

}  // namespace

LoadDirection LoadDirection::make(Eigen::VectorXd dp, Eigen::VectorXd dq, bool strict) {
    if (dp.size() != dq.size())
        throw Error(Errc::DimensionMismatch, "dp and dq must have equal length");
    if (dp.isZero(0.0) && dq.isZero(0.0))
        throw Error(Errc::ZeroDirection, "load direction must have at least one nonzero entry");
    if (strict && ((dp.array() < 0.0).any() || (dq.array() < 0.0).any()))
        throw Error(Errc::ValidationError, "negative increments are only allowed in permissive mode");
    return LoadDirection{std::move(dp), std::move(dq)};
}

ContinuationResult continuation(const RadialNetwork& net, const IncidenceSet& inc,
                                const SystemParameters& xi0, const LoadDirection& dir,
                                const ContinuationOptions& options) {
    if (options.lambda_step <= 0.0 || options.step_min <= 0.0)
        throw Error(Errc::ValidationError, "step sizes must be positive");
    if (dir.dp.size() != xi0.p.size())
        throw Error(Errc::DimensionMismatch, "direction does not match parameter size");

    ContinuationResult result;

    SolveOptions solve_opts = options.solve;
    SolveOutcome base = solve(net, inc, xi0, solve_opts);
    if (!base.converged)
        throw Error(Errc::InitialPointInfeasible,
                    std::string("power flow fails at lambda = 0 (") +
                        solve_failure_name(base.failure_kind) + ")");

    double lambda = 0.0;
    SystemState last_state = *base.state;
    result.points.push_back({0.0, assess(net, inc, last_state, xi0), base.iterations});

    double step = options.lambda_step;
    while (lambda < options.lambda_max && step >= options.step_min) {
        const double lambda_try = std::min(lambda + step, options.lambda_max);
        const SystemParameters xi = along_ray(xi0, dir, lambda_try);
        if (options.warm_start) solve_opts.initial = last_state;
        const SolveOutcome out = solve(net, inc, xi, solve_opts);
        if (out.converged) {
            lambda = lambda_try;
            last_state = *out.state;
            result.points.push_back({lambda, assess(net, inc, last_state, xi), out.iterations});
        } else {
            step *= 0.5;
        }
    }
    result.collapse_lambda = lambda;
    result.collapsed = lambda < options.lambda_max;
    return result;
}

double collapse_bisection(const RadialNetwork& net, const IncidenceSet& inc,
                          const SystemParameters& xi0, const LoadDirection& dir,
                          const BisectionOptions& options) {
    if (options.tol_lambda <= 0.0) throw Error(Errc::ValidationError, "tol_lambda must be positive");

    SolveOptions solve_opts = options.solve;
    auto solvable = [&](double lambda, std::optional<SystemState>& warm) {
        if (warm) solve_opts.initial = warm;
        const SolveOutcome out = solve(net, inc, along_ray(xi0, dir, lambda), solve_opts);
        if (out.converged) warm = out.state;
        return out.converged;
    };

    std::optional<SystemState> warm;
    if (!solvable(0.0, warm))
        throw Error(Errc::InitialPointInfeasible, "power flow fails at lambda = 0");

    // Grow the bracket by doubling, then bisect.
    double lo = 0.0, hi = options.lambda_hint;
    while (solvable(hi, warm)) {
        lo = hi;
        hi *= 2.0;
        if (hi > options.lambda_max)
            throw Error(Errc::ValidationError,
                        "no collapse found below lambda_max = " + std::to_string(options.lambda_max));
    }
    while (hi - lo > options.tol_lambda) {
        const double mid = 0.5 * (lo + hi);
        if (solvable(mid, warm))
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

ScanResult region_scan(const RadialNetwork& net, const IncidenceSet& inc, const SystemParameters& xi0,
                       const LoadDirection& axis1, const LoadDirection& axis2, int grid1, int grid2,
                       double extent1, double extent2, const SolveOptions& solve_opts) {
    if (grid1 < 2 || grid2 < 2) throw Error(Errc::ValidationError, "grid dimensions must be >= 2");

    ScanResult result;
    result.rows = grid1;
    result.cols = grid2;
    result.cells.resize(static_cast<std::size_t>(grid1) * grid2);

    for (int i = 0; i < grid1; ++i) {
        const double a = extent1 * i / (grid1 - 1);
        for (int j = 0; j < grid2; ++j) {
            const double b = extent2 * j / (grid2 - 1);
            SystemParameters xi = xi0;
            xi.p += a * axis1.dp + b * axis2.dp;
            xi.q += a * axis1.dq + b * axis2.dq;

            ScanCell cell;
            const SolveOutcome out = solve(net, inc, xi, solve_opts);  // cold start: independent points
            if (out.converged) {
                cell.solvable = true;
                const ReducedJacobian J = reduced_jacobian(net, inc, *out.state, xi.v0);
                const LogDet ld = logdet_exact(J);
                if (ld.sign > 0) cell.vsi = ld.log_magnitude / net.pq_count();
                if ((J.diag.array() > 0.0).all()) cell.vsia = vsia(J.diag);
            }
            result.cells[static_cast<std::size_t>(i) * grid2 + j] = cell;
        }
    }
    return result;
}

}  // namespace vstab
