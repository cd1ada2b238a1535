#include "vstab/stability.hpp"

#include <cmath>
#include <string>

namespace vstab {

double vsi(const ReducedJacobian& J) {
    const LogDet ld = logdet_exact(J);
    if (ld.sign <= 0)
        throw Error(Errc::OutsideRegion, std::string("determinant is ") +
                                             (ld.sign == 0 ? "zero" : "negative") +
                                             "; the index is only defined for det > 0");
    return ld.log_magnitude / static_cast<double>(J.full.rows());
}

double vsia(const Eigen::VectorXd& diag) {
    if ((diag.array() <= 0.0).any())
        throw Error(Errc::NonpositiveDiagonal, "diagonal approximation needs all entries > 0");
    return diag.array().log().mean();
}

double spectral_radius(const ReducedJacobian& J, const PowerIterationOptions& options) {
    const int n = static_cast<int>(J.full.rows());
    if ((J.diag.array() <= 0.0).any())
        throw Error(Errc::NonpositiveDiagonal, "spectral radius needs a positive diagonal");
    if (n == 1) return 0.0;

    // B = -D^{-1} Off is entrywise nonnegative inside the stability region,
    // so the dominant eigenvalue is real and reachable from a positive start.
    const Eigen::MatrixXd B = (-J.diag.cwiseInverse()).asDiagonal() * J.off;
    if (B.cwiseAbs().maxCoeff() == 0.0) return 0.0;

    // Two applications per step: sparse off-diagonal patterns (a two-bus
    // chain, say) make B 2-periodic, where single-step Rayleigh estimates
    // oscillate forever while x^T B^2 x settles immediately.
    Eigen::VectorXd x = Eigen::VectorXd::Ones(n) / std::sqrt(static_cast<double>(n));
    double rho = 0.0;
    for (int it = 0; it < options.max_iter; ++it) {
        const Eigen::VectorXd z = B * (B * x);
        const double norm = z.norm();
        if (norm < 1e-300) return 0.0;  // reached the nilpotent kernel
        const double estimate = std::sqrt(std::max(x.dot(z), 0.0));
        x = z / norm;
        if (it > 0 && std::abs(estimate - rho) < options.tol) return estimate;
        rho = estimate;
    }
    throw Error(Errc::NoConvergence, "power iteration did not settle in " +
                                         std::to_string(options.max_iter) + " iterations");
}

std::pair<double, double> error_bounds(double rho, int n) {
    if (rho < 0.0 || rho >= 1.0)
        throw Error(Errc::RhoOutOfRange, "rho = " + std::to_string(rho) + " outside [0, 1)");
    const double loose = rho == 0.0 ? 0.0 : -rho * std::log1p(-rho);
    return {loose, loose / static_cast<double>(n)};
}

double trace_error(const ReducedJacobian& J, int terms) {
    const int n = static_cast<int>(J.full.rows());
    if ((J.diag.array() <= 0.0).any())
        throw Error(Errc::NonpositiveDiagonal, "trace series needs a positive diagonal");
    const double rho = spectral_radius(J);
    if (rho >= 1.0)
        throw Error(Errc::RhoOutOfRange, "series diverges at rho = " + std::to_string(rho));

    const Eigen::MatrixXd B = (-J.diag.cwiseInverse()).asDiagonal() * J.off;
    Eigen::MatrixXd P = B;
    double acc = 0.0;
    for (int i = 2; i <= terms; ++i) {
        P = P * B;
        acc += P.trace() / static_cast<double>(i);
    }
    return acc / static_cast<double>(n);
}

double trace_error_tail_bound(double rho, int n, int terms) {
    if (rho < 0.0 || rho >= 1.0)
        throw Error(Errc::RhoOutOfRange, "rho = " + std::to_string(rho) + " outside [0, 1)");
    const int k1 = terms + 1;
    return static_cast<double>(n) * std::pow(rho, k1) / (static_cast<double>(k1) * (1.0 - rho));
}

RegionFlags region_check(const ReducedJacobian& J) {
    RegionFlags flags;
    flags.det_positive = logdet_exact(J).sign > 0;
    flags.diag_positive = (J.diag.array() > 0.0).all();
    flags.z_matrix = (J.off.array() <= 1e-12).all();
    if (flags.diag_positive) {
        try {
            flags.rho_lt_one = spectral_radius(J) < 1.0;
        } catch (const Error&) {
            flags.rho_lt_one = false;
        }
    }
    return flags;
}

StabilityReport assess(const RadialNetwork& net, const IncidenceSet& inc, const SystemState& u,
                       const SystemParameters& params, int trace_terms) {
    StabilityReport rep;
    rep.n = net.pq_count();
    rep.assumption1_satisfied = params.assumption1();
    rep.trace_terms = trace_terms;

    const ReducedJacobian J = reduced_jacobian(net, inc, u, params.v0);
    rep.logdet = logdet_exact(J);
    rep.logdet_diag = logdet_approx(J.diag);
    rep.flags.det_positive = rep.logdet.sign > 0;
    rep.flags.diag_positive = (J.diag.array() > 0.0).all();
    rep.flags.z_matrix = (J.off.array() <= 1e-12).all();
    rep.in_region = rep.flags.det_positive;

    if (rep.logdet.sign > 0)
        rep.vsi = rep.logdet.log_magnitude / rep.n;
    else if (rep.logdet.sign == 0)
        rep.vsi = -std::numeric_limits<double>::infinity();

    if (rep.flags.diag_positive) {
        rep.vsia = vsia(J.diag);
        rep.rho = spectral_radius(J);
        rep.flags.rho_lt_one = rep.rho < 1.0;
        if (rep.rho < 1.0) {
            std::tie(rep.bound_loose, rep.bound_tight) = error_bounds(rep.rho, rep.n);
            rep.trace_error = trace_error(J, trace_terms);
            rep.trace_tail_bound = trace_error_tail_bound(rep.rho, rep.n, trace_terms);
        }
    }
    return rep;
}

}  // namespace vstab
