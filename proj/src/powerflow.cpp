#include "vstab/powerflow.hpp"

#include <Eigen/LU>
#include <cmath>
#include <string>

namespace vstab {

SystemParameters SystemParameters::zero_load(int n, double v0) {
    SystemParameters params;
    params.v0 = v0;
    params.p.setZero(n);
    params.q.setZero(n);
    return params;
}

SystemState SystemState::flat(int n, double v0) {
    SystemState u;
    u.pbar.setZero(n);
    u.qbar.setZero(n);
    u.ell.setZero(n);
    u.v.setConstant(n, v0);
    return u;
}

Eigen::VectorXd SystemState::to_vector() const {
    const int n = this->n();
    Eigen::VectorXd u(4 * n + 2);
    u << pbar, qbar, ell, v, p0, q0;
    return u;
}

SystemState SystemState::from_vector(const Eigen::VectorXd& u, int n) {
    if (u.size() != 4 * n + 2)
        throw Error(Errc::DimensionMismatch, "state vector has " + std::to_string(u.size()) +
                                                 " entries, expected " + std::to_string(4 * n + 2));
    SystemState s;
    s.pbar = u.segment(0, n);
    s.qbar = u.segment(n, n);
    s.ell = u.segment(2 * n, n);
    s.v = u.segment(3 * n, n);
    s.p0 = u[4 * n];
    s.q0 = u[4 * n + 1];
    return s;
}

const char* solve_failure_name(SolveFailure f) noexcept {
    switch (f) {
        case SolveFailure::MaxIterations: return "MaxIterations";
        case SolveFailure::SingularJacobian: return "SingularJacobian";
        case SolveFailure::DivergedNaN: return "DivergedNaN";
        case SolveFailure::NonPhysical: return "NonPhysical";
    }
    return "Unknown";
}

namespace {

void check_dims(const RadialNetwork& net, const IncidenceSet& inc, const SystemState& u,
                const Eigen::VectorXd& p, const Eigen::VectorXd& q) {
    const int n = net.pq_count();
    if (u.n() != n || u.pbar.size() != n || u.qbar.size() != n || u.ell.size() != n)
        throw Error(Errc::DimensionMismatch, "state does not match network of n=" + std::to_string(n));
    if (p.size() != n || q.size() != n)
        throw Error(Errc::DimensionMismatch, "parameters do not match network of n=" + std::to_string(n));
    if (inc.A.rows() != n + 1 || inc.A.cols() != n)
        throw Error(Errc::DimensionMismatch, "incidence does not match network of n=" + std::to_string(n));
}

}  // namespace

Eigen::VectorXd residual(const RadialNetwork& net, const IncidenceSet& inc, const SystemState& u,
                         const SystemParameters& params) {
    check_dims(net, inc, u, params.p, params.q);
    const int n = net.pq_count();
    Eigen::VectorXd phi(4 * n + 2);

    // Net demand per bus; the slack holds -injection.
    for (int bus = 0; bus <= n; ++bus) {
        const double pd = (bus == 0) ? -u.p0 : params.p[bus - 1];
        const double qd = (bus == 0) ? -u.q0 : params.q[bus - 1];
        double pa = pd, qa = qd;
        if (bus != 0) {
            const int e = bus - 1;
            pa -= u.pbar[e] - net.edge_r(bus) * u.ell[e];
            qa -= u.qbar[e] - net.edge_x(bus) * u.ell[e];
        }
        for (int c : net.children(bus)) {
            pa += u.pbar[c - 1];
            qa += u.qbar[c - 1];
        }
        phi[bus] = pa;
        phi[n + 1 + bus] = qa;
    }

    for (int j = 1; j <= n; ++j) {
        const int e = j - 1;
        const double r = net.edge_r(j), x = net.edge_x(j);
        const double vi = u.voltage_sq(net.parent(j), params.v0);
        phi[2 * (n + 1) + e] = u.v[e] - vi + 2.0 * (r * u.pbar[e] + x * u.qbar[e]) -
                               (r * r + x * x) * u.ell[e];
        phi[2 * (n + 1) + n + e] = vi * u.ell[e] - u.pbar[e] * u.pbar[e] - u.qbar[e] * u.qbar[e];
    }
    return phi;
}

Eigen::MatrixXd full_jacobian(const RadialNetwork& net, const IncidenceSet& inc, const SystemState& u,
                              double v0) {
    const int n = net.pq_count();
    if (u.n() != n || inc.A.rows() != n + 1)
        throw Error(Errc::DimensionMismatch, "state/incidence do not match network of n=" + std::to_string(n));

    const int rows = 4 * n + 2;
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(rows, rows);
    const int c_pbar = 0, c_qbar = n, c_ell = 2 * n, c_v = 3 * n, c_p0 = 4 * n, c_q0 = 4 * n + 1;
    const int r_act = 0, r_rea = n + 1, r_vdrop = 2 * (n + 1), r_cdef = 2 * (n + 1) + n;

    // Power balance blocks: d(active)/d(pbar) = A, d(active)/d(ell) = Ai [r].
    J.block(r_act, c_pbar, n + 1, n) = inc.A;
    J.block(r_rea, c_qbar, n + 1, n) = inc.A;
    for (int j = 1; j <= n; ++j) {
        const int e = j - 1;
        J(r_act + j, c_ell + e) = net.edge_r(j);
        J(r_rea + j, c_ell + e) = net.edge_x(j);
    }
    J(r_act, c_p0) = -1.0;
    J(r_rea, c_q0) = -1.0;

    for (int j = 1; j <= n; ++j) {
        const int e = j - 1;
        const double r = net.edge_r(j), x = net.edge_x(j);
        const int par = net.parent(j);
        J(r_vdrop + e, c_pbar + e) = 2.0 * r;
        J(r_vdrop + e, c_qbar + e) = 2.0 * x;
        J(r_vdrop + e, c_ell + e) = -(r * r + x * x);
        J(r_vdrop + e, c_v + e) = 1.0;
        if (par != 0) J(r_vdrop + e, c_v + par - 1) -= 1.0;

        J(r_cdef + e, c_pbar + e) = -2.0 * u.pbar[e];
        J(r_cdef + e, c_qbar + e) = -2.0 * u.qbar[e];
        J(r_cdef + e, c_ell + e) = u.voltage_sq(par, v0);
        if (par != 0) J(r_cdef + e, c_v + par - 1) = u.ell[e];
    }
    return J;
}

SolveOutcome solve(const RadialNetwork& net, const IncidenceSet& inc, const SystemParameters& params,
                   const SolveOptions& options) {
    if (options.tol <= 0.0) throw Error(Errc::ValidationError, "tol must be positive");
    if (params.v0 <= 0.0) throw Error(Errc::ValidationError, "v0 must be positive");
    const int n = net.pq_count();

    SystemState u = options.initial.value_or(SystemState::flat(n, params.v0));
    SolveOutcome out;

    Eigen::VectorXd phi = residual(net, inc, u, params);
    double norm2 = phi.norm();

    for (out.iterations = 0; out.iterations < options.max_iter; ++out.iterations) {
        if (!phi.allFinite()) {
            out.failure_kind = SolveFailure::DivergedNaN;
            out.final_residual_norm = phi.lpNorm<Eigen::Infinity>();
            return out;
        }
        if (phi.lpNorm<Eigen::Infinity>() <= options.tol) break;

        Eigen::MatrixXd J = full_jacobian(net, inc, u, params.v0);

        Eigen::PartialPivLU<Eigen::MatrixXd> lu(J);
        const double scale = J.cwiseAbs().maxCoeff();
        const double pivot_min = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
        if (pivot_min < 1e-12 * scale) {
            out.failure_kind = SolveFailure::SingularJacobian;
            out.final_residual_norm = phi.lpNorm<Eigen::Infinity>();
            return out;
        }

        const Eigen::VectorXd delta = lu.solve(-phi);
        const Eigen::VectorXd u_vec = u.to_vector();

        // Full step first, halving while the merit does not drop. The Newton
        // direction descends the squared 2-norm, so that is the line-search
        // metric; convergence is still judged in the infinity norm.
        double step = 1.0;
        SystemState u_next = u;
        Eigen::VectorXd phi_next;
        double norm2_next = norm2;
        bool accepted = false;
        for (int h = 0; h <= 6; ++h) {
            u_next = SystemState::from_vector(u_vec + step * delta, n);
            phi_next = residual(net, inc, u_next, params);
            norm2_next = phi_next.norm();
            if (std::isfinite(norm2_next) && norm2_next < norm2) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        u = u_next;
        phi = phi_next;
        norm2 = norm2_next;
        if (!accepted && !phi.allFinite()) {
            out.failure_kind = SolveFailure::DivergedNaN;
            out.final_residual_norm = phi.lpNorm<Eigen::Infinity>();
            ++out.iterations;
            return out;
        }
    }

    out.final_residual_norm = phi.lpNorm<Eigen::Infinity>();
    if (out.final_residual_norm > options.tol) {
        out.failure_kind = SolveFailure::MaxIterations;
        return out;
    }
    // Unloaded branches carry ell = 0 up to round-off; only a genuinely
    // negative squared current marks the non-physical branch.
    if ((u.v.array() <= 0.0).any() || (u.ell.array() < -10.0 * options.tol).any()) {
        out.failure_kind = SolveFailure::NonPhysical;
        return out;
    }
    out.converged = true;
    out.state = std::move(u);
    return out;
}

}  // namespace vstab
