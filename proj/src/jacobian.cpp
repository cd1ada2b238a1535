#include "vstab/jacobian.hpp"

#include <Eigen/LU>
#include <cmath>
#include <string>

namespace vstab {

namespace {

void check_size(const RadialNetwork& net, Eigen::Index rows, const char* what) {
    if (rows != net.pq_count())
        throw Error(Errc::DimensionMismatch, std::string(what) + " has " + std::to_string(rows) +
                                                 " rows, expected " + std::to_string(net.pq_count()));
}

}  // namespace

// Row j of A2 reads -y_j + sum_{k in children(j)} y_k = b_j, so a sweep with
// children resolved first gives y_j directly.
Eigen::VectorXd solve_a2(const RadialNetwork& net, const Eigen::VectorXd& b) {
    check_size(net, b.size(), "rhs");
    Eigen::VectorXd y(b.size());
    const auto& topo = net.topo_order();
    for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
        const int j = *it;
        if (j == 0) continue;
        double acc = -b[j - 1];
        for (int k : net.children(j)) acc += y[k - 1];
        y[j - 1] = acc;
    }
    return y;
}

Eigen::MatrixXd solve_a2(const RadialNetwork& net, const Eigen::MatrixXd& B) {
    check_size(net, B.rows(), "rhs");
    Eigen::MatrixXd Y(B.rows(), B.cols());
    const auto& topo = net.topo_order();
    for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
        const int j = *it;
        if (j == 0) continue;
        Y.row(j - 1) = -B.row(j - 1);
        for (int k : net.children(j)) Y.row(j - 1) += Y.row(k - 1);
    }
    return Y;
}

// Row j of A2^T reads z_pi(j) - z_j = c_j (z_0 = 0), resolved parents first.
Eigen::VectorXd solve_a2t(const RadialNetwork& net, const Eigen::VectorXd& c) {
    check_size(net, c.size(), "rhs");
    Eigen::VectorXd z(c.size());
    for (int j : net.topo_order()) {
        if (j == 0) continue;
        const int par = net.parent(j);
        z[j - 1] = (par == 0 ? 0.0 : z[par - 1]) - c[j - 1];
    }
    return z;
}

Eigen::MatrixXd solve_a2t(const RadialNetwork& net, const Eigen::MatrixXd& C) {
    check_size(net, C.rows(), "rhs");
    Eigen::MatrixXd Z(C.rows(), C.cols());
    for (int j : net.topo_order()) {
        if (j == 0) continue;
        const int par = net.parent(j);
        if (par == 0)
            Z.row(j - 1) = -C.row(j - 1);
        else
            Z.row(j - 1) = Z.row(par - 1) - C.row(j - 1);
    }
    return Z;
}

ReducedJacobian reduced_jacobian(const RadialNetwork& net, const IncidenceSet& inc, const SystemState& u,
                                 double v0) {
    const int n = net.pq_count();
    if (u.n() != n || inc.A2.rows() != n)
        throw Error(Errc::DimensionMismatch, "state/incidence do not match network of n=" + std::to_string(n));

    Eigen::VectorXd r(n), x(n), vparent(n);
    for (int j = 1; j <= n; ++j) {
        r[j - 1] = net.edge_r(j);
        x[j - 1] = net.edge_x(j);
        vparent[j - 1] = u.voltage_sq(net.parent(j), v0);
    }

    // A2^{-1}[r] and A2^{-1}[x]: tree solves against diagonal right-hand sides.
    const Eigen::MatrixXd R2 = solve_a2(net, Eigen::MatrixXd(r.asDiagonal()));
    const Eigen::MatrixXd X2 = solve_a2(net, Eigen::MatrixXd(x.asDiagonal()));

    // S = [r]^2 + 2[r]A2^{-1}[r] + [x]^2 + 2[x]A2^{-1}[x]
    Eigen::MatrixXd S = 2.0 * (r.asDiagonal() * R2) + 2.0 * (x.asDiagonal() * X2);
    S.diagonal() += r.cwiseProduct(r) + x.cwiseProduct(x);

    // A2^{oT} (A2^T)^{-1} S: solve, then pick each edge's parent row.
    const Eigen::MatrixXd W = solve_a2t(net, S);
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(n, n);
    for (int j = 1; j <= n; ++j) {
        const int par = net.parent(j);
        if (par != 0) G.row(j - 1) = W.row(par - 1);
    }

    ReducedJacobian J;
    J.full = 2.0 * (u.pbar.asDiagonal() * R2) + 2.0 * (u.qbar.asDiagonal() * X2) -
             u.ell.asDiagonal() * G;
    J.full.diagonal() += vparent;
    J.diag = J.full.diagonal();
    J.off = J.full;
    J.off.diagonal().setZero();
    return J;
}

Eigen::VectorXd diag_closed_form(const RadialNetwork& net, const IncidenceSet& inc, const SystemState& u,
                                 double v0) {
    const int n = net.pq_count();
    if (u.n() != n || inc.A2.rows() != n)
        throw Error(Errc::DimensionMismatch, "state/incidence do not match network of n=" + std::to_string(n));

    Eigen::VectorXd rbar, xbar;
    net.path_impedances(rbar, xbar);

    Eigen::VectorXd d(n);
    for (int j = 1; j <= n; ++j) {
        const int e = j - 1;
        const int i = net.parent(j);
        const double r = net.edge_r(j), x = net.edge_x(j);
        d[e] = u.voltage_sq(i, v0) - 2.0 * u.pbar[e] * r - 2.0 * u.qbar[e] * x -
               2.0 * u.ell[e] * (r * rbar[i] + x * xbar[i]);
    }
    return d;
}

LogDet logdet_exact(const Eigen::MatrixXd& M) {
    if (M.rows() != M.cols()) throw Error(Errc::DimensionMismatch, "logdet of a non-square matrix");
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(M);
    const Eigen::VectorXd pivots = lu.matrixLU().diagonal();

    LogDet ld;
    ld.sign = lu.permutationP().determinant() > 0 ? 1 : -1;
    ld.log_magnitude = 0.0;
    for (Eigen::Index i = 0; i < pivots.size(); ++i) {
        const double p = pivots[i];
        if (std::abs(p) < 1e-300) {
            ld.sign = 0;
            ld.log_magnitude = -std::numeric_limits<double>::infinity();
            return ld;
        }
        if (p < 0.0) ld.sign = -ld.sign;
        ld.log_magnitude += std::log(std::abs(p));
    }
    return ld;
}

LogDet logdet_exact(const ReducedJacobian& J) { return logdet_exact(J.full); }

LogDet logdet_approx(const Eigen::VectorXd& diag) {
    LogDet ld;
    ld.sign = 1;
    ld.log_magnitude = 0.0;
    for (Eigen::Index i = 0; i < diag.size(); ++i) {
        const double d = diag[i];
        if (std::abs(d) < 1e-300) {
            ld.sign = 0;
            ld.log_magnitude = -std::numeric_limits<double>::infinity();
            return ld;
        }
        if (d < 0.0) ld.sign = -ld.sign;
        ld.log_magnitude += std::log(std::abs(d));
    }
    return ld;
}

}  // namespace vstab
