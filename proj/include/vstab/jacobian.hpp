#pragma once

#include <Eigen/Core>
#include <cmath>
#include <limits>

#include "vstab/network.hpp"
#include "vstab/powerflow.hpp"

namespace vstab {

/// Stable carrier for determinants that decay like e^{-n}: sign in {-1,0,+1}
/// and the natural log of the magnitude (-inf when sign is 0).
struct LogDet {
    int sign = 0;
    double log_magnitude = -std::numeric_limits<double>::infinity();

    double value() const { return sign == 0 ? 0.0 : sign * std::exp(log_magnitude); }
};

/// n x n reduced power flow Jacobian with its diagonal/off-diagonal split.
/// full == diag.asDiagonal() + off exactly; off has a zero diagonal.
struct ReducedJacobian {
    Eigen::MatrixXd full;
    Eigen::VectorXd diag;
    Eigen::MatrixXd off;
};

/// Solve A2 y = b where A2 is the incidence matrix with the slack row
/// removed. Exploits the tree: one sweep in reverse topological order.
Eigen::VectorXd solve_a2(const RadialNetwork& net, const Eigen::VectorXd& b);
Eigen::MatrixXd solve_a2(const RadialNetwork& net, const Eigen::MatrixXd& B);

/// Solve A2^T z = c, one sweep in topological order.
Eigen::VectorXd solve_a2t(const RadialNetwork& net, const Eigen::VectorXd& c);
Eigen::MatrixXd solve_a2t(const RadialNetwork& net, const Eigen::MatrixXd& C);

/// Assemble the reduced power flow Jacobian at the given state. All
/// applications of A2^{-1} and A2^{-T} are tree solves, never dense inverses.
ReducedJacobian reduced_jacobian(const RadialNetwork& net, const IncidenceSet& inc, const SystemState& u,
                                 double v0 = 1.0);

/// Closed-form diagonal: for edge (i,j),
///   v_i - 2 p_ij r_ij - 2 q_ij x_ij - 2 ell_ij (r_ij rbar_0i + x_ij xbar_0i).
Eigen::VectorXd diag_closed_form(const RadialNetwork& net, const IncidenceSet& inc, const SystemState& u,
                                 double v0 = 1.0);

/// Log-determinant via LU with partial pivoting; sign tracks pivot signs and
/// the permutation parity. sign 0 when a pivot magnitude is below 1e-300.
LogDet logdet_exact(const ReducedJacobian& J);
LogDet logdet_exact(const Eigen::MatrixXd& M);

/// Log of the product of the diagonal entries.
LogDet logdet_approx(const Eigen::VectorXd& diag);

}  // namespace vstab
