#pragma once

#include <Eigen/Core>
#include <utility>
#include <vector>

#include "vstab/errors.hpp"

namespace vstab {

/// One line of the feeder. Edges are keyed by their child bus: edge `j`
/// is the unique line (parent(j), j), so a network with n PQ buses has
/// exactly n edges keyed 1..n.
struct EdgeSpec {
    int parent = 0;
    int child = 0;
    double r = 0.0;
    double x = 0.0;
};

/// Rooted directed tree of a radial feeder. Bus 0 is the slack/root,
/// buses 1..n are PQ buses. Immutable after construction; all edge-indexed
/// vectors are laid out by child bus id ascending (index j-1 for edge j).
class RadialNetwork {
public:
    RadialNetwork() = default;  // empty; populate via build()

    static RadialNetwork build(const std::vector<EdgeSpec>& edges, int n);

    int bus_count() const noexcept { return n_ + 1; }  // including slack
    int pq_count() const noexcept { return n_; }

    int parent(int bus) const;
    const std::vector<int>& children(int bus) const;

    /// Resistance / reactance of the edge into `child_bus`, per-unit.
    double edge_r(int child_bus) const;
    double edge_x(int child_bus) const;

    /// Buses in an order where every parent precedes its children.
    /// topo_order()[0] == 0.
    const std::vector<int>& topo_order() const noexcept { return topo_; }

    /// Cumulative (r, x) of the path from the root to bus i; (0, 0) for i = 0.
    std::pair<double, double> path_impedance(int bus) const;

    /// Per-bus path impedances, index 0..n, computed in one pass.
    void path_impedances(Eigen::VectorXd& rbar, Eigen::VectorXd& xbar) const;

private:
    int n_ = 0;
    std::vector<int> parent_;                 // parent_[0] == -1
    std::vector<std::vector<int>> children_;  // ascending
    Eigen::VectorXd r_, x_;                   // edge arrays, index = child bus - 1
    std::vector<int> topo_;
};

/// Dense incidence matrices of the tree. Columns are edges in canonical
/// order (child bus ascending); rows of Ai/Ao/A are buses 0..n, rows of
/// A2/A2o are buses 1..n.
struct IncidenceSet {
    Eigen::MatrixXd Ai;   // (n+1) x n, Ai(j, e) = 1 iff bus j is the child of edge e
    Eigen::MatrixXd Ao;   // (n+1) x n, Ao(i, e) = 1 iff bus i is the parent of edge e
    Eigen::MatrixXd A;    // Ao - Ai
    Eigen::MatrixXd A2;   // A with the slack row removed
    Eigen::MatrixXd A2o;  // Ao with the slack row removed
};

IncidenceSet incidence(const RadialNetwork& net);

/// One sub-network per child of the root: bus 0 plus the descendant closure
/// of that child, re-indexed to contiguous ids. orig_bus[k] maps sub-bus k
/// back to the original id (orig_bus[0] == 0).
struct Subtree {
    RadialNetwork net;
    std::vector<int> orig_bus;
};

std::vector<Subtree> root_subtrees(const RadialNetwork& net);

}  // namespace vstab
