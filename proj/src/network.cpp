#include "vstab/network.hpp"

#include <algorithm>
#include <string>

namespace vstab {

const char* errc_name(Errc code) noexcept {
    switch (code) {
        case Errc::CycleDetected: return "CycleDetected";
        case Errc::DisconnectedBus: return "DisconnectedBus";
        case Errc::DuplicateEdge: return "DuplicateEdge";
        case Errc::NonpositiveImpedancePair: return "NonpositiveImpedancePair";
        case Errc::BadIndex: return "BadIndex";
        case Errc::DimensionMismatch: return "DimensionMismatch";
        case Errc::SingularIncidence: return "SingularIncidence";
        case Errc::OutsideRegion: return "OutsideRegion";
        case Errc::NonpositiveDiagonal: return "NonpositiveDiagonal";
        case Errc::RhoOutOfRange: return "RhoOutOfRange";
        case Errc::NoConvergence: return "NoConvergence";
        case Errc::DisconnectedGraph: return "DisconnectedGraph";
        case Errc::WeightDegenerate: return "WeightDegenerate";
        case Errc::ZeroDirection: return "ZeroDirection";
        case Errc::InitialPointInfeasible: return "InitialPointInfeasible";
        case Errc::ParseError: return "ParseError";
        case Errc::ValidationError: return "ValidationError";
    }
    return "UnknownError";
}

RadialNetwork RadialNetwork::build(const std::vector<EdgeSpec>& edges, int n) {
    if (n < 1) throw Error(Errc::BadIndex, "need at least one PQ bus, got n=" + std::to_string(n));
    if (edges.empty()) throw Error(Errc::BadIndex, "edge list is empty");

    RadialNetwork net;
    net.n_ = n;
    net.parent_.assign(n + 1, -2);  // -2 = unseen, root gets -1
    net.parent_[0] = -1;
    net.children_.assign(n + 1, {});
    net.r_.setZero(n);
    net.x_.setZero(n);

    std::vector<int> incoming(n + 1, 0);
    for (const auto& e : edges) {
        if (e.parent < 0 || e.parent > n || e.child < 1 || e.child > n)
            throw Error(Errc::BadIndex, "edge (" + std::to_string(e.parent) + "," +
                                            std::to_string(e.child) + ") out of range for n=" +
                                            std::to_string(n));
        if (e.parent == e.child)
            throw Error(Errc::CycleDetected, "self-loop at bus " + std::to_string(e.child));
        incoming[e.child] += 1;
    }

    // Missing buses are reported before duplicates: an uncovered bus cannot
    // reach the root no matter how the remaining edges are arranged.
    for (int b = 1; b <= n; ++b)
        if (incoming[b] == 0)
            throw Error(Errc::DisconnectedBus, "bus " + std::to_string(b) + " has no incoming edge");
    for (int b = 1; b <= n; ++b)
        if (incoming[b] > 1)
            throw Error(Errc::DuplicateEdge, "bus " + std::to_string(b) + " has " +
                                                 std::to_string(incoming[b]) + " incoming edges");
    if (static_cast<int>(edges.size()) != n)
        throw Error(Errc::DuplicateEdge, "expected " + std::to_string(n) + " edges, got " +
                                             std::to_string(edges.size()));

    for (const auto& e : edges) {
        if (e.r < 0.0 || e.x < 0.0 || (e.r == 0.0 && e.x == 0.0))
            throw Error(Errc::NonpositiveImpedancePair,
                        "edge into bus " + std::to_string(e.child) + " needs r >= 0, x >= 0, r + x > 0");
        net.parent_[e.child] = e.parent;
        net.r_[e.child - 1] = e.r;
        net.x_[e.child - 1] = e.x;
        net.children_[e.parent].push_back(e.child);
    }
    for (auto& c : net.children_) std::sort(c.begin(), c.end());

    // Every bus must reach the root by following parents; a loop shows up as
    // a walk that exceeds n hops.
    for (int b = 1; b <= n; ++b) {
        int cur = b, hops = 0;
        while (cur != 0) {
            cur = net.parent_[cur];
            if (++hops > n)
                throw Error(Errc::CycleDetected, "bus " + std::to_string(b) + " never reaches the root");
        }
    }

    net.topo_.reserve(n + 1);
    net.topo_.push_back(0);
    for (std::size_t i = 0; i < net.topo_.size(); ++i)
        for (int c : net.children_[net.topo_[i]]) net.topo_.push_back(c);

    return net;
}

int RadialNetwork::parent(int bus) const {
    if (bus < 1 || bus > n_) throw Error(Errc::BadIndex, "parent of bus " + std::to_string(bus));
    return parent_[bus];
}

const std::vector<int>& RadialNetwork::children(int bus) const {
    if (bus < 0 || bus > n_) throw Error(Errc::BadIndex, "children of bus " + std::to_string(bus));
    return children_[bus];
}

double RadialNetwork::edge_r(int child_bus) const {
    if (child_bus < 1 || child_bus > n_) throw Error(Errc::BadIndex, "edge " + std::to_string(child_bus));
    return r_[child_bus - 1];
}

double RadialNetwork::edge_x(int child_bus) const {
    if (child_bus < 1 || child_bus > n_) throw Error(Errc::BadIndex, "edge " + std::to_string(child_bus));
    return x_[child_bus - 1];
}

std::pair<double, double> RadialNetwork::path_impedance(int bus) const {
    if (bus < 0 || bus > n_) throw Error(Errc::BadIndex, "path to bus " + std::to_string(bus));
    double r = 0.0, x = 0.0;
    for (int cur = bus; cur != 0; cur = parent_[cur]) {
        r += r_[cur - 1];
        x += x_[cur - 1];
    }
    return {r, x};
}

void RadialNetwork::path_impedances(Eigen::VectorXd& rbar, Eigen::VectorXd& xbar) const {
    rbar.setZero(n_ + 1);
    xbar.setZero(n_ + 1);
    for (int bus : topo_) {
        if (bus == 0) continue;
        rbar[bus] = rbar[parent_[bus]] + r_[bus - 1];
        xbar[bus] = xbar[parent_[bus]] + x_[bus - 1];
    }
}

IncidenceSet incidence(const RadialNetwork& net) {
    const int n = net.pq_count();
    IncidenceSet inc;
    inc.Ai.setZero(n + 1, n);
    inc.Ao.setZero(n + 1, n);
    for (int j = 1; j <= n; ++j) {
        inc.Ai(j, j - 1) = 1.0;
        inc.Ao(net.parent(j), j - 1) = 1.0;
    }
    inc.A = inc.Ao - inc.Ai;
    inc.A2 = inc.A.bottomRows(n);
    inc.A2o = inc.Ao.bottomRows(n);
    return inc;
}

std::vector<Subtree> root_subtrees(const RadialNetwork& net) {
    std::vector<Subtree> out;
    for (int top : net.children(0)) {
        // Descendant closure of `top`, in ascending original-id order.
        std::vector<int> closure{top};
        for (std::size_t i = 0; i < closure.size(); ++i)
            for (int c : net.children(closure[i])) closure.push_back(c);
        std::sort(closure.begin(), closure.end());

        Subtree st;
        st.orig_bus.push_back(0);
        st.orig_bus.insert(st.orig_bus.end(), closure.begin(), closure.end());

        std::vector<int> new_id(net.bus_count(), -1);
        for (std::size_t k = 0; k < st.orig_bus.size(); ++k) new_id[st.orig_bus[k]] = static_cast<int>(k);

        std::vector<EdgeSpec> edges;
        for (int b : closure)
            edges.push_back({new_id[net.parent(b)], new_id[b], net.edge_r(b), net.edge_x(b)});
        st.net = RadialNetwork::build(edges, static_cast<int>(closure.size()));
        out.push_back(std::move(st));
    }
    return out;
}

}  // namespace vstab
