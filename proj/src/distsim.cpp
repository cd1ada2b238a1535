#include "vstab/distsim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace vstab {

std::vector<double> local_contribution(int bus, const LocalMeasurements& m) {
    std::vector<double> terms;
    terms.reserve(m.edges.size());
    for (const auto& e : m.edges) {
        const double d = m.v - 2.0 * e.p * e.r - 2.0 * e.q * e.x -
                         2.0 * e.ell * (e.r * m.path_r + e.x * m.path_x);
        if (d <= 0.0)
            throw Error(Errc::NonpositiveDiagonal,
                        "bus " + std::to_string(bus) + ": diagonal term for child " +
                            std::to_string(e.child) + " is not positive");
        terms.push_back(std::log(d));
    }
    return terms;
}

std::vector<AgentState> make_agents(const RadialNetwork& net, const SystemState& u,
                                    const SystemParameters& params) {
    Eigen::VectorXd rbar, xbar;
    net.path_impedances(rbar, xbar);

    std::vector<AgentState> agents;
    agents.reserve(net.bus_count());
    for (int bus = 0; bus < net.bus_count(); ++bus) {
        LocalMeasurements m;
        m.v = u.voltage_sq(bus, params.v0);
        m.path_r = rbar[bus];
        m.path_x = xbar[bus];
        for (int c : net.children(bus)) {
            const int e = c - 1;
            m.edges.push_back({c, u.pbar[e], u.qbar[e], u.ell[e], net.edge_r(c), net.edge_x(c)});
        }

        AgentState agent;
        agent.bus = bus;
        try {
            agent.local_terms = local_contribution(bus, m);
        } catch (const Error& err) {
            if (err.code() != Errc::NonpositiveDiagonal) throw;
            agent.out_of_region = true;
        }
        for (double t : agent.local_terms) agent.value_sum += t;
        agent.weight_sum = static_cast<double>(agent.local_terms.size());
        agents.push_back(std::move(agent));
    }
    return agents;
}

namespace {

constexpr double kWeightFloor = 1e-12;

std::vector<std::vector<int>> adjacency(int agent_count, const std::vector<std::pair<int, int>>& edges) {
    std::vector<std::vector<int>> adj(agent_count);
    for (const auto& [a, b] : edges) {
        if (a < 0 || a >= agent_count || b < 0 || b >= agent_count || a == b)
            throw Error(Errc::BadIndex, "communication edge (" + std::to_string(a) + "," +
                                            std::to_string(b) + ") is invalid");
        adj[a].push_back(b);
        adj[b].push_back(a);
    }
    for (auto& nb : adj) {
        std::sort(nb.begin(), nb.end());
        nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
    }

    // connectivity sweep from agent 0
    std::vector<int> stack{0}, seen(agent_count, 0);
    seen[0] = 1;
    int reached = 1;
    while (!stack.empty()) {
        const int a = stack.back();
        stack.pop_back();
        for (int b : adj[a])
            if (!seen[b]) {
                seen[b] = 1;
                ++reached;
                stack.push_back(b);
            }
    }
    if (reached != agent_count)
        throw Error(Errc::DisconnectedGraph, std::to_string(agent_count - reached) +
                                                 " agents unreachable over the communication graph");
    return adj;
}

}  // namespace

ConsensusResult run_consensus(std::vector<AgentState> agents, const RadialNetwork& net,
                              const ConsensusConfig& config, const RoundObserver& observer) {
    const int m = static_cast<int>(agents.size());
    if (m != net.bus_count())
        throw Error(Errc::DimensionMismatch, "expected one agent per bus");

    std::vector<std::pair<int, int>> graph = config.graph;
    if (graph.empty())
        for (int j = 1; j <= net.pq_count(); ++j) graph.emplace_back(net.parent(j), j);
    const auto adj = adjacency(m, graph);

    // Metropolis weights: w_ab = 1/(1+max(deg_a, deg_b)); the implicit self
    // weight fills each row to 1. Symmetric, hence doubly stochastic. The
    // update runs in flow form, x[a] += w_ab (x[b]-x[a]), so each link moves
    // exactly opposite amounts through its endpoints and the total mass
    // drifts with the decaying disagreement, not with the values themselves.
    struct Link {
        int a, b;
        double w;
    };
    std::vector<Link> links;
    for (int a = 0; a < m; ++a)
        for (int b : adj[a])
            if (b > a) links.push_back({a, b, 1.0 / (1.0 + std::max(adj[a].size(), adj[b].size()))});

    Eigen::VectorXd value(m), weight(m);
    std::vector<char> oor(m, 0);
    bool any_oor = false;
    for (int a = 0; a < m; ++a) {
        value[a] = agents[a].value_sum;
        weight[a] = agents[a].weight_sum;
        oor[a] = agents[a].out_of_region ? 1 : 0;
        any_oor = any_oor || agents[a].out_of_region;
    }

    ConsensusResult result;
    result.any_out_of_region = any_oor;
    result.estimates.setConstant(m, std::numeric_limits<double>::quiet_NaN());

    Eigen::VectorXd value_next(m), weight_next(m);
    std::vector<char> oor_next(m, 0);
    for (int round = 0; round <= config.max_rounds; ++round) {
        result.rounds_used = round;
        bool all_weights_ok = true;
        for (int a = 0; a < m; ++a) {
            if (weight[a] > kWeightFloor)
                result.estimates[a] = value[a] / weight[a];
            else
                all_weights_ok = false;  // transient: mass has not reached this agent yet
        }
        if (observer) observer(ConsensusRound{round, value, weight, result.estimates});

        if (all_weights_ok) {
            const double spread = result.estimates.maxCoeff() - result.estimates.minCoeff();
            if (spread < config.tol) {
                result.converged = true;
                return result;
            }
        }
        if (round == config.max_rounds) break;

        value_next = value;
        weight_next = weight;
        for (const Link& l : links) {
            const double fv = l.w * (value[l.b] - value[l.a]);
            value_next[l.a] += fv;
            value_next[l.b] -= fv;
            const double fw = l.w * (weight[l.b] - weight[l.a]);
            weight_next[l.a] += fw;
            weight_next[l.b] -= fw;
        }
        for (int a = 0; a < m; ++a) {
            char f = oor[a];
            for (int b : adj[a]) f = f || oor[b];
            oor_next[a] = f;
        }
        value.swap(value_next);
        weight.swap(weight_next);
        oor.swap(oor_next);
    }

    if ((weight.array() <= kWeightFloor).any())
        throw Error(Errc::WeightDegenerate,
                    "some agents never accumulated weight; use a denser communication graph");
    return result;  // rounds exhausted with converged = false
}

}  // namespace vstab
