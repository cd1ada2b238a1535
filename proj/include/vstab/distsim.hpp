#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "vstab/powerflow.hpp"

namespace vstab {

/// What one bus can measure locally: its own squared voltage, the flows on
/// the lines leaving it, and the commissioning-time path impedance from the
/// substation to itself.
struct LocalMeasurements {
    struct ChildEdge {
        int child = 0;
        double p = 0.0;
        double q = 0.0;
        double ell = 0.0;
        double r = 0.0;
        double x = 0.0;
    };
    double v = 1.0;       // squared voltage at this bus
    double path_r = 0.0;  // cumulative resistance root -> this bus
    double path_x = 0.0;
    std::vector<ChildEdge> edges;
};

/// One consensus participant. Buses with children hold one log-diagonal term
/// per child edge; leaves hold none.
struct AgentState {
    int bus = 0;
    std::vector<double> local_terms;
    double value_sum = 0.0;
    double weight_sum = 0.0;
    bool out_of_region = false;
};

struct ConsensusConfig {
    /// Communication graph over agents (bus ids); empty = the electrical tree.
    std::vector<std::pair<int, int>> graph;
    int max_rounds = 200000;
    double tol = 1e-10;
    std::uint64_t seed = 0;  // reserved for randomized schedules
};

struct ConsensusResult {
    Eigen::VectorXd estimates;  // per agent, index = bus id
    int rounds_used = 0;
    bool converged = false;
    bool any_out_of_region = false;
};

/// Snapshot handed to the round observer before each update.
struct ConsensusRound {
    int round;
    const Eigen::VectorXd& value_sums;
    const Eigen::VectorXd& weight_sums;
    const Eigen::VectorXd& estimates;  // NaN while an agent's weight is still zero
};

using RoundObserver = std::function<void(const ConsensusRound&)>;

/// ln of each child-edge diagonal entry from local measurements only.
/// Throws NonpositiveDiagonal when a term is not positive (the bus would
/// flag itself as out-of-region).
std::vector<double> local_contribution(int bus, const LocalMeasurements& m);

/// Build the agent population for a solved state (the simulator's stand-in
/// for bus-level metering).
std::vector<AgentState> make_agents(const RadialNetwork& net, const SystemState& u,
                                    const SystemParameters& params);

/// Synchronous ratio consensus under Metropolis weights. Every agent's
/// value_sum/weight_sum converges to the mean log-diagonal term, i.e. the
/// diagonal-approximation index. The optional observer sees each round.
ConsensusResult run_consensus(std::vector<AgentState> agents, const RadialNetwork& net,
                              const ConsensusConfig& config = {}, const RoundObserver& observer = nullptr);

}  // namespace vstab
