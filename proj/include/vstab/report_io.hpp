#pragma once

#include <iosfwd>
#include <optional>

#include "vstab/distsim.hpp"
#include "vstab/experiments.hpp"

namespace vstab {

/// Pass/fail threshold attached to emitted reports (a config value, not a
/// property of the index itself).
struct VsiThreshold {
    double vsi_min = -0.8;
};

void write_report_json(std::ostream& out, const StabilityReport& report,
                       std::optional<VsiThreshold> threshold = {});
void write_report_csv(std::ostream& out, const StabilityReport& report,
                      std::optional<VsiThreshold> threshold = {});

void write_trajectory_json(std::ostream& out, const ContinuationResult& result);
void write_trajectory_csv(std::ostream& out, const ContinuationResult& result);

void write_scan_json(std::ostream& out, const ScanResult& result, double extent1, double extent2);
void write_scan_csv(std::ostream& out, const ScanResult& result, double extent1, double extent2);

void write_consensus_json(std::ostream& out, const ConsensusResult& result,
                          std::optional<double> centralized_vsia = {});

/// One CSV row per (round, agent): streamed through run_consensus' observer.
void write_consensus_trace_header(std::ostream& out);
void write_consensus_trace_round(std::ostream& out, int round, const Eigen::VectorXd& estimates);

}  // namespace vstab
