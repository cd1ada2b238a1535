#include "vstab/report_io.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include <json.hpp>

namespace vstab {

namespace {

using nlohmann::json;

// %.17g round-trips doubles exactly; CSV and JSON must carry the same values.
std::string fmt17(double v) {
    if (std::isnan(v)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// JSON has no inf/nan literals; represent non-finite values as null.
json jnum(double v) {
    if (!std::isfinite(v)) return nullptr;
    return v;
}

json report_json(const StabilityReport& r, const std::optional<VsiThreshold>& threshold) {
    json j{{"n", r.n},
           {"vsi", jnum(r.vsi)},
           {"vsia", jnum(r.vsia)},
           {"rho", jnum(r.rho)},
           {"bound_loose", jnum(r.bound_loose)},
           {"bound_tight", jnum(r.bound_tight)},
           {"trace_error", jnum(r.trace_error)},
           {"trace_tail_bound", jnum(r.trace_tail_bound)},
           {"trace_terms", r.trace_terms},
           {"det_sign", r.logdet.sign},
           {"logdet", jnum(r.logdet.log_magnitude)},
           {"logdet_diag", jnum(r.logdet_diag.log_magnitude)},
           {"det_positive", r.flags.det_positive},
           {"diag_positive", r.flags.diag_positive},
           {"rho_lt_one", r.flags.rho_lt_one},
           {"z_matrix", r.flags.z_matrix},
           {"in_region", r.in_region},
           {"assumption1_satisfied", r.assumption1_satisfied}};
    if (threshold) {
        j["vsi_min"] = threshold->vsi_min;
        j["vsi_pass"] = r.in_region && r.vsi >= threshold->vsi_min;
    }
    return j;
}

const char* kReportColumns =
    "n,vsi,vsia,rho,bound_loose,bound_tight,trace_error,trace_tail_bound,trace_terms,"
    "det_sign,logdet,logdet_diag,det_positive,diag_positive,rho_lt_one,z_matrix,"
    "in_region,assumption1_satisfied";

void report_csv_row(std::ostream& out, const StabilityReport& r) {
    out << r.n << ',' << fmt17(r.vsi) << ',' << fmt17(r.vsia) << ',' << fmt17(r.rho) << ','
        << fmt17(r.bound_loose) << ',' << fmt17(r.bound_tight) << ',' << fmt17(r.trace_error) << ','
        << fmt17(r.trace_tail_bound) << ',' << r.trace_terms << ',' << r.logdet.sign << ','
        << fmt17(r.logdet.log_magnitude) << ',' << fmt17(r.logdet_diag.log_magnitude) << ','
        << r.flags.det_positive << ',' << r.flags.diag_positive << ',' << r.flags.rho_lt_one << ','
        << r.flags.z_matrix << ',' << r.in_region << ',' << r.assumption1_satisfied;
}

}  // namespace

void write_report_json(std::ostream& out, const StabilityReport& report,
                       std::optional<VsiThreshold> threshold) {
    out << report_json(report, threshold).dump(2) << "\n";
}

void write_report_csv(std::ostream& out, const StabilityReport& report,
                      std::optional<VsiThreshold> threshold) {
    out << kReportColumns;
    if (threshold) out << ",vsi_min,vsi_pass";
    out << "\n";
    report_csv_row(out, report);
    if (threshold)
        out << ',' << fmt17(threshold->vsi_min) << ','
            << (report.in_region && report.vsi >= threshold->vsi_min);
    out << "\n";
}

void write_trajectory_json(std::ostream& out, const ContinuationResult& result) {
    json points = json::array();
    for (const auto& pt : result.points) {
        json j = report_json(pt.report, std::nullopt);
        j["lambda"] = pt.lambda;
        j["solve_iterations"] = pt.solve_iterations;
        points.push_back(std::move(j));
    }
    json j{{"collapse_lambda", result.collapse_lambda},
           {"collapsed", result.collapsed},
           {"points", std::move(points)}};
    out << j.dump(2) << "\n";
}

void write_trajectory_csv(std::ostream& out, const ContinuationResult& result) {
    out << "lambda,solve_iterations," << kReportColumns << "\n";
    for (const auto& pt : result.points) {
        out << fmt17(pt.lambda) << ',' << pt.solve_iterations << ',';
        report_csv_row(out, pt.report);
        out << "\n";
    }
}

namespace {

json scan_json(const ScanResult& result, double extent1, double extent2) {
    json cells = json::array();
    for (int i = 0; i < result.rows; ++i) {
        for (int j = 0; j < result.cols; ++j) {
            const ScanCell& c = result.at(i, j);
            cells.push_back(json{{"i", i},
                                 {"j", j},
                                 {"lambda1", extent1 * i / (result.rows - 1)},
                                 {"lambda2", extent2 * j / (result.cols - 1)},
                                 {"solvable", c.solvable},
                                 {"vsi", jnum(c.vsi)},
                                 {"vsia", jnum(c.vsia)}});
        }
    }
    return json{{"rows", result.rows}, {"cols", result.cols}, {"cells", std::move(cells)}};
}

}  // namespace

void write_scan_json(std::ostream& out, const ScanResult& result, double extent1, double extent2) {
    out << scan_json(result, extent1, extent2).dump(2) << "\n";
}

void write_scan_csv(std::ostream& out, const ScanResult& result, double extent1, double extent2) {
    out << "i,j,lambda1,lambda2,solvable,vsi,vsia\n";
    for (int i = 0; i < result.rows; ++i)
        for (int j = 0; j < result.cols; ++j) {
            const ScanCell& c = result.at(i, j);
            out << i << ',' << j << ',' << fmt17(extent1 * i / (result.rows - 1)) << ','
                << fmt17(extent2 * j / (result.cols - 1)) << ',' << c.solvable << ',' << fmt17(c.vsi)
                << ',' << fmt17(c.vsia) << "\n";
        }
}

void write_consensus_json(std::ostream& out, const ConsensusResult& result,
                          std::optional<double> centralized_vsia) {
    json estimates = json::array();
    for (Eigen::Index a = 0; a < result.estimates.size(); ++a)
        estimates.push_back(json{{"agent", a}, {"estimate", jnum(result.estimates[a])}});
    json j{{"rounds_used", result.rounds_used},
           {"converged", result.converged},
           {"any_out_of_region", result.any_out_of_region},
           {"estimates", std::move(estimates)}};
    if (centralized_vsia) j["vsia_centralized"] = jnum(*centralized_vsia);
    out << j.dump(2) << "\n";
}

void write_consensus_trace_header(std::ostream& out) { out << "round,agent,estimate\n"; }

void write_consensus_trace_round(std::ostream& out, int round, const Eigen::VectorXd& estimates) {
    for (Eigen::Index a = 0; a < estimates.size(); ++a)
        out << round << ',' << a << ',' << fmt17(estimates[a]) << "\n";
}

}  // namespace vstab
