// Command-line front end: analyze / continuation / scan / consensus over
// text case files, emitting JSON or CSV to stdout.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "vstab/casefile.hpp"
#include "vstab/report_io.hpp"

namespace {

struct CommonArgs {
    std::string case_path;
    bool permissive = false;
    bool csv = false;
    double tol = 1e-10;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("case", args.case_path, "case file")->required();
    cmd->add_flag("--permissive", args.permissive,
                  "accept negative demands and unknown case keys (approximation guarantees are void)");
    cmd->add_flag("--csv", args.csv, "emit CSV instead of JSON");
    cmd->add_option("--tol", args.tol, "power flow residual tolerance (infinity norm)");
}

vstab::SolveOptions solve_options(const CommonArgs& args) {
    vstab::SolveOptions opts;
    opts.tol = args.tol;
    return opts;
}

int run_analyze(const CommonArgs& args, double vsi_min, int trace_terms) {
    const vstab::Case c = vstab::load_case(args.case_path, !args.permissive);
    const vstab::IncidenceSet inc = vstab::incidence(c.net);
    const vstab::SolveOutcome out = vstab::solve(c.net, inc, c.params, solve_options(args));
    if (!out.converged) {
        std::cerr << "power flow did not converge: " << vstab::solve_failure_name(out.failure_kind)
                  << " (residual " << out.final_residual_norm << " after " << out.iterations
                  << " iterations)\n";
        return 1;
    }
    const vstab::StabilityReport report = vstab::assess(c.net, inc, *out.state, c.params, trace_terms);
    const vstab::VsiThreshold threshold{vsi_min};
    if (args.csv)
        vstab::write_report_csv(std::cout, report, threshold);
    else
        vstab::write_report_json(std::cout, report, threshold);
    return 0;
}

int run_continuation(const CommonArgs& args, const std::string& direction_file, double step,
                     double step_min, double lambda_max) {
    const vstab::Case c = vstab::load_case(args.case_path, !args.permissive);
    const vstab::IncidenceSet inc = vstab::incidence(c.net);

    // With no direction file, scale the case loads from zero: lambda is then
    // a multiplier of the case's own demand profile.
    vstab::SystemParameters xi0 = c.params;
    vstab::LoadDirection dir;
    if (direction_file.empty()) {
        dir = vstab::LoadDirection::make(c.params.p, c.params.q, !args.permissive);
        xi0.p.setZero();
        xi0.q.setZero();
    } else {
        dir = vstab::load_direction(direction_file, c.net.pq_count(), !args.permissive);
    }

    vstab::ContinuationOptions opts;
    opts.lambda_step = step;
    opts.step_min = step_min;
    opts.lambda_max = lambda_max;
    opts.solve = solve_options(args);
    const vstab::ContinuationResult result = vstab::continuation(c.net, inc, xi0, dir, opts);
    if (args.csv)
        vstab::write_trajectory_csv(std::cout, result);
    else
        vstab::write_trajectory_json(std::cout, result);
    return 0;
}

int run_scan(const CommonArgs& args, const std::string& axes_file, std::pair<int, int> grid,
             std::pair<double, double> extent) {
    const vstab::Case c = vstab::load_case(args.case_path, !args.permissive);
    const vstab::IncidenceSet inc = vstab::incidence(c.net);
    const auto [axis1, axis2] = vstab::load_axes(axes_file, c.net.pq_count(), !args.permissive);
    const vstab::ScanResult result =
        vstab::region_scan(c.net, inc, c.params, axis1, axis2, grid.first, grid.second, extent.first,
                           extent.second, solve_options(args));
    if (args.csv)
        vstab::write_scan_csv(std::cout, result, extent.first, extent.second);
    else
        vstab::write_scan_json(std::cout, result, extent.first, extent.second);
    return 0;
}

int run_consensus(const CommonArgs& args, int rounds, double consensus_tol,
                  const std::string& trace_path) {
    const vstab::Case c = vstab::load_case(args.case_path, !args.permissive);
    const vstab::IncidenceSet inc = vstab::incidence(c.net);
    const vstab::SolveOutcome out = vstab::solve(c.net, inc, c.params, solve_options(args));
    if (!out.converged) {
        std::cerr << "power flow did not converge: " << vstab::solve_failure_name(out.failure_kind)
                  << "\n";
        return 1;
    }

    auto agents = vstab::make_agents(c.net, *out.state, c.params);
    vstab::ConsensusConfig config;
    config.max_rounds = rounds;
    config.tol = consensus_tol;

    std::ofstream trace;
    vstab::RoundObserver observer;
    if (!trace_path.empty()) {
        trace.open(trace_path);
        if (!trace) {
            std::cerr << "cannot open trace file " << trace_path << "\n";
            return 1;
        }
        vstab::write_consensus_trace_header(trace);
        observer = [&trace](const vstab::ConsensusRound& r) {
            vstab::write_consensus_trace_round(trace, r.round, r.estimates);
        };
    }

    const vstab::ConsensusResult result = vstab::run_consensus(std::move(agents), c.net, config, observer);

    std::optional<double> centralized;
    const vstab::ReducedJacobian J = vstab::reduced_jacobian(c.net, inc, *out.state, c.params.v0);
    if ((J.diag.array() > 0.0).all()) centralized = vstab::vsia(J.diag);
    vstab::write_consensus_json(std::cout, result, centralized);
    return result.converged ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"voltage stability margin toolkit for radial distribution feeders"};
    app.require_subcommand(1);

    CommonArgs analyze_args, cont_args, scan_args, cons_args;

    auto* analyze = app.add_subcommand("analyze", "solve the case and report the stability indices");
    double vsi_min = -0.8;
    int trace_terms = 50;
    add_common(analyze, analyze_args);
    analyze->add_option("--vsi-min", vsi_min, "pass/fail threshold on the index");
    analyze->add_option("--trace-terms", trace_terms, "series truncation for the error diagnostic");

    auto* cont = app.add_subcommand("continuation", "march the load toward collapse and record indices");
    std::string direction_file;
    double step = 0.05, step_min = 1e-4, lambda_max = 1e9;
    add_common(cont, cont_args);
    cont->add_option("--direction-file", direction_file, "dir file; default scales the case loads from zero");
    cont->add_option("--step", step, "initial lambda step");
    cont->add_option("--step-min", step_min, "smallest lambda step before stopping");
    cont->add_option("--lambda-max", lambda_max, "upper bound on lambda");

    auto* scan = app.add_subcommand("scan", "evaluate solvability and indices on a 2-D load grid");
    std::string axes_file;
    std::pair<int, int> grid{8, 8};
    std::pair<double, double> extent{1.0, 1.0};
    add_common(scan, scan_args);
    scan->add_option("--axes-file", axes_file, "axis file with two load directions")->required();
    scan->add_option("--grid", grid, "grid points per axis (N M)");
    scan->add_option("--extent", extent, "lambda extent per axis (A B)");

    auto* cons = app.add_subcommand("consensus", "simulate distributed index computation");
    int rounds = 200000;
    double consensus_tol = 1e-10;
    std::string trace_path;
    add_common(cons, cons_args);
    cons->add_option("--rounds", rounds, "maximum consensus rounds");
    cons->add_option("--consensus-tol", consensus_tol, "spread tolerance across agents");
    cons->add_option("--trace", trace_path, "write per-round estimates as CSV to this file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (app.got_subcommand(analyze)) return run_analyze(analyze_args, vsi_min, trace_terms);
        if (app.got_subcommand(cont))
            return run_continuation(cont_args, direction_file, step, step_min, lambda_max);
        if (app.got_subcommand(scan)) return run_scan(scan_args, axes_file, grid, extent);
        if (app.got_subcommand(cons)) return run_consensus(cons_args, rounds, consensus_tol, trace_path);
    } catch (const vstab::Error& e) {
        std::cerr << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
