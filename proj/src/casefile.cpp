#include "vstab/casefile.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <vector>

namespace vstab {

namespace {

struct LineScanner {
    const std::string& name;
    int lineno = 0;

    [[noreturn]] void fail(const std::string& message) const {
        throw Error(Errc::ParseError, name + ":" + std::to_string(lineno) + ": " + message);
    }

    double num(std::istringstream& ss, const char* field) {
        double value = 0.0;
        if (!(ss >> value)) fail(std::string("expected a number for ") + field);
        return value;
    }

    int integer(std::istringstream& ss, const char* field) {
        int value = 0;
        if (!(ss >> value)) fail(std::string("expected an integer for ") + field);
        return value;
    }

    void done(std::istringstream& ss) {
        std::string extra;
        if (ss >> extra) fail("unexpected trailing field '" + extra + "'");
    }
};

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

Case parse_case(std::istream& in, const std::string& name, bool strict) {
    LineScanner sc{name};
    std::optional<int> version;
    std::optional<double> v0;
    double base_mva = 1.0;
    std::map<int, std::pair<double, double>> buses;
    std::vector<EdgeSpec> edges;
    std::map<int, int> edge_line;  // child bus -> first line seen

    std::string line;
    while (std::getline(in, line)) {
        ++sc.lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ss(line);
        std::string key;
        if (!(ss >> key)) continue;

        if (key == "version") {
            if (version) sc.fail("duplicate version line");
            version = sc.integer(ss, "version");
            if (*version != 1) sc.fail("unsupported version " + std::to_string(*version));
        } else if (key == "base") {
            base_mva = sc.num(ss, "base");
        } else if (key == "slack") {
            if (v0) sc.fail("duplicate slack line");
            v0 = sc.num(ss, "slack v0");
        } else if (key == "bus") {
            const int id = sc.integer(ss, "bus id");
            const double p = sc.num(ss, "bus p");
            const double q = sc.num(ss, "bus q");
            if (id < 1) sc.fail("bus id must be >= 1 (bus 0 is the slack)");
            if (!buses.emplace(id, std::make_pair(p, q)).second)
                sc.fail("duplicate bus " + std::to_string(id));
        } else if (key == "edge") {
            const int parent = sc.integer(ss, "edge parent");
            const int child = sc.integer(ss, "edge child");
            const double r = sc.num(ss, "edge r");
            const double x = sc.num(ss, "edge x");
            if (!edge_line.emplace(child, sc.lineno).second)
                sc.fail("duplicate edge into bus " + std::to_string(child) + " (first at line " +
                        std::to_string(edge_line[child]) + ")");
            edges.push_back({parent, child, r, x});
        } else if (strict) {
            sc.fail("unknown key '" + key + "'");
        } else {
            continue;  // permissive: skip unknown lines wholesale
        }
        sc.done(ss);
    }

    if (!version) throw Error(Errc::ParseError, name + ": missing 'version' line");
    if (!v0) throw Error(Errc::ParseError, name + ": missing 'slack' line");
    if (buses.empty()) throw Error(Errc::ParseError, name + ": no bus records");

    const int n = buses.rbegin()->first;
    if (static_cast<int>(buses.size()) != n)
        throw Error(Errc::ValidationError,
                    name + ": bus ids must be 1.." + std::to_string(n) + " with no gaps");

    Case c;
    c.base_mva = base_mva;
    c.params.v0 = *v0;
    c.params.p.resize(n);
    c.params.q.resize(n);
    for (const auto& [id, pq] : buses) {
        c.params.p[id - 1] = pq.first;
        c.params.q[id - 1] = pq.second;
    }

    if (c.params.v0 <= 0.0) throw Error(Errc::ValidationError, name + ": slack v0 must be positive");
    if (strict && !c.params.assumption1())
        throw Error(Errc::ValidationError,
                    name + ": negative demand violates the nonnegative-load assumption; "
                           "rerun in permissive mode to accept it");

    try {
        c.net = RadialNetwork::build(edges, n);
    } catch (const Error& err) {
        throw Error(Errc::ValidationError, name + ": " + err.what());
    }
    return c;
}

Case load_case(const std::string& path, bool strict) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::ParseError, path + ": cannot open file");
    return parse_case(in, path, strict);
}

void write_case(std::ostream& out, const Case& c) {
    out << "version 1\n";
    out << "base " << fmt17(c.base_mva) << "\n";
    out << "slack " << fmt17(c.params.v0) << "\n";
    const int n = c.net.pq_count();
    for (int b = 1; b <= n; ++b)
        out << "bus " << b << " " << fmt17(c.params.p[b - 1]) << " " << fmt17(c.params.q[b - 1]) << "\n";
    for (int b = 1; b <= n; ++b)
        out << "edge " << c.net.parent(b) << " " << b << " " << fmt17(c.net.edge_r(b)) << " "
            << fmt17(c.net.edge_x(b)) << "\n";
}

namespace {

void read_direction_line(LineScanner& sc, std::istringstream& ss, int n, Eigen::VectorXd& dp,
                         Eigen::VectorXd& dq) {
    const int bus = sc.integer(ss, "bus id");
    if (bus < 1 || bus > n) sc.fail("bus " + std::to_string(bus) + " out of range 1.." + std::to_string(n));
    dp[bus - 1] = sc.num(ss, "dp");
    dq[bus - 1] = sc.num(ss, "dq");
}

}  // namespace

LoadDirection load_direction(const std::string& path, int n, bool strict) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::ParseError, path + ": cannot open file");

    LineScanner sc{path};
    Eigen::VectorXd dp = Eigen::VectorXd::Zero(n), dq = Eigen::VectorXd::Zero(n);
    std::string line;
    while (std::getline(in, line)) {
        ++sc.lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ss(line);
        std::string key;
        if (!(ss >> key)) continue;
        if (key != "dir") sc.fail("unknown key '" + key + "'");
        read_direction_line(sc, ss, n, dp, dq);
        sc.done(ss);
    }
    return LoadDirection::make(std::move(dp), std::move(dq), strict);
}

std::pair<LoadDirection, LoadDirection> load_axes(const std::string& path, int n, bool strict) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::ParseError, path + ": cannot open file");

    LineScanner sc{path};
    Eigen::VectorXd dp1 = Eigen::VectorXd::Zero(n), dq1 = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd dp2 = Eigen::VectorXd::Zero(n), dq2 = Eigen::VectorXd::Zero(n);
    std::string line;
    while (std::getline(in, line)) {
        ++sc.lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ss(line);
        std::string key;
        if (!(ss >> key)) continue;
        if (key != "axis") sc.fail("unknown key '" + key + "'");
        const int which = sc.integer(ss, "axis index");
        if (which == 1)
            read_direction_line(sc, ss, n, dp1, dq1);
        else if (which == 2)
            read_direction_line(sc, ss, n, dp2, dq2);
        else
            sc.fail("axis index must be 1 or 2");
        sc.done(ss);
    }
    return {LoadDirection::make(std::move(dp1), std::move(dq1), strict),
            LoadDirection::make(std::move(dp2), std::move(dq2), strict)};
}

}  // namespace vstab
