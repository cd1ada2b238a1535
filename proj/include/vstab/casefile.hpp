#pragma once

#include <iosfwd>
#include <string>

#include "vstab/experiments.hpp"

namespace vstab {

/// A parsed case: the feeder plus its operating parameters.
struct Case {
    RadialNetwork net;
    SystemParameters params;
    double base_mva = 1.0;  // informational only
};

/// Line-oriented text format (see README for the grammar):
///   version 1
///   base <mva>            (optional)
///   slack <v0>
///   bus <id> <p> <q>      (one per PQ bus, ids 1..n with no gaps)
///   edge <parent> <child> <r> <x>
/// Strict mode rejects unknown keys and negative demands.
Case load_case(const std::string& path, bool strict = true);
Case parse_case(std::istream& in, const std::string& name, bool strict = true);

void write_case(std::ostream& out, const Case& c);

/// Direction file: `dir <bus> <dp> <dq>` lines; unlisted buses get zero.
LoadDirection load_direction(const std::string& path, int n, bool strict = true);

/// Axes file: `axis <1|2> <bus> <dp> <dq>` lines.
std::pair<LoadDirection, LoadDirection> load_axes(const std::string& path, int n, bool strict = true);

}  // namespace vstab
