#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "scatter3d/torus.hpp"

namespace scatter3d {

/// Runs one subcommand. Returns 0 on success, 1 on a domain error and 2 on
/// a usage or configuration error. args excludes the program name.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// "lo:hi:step", "midpoints:lo:hi", "a,b,c,..." or a CSV file with a
/// lambda column.
std::vector<double> parse_lambda_list(const std::string& spec);

/// "a,b,c" as a torus point.
TorusPoint parse_torus_point(const std::string& spec);

/// key=value lines ('#' comments, blank lines ignored) turned into
/// "--key value" argument pairs.
std::vector<std::string> config_file_arguments(const std::string& path);

}  // namespace scatter3d
