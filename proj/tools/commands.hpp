#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "mscan/critval.hpp"
#include "mscan/geometry.hpp"
#include "mscan/inversion.hpp"

namespace mscan::cli {

// Exit status: 0 success, 1 internal error, 2 input or configuration error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// "fixed:0.1", "pow:1/3", "pow-scaled:0.25"
TruncationRule parse_truncation(const std::string& text);
// "analytic", "refined", "simulated", "lf"
CritvalMethod parse_method(const std::string& text);
// "t1:min:max:steps,t2:min:max:steps"
ThetaGrid parse_grid(const std::string& text);
// "0.1" or "1/3"
double parse_real(const std::string& text);

}  // namespace mscan::cli
