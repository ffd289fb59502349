#pragma once

// Dataset CSV files.
//
// Header row naming the columns x1..xd (required, any order) and optionally
// wl and wh. Cells are decimal numbers or "inf"/"-inf" in any case. An empty
// wl cell means -inf, an empty wh cell +inf; absent columns likewise.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include "mscan/models.hpp"

namespace mscan {

// Throws ParseError (1-based line number, header is line 1).
Dataset read_dataset(std::istream& in);
Dataset read_dataset(const std::filesystem::path& path);

// Shortest round-trip representation; writes wl and wh always.
void write_dataset(std::ostream& out, const Dataset& data);
std::string dataset_csv(const Dataset& data);

// Shortest decimal that reads back to the same double; "inf"/"-inf".
std::string format_double(double v);

}  // namespace mscan
