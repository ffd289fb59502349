#include "mscan/csv_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <vector>

#include "mscan/errors.hpp"

namespace mscan {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::optional<double> parse_number(std::string_view token) {
  const std::string t = lower(token);
  if (t == "inf" || t == "+inf") return kInf;
  if (t == "-inf") return -kInf;
  std::string_view s = t;
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || std::isnan(v)) return std::nullopt;
  // from_chars also takes "infinity"; keep the accepted spelling narrow
  if (std::isinf(v)) return std::nullopt;
  return v;
}

enum class Column { x, wl, wh };

}  // namespace

Dataset read_dataset(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;

  // header
  std::vector<std::string_view> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!trim(line).empty()) break;
  }
  if (trim(line).empty()) throw ParseError(line_no == 0 ? 1 : line_no, "missing header row");
  const std::string header_line = line;
  header = split(header_line);
  const std::size_t header_no = line_no;

  std::vector<std::pair<Column, std::size_t>> columns;  // kind, covariate index
  std::size_t d = 0;
  bool has_wl = false;
  bool has_wh = false;
  std::vector<bool> seen;
  for (auto name_raw : header) {
    const std::string name = lower(name_raw);
    if (name == "wl" || name == "wh") {
      bool& flag = name == "wl" ? has_wl : has_wh;
      if (flag) throw ParseError(header_no, "duplicate column '" + name + "'");
      flag = true;
      columns.emplace_back(name == "wl" ? Column::wl : Column::wh, 0);
      continue;
    }
    std::size_t k = 0;
    if (name.size() < 2 || name[0] != 'x' ||
        std::from_chars(name.data() + 1, name.data() + name.size(), k).ptr !=
            name.data() + name.size() ||
        k == 0) {
      throw ParseError(header_no, "unknown column '" + std::string(name_raw) +
                                      "' (expected x1..xd, wl, wh)");
    }
    if (seen.size() < k) seen.resize(k, false);
    if (seen[k - 1]) throw ParseError(header_no, "duplicate column '" + name + "'");
    seen[k - 1] = true;
    d = std::max(d, k);
    columns.emplace_back(Column::x, k - 1);
  }
  if (d == 0) throw ParseError(header_no, "no covariate columns x1..xd");
  if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
    throw ParseError(header_no, "covariate columns must be x1..x" + std::to_string(d));
  }

  std::vector<double> xs;
  Dataset data;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto cells = split(line);
    if (cells.size() != columns.size()) {
      throw ParseError(line_no, "expected " + std::to_string(columns.size()) + " fields, got " +
                                    std::to_string(cells.size()));
    }
    std::vector<double> row(d, 0.0);
    double wl = -kInf;
    double wh = kInf;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const auto [kind, k] = columns[c];
      if (cells[c].empty()) {
        if (kind == Column::x) throw ParseError(line_no, "empty covariate x" + std::to_string(k + 1));
        continue;
      }
      const auto v = parse_number(cells[c]);
      if (!v) throw ParseError(line_no, "cannot parse '" + std::string(cells[c]) + "'");
      switch (kind) {
        case Column::x:
          if (!std::isfinite(*v)) {
            throw ParseError(line_no, "covariate x" + std::to_string(k + 1) + " must be finite");
          }
          row[k] = *v;
          break;
        case Column::wl:
          wl = *v;
          break;
        case Column::wh:
          wh = *v;
          break;
      }
    }
    if (wl > wh) throw ParseError(line_no, "wl exceeds wh");
    xs.insert(xs.end(), row.begin(), row.end());
    data.w_lo.push_back(wl);
    data.w_hi.push_back(wh);
  }

  const std::size_t n = data.w_lo.size();
  data.x = Matrix(n, d);
  std::copy(xs.begin(), xs.end(), data.x.data().begin());
  return data;
}

Dataset read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open data file '" + path.string() + "'");
  return read_dataset(in);
}

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

void write_dataset(std::ostream& out, const Dataset& data) {
  const std::size_t d = data.dimension();
  for (std::size_t k = 0; k < d; ++k) out << 'x' << k + 1 << ',';
  out << "wl,wh\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (std::size_t k = 0; k < d; ++k) out << format_double(data.x(i, k)) << ',';
    const double wl = data.w_lo.empty() ? -kInf : data.w_lo[i];
    const double wh = data.w_hi.empty() ? kInf : data.w_hi[i];
    out << format_double(wl) << ',' << format_double(wh) << '\n';
  }
}

std::string dataset_csv(const Dataset& data) {
  std::ostringstream os;
  write_dataset(os, data);
  return os.str();
}

}  // namespace mscan
