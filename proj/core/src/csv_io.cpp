#include "hazrisk/csv_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string_view>

#include "hazrisk/errors.hpp"

namespace hazrisk {

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  for (;;) {
    const auto comma = line.find(',');
    out.push_back(line.substr(0, comma));
    if (comma == std::string_view::npos) break;
    line.remove_prefix(comma + 1);
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

[[noreturn]] void fail(std::size_t line, const std::string& what) {
  std::ostringstream msg;
  msg << "line " << line << ": " << what;
  throw InputError(msg.str());
}

template <typename T>
T parse_field(std::string_view text, std::size_t line, std::string_view column) {
  text = trim(text);
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (text.empty() || ec != std::errc() || ptr != end) {
    fail(line, "cannot parse column '" + std::string(column) + "' value '" +
                   std::string(text) + "'");
  }
  return value;
}

}  // namespace

std::vector<SurvivalSample> read_survival_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw InputError("CSV is empty: missing header row");
  ++line_no;
  if (line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);  // UTF-8 byte order mark

  std::optional<std::size_t> col_x, col_time, col_status, col_group;
  const auto header = split_fields(line);
  for (std::size_t c = 0; c < header.size(); ++c) {
    const auto name = trim(header[c]);
    if (name == "x") col_x = c;
    else if (name == "time") col_time = c;
    else if (name == "status") col_status = c;
    else if (name == "group") col_group = c;
  }
  for (auto [col, name] : {std::pair{col_x, "x"}, std::pair{col_time, "time"},
                           std::pair{col_status, "status"}}) {
    if (!col) throw InputError(std::string("CSV header lacks required column '") + name + "'");
  }

  std::vector<SurvivalSample> samples;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != header.size()) {
      fail(line_no, "expected " + std::to_string(header.size()) + " fields, found " +
                        std::to_string(fields.size()));
    }
    SurvivalSample s;
    s.x = parse_field<double>(fields[*col_x], line_no, "x");
    s.time = parse_field<double>(fields[*col_time], line_no, "time");
    s.status = parse_field<int>(fields[*col_status], line_no, "status");
    if (col_group) s.group = parse_field<int>(fields[*col_group], line_no, "group");
    if (!std::isfinite(s.x)) fail(line_no, "x must be finite");
    if (!(s.time > 0.0) || !std::isfinite(s.time)) fail(line_no, "time must be positive");
    if (s.status != 0 && s.status != 1) fail(line_no, "status must be 0 or 1");
    samples.push_back(s);
  }
  if (samples.empty()) throw InputError("CSV has a header but no data rows");
  return samples;
}

std::vector<SurvivalSample> read_survival_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  return read_survival_csv(in);
}

void write_survival_csv(std::ostream& out, const std::vector<SurvivalSample>& samples) {
  bool any_group = false;
  for (const auto& s : samples) any_group = any_group || s.group.has_value();
  out << "x,time,status" << (any_group ? ",group" : "") << '\n';
  out << std::setprecision(17);
  for (const auto& s : samples) {
    out << s.x << ',' << s.time << ',' << s.status;
    if (any_group) out << ',' << s.group.value_or(0);
    out << '\n';
  }
}

}  // namespace hazrisk
