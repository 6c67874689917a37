#include "tvcopula/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

namespace tvc {

namespace {

std::string_view trim(std::string_view s) {
  const auto not_space = [](char c) { return c != ' ' && c != '\t' && c != '\r' && c != '"'; };
  while (!s.empty() && !not_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && !not_space(s.back())) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_row(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      cells.push_back(trim(line.substr(start)));
      break;
    }
    cells.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
  return cells;
}

bool parse_double(std::string_view text, double& out) {
  if (text.empty()) return false;
  if (text.front() == '+') text.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size() && std::isfinite(out);
}

}  // namespace

Date parse_date(std::string_view text) {
  text = trim(text);
  int y = 0;
  unsigned m = 0, d = 0;
  auto read = [&](std::size_t pos, std::size_t len, auto& out) {
    const auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + pos + len, out);
    return ec == std::errc() && ptr == text.data() + pos + len;
  };
  if (text.size() != 10 || text[4] != '-' || text[7] != '-' || !read(0, 4, y) ||
      !read(5, 2, m) || !read(8, 2, d)) {
    throw std::invalid_argument("invalid date '" + std::string(text) + "', expected YYYY-MM-DD");
  }
  const Date date{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
  if (!date.ok()) throw std::invalid_argument("invalid calendar date '" + std::string(text) + "'");
  return date;
}

std::string format_date(Date d) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()),
                static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
  return buf;
}

Transform parse_transform(std::string_view name) {
  if (name == "level") return Transform::Level;
  if (name == "log-return") return Transform::LogReturn;
  if (name == "log-level") return Transform::LogLevel;
  throw std::invalid_argument("unknown transform '" + std::string(name) +
                              "' (expected level, log-return or log-level)");
}

std::string_view to_string(Transform t) {
  switch (t) {
    case Transform::Level: return "level";
    case Transform::LogReturn: return "log-return";
    case Transform::LogLevel: return "log-level";
  }
  return "?";
}

RawSeries load_csv(const std::filesystem::path& path, const std::string& column) {
  std::ifstream in(path);
  if (!in) throw CsvError("cannot open '" + path.string() + "'", 0);

  std::string line;
  if (!std::getline(in, line)) throw CsvError("'" + path.string() + "' is empty", 1);
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);

  const auto header = split_row(line);
  std::size_t date_col = 0;
  for (std::size_t i = 0; i < header.size(); ++i) {
    std::string lower(header[i]);
    std::transform(lower.begin(), lower.end(), lower.begin(), ::tolower);
    if (lower == "date") {
      date_col = i;
      break;
    }
  }
  const auto it = std::find(header.begin(), header.end(), column);
  if (it == header.end()) {
    throw CsvError("column '" + column + "' not found in '" + path.string() + "'", 1);
  }
  const auto value_col = static_cast<std::size_t>(it - header.begin());
  if (value_col == date_col) throw CsvError("column '" + column + "' is the date column", 1);

  std::vector<std::pair<Date, double>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_row(line);
    const auto where = path.string() + ":" + std::to_string(line_no);
    if (cells.size() <= std::max(date_col, value_col)) {
      throw CsvError(where + ": expected " + std::to_string(header.size()) + " cells", line_no);
    }
    Date date;
    try {
      date = parse_date(cells[date_col]);
    } catch (const std::invalid_argument& e) {
      throw CsvError(where + ": " + e.what(), line_no);
    }
    double value = 0.0;
    if (!parse_double(cells[value_col], value)) {
      throw CsvError(where + ": cannot parse '" + std::string(cells[value_col]) +
                         "' as a number in column '" + column + "'",
                     line_no);
    }
    rows.emplace_back(date, value);
  }

  std::stable_sort(rows.begin(), rows.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].first == rows[i - 1].first) {
      throw CsvError("duplicate date " + format_date(rows[i].first) + " in '" + path.string() + "'",
                     0);
    }
  }
  if (rows.size() < 2) throw CsvError("'" + path.string() + "' has fewer than 2 rows", 0);

  RawSeries out;
  out.dates.reserve(rows.size());
  out.values.reserve(rows.size());
  for (const auto& [d, v] : rows) {
    out.dates.push_back(d);
    out.values.push_back(v);
  }
  return out;
}

ReturnSeries log_returns(const RawSeries& s) {
  if (s.values.size() < 2) throw std::invalid_argument("log_returns: need at least 2 levels");
  if (s.dates.size() != s.values.size()) {
    throw std::invalid_argument("log_returns: dates/values length mismatch");
  }
  ReturnSeries out;
  out.dates.assign(s.dates.begin() + 1, s.dates.end());
  out.returns.reserve(s.values.size() - 1);
  for (std::size_t t = 0; t < s.values.size(); ++t) {
    if (!(s.values[t] > 0.0)) {
      throw std::invalid_argument("log_returns: non-positive level at index " + std::to_string(t));
    }
    if (t > 0) out.returns.push_back(std::log(s.values[t] / s.values[t - 1]));
  }
  return out;
}

ReturnSeries apply_transform(const RawSeries& s, Transform t) {
  switch (t) {
    case Transform::LogReturn: return log_returns(s);
    case Transform::Level: return ReturnSeries{s.dates, s.values};
    case Transform::LogLevel: {
      ReturnSeries out{s.dates, {}};
      out.returns.reserve(s.values.size());
      for (std::size_t i = 0; i < s.values.size(); ++i) {
        if (!(s.values[i] > 0.0)) {
          throw std::invalid_argument("log-level transform: non-positive level at index " +
                                      std::to_string(i));
        }
        out.returns.push_back(std::log(s.values[i]));
      }
      return out;
    }
  }
  throw std::logic_error("apply_transform: unreachable");
}

AlignedPair align(const ReturnSeries& a, const ReturnSeries& b) {
  if (a.returns.empty() || b.returns.empty()) throw std::invalid_argument("align: empty series");
  AlignedPair out;
  std::size_t i = 0, j = 0;
  while (i < a.dates.size() && j < b.dates.size()) {
    if (a.dates[i] < b.dates[j]) {
      ++i;
    } else if (b.dates[j] < a.dates[i]) {
      ++j;
    } else {
      out.dates.push_back(a.dates[i]);
      out.first.push_back(a.returns[i]);
      out.second.push_back(b.returns[j]);
      ++i;
      ++j;
    }
  }
  if (out.dates.empty()) throw std::invalid_argument("align: no common dates");
  return out;
}

}  // namespace tvc
