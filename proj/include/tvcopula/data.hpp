#pragma once

#include <chrono>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace tvc {

using Date = std::chrono::year_month_day;

/// Parses `YYYY-MM-DD`; throws std::invalid_argument on anything else.
Date parse_date(std::string_view text);
std::string format_date(Date d);

/// Level series as read from disk. Dates strictly increasing, length >= 2.
struct RawSeries {
  std::vector<Date> dates;
  std::vector<double> values;
};

/// Series handed to the marginal stage. Usually log returns, but the
/// transform switch also allows levels and log-levels.
struct ReturnSeries {
  std::vector<Date> dates;
  std::vector<double> returns;

  std::size_t size() const { return returns.size(); }
};

/// Two series restricted to their common dates.
struct AlignedPair {
  std::vector<Date> dates;
  std::vector<double> first;
  std::vector<double> second;
};

enum class Transform { Level, LogReturn, LogLevel };

Transform parse_transform(std::string_view name);
std::string_view to_string(Transform t);

/// Raised for malformed input files; `line()` is 1-based (header = line 1),
/// or 0 when the problem is not tied to a line.
class CsvError : public std::runtime_error {
 public:
  CsvError(const std::string& what, std::size_t line)
      : std::runtime_error(what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Reads the date column (first column whose header is `date`, otherwise the
/// first column) and the named value column. Rows are returned date-sorted;
/// duplicate dates and unparseable cells are errors.
RawSeries load_csv(const std::filesystem::path& path, const std::string& column);

/// r[t] = ln(values[t+1] / values[t]), dated at t+1.
ReturnSeries log_returns(const RawSeries& s);

/// Applies the per-series transform selected in the run configuration.
ReturnSeries apply_transform(const RawSeries& s, Transform t);

/// Inner join on dates, original order preserved.
AlignedPair align(const ReturnSeries& a, const ReturnSeries& b);

}  // namespace tvc
