#include "tvcopula/data.hpp"

#include "test_util.hpp"

#include <doctest.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <set>

using doctest::Approx;
using tvc::Date;

namespace {

Date day(int y, unsigned m, unsigned d) {
  return Date{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
}

tvc::ReturnSeries series(std::vector<Date> dates) {
  tvc::ReturnSeries s;
  s.dates = std::move(dates);
  for (std::size_t i = 0; i < s.dates.size(); ++i) s.returns.push_back(static_cast<double>(i));
  return s;
}

}  // namespace

TEST_CASE("dates round-trip through text") {
  CHECK(tvc::format_date(tvc::parse_date("2019-02-28")) == "2019-02-28");
  CHECK(tvc::parse_date("2020-02-29") == day(2020, 2, 29));
  CHECK_THROWS_AS(tvc::parse_date("2019-02-29"), std::invalid_argument);
  CHECK_THROWS_AS(tvc::parse_date("2019/01/01"), std::invalid_argument);
  CHECK_THROWS_AS(tvc::parse_date("20190101"), std::invalid_argument);
}

TEST_CASE("load_csv reads a three-row file") {
  const auto dir = testutil::scratch_dir("data_load");
  testutil::write_file(dir / "a.csv", "date,px\n2020-01-01,1.0\n2020-01-02,2.0\n2020-01-03,3.0\n");
  const auto s = tvc::load_csv(dir / "a.csv", "px");
  REQUIRE(s.values.size() == 3);
  CHECK(s.values == std::vector<double>{1.0, 2.0, 3.0});
  CHECK(s.dates.front() == day(2020, 1, 1));
}

TEST_CASE("load_csv names the offending line of a malformed cell") {
  const auto dir = testutil::scratch_dir("data_bad");
  testutil::write_file(dir / "b.csv", "date,px\n2020-01-01,1.0\n2020-01-02,abc\n2020-01-03,3.0\n");
  try {
    tvc::load_csv(dir / "b.csv", "px");
    FAIL("expected a CsvError");
  } catch (const tvc::CsvError& e) {
    CHECK(e.line() == 3);
    CHECK(std::string(e.what()).find(":3") != std::string::npos);
  }
}

TEST_CASE("load_csv sorts dates") {
  const auto dir = testutil::scratch_dir("data_sort");
  testutil::write_file(dir / "sorted.csv",
                       "date,px\n2020-01-01,1.5\n2020-01-02,2.5\n2020-01-03,3.5\n2020-01-06,4.5\n");
  testutil::write_file(dir / "shuffled.csv",
                       "date,px\n2020-01-03,3.5\n2020-01-01,1.5\n2020-01-06,4.5\n2020-01-02,2.5\n");
  const auto a = tvc::load_csv(dir / "sorted.csv", "px");
  const auto b = tvc::load_csv(dir / "shuffled.csv", "px");
  CHECK(a.dates == b.dates);
  CHECK(a.values == b.values);
}

TEST_CASE("load_csv error cases") {
  const auto dir = testutil::scratch_dir("data_errors");
  CHECK_THROWS_AS(tvc::load_csv(dir / "missing.csv", "px"), tvc::CsvError);
  testutil::write_file(dir / "c.csv", "date,px\n2020-01-01,1\n2020-01-02,2\n");
  CHECK_THROWS_AS(tvc::load_csv(dir / "c.csv", "close"), tvc::CsvError);
  testutil::write_file(dir / "dup.csv", "date,px\n2020-01-01,1\n2020-01-01,2\n2020-01-02,2\n");
  CHECK_THROWS_AS(tvc::load_csv(dir / "dup.csv", "px"), tvc::CsvError);
  testutil::write_file(dir / "one.csv", "date,px\n2020-01-01,1\n");
  CHECK_THROWS_AS(tvc::load_csv(dir / "one.csv", "px"), tvc::CsvError);
  testutil::write_file(dir / "baddate.csv", "date,px\n2020-13-01,1\n2020-01-02,2\n");
  CHECK_THROWS_AS(tvc::load_csv(dir / "baddate.csv", "px"), tvc::CsvError);
}

TEST_CASE("load_csv picks the named column among several") {
  const auto dir = testutil::scratch_dir("data_cols");
  testutil::write_file(dir / "m.csv", "id,date,a,b\nx,2020-01-01,1,10\ny,2020-01-02,2,20\n");
  const auto s = tvc::load_csv(dir / "m.csv", "b");
  CHECK(s.values == std::vector<double>{10.0, 20.0});
}

TEST_CASE("log_returns examples") {
  tvc::RawSeries s{{day(2020, 1, 1), day(2020, 1, 2)}, {1.0, std::numbers::e}};
  auto r = tvc::log_returns(s);
  REQUIRE(r.size() == 1);
  CHECK(r.returns[0] == Approx(1.0).epsilon(1e-15));
  CHECK(r.dates[0] == day(2020, 1, 2));

  s.values = {100.0, 110.0};
  CHECK(tvc::log_returns(s).returns[0] == Approx(0.0953101798).epsilon(1e-9));

  tvc::RawSeries flat{{day(2020, 1, 1), day(2020, 1, 2), day(2020, 1, 3)}, {5.0, 5.0, 5.0}};
  CHECK(tvc::log_returns(flat).returns == std::vector<double>{0.0, 0.0});

  tvc::RawSeries bad{{day(2020, 1, 1), day(2020, 1, 2)}, {1.0, -2.0}};
  CHECK_THROWS(tvc::log_returns(bad));
  tvc::RawSeries short_series{{day(2020, 1, 1)}, {1.0}};
  CHECK_THROWS(tvc::log_returns(short_series));
}

TEST_CASE("log_returns inverts exp of a cumulative sum") {
  const auto r = testutil::normals(500, 4);
  tvc::RawSeries s;
  double level = 0.0;
  auto d = std::chrono::sys_days(day(2001, 1, 1));
  s.dates.push_back(Date(d));
  s.values.push_back(1.0);
  for (double x : r) {
    level += 0.01 * x;
    d += std::chrono::days(1);
    s.dates.push_back(Date(d));
    s.values.push_back(std::exp(level));
  }
  const auto back = tvc::log_returns(s);
  for (std::size_t i = 0; i < r.size(); ++i) CHECK(back.returns[i] == Approx(0.01 * r[i]).epsilon(1e-12));
}

TEST_CASE("transform switch") {
  tvc::RawSeries s{{day(2020, 1, 1), day(2020, 1, 2)}, {2.0, 4.0}};
  CHECK(tvc::apply_transform(s, tvc::Transform::Level).returns == s.values);
  CHECK(tvc::apply_transform(s, tvc::Transform::LogLevel).returns[1] == Approx(std::log(4.0)));
  CHECK(tvc::apply_transform(s, tvc::Transform::LogReturn).size() == 1);
  CHECK(tvc::parse_transform("log-level") == tvc::Transform::LogLevel);
  CHECK_THROWS(tvc::parse_transform("diff"));
}

TEST_CASE("align examples") {
  const std::vector<Date> d{day(2020, 1, 1), day(2020, 1, 2), day(2020, 1, 3)};
  auto a = series(d), b = series(d);
  auto same = tvc::align(a, b);
  CHECK(same.dates == d);
  CHECK(same.first == a.returns);

  auto longer = series({day(2019, 12, 31), d[0], d[1], d[2]});
  auto dropped = tvc::align(longer, b);
  CHECK(dropped.dates == d);
  CHECK(dropped.first == std::vector<double>{1.0, 2.0, 3.0});

  CHECK_THROWS(tvc::align(series({day(2020, 1, 1)}), series({day(2021, 1, 1)})));
}

TEST_CASE("align equals brute-force set intersection") {
  std::vector<Date> da, db;
  auto start = std::chrono::sys_days(day(2015, 3, 1));
  const auto ua = testutil::uniforms(400, 11), ub = testutil::uniforms(400, 12);
  for (int i = 0; i < 400; ++i) {
    if (ua[static_cast<std::size_t>(i)] < 0.7) da.emplace_back(start + std::chrono::days(i));
    if (ub[static_cast<std::size_t>(i)] < 0.6) db.emplace_back(start + std::chrono::days(i));
  }
  const auto a = series(da), b = series(db);
  const auto out = tvc::align(a, b);
  std::vector<Date> expected;
  for (const auto& x : da) {
    if (std::find(db.begin(), db.end(), x) != db.end()) expected.push_back(x);
  }
  CHECK(out.dates == expected);
  for (std::size_t i = 0; i < out.dates.size(); ++i) {
    const auto ia = std::find(da.begin(), da.end(), out.dates[i]) - da.begin();
    const auto ib = std::find(db.begin(), db.end(), out.dates[i]) - db.begin();
    CHECK(out.first[i] == a.returns[static_cast<std::size_t>(ia)]);
    CHECK(out.second[i] == b.returns[static_cast<std::size_t>(ib)]);
  }
  // idempotent and symmetric in the retained dates
  const auto again = tvc::align({out.dates, out.first}, {out.dates, out.second});
  CHECK(again.dates == out.dates);
  CHECK(tvc::align(b, a).dates == out.dates);
}
