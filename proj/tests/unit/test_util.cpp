#include <doctest.h>

#include <atomic>
#include <cmath>
#include <filesystem>
#include <limits>
#include <random>
#include <set>
#include <stdexcept>

#include "landscape_lab/errors.hpp"
#include "landscape_lab/parallel.hpp"
#include "landscape_lab/random.hpp"
#include "landscape_lab/stats.hpp"
#include "landscape_lab/table.hpp"

namespace ll = landscape_lab;

TEST_CASE("average ranks share ties") {
  const std::vector<double> v = {3.0, 1.0, 3.0, 2.0};
  CHECK(ll::average_ranks(v) == std::vector<double>{3.5, 1.0, 3.5, 2.0});
}

TEST_CASE("spearman") {
  const std::vector<double> x = {0, 1, 2, 3, 4};
  CHECK(ll::spearman(x, std::vector<double>{1, 5, 6, 9, 100}) == doctest::Approx(1.0));
  CHECK(ll::spearman(x, std::vector<double>{5, 4, 3, 2, 1}) == doctest::Approx(-1.0));
  CHECK(std::isnan(ll::spearman(x, std::vector<double>{1, 1, 1, 1, 1})));
  // 1 - 6 sum d^2 / (n (n^2 - 1)) when there are no ties
  const std::vector<double> y = {2, 1, 4, 3, 5};
  CHECK(ll::spearman(x, y) == doctest::Approx(1.0 - 6.0 * 4 / (5 * 24)));
  CHECK_THROWS_AS(ll::spearman(x, std::vector<double>{1, 2}), ll::InputError);
}

TEST_CASE("binomial stderr") {
  CHECK(ll::binomial_stderr(0.5, 100) == doctest::Approx(0.05));
  CHECK(ll::binomial_stderr(1.0, 100) == 0.0);
  CHECK_THROWS_AS(ll::binomial_stderr(0.5, 0), ll::InputError);
}

TEST_CASE("format_double round trips") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double v = u(rng) * std::pow(10.0, static_cast<int>(rng() % 40) - 20);
    CHECK(std::stod(ll::format_double(v)) == v);
  }
  CHECK(ll::format_double(0.5) == "0.5");
  CHECK(ll::format_double(729.0) == "729");
  CHECK(ll::format_double(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(ll::format_double(-std::numeric_limits<double>::infinity()) == "-inf");
  CHECK(ll::format_double(std::nan("")) == "nan");
}

TEST_CASE("CSV write and read") {
  ll::Table t{"t", {"a", "b", "c"}, {}};
  t.add_row({std::int64_t{1}, 0.25, std::string("x")});
  t.add_row({std::int64_t{-2}, 1e-300, std::string("y")});
  CHECK_THROWS_AS(t.add_row({std::int64_t{1}}), ll::InputError);
  CHECK(t.to_csv() == "a,b,c\n1,0.25,x\n-2,1e-300,y\n");
  const auto dir = std::filesystem::temp_directory_path() / "landscape_lab_util_test";
  std::filesystem::remove_all(dir);
  const auto path = ll::write_table(t, dir, ll::TableFormat::kCsv);
  const auto data = ll::read_csv(path);
  CHECK(data.header == std::vector<std::string>{"a", "b", "c"});
  REQUIRE(data.rows.size() == 2);
  CHECK(std::stod(data.rows[1][data.column("b")]) == 1e-300);
  CHECK_THROWS_AS(data.column("d"), ll::InputError);
  CHECK_THROWS_AS(ll::read_csv(dir / "missing.csv"), ll::InputError);
  std::filesystem::remove_all(dir);
  CHECK(ll::split_csv_line("1,,3\r") == std::vector<std::string>{"1", "", "3"});
}

TEST_CASE("JSON tables keep column order and non-finite values") {
  ll::Table t{"t", {"z", "a"}, {}};
  t.add_row({std::int64_t{3}, std::numeric_limits<double>::infinity()});
  const auto json = t.to_json();
  CHECK(json.find("\"z\"") < json.find("\"a\""));
  CHECK(json.find("\"inf\"") != std::string::npos);
}

TEST_CASE("derived seeds are distinct across kinds and indices") {
  std::set<std::uint64_t> seen;
  for (auto kind : {ll::StreamKind::kQuery, ll::StreamKind::kProbe, ll::StreamKind::kTrial})
    for (std::uint64_t i = 0; i < 1000; ++i) seen.insert(ll::derive_seed(42, kind, i));
  CHECK(seen.size() == 3000);
  CHECK(ll::derive_seed(1, ll::StreamKind::kQuery, 5) == ll::derive_seed(1, ll::StreamKind::kQuery, 5));
  CHECK(ll::derive_seed(1, ll::StreamKind::kQuery, 5) != ll::derive_seed(2, ll::StreamKind::kQuery, 5));
}

TEST_CASE("splitmix uniform draws look uniform") {
  ll::SplitMix64 rng(7);
  double s = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    s += u;
  }
  CHECK(std::abs(s / n - 0.5) < 3 * std::sqrt(1.0 / 12 / n));
}

TEST_CASE("parallel_for visits each index once and rethrows") {
  for (int workers : {1, 3, 8}) {
    std::vector<int> hits(1001, 0);
    ll::parallel_for(hits.size(), workers, [&](std::size_t i) { hits[i] += 1; });
    for (int h : hits) CHECK(h == 1);
  }
  CHECK_THROWS_AS(ll::parallel_for(10, 4, [](std::size_t i) { if (i == 7) throw std::runtime_error("x"); }),
                  std::runtime_error);
  ll::parallel_for(0, 4, [](std::size_t) { FAIL("no work expected"); });
}
