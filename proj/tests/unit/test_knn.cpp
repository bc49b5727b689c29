#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "helpers.hpp"
#include "landscape_lab/errors.hpp"
#include "landscape_lab/knn.hpp"

using namespace testing;

namespace {

// Plain sort of (squared distance, index).
std::vector<std::size_t> sorted_neighbours(const std::vector<oracle::Point>& mems, const oracle::Point& q) {
  std::vector<std::pair<double, std::size_t>> d;
  for (std::size_t i = 0; i < mems.size(); ++i) d.push_back({oracle::sqdist(mems[i], q), i});
  std::sort(d.begin(), d.end());
  std::vector<std::size_t> out;
  for (auto& p : d) out.push_back(p.second);
  return out;
}

ll::Vector random_point(std::mt19937_64& rng, int dim) {
  std::uniform_real_distribution<double> u(-2.5, 2.5);
  ll::Vector x(dim);
  for (int k = 0; k < dim; ++k) x[k] = u(rng);
  return x;
}

double effective(const ll::SoftWeights& w) { return w.effective_count(); }

}  // namespace

TEST_CASE("hard kNN examples") {
  const auto m = memories_1d({0.0, 1.0}, {0, 1});
  CHECK(ll::knn_predict(m, vec({0.25}), 1).mean_label == 0.0);
  CHECK(ll::knn_predict(m, vec({0.25}), 1).argmax() == 0);
  CHECK(ll::knn_predict(m, vec({0.25}), 2).mean_label == doctest::Approx(0.5));
  // tie at 0.5 goes to the lower index
  CHECK(ll::nearest_k(m, vec({0.5}), 1) == std::vector<std::size_t>{0});
  CHECK_THROWS_AS(ll::knn_predict(m, vec({0.0}), 0), ll::InputError);
  CHECK_THROWS_AS(ll::knn_predict(m, vec({0.0}), 3), ll::InputError);
}

TEST_CASE("k = N gives the global label mean") {
  const auto m = memories_1d({0.0, 1.0, 2.0, 5.0}, {0, 1, 1, 1});
  const auto p = ll::knn_predict(m, vec({9.0}), 4);
  CHECK(p.mean_label == doctest::Approx(0.75));
  CHECK(p.distribution[0] == doctest::Approx(0.25));
  CHECK(p.distribution[1] == doctest::Approx(0.75));
}

TEST_CASE("hard kNN matches the sort oracle") {
  std::mt19937_64 rng(11);
  for (unsigned seed = 0; seed < 50; ++seed) {
    const auto m = random_memories(2, 10, seed);
    const auto pts = points_of(m);
    const ll::Vector q = random_point(rng, 2);
    const auto ref = sorted_neighbours(pts, point(q));
    for (std::size_t k = 1; k <= 10; ++k) {
      const auto got = ll::nearest_k(m, q, k);
      CHECK(got == std::vector<std::size_t>(ref.begin(), ref.begin() + static_cast<long>(k)));
      double mean = 0;
      for (std::size_t i = 0; i < k; ++i) mean += m.label(ref[i]);
      CHECK(ll::knn_predict(m, q, k).mean_label == doctest::Approx(mean / static_cast<double>(k)).epsilon(1e-14));
    }
  }
}

TEST_CASE("soft kNN scalar example") {
  const auto m = memories_1d({0.0, 1.0}, {0, 1});
  const auto s = ll::soft_knn_predict(m, vec({0.25}), 0.5);
  // exp(-0.0625/0.5) : exp(-0.5625/0.5) = e : 1
  const double w0 = std::exp(1.0) / (1.0 + std::exp(1.0));
  CHECK(s.weights.weights[0] == doctest::Approx(w0).epsilon(1e-12));
  CHECK(std::abs(s.weights.weights[0] - 0.7310) < 1e-3);
  CHECK(std::abs(s.prediction.mean_label - 0.2690) < 1e-3);
  CHECK(s.weights.tau == 0.5);
  CHECK_THROWS_AS(ll::soft_knn_predict(m, vec({0.25}), 0.0), ll::InputError);
}

TEST_CASE("soft kNN limits") {
  std::mt19937_64 rng(3);
  for (unsigned seed = 0; seed < 50; ++seed) {
    const auto m = random_memories(2, 10, seed + 100);
    const ll::Vector q = random_point(rng, 2);
    double global = 0;
    for (std::size_t i = 0; i < m.size(); ++i) global += m.label(i);
    global /= static_cast<double>(m.size());
    const auto wide = ll::soft_knn_predict(m, q, 1e8);
    CHECK(std::abs(wide.prediction.mean_label - global) < 1e-6);
    const auto narrow = ll::soft_knn_predict(m, q, 1e-8);
    const auto nn = ll::knn_predict(m, q, 1);
    CHECK(narrow.prediction.argmax() == nn.argmax());
    CHECK(std::abs(narrow.prediction.mean_label - nn.mean_label) < 1e-12);
    for (const auto* s : {&wide, &narrow}) {
      const auto& w = s->weights.weights;
      CHECK(std::abs(std::accumulate(w.begin(), w.end(), 0.0) - 1.0) < 1e-12);
      CHECK(*std::min_element(w.begin(), w.end()) >= 0.0);
    }
  }
}

TEST_CASE("soft argmax is unchanged by a constant added to every squared distance") {
  // an extra coordinate where every memory sits at 0 and the query at h
  std::mt19937_64 rng(5);
  for (unsigned seed = 0; seed < 30; ++seed) {
    const auto m = random_memories(2, 9, seed + 200);
    std::vector<ll::Vector> lifted;
    for (std::size_t i = 0; i < m.size(); ++i) lifted.push_back(vec({m.point(i)[0], m.point(i)[1], 0.0}));
    const ll::MemorySet m3(lifted, m.labels());
    const ll::Vector q = random_point(rng, 2);
    for (double tau : {0.1, 1.0, 10.0}) {
      const auto a = ll::soft_knn_predict(m, q, tau);
      const auto b = ll::soft_knn_predict(m3, vec({q[0], q[1], 1.7}), tau);
      CHECK(a.prediction.argmax() == b.prediction.argmax());
      for (std::size_t i = 0; i < m.size(); ++i)
        CHECK(a.weights.weights[i] == doctest::Approx(b.weights.weights[i]).epsilon(1e-9));
    }
  }
}

TEST_CASE("soft prediction approaches the 1-NN label as tau shrinks") {
  // one memory per class keeps the class mass a monotone function of tau
  std::mt19937_64 rng(8);
  for (int t = 0; t < 50; ++t) {
    const ll::MemorySet m({random_point(rng, 2), random_point(rng, 2)}, {0, 1});
    const ll::Vector q = random_point(rng, 2);
    const double nn = ll::knn_predict(m, q, 1).mean_label;
    double prev = INFINITY;
    for (double tau = 100.0; tau > 1e-4; tau *= 0.5) {
      const double gap = std::abs(ll::soft_knn_predict(m, q, tau).prediction.mean_label - nn);
      CHECK(gap <= prev + 1e-15);
      prev = gap;
    }
  }
}

TEST_CASE("attendance profile examples") {
  const ll::FlowConfig cfg;
  SUBCASE("single memory") {
    const auto w = ll::attendance_profile(ll::EnergyLandscape(memories_1d({0.4}), 2.0), vec({3.0}), cfg);
    REQUIRE(w.weights.size() == 1);
    CHECK(w.weights[0] == 1.0);
    CHECK(effective(w) == doctest::Approx(1.0));
  }
  SUBCASE("merged minimum attends to both") {
    const auto crit = oracle::critical_points_1d({-1.0, 1.0}, 0.5);
    REQUIRE(crit.minima.size() == 1);
    const auto ref = oracle::weights({{-1.0}, {1.0}}, 0.5, {crit.minima[0]});
    const auto w = ll::attendance_profile(ll::EnergyLandscape(memories_1d({-1.0, 1.0}), 0.5), vec({0.3}), cfg);
    CHECK(w.weights[0] == doctest::Approx(ref[0]).epsilon(1e-6));
    CHECK(std::abs(w.weights[0] - 0.5) < 1e-6);
    CHECK(effective(w) == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(w.tau == doctest::Approx(4.0));
  }
  SUBCASE("sharp basin attends to one") {
    const auto crit = oracle::critical_points_1d({-1.0, 1.0}, 8.0);
    REQUIRE(crit.minima.size() == 2);
    const auto w = ll::attendance_profile(ll::EnergyLandscape(memories_1d({-1.0, 1.0}), 8.0), vec({0.3}), cfg);
    CHECK(w.weights[1] > 0.99);
    CHECK(effective(w) < 1.01);
    const auto ref = oracle::weights({{-1.0}, {1.0}}, 8.0, {crit.minima[1]});
    CHECK(w.weights[1] == doctest::Approx(ref[1]).epsilon(1e-6));
  }
}

TEST_CASE("attendance grows as beta decreases") {
  std::mt19937_64 rng(21);
  const ll::FlowConfig cfg;
  int monotone = 0;
  for (unsigned seed = 0; seed < 20; ++seed) {
    const auto m = random_memories(2, 10, seed + 300);
    const ll::Vector q = random_point(rng, 2);
    double prev = 0.0;
    bool ok = true;
    for (double beta : {50.0, 20.0, 10.0, 5.0, 2.0, 1.0, 0.5, 0.2, 0.1}) {
      const double e = effective(ll::attendance_profile(ll::EnergyLandscape(m, beta), q, cfg));
      if (e < prev - 1e-6) ok = false;
      prev = e;
    }
    monotone += ok;
  }
  CHECK(monotone == 20);
}

TEST_CASE("effective count bounds") {
  ll::SoftWeights w;
  w.weights = {0.25, 0.25, 0.25, 0.25};
  CHECK(w.effective_count() == doctest::Approx(4.0));
  w.weights = {1.0, 0.0, 0.0};
  CHECK(w.effective_count() == doctest::Approx(1.0));
}
