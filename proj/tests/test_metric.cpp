#include <random>

#include "doctest.h"
#include "shadowlab/space.hpp"
#include "shadowlab/systems.hpp"

using namespace shadowlab;

namespace {

std::vector<Location> dense_interval_sample(double a, double b, double mesh) {
  std::vector<Location> pts;
  int steps = std::max(1, static_cast<int>(std::ceil((b - a) / mesh)));
  for (int i = 0; i <= steps; ++i)
    pts.push_back(Location{0, a + (b - a) * i / steps});
  return pts;
}

}  // namespace

TEST_CASE("bridge distance follows the case formula") {
  auto bridge = make_default_bridge_system();
  const auto& tree = bridge.complex();
  // a on arm 1 of the first star at distance 0.3 from its center, b on the
  // second star at 0.2: distance = 0.3 + 0.2 + 1.
  Location a{0, 0.3};
  Location b{3, 0.2};
  CHECK(tree.geodesic(a, b) == doctest::Approx(1.5));
  CHECK(tree.geodesic(a, a) == doctest::Approx(0.0));
  // tip to tip: 1 + 1 + 1
  CHECK(tree.geodesic(Location{0, 1.0}, Location{4, 1.0}) ==
        doctest::Approx(3.0));
}

TEST_CASE("space diameters are finite and positive") {
  CHECK(make_interval_space()->diameter() == doctest::Approx(1.0));
  CHECK(make_star_space({1.0, 1.0})->diameter() == doctest::Approx(2.0));
  auto omega = make_omega_star_space(16);
  CHECK(omega->diameter() == doctest::Approx(1.5));  // arm1 + arm2
  CHECK(make_default_bridge_system().space->diameter() == doctest::Approx(3.0));
}

TEST_CASE("omega star truncation: arm n has length 1/n") {
  auto omega = make_omega_star_space(16);
  const auto& tree = omega->complex();
  CHECK(tree.edge_count() == 16);
  for (int n = 1; n <= 16; ++n)
    CHECK(tree.edge(n - 1).length == doctest::Approx(1.0 / n));
  // Discarded tail diameter bound: next arm would have length 1/17 < 1/16.
  CHECK(1.0 / 17 < 1.0 / 16);
}

TEST_CASE("epsilon nets are dense with vertices included") {
  SUBCASE("interval, eps = 0.25") {
    auto net = make_interval_space()->epsilon_net(0.25);
    CHECK(net.points.size() <= 5);
    bool has0 = false, has1 = false;
    for (auto& p : net.points) {
      if (p.t == 0.0 && p.edge == 0) has0 = true;
      if (p.t == 1.0 && p.edge == 0) has1 = true;
    }
    CHECK(has0);
    CHECK(has1);
  }
  SUBCASE("3-star, eps = 0.5: covers every arm, contains the center") {
    auto star = make_star_space({1.0, 1.0, 1.0});
    auto net = star->epsilon_net(0.5);
    bool center = false;
    for (auto& p : net.points)
      if (star->complex().geodesic(p, Location{0, 0.0}) == 0.0) center = true;
    CHECK(center);
    // Density verified against a much finer grid.
    auto fine = star->epsilon_net(0.01);
    for (auto& x : fine.points) {
      double best = 1e9;
      for (auto& p : net.points)
        best = std::min(best, star->complex().geodesic(x, p));
      CHECK(best <= 0.5 + 1e-9);
    }
  }
  SUBCASE("invalid eps") {
    CHECK_THROWS_AS(make_interval_space()->epsilon_net(0.0), std::domain_error);
  }
}

TEST_CASE("diameter of finite point sets") {
  auto interval = make_interval_space();
  auto dist = [&](Location a, Location b) { return interval->distance(a, b); };
  std::vector<Location> ends{Location{0, 0.0}, Location{0, 1.0}};
  CHECK(set_diameter(dist, ends) == doctest::Approx(1.0));
  std::vector<Location> one{Location{0, 0.3}};
  CHECK(set_diameter(dist, one) == doctest::Approx(0.0));
  CHECK_THROWS_AS(set_diameter(dist, std::vector<Location>{}),
                  std::domain_error);
}

TEST_CASE("hausdorff distance examples and axioms") {
  auto interval = make_interval_space();
  auto dist = [&](Location a, Location b) { return interval->distance(a, b); };

  SUBCASE("named examples") {
    auto A = dense_interval_sample(0.0, 0.5, 0.01);
    CHECK(hausdorff_distance(dist, A, A) == doctest::Approx(0.0));
    std::vector<Location> zero{Location{0, 0.0}}, one{Location{0, 1.0}};
    CHECK(hausdorff_distance(dist, zero, one) == doctest::Approx(1.0));
    auto B = dense_interval_sample(0.25, 0.75, 0.01);
    CHECK(hausdorff_distance(dist, A, B) == doctest::Approx(0.25).epsilon(0.1));
    CHECK_THROWS_AS(hausdorff_distance(dist, A, std::vector<Location>{}),
                    std::domain_error);
  }

  SUBCASE("metric axioms on random sample pairs + independent oracle") {
    std::mt19937_64 rng(4242);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto random_set = [&](int n) {
      std::vector<Location> pts;
      for (int i = 0; i < n; ++i) pts.push_back(Location{0, u(rng)});
      return pts;
    };
    // Naive double-loop oracle without early exits.
    auto oracle = [&](const std::vector<Location>& A,
                      const std::vector<Location>& B) {
      double supA = 0.0, supB = 0.0;
      for (auto& a : A) {
        double m = 1e18;
        for (auto& b : B) m = std::min(m, dist(a, b));
        supA = std::max(supA, m);
      }
      for (auto& b : B) {
        double m = 1e18;
        for (auto& a : A) m = std::min(m, dist(a, b));
        supB = std::max(supB, m);
      }
      return std::max(supA, supB);
    };
    for (int i = 0; i < 400; ++i) {
      auto A = random_set(1 + i % 7), B = random_set(1 + (i / 2) % 9),
           C = random_set(1 + (i / 3) % 5);
      double ab = hausdorff_distance(dist, A, B);
      CHECK(ab == doctest::Approx(oracle(A, B)).epsilon(1e-12));
      CHECK(ab == doctest::Approx(hausdorff_distance(dist, B, A)));
      CHECK(hausdorff_distance(dist, A, C) <=
            ab + hausdorff_distance(dist, B, C) + 1e-12);
      // d_H(A, A u B) <= d_H(A, B)
      auto AB = A;
      AB.insert(AB.end(), B.begin(), B.end());
      CHECK(hausdorff_distance(dist, A, AB) <= ab + 1e-12);
      // diameter monotone under inclusion
      CHECK(set_diameter(dist, A) <= set_diameter(dist, AB) + 1e-12);
    }
  }
}

TEST_CASE("sampled diameter of a short segment within budget") {
  // Uniform 0.01-grid on a length-0.04 piece of the interval.
  auto interval = make_interval_space();
  auto dist = [&](Location a, Location b) { return interval->distance(a, b); };
  auto seg = dense_interval_sample(0.30, 0.34, 0.01);
  CHECK(std::abs(set_diameter(dist, seg) - 0.04) <= 0.02);
}
