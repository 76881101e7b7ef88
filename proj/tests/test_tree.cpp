#include <functional>
#include <random>
#include <set>

#include "doctest.h"
#include "shadowlab/space.hpp"
#include "shadowlab/systems.hpp"
#include "shadowlab/tree.hpp"
#include "shadowlab/tree_map.hpp"

using namespace shadowlab;

namespace {

TreeComplex path_graph_012() {
  return TreeComplex(3, {{0, 1, 1.0}, {1, 2, 1.0}});
}

Location random_location(const TreeComplex& tree, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> edge(0, tree.edge_count() - 1);
  std::uniform_real_distribution<double> t(0.0, 1.0);
  return Location{edge(rng), t(rng)};
}

}  // namespace

TEST_CASE("tree construction validates tree-ness") {
  CHECK_THROWS_AS(TreeComplex(3, {{0, 1, 1.0}}), std::domain_error);
  CHECK_THROWS_AS(TreeComplex(2, {{0, 1, 0.0}}), std::domain_error);
  CHECK_THROWS_AS(TreeComplex(4, {{0, 1, 1.0}, {0, 1, 1.0}, {2, 3, 1.0}}),
                  std::domain_error);
  CHECK_NOTHROW(path_graph_012());
}

TEST_CASE("geodesic distance basics") {
  auto tree = path_graph_012();
  Location a{0, 0.0}, c{1, 1.0};
  CHECK(tree.geodesic(a, a) == doctest::Approx(0.0));
  CHECK(tree.geodesic(a, c) == doctest::Approx(2.0));

  auto star = make_star_space({1.0, 1.0, 1.0});
  Location p1{0, 0.5}, p2{1, 0.5};
  CHECK(star->distance(p1, p2) == doctest::Approx(1.0));
  // tip-to-tip through the center
  CHECK(star->distance(Location{0, 1.0}, Location{1, 1.0}) ==
        doctest::Approx(2.0));
  CHECK_THROWS_AS(star->distance(Location{7, 0.5}, p1), std::domain_error);
}

TEST_CASE("geodesic metric axioms and four-point condition") {
  auto star = make_star_space({1.0, 0.5, 0.7, 0.3});
  const auto& tree = star->complex();
  std::mt19937_64 rng(20240901);
  for (int i = 0; i < 4000; ++i) {
    auto a = random_location(tree, rng);
    auto b = random_location(tree, rng);
    auto c = random_location(tree, rng);
    auto d = random_location(tree, rng);
    double ab = tree.geodesic(a, b), ba = tree.geodesic(b, a);
    CHECK(ab == doctest::Approx(ba).epsilon(1e-12));
    CHECK(ab >= 0.0);
    CHECK(tree.geodesic(a, c) <= ab + tree.geodesic(b, c) + 1e-12);
    // Trees are 0-hyperbolic.
    double s1 = ab + tree.geodesic(c, d);
    double s2 = tree.geodesic(a, c) + tree.geodesic(b, d);
    double s3 = tree.geodesic(a, d) + tree.geodesic(b, c);
    CHECK(s1 <= std::max(s2, s3) + 1e-9);
  }
}

TEST_CASE("point order") {
  auto star = make_star_space({1.0, 1.0, 1.0, 1.0, 1.0});
  const auto& tree = star->complex();
  CHECK(tree.point_order(Location{0, 0.37}) == 2);
  CHECK(tree.point_order(Location{0, 0.0}) == 5);  // center of st_5
  CHECK(tree.point_order(Location{2, 1.0}) == 1);  // tip

  // Component counting oracle: delete the point on a fine grid and flood.
  auto net = star->epsilon_net(0.01);
  for (Location p : {Location{0, 0.0}, Location{1, 0.4}, Location{3, 1.0}}) {
    std::vector<Location> rest;
    for (const auto& x : net.points)
      if (tree.geodesic(x, p) > 0.006) rest.push_back(x);
    // Union-find with adjacency at ~2 grid steps.
    std::vector<int> comp(rest.size());
    for (size_t i = 0; i < comp.size(); ++i) comp[i] = static_cast<int>(i);
    std::function<int(int)> find = [&](int v) {
      while (comp[v] != v) v = comp[v] = comp[comp[v]];
      return v;
    };
    for (size_t i = 0; i < rest.size(); ++i)
      for (size_t j = i + 1; j < rest.size(); ++j)
        if (tree.geodesic(rest[i], rest[j]) <= 0.0125)
          comp[find(static_cast<int>(i))] = find(static_cast<int>(j));
    std::set<int> roots;
    for (size_t i = 0; i < rest.size(); ++i)
      roots.insert(find(static_cast<int>(i)));
    CHECK(static_cast<int>(roots.size()) == tree.point_order(p));
  }
}

TEST_CASE("subtree intersection and span") {
  auto interval = make_interval_space();
  const auto& itree = interval->complex();
  Subtree a({{0, 0.0, 0.6}});
  Subtree b({{0, 0.4, 1.0}});
  auto ab = a.intersect(itree, b);
  REQUIRE(ab.intervals().size() == 1);
  CHECK(ab.intervals()[0].t0 == doctest::Approx(0.4));
  CHECK(ab.intervals()[0].t1 == doctest::Approx(0.6));
  CHECK(a.intersect(itree, a) == a);

  auto star = make_star_space({1.0, 1.0, 1.0});
  const auto& tree = star->complex();
  Subtree arm12({{0, 0.0, 1.0}, {1, 0.0, 1.0}});
  Subtree arm23({{1, 0.0, 1.0}, {2, 0.0, 1.0}});
  auto mid = arm12.intersect(tree, arm23);
  CHECK(mid.connected(tree));
  // Equals arm 2 (including the center): brute-force membership check.
  auto net = star->epsilon_net(0.02);
  for (const auto& x : net.points) {
    bool in_both = arm12.contains(tree, x, 1e-9) && arm23.contains(tree, x, 1e-9);
    CHECK(in_both == mid.contains(tree, x, 1e-9));
  }

  // Spans.
  auto single = Subtree::span(tree, {Location{1, 0.3}});
  CHECK(single.length() == doctest::Approx(0.0));
  auto two_tips = Subtree::span(tree, {Location{0, 1.0}, Location{1, 1.0}});
  CHECK(two_tips.contains(tree, Location{0, 0.0}));
  CHECK(!two_tips.contains(tree, Location{2, 0.5}));
  auto all_tips = Subtree::span(
      tree, {Location{0, 1.0}, Location{1, 1.0}, Location{2, 1.0}});
  CHECK(all_tips == Subtree::whole(tree));
}

TEST_CASE("subtree intersection stays connected on random instances") {
  auto star = make_star_space({1.0, 0.8, 1.2, 0.5});
  const auto& tree = star->complex();
  std::mt19937_64 rng(7);
  for (int i = 0; i < 300; ++i) {
    auto a = Subtree::span(tree, {random_location(tree, rng),
                                  random_location(tree, rng),
                                  random_location(tree, rng)});
    auto b = Subtree::span(tree, {random_location(tree, rng),
                                  random_location(tree, rng)});
    auto c = a.intersect(tree, b);
    if (!c.empty()) CHECK(c.connected(tree));
  }
}

TEST_CASE("path balls are connected subtrees of the right extent") {
  auto star = make_star_space({1.0, 1.0, 1.0});
  const auto& tree = star->complex();
  auto ball = path_ball(tree, Location{0, 0.2}, 0.5);
  CHECK(ball.connected(tree));
  CHECK(ball.contains(tree, Location{0, 0.0}));
  CHECK(ball.contains(tree, Location{1, 0.3}));
  CHECK(!ball.contains(tree, Location{1, 0.4}));
  auto net = star->epsilon_net(0.01);
  for (const auto& x : net.points) {
    bool inside = tree.geodesic(Location{0, 0.2}, x) <= 0.5 + 1e-9;
    CHECK(ball.contains(tree, x, 1e-9) == inside);
  }
}

TEST_CASE("image and preimage of subtrees") {
  auto square = make_square_system();
  const auto& tree = square.complex();
  SUBCASE("identity") {
    TreeSystem id = make_interval_system(identity_interval_map(), true, true,
                                         {}, {});
    Subtree a({{0, 0.2, 0.5}});
    CHECK(id.subtree_image(a).approx_equal(a, 1e-12));
    CHECK(id.subtree_preimage(a).approx_equal(a, 1e-12));
  }
  SUBCASE("square endpoints") {
    Subtree a({{0, 0.5, 0.7}});
    auto img = square.subtree_image(a);
    REQUIRE(img.intervals().size() == 1);
    CHECK(img.intervals()[0].t0 == doctest::Approx(0.25));
    CHECK(img.intervals()[0].t1 == doctest::Approx(0.49));
    auto back = square.subtree_preimage(img);
    CHECK(back.approx_equal(a, 1e-12));
  }
  SUBCASE("image/preimage mutually consistent on random subtrees") {
    std::mt19937_64 rng(99);
    auto star = make_default_star_system(3);
    for (int i = 0; i < 200; ++i) {
      auto a = Subtree::span(star.complex(),
                             {random_location(star.complex(), rng),
                              random_location(star.complex(), rng)});
      auto round = star.subtree_preimage(star.subtree_image(a));
      CHECK(round.approx_equal(a, 1e-9));
    }
  }
  SUBCASE("sampling fallback is used for non-monotone maps") {
    TreeSystem tent = make_interval_system(tent_map(), false, false, {}, {});
    bool sampled = false;
    Subtree a({{0, 0.0, 1.0}});
    auto img = image_subtree(tree, *tent.map, a, &sampled);
    CHECK(sampled);
    CHECK(img.contains(tree, Location{0, 1.0}));
    CHECK_THROWS_AS(tent.subtree_preimage(a), std::invalid_argument);
  }
}

TEST_CASE("monotonicity verifier") {
  CHECK(verify_monotone(make_square_system(), 40, 11).passed);
  TreeSystem id = make_interval_system(identity_interval_map(), true, true,
                                       {}, {});
  CHECK(verify_monotone(id, 40, 12).passed);
  TreeSystem tent = make_interval_system(tent_map(), false, false, {}, {});
  auto rep = verify_monotone(tent, 60, 13);
  CHECK(!rep.passed);
  CHECK(rep.failures > 0);
}
