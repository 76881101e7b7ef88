#include <random>

#include "doctest.h"
#include "shadowlab/shadowing.hpp"
#include "shadowlab/systems.hpp"

using namespace shadowlab;

namespace {

TreeSystem identity_system() {
  auto sys = make_interval_system(identity_interval_map(), true, true, {}, {});
  sys.name = "identity";
  return sys;
}

}  // namespace

TEST_CASE("pseudo-orbit generation") {
  auto square = make_square_system();
  std::mt19937_64 rng(1);
  SUBCASE("delta = 0 gives the true orbit") {
    auto po = generate_pseudo_orbit(square, Location{0, 0.9}, 0.0, 50, rng);
    CHECK(po.max_jump == doctest::Approx(0.0));
    auto x = Location{0, 0.9};
    for (int k = 0; k <= 50; ++k) {
      CHECK(square.distance(po.at_time(k), x) == doctest::Approx(0.0));
      x = square.apply(x);
    }
  }
  SUBCASE("drift mode on the identity map walks by delta/2") {
    auto id = identity_system();
    auto po = generate_pseudo_orbit(id, Location{0, 0.1}, 0.01, 100, rng,
                                    PerturbationMode::Drift);
    for (int k = 0; k <= 100; ++k)
      CHECK(po.at_time(k).t ==
            doctest::Approx(std::min(0.1 + 0.005 * k, 1.0)));
  }
  SUBCASE("random mode validates the jump bound") {
    auto po = generate_pseudo_orbit(square, Location{0, 0.9}, 0.01, 100, rng);
    CHECK(po.max_jump < 0.01);
    CHECK(po.size() == 101);
  }
  SUBCASE("two-sided windows for homeomorphisms") {
    auto po =
        generate_pseudo_orbit(square, Location{0, 0.5}, 0.01, 20, rng,
                              PerturbationMode::Ball, 20);
    CHECK(po.first_time() == -20);
    CHECK(po.last_time() == 20);
    CHECK(po.max_jump < 0.01);
  }
}

TEST_CASE("verify_shadow") {
  auto square = make_square_system();
  std::mt19937_64 rng(2);
  SUBCASE("true orbit shadowed by its start with distance zero") {
    auto po = generate_pseudo_orbit(square, Location{0, 0.7}, 0.0, 60, rng);
    auto rep = verify_shadow(square, Location{0, 0.7}, po, 0.05);
    CHECK(rep.shadowed);
    CHECK(rep.max_step_distance == doctest::Approx(0.0));
  }
  SUBCASE("constant pseudo-orbit at a fixed point") {
    PseudoOrbit<Location> po;
    po.points.assign(30, Location{0, 0.0});
    po.delta = 0.001;
    auto rep = verify_shadow(square, Location{0, 0.0}, po, 0.01);
    CHECK(rep.shadowed);
  }
  SUBCASE("identity drift is not shadowed at eps = 0.1") {
    auto id = identity_system();
    std::mt19937_64 r2(3);
    auto po = generate_pseudo_orbit(id, Location{0, 0.25}, 0.01, 100, r2,
                                    PerturbationMode::Drift);
    // max_k |x_k - y| >= 0.25 for every y.
    for (double y : {0.0, 0.25, 0.5, 0.75, 1.0}) {
      auto rep = verify_shadow(id, Location{0, y}, po, 0.1);
      CHECK(!rep.shadowed);
      CHECK(rep.max_step_distance >= 0.25 - 1e-12);
    }
  }
  SUBCASE("monotone in eps") {
    auto po = generate_pseudo_orbit(square, Location{0, 0.8}, 0.002, 80, rng);
    auto tight = verify_shadow(square, Location{0, 0.8}, po, 1e-4);
    auto loose = verify_shadow(square, Location{0, 0.8}, po, 0.05);
    CHECK(tight.max_step_distance == doctest::Approx(loose.max_step_distance));
    if (tight.shadowed) CHECK(loose.shadowed);
  }
}

TEST_CASE("search_shadow_point") {
  auto square = make_square_system();
  auto net = square.net(0.025);
  std::mt19937_64 rng(4);
  SUBCASE("true orbit finds a witness near the start") {
    auto po = generate_pseudo_orbit(square, Location{0, 0.9}, 0.0, 100, rng);
    auto [w, rep] = search_shadow_point(square, po, 0.05, net);
    REQUIRE(w.has_value());
    CHECK(rep.shadowed);
  }
  SUBCASE("constant orbit at p: witness within mesh of p") {
    PseudoOrbit<Location> po;
    po.points.assign(40, Location{0, 0.0});
    auto [w, rep] = search_shadow_point(square, po, 0.05, net);
    REQUIRE(w.has_value());
    CHECK(square.distance(*w, Location{0, 0.0}) <= 0.025 + 1e-12);
  }
  SUBCASE("identity drift: exhaustive failure") {
    auto id = identity_system();
    auto po = generate_pseudo_orbit(id, Location{0, 0.25}, 0.01, 100, rng,
                                    PerturbationMode::Drift);
    auto [w, rep] = search_shadow_point(id, po, 0.1, id.net(0.01));
    CHECK(!w.has_value());
    CHECK(rep.verdict == ShadowVerdict::NotShadowedInFamily);
  }
  SUBCASE("mesh contract") {
    auto po = generate_pseudo_orbit(square, Location{0, 0.9}, 0.0, 10, rng);
    CHECK_THROWS_AS(search_shadow_point(square, po, 0.05, square.net(0.5)),
                    std::invalid_argument);
  }
}

TEST_CASE("constructive shadower on the square system") {
  auto square = make_square_system();
  SimpleShadower shadower(square, 0.05);
  const auto& prm = shadower.params();
  CHECK(prm.delta > 0.0);
  CHECK(prm.eta > 0.0);
  CHECK(prm.escape_time > 0);
  INFO("delta threshold = ", prm.delta, ", N = ", prm.escape_time);

  std::mt19937_64 rng(5);
  SUBCASE("pseudo-orbit inside U_p returns p") {
    auto po = generate_pseudo_orbit(square, Location{0, 1e-4},
                                    prm.delta * 0.9, 50, rng);
    auto y = shadower.shadow_point(po);
    CHECK(square.distance(y, Location{0, 0.0}) == doctest::Approx(0.0));
  }
  SUBCASE("pseudo-orbit inside U_q returns q") {
    PseudoOrbit<Location> po;
    po.points.assign(50, Location{0, 1.0});
    po.delta = prm.delta * 0.5;
    auto y = shadower.shadow_point(po);
    CHECK(square.distance(y, Location{0, 1.0}) == doctest::Approx(0.0));
  }
  SUBCASE("mixed pseudo-orbits are shadowed, 500 random runs") {
    int pass = 0;
    for (int t = 0; t < 500; ++t) {
      auto x0 = square.sample_uniform(rng);
      auto po =
          generate_pseudo_orbit(square, x0, prm.delta * 0.95, 120, rng);
      auto y = shadower.shadow_point(po);
      auto rep = verify_shadow(square, y, po, 0.05);
      if (rep.shadowed) ++pass;
    }
    CHECK(pass == 500);
  }
  SUBCASE("delta above the threshold is rejected") {
    auto po = generate_pseudo_orbit(square, Location{0, 0.5},
                                    std::max(0.02, 3 * prm.delta), 50, rng);
    CHECK_THROWS_AS(shadower.shadow_point(po), std::invalid_argument);
  }
  SUBCASE("oracle cross-validation") {
    auto net = square.net(0.025);
    for (int t = 0; t < 50; ++t) {
      auto x0 = square.sample_uniform(rng);
      auto po = generate_pseudo_orbit(square, x0, prm.delta * 0.95, 80, rng);
      auto y = shadower.shadow_point(po);
      CHECK(verify_shadow(square, y, po, 0.05).shadowed);
      auto [w, rep] = search_shadow_point(square, po, 0.05, net, {y});
      CHECK(w.has_value());
    }
  }
}

TEST_CASE("constructive shadower on multi-end systems") {
  std::mt19937_64 rng(6);
  for (auto sys : {make_three_fixed_system(), make_default_star_system(3),
                   make_default_bridge_system()}) {
    CAPTURE(sys.name);
    SimpleShadower shadower(sys, 0.05, 1.5e-3);
    CHECK(shadower.delta_threshold() > 0.0);
    int pass = 0;
    const int runs = 120;
    for (int t = 0; t < runs; ++t) {
      auto x0 = sys.sample_uniform(rng);
      auto po = generate_pseudo_orbit(sys, x0, shadower.delta_threshold() * 0.95,
                                      100, rng);
      auto y = shadower.shadow_point(po);
      if (verify_shadow(sys, y, po, 0.05).shadowed) ++pass;
    }
    CHECK(pass == runs);
  }
}

TEST_CASE("estimate_modulus") {
  SUBCASE("identity with drift generator fails at every delta") {
    // Needs N >= 2 eps / delta + 1 so that the drift outruns shadowing.
    auto id = identity_system();
    auto rep = estimate_modulus(id, 0.1, 10, {1e-3, 1e-2}, 450, 77,
                                PerturbationMode::Drift);
    CHECK(!rep.best_delta.has_value());
    for (const auto& row : rep.table) CHECK(row.shadowed < row.trials);
  }
  SUBCASE("square map admits a positive modulus") {
    auto square = make_square_system();
    auto rep = estimate_modulus(square, 0.05, 60, {1e-4, 1e-3}, 200, 78);
    REQUIRE(rep.best_delta.has_value());
    CHECK(*rep.best_delta >= 1e-4);
  }
  SUBCASE("delta = 0 rows pass trivially") {
    auto square = make_square_system();
    std::mt19937_64 rng(9);
    for (int t = 0; t < 20; ++t) {
      auto po = generate_pseudo_orbit(square, square.sample_uniform(rng), 0.0,
                                      50, rng);
      auto rep = verify_shadow(square, po.points.front(), po, 1e-9);
      CHECK(rep.shadowed);
      CHECK(rep.max_step_distance == doctest::Approx(0.0));
    }
  }
}
