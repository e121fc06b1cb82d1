#include <catch2/catch_amalgamated.hpp>

#include <algorithm>

#include "dephase/analytic.hpp"
#include "dephase/channels.hpp"
#include "dephase/states.hpp"
#include "support.hpp"

using namespace dephase;
using Catch::Approx;

TEST_CASE("state construction", "[states]") {
  const double r = 1.0 / std::sqrt(2.0);

  SECTION("fragile places a, b, d on |00>, |01>, |11>") {
    const auto rho = projector(StateSpec::fragile(r, 0.0, r));
    CHECK(rho(0, 0).real() == Approx(0.5));
    CHECK(rho(0, 3).real() == Approx(0.5));
    CHECK(std::abs(rho(1, 1)) == 0.0);
    CHECK(std::abs(rho(2, 2)) == 0.0);
  }

  SECTION("rho_ij = psi_i conj(psi_j)") {
    const auto rho = projector(StateSpec::robust(Complex{0.0, 0.6}, 0.8, 0.0));
    CHECK(rho(0, 1) == Complex{0.0, 0.48});
    CHECK(rho(1, 0) == Complex{0.0, -0.48});
  }

  SECTION("GHZ (8,8) entry is |a7|^2") {
    const auto rho = projector(StateSpec::ghz(0.6, 0.8));
    CHECK(rho(7, 7).real() == Approx(0.64));
    CHECK(rho(0, 0).real() == Approx(0.36));
  }

  SECTION("normalisation is checked, never repaired") {
    CHECK_THROWS_AS(projector(StateSpec::fragile(1.0, 1.0, 0.0)), Error);
    CHECK_NOTHROW(projector(StateSpec::fragile(1.0 + 1e-10, 0.0, 0.0)));
    CHECK_THROWS_AS(projector(StateSpec{StateClass::W, {1.0}}), Error);
  }

  SECTION("class names round trip") {
    for (const auto& ci : state_classes()) CHECK(parse_state_class(ci.name) == ci.cls);
    CHECK_THROWS_AS(parse_state_class("bell"), Error);
  }
}

TEST_CASE("W reductions", "[states]") {
  const double r = 1.0 / std::sqrt(3.0);
  const auto red = reduced_all(projector(StateSpec::w(r, r, r)));
  REQUIRE(red.size() == 6);
  const auto& ab = red.at(QubitSet{Qubit::A, Qubit::B});
  // rho_AB = 1/3 (|00><00| + |01><01| + |10><10| + |01><10| + |10><01|)
  CHECK(ab(0, 0).real() == Approx(1.0 / 3));
  CHECK(ab(1, 2).real() == Approx(1.0 / 3));
  CHECK(std::abs(ab(3, 3)) < 1e-16);
  CHECK(red.at(QubitSet{Qubit::C})(1, 1).real() == Approx(1.0 / 3));
}

TEST_CASE("scenario classification", "[analytic]") {
  for (auto id : {PaperScenario::Collective2, PaperScenario::D, PaperScenario::E, PaperScenario::F, PaperScenario::DDD, PaperScenario::DE}) {
    auto sc = make_scenario(id, {0.3, 1.7, 2.2});
    std::reverse(sc.channels.begin(), sc.channels.end());
    CHECK(classify(sc) == id);
    CHECK(parse_paper_scenario(to_string(id)) == id);
  }
  NoiseScenario other{3, {Channel::local(Qubit::B, 1.0)}};
  CHECK_FALSE(classify(other).has_value());
  CHECK_THROWS_AS(decay_table(StateClass::Generic2, PaperScenario::Collective2), Error);
  CHECK_THROWS_AS(decay_table(StateClass::Fragile, PaperScenario::D), Error);
}

TEST_CASE("closed forms agree with the operator sum", "[analytic][property]") {
  std::mt19937_64 rng(303);
  std::uniform_real_distribution<double> rate(0.1, 3.0), time(0.0, 3.0);
  for (const auto& [cls, id] : testing::closed_form_pairs()) {
    for (int draw = 0; draw < 10; ++draw) {
      const auto spec = testing::random_spec(cls, rng);
      const auto sc = make_scenario(id, {rate(rng), rate(rng), rate(rng)});
      const auto rho0 = projector(spec);
      for (int k = 0; k < 5; ++k) {
        const double t = time(rng);
        const auto exact = analytic_evolved(spec, sc, t);
        const auto kraus = evolve(rho0, sc, t);
        INFO(info(cls).name << " under " << to_string(id) << " at t=" << t);
        CHECK(frobenius_distance(exact, kraus) < 1e-12);
      }
    }
  }
}

TEST_CASE("fragile coherence decays as gamma^4 on the corner element", "[analytic]") {
  const auto spec = StateSpec::fragile(0.6, Complex{0.0, 0.48}, 0.64);
  const auto sc = make_scenario(PaperScenario::Collective2, {1.0, 1.3, 1.0});
  const double t = 0.7;
  const double g = std::exp(-1.3 * t / 2);
  const auto rho = evolve(projector(spec), sc, t);
  const auto rho0 = projector(spec);
  CHECK(std::abs(rho(0, 3) - rho0(0, 3) * std::pow(g, 4)) < 1e-15);
  CHECK(std::abs(rho(0, 1) - rho0(0, 1) * g) < 1e-15);
  CHECK(std::abs(rho(1, 3) - rho0(1, 3) * g) < 1e-15);
}

TEST_CASE("GHZ under DE with unequal rates", "[analytic]") {
  const double r = 1.0 / std::sqrt(2.0);
  const auto sc = make_scenario(PaperScenario::DE, {0.4, 1.9, 1.0});
  const double t = 1.1;
  const auto rho = evolve(projector(StateSpec::ghz(r, r)), sc, t);
  CHECK(rho(0, 7).real() == Approx(0.5 * std::exp(-0.4 * t / 2) * std::exp(-4 * 1.9 * t / 2)).epsilon(1e-13));
}
