#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "fermi/model.hpp"
#include "fermi/model_io.hpp"

using namespace fermi;

TEST_CASE("hopping matrix entries") {
  const CMatrix T = hopping_matrix({1, 4}, {1.0, 0.0, 0.0, 1.0});
  CHECK(T(mode_index(0, Up), mode_index(1, Up)) == cplx(-1.0));
  CHECK(T(mode_index(0, Up), mode_index(3, Up)) == cplx(-1.0));
  for (int x = 0; x < 4; ++x)
    for (int y = 0; y < 4; ++y) CHECK(T(mode_index(x, Up), mode_index(y, Down)) == cplx(0.0));
  CHECK((T - T.adjoint()).norm() == 0.0);

  const LatticeSpec sq{2, 4};
  const CMatrix T2 = hopping_matrix(sq, {0.0, 0.5, 0.0, 1.0});
  CHECK(T2(mode_index(0, Up), mode_index(site_index(sq, {1, 1}), Up)) == cplx(-0.5));
  CHECK_THROWS_AS(hopping_matrix({1, 4}, {0.0, 0.0, 0.2, 1.0}), std::invalid_argument);
  CHECK_NOTHROW(hopping_matrix({1, 4}, {0.0, 0.0, 0.2, 1.0}, true));
}

TEST_CASE("dispersion values") {
  const double pi = std::numbers::pi;
  CHECK(dispersion({0.0}, {1.0, 0.0, 0.0, 1.0}) == cplx(-2.0));
  CHECK(dispersion({pi, pi}, {1.0, 0.5, 0.2, 1.0}).real() == doctest::Approx(1.8));
  const cplx e = dispersion({0.0}, {1.0, 0.0, 0.0, 1.0}, {Shift{cplx(0, 0.3), 0}});
  CHECK(e.real() == doctest::Approx(-2 * std::cosh(0.3)));
  CHECK(std::abs(e.imag()) < 1e-15);
  CHECK_THROWS(dispersion({0.0}, {1.0, 0.0, 0.0, 1.0}, {Shift{cplx(0.1), 1}}));
}

TEST_CASE("dispersion is the Fourier symbol of T") {
  CHECK(check_fourier_consistency({1, 4}, {1.0, 0.0, 0.3, 1.0}) <= 1e-10);
  CHECK(check_fourier_consistency({2, 2}, {1.0, 0.4, 0.0, 1.0}) <= 1e-10);
  CHECK(check_fourier_consistency({2, 3}, {0.7, -0.2, 0.1, 1.0}) <= 1e-10);
  const CMatrix T = hopping_matrix({1, 1}, {1.0, 0.0, 0.2, 1.0});
  CHECK(T(0, 0).real() == doctest::Approx(-2.2));
}

TEST_CASE("restriction of a Hubbard term does not depend on L") {
  const auto u = hubbard(1, 0.4);
  for (int L : {1, 2, 5}) {
    const auto f = restrict_interaction(u, {1, L});
    REQUIRE(f.orders.count(2) == 1);
    CHECK(f.orders.at(2).size() == static_cast<std::size_t>(L));
    for (const auto& e : f.orders.at(2)) {
      CHECK(e.sites[0] == e.sites[1]);
      CHECK(e.value == cplx(0.4));
    }
    CHECK(interaction_norm(f, 2) == doctest::Approx(0.4));
  }
}

TEST_CASE("restriction samples U on the reduction window") {
  InteractionCoefficients u(1);
  u.add({{-1}}, {Up}, {Up}, 0.5);
  u.add({{3}}, {Down}, {Down}, 0.25);
  const auto f = restrict_interaction(u, {1, 4});
  REQUIRE(f.orders.at(1).size() == 1);
  CHECK(f.orders.at(1)[0].sites[0] == 3);
  CHECK(f.orders.at(1)[0].Xi[0] == Up);

  InteractionCoefficients pair(1);
  pair.add({{1}, {0}}, {Up, Down}, {Up, Down}, 0.1);
  pair.add({{5}, {0}}, {Up, Down}, {Up, Down}, 0.1);
  const auto g = restrict_interaction(pair, {1, 4});
  CHECK(g.orders.at(2).size() == 4);
  for (const auto& e : g.orders.at(2)) CHECK((e.sites[0] - e.sites[1] + 4) % 4 == 1);
}

TEST_CASE("interaction norms") {
  InteractionCoefficients u(1);
  u.add({{0}}, {Up}, {Up}, cplx(0, -0.7));
  u.add({{0}}, {Down}, {Down}, cplx(0, -0.7));
  CHECK(interaction_norm(u, 1) == doctest::Approx(0.7));
  CHECK(interaction_norm(InteractionCoefficients(1), 2) == 0.0);
  CHECK(interaction_norm(hubbard(2, -1.5), 2) == doctest::Approx(1.5));
}

TEST_CASE("example interactions") {
  const auto sf = spin_field(1, {0.0, 0.0, 0.6});
  const auto& t1 = sf.orders().at(1);
  CHECK(t1.size() == 2);
  for (const auto& [k, v] : t1) {
    CHECK(k.uniform());
    CHECK(k.Xi[0] == k.Phi[0]);
    CHECK(v == cplx(k.Xi[0] == Up ? 0.3 : -0.3));
  }
  CHECK_THROWS(spin_field(1, {cplx(0, 1), 0.0, 0.0}));
  CHECK(!sf.hermiticity_violation());

  const auto ss = spin_spin(1, {{{0}, 0.8}});
  CHECK(ss.orders().count(1) == 1);
  CHECK(ss.orders().count(2) == 1);
  CHECK(!ss.hermiticity_violation());

  CHECK(onsite_hubbard_coupling(hubbard(1, 0.3)) == 0.3);
  CHECK(!onsite_hubbard_coupling(ss));
}

TEST_CASE("pauli matrices as printed") {
  const auto& P = pauli();
  CHECK(P[0][0][1] == cplx(1));
  CHECK(P[1][0][1] == cplx(0, -1));
  CHECK(P[1][1][0] == cplx(0, 1));
  CHECK(P[2][1][1] == cplx(-1));
}

TEST_CASE("hermiticity violations are reported") {
  InteractionCoefficients u(1);
  u.add({{1}, {0}}, {Up, Down}, {Down, Up}, cplx(0.1, 0.2));
  CHECK(u.hermiticity_violation());
  u.add({{1}, {0}}, {Down, Up}, {Up, Down}, cplx(0.1, -0.2));
  CHECK(!u.hermiticity_violation());
}

TEST_CASE("anti-symmetrization") {
  const LatticeSpec spec{1, 3};
  SUBCASE("order one keeps g on the diagonal") {
    const std::vector<FiniteEntry> g{{{1}, {Up}, {Down}, cplx(0.3, 0.1)}};
    const auto f = antisymmetrize(spec, 1, g);
    REQUIRE(f.values.size() == 1);
    const auto& [k, v] = *f.values.begin();
    CHECK(k.first == std::vector<int>{mode_index(1, Up)});
    CHECK(k.second == std::vector<int>{mode_index(1, Down)});
    CHECK(v == cplx(0.3, 0.1));
  }
  SUBCASE("swapping two creation slots flips the sign") {
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> site(0, 2), spin(0, 1);
    std::normal_distribution<double> n;
    std::vector<FiniteEntry> g;
    for (int i = 0; i < 40; ++i)
      g.push_back({{site(rng), site(rng)}, {spin(rng), spin(rng)}, {spin(rng), spin(rng)}, cplx(n(rng), n(rng))});
    const auto f = antisymmetrize(spec, 2, g);
    int checked = 0;
    for (const auto& [k, v] : f.values) {
      auto swapped = k;
      std::swap(swapped.first[0], swapped.first[1]);
      auto it = f.values.find(swapped);
      REQUIRE(it != f.values.end());
      CHECK(std::abs(it->second + v) < 1e-14);
      auto swapped2 = k;
      std::swap(swapped2.second[0], swapped2.second[1]);
      CHECK(std::abs(f.values.at(swapped2) + v) < 1e-14);
      if (++checked == 100) break;
    }
    CHECK(checked > 0);
    CHECK(antisymmetric_norm(spec, f) <= pinned_table_norm(spec, 2, g) * (1 + 1e-14));
  }
  SUBCASE("Hubbard gives the -U/4 tensor with norm |U|/2") {
    const auto f = antisymmetrize(spec, 2, restrict_interaction(hubbard(1, -0.6), spec).orders.at(2));
    CHECK(f.values.size() == 12);
    CHECK(antisymmetric_norm(spec, f) == 0.3);
  }
  CHECK_THROWS(antisymmetrize({1, 1}, 3, {}));
}

TEST_CASE("smallness") {
  const ModelParams p{1.0, 0.0, 0.2, 1.0};
  const auto zero = check_smallness(InteractionCoefficients(1), p, 1, SmallnessVariant::General, 0.1);
  CHECK(zero.satisfied);
  CHECK(zero.lhs == 0.0);
  const double thr = 1.0 / (108 * l1_geometric_factor(p, 1));
  CHECK(check_smallness(hubbard(1, 0.99 * thr), p, 1, SmallnessVariant::Hubbard).satisfied);
  CHECK(!check_smallness(hubbard(1, 1.01 * thr), p, 1, SmallnessVariant::Hubbard).satisfied);
  CHECK_THROWS(check_smallness(hubbard(1, 0.1), p, 1, SmallnessVariant::General, 1.0));
  CHECK_THROWS(check_smallness(spin_field(1, {0, 0, 0.1}), p, 1, SmallnessVariant::Hubbard));
}

TEST_CASE("model JSON") {
  const auto m = parse_model_json(R"({"L": 2, "mu": 0.1, "interaction": [
      {"order": 2, "entries": [{"X": [0, 0], "Xi": ["up", "down"], "Phi": ["up", "down"], "re": 0.3}]}]})");
  CHECK(m.spec.L == 2);
  CHECK(m.spec.d == 1);
  CHECK(m.params.t == 1.0);
  CHECK(m.params.mu == 0.1);
  CHECK(onsite_hubbard_coupling(m.interaction) == 0.3);
  CHECK_THROWS_AS(parse_model_json("{"), ModelParseError);
  CHECK_THROWS_AS(parse_model_json(R"({"L": "four"})"), ModelParseError);
  CHECK_THROWS_AS(load_model_file("/nonexistent/model.json"), ModelParseError);
  CHECK_THROWS_AS(parse_model_json(R"({"interaction": [{"order": 2, "entries": [
      {"X": [1, 0], "Xi": [0, 1], "Phi": [1, 0], "re": 0.1, "im": 0.2}]}]})"),
                  ModelInvariantError);
}
