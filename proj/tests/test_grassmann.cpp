#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "fermi/grassmann.hpp"

using namespace fermi;

namespace {

CMatrix random_matrix(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  CMatrix G = CMatrix::Identity(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) G(i, j) += 0.3 * cplx(g(rng), g(rng));
  return G;
}

CorrelationQuery density(int x, int spin) {
  CorrelationQuery q;
  q.X = {{x}};
  q.Y = {{x}};
  q.Xi = {spin};
  q.Phi = {spin};
  return q;
}

}  // namespace

TEST_CASE("Wick determinants") {
  const CMatrix G = random_matrix(5, 1);
  CHECK(wick_expectation({}, {}, G) == cplx(1.0));
  CHECK(wick_expectation({3}, {1}, G) == G(3, 1));
  CHECK(wick_expectation({2, 0}, {1, 1}, G) == cplx(0.0));
  CHECK(wick_expectation({2}, {1, 3}, G) == cplx(0.0));
  // psibar_{j2} psibar_{j1} psi_{p1} psi_{p2} gives det [[G(j1,p1), G(j1,p2)], [G(j2,p1), G(j2,p2)]].
  const cplx d = G(0, 2) * G(4, 3) - G(0, 3) * G(4, 2);
  CHECK(std::abs(wick_expectation({0, 4}, {2, 3}, G) - d) <= 1e-15);
  CHECK(std::abs(integrate_monomial({{true, 4}, {true, 0}, {false, 2}, {false, 3}}, G) - d) <= 1e-15);
  CHECK(std::abs(integrate_monomial({{false, 2}, {true, 0}}, G) + G(0, 2)) <= 1e-15);
}

TEST_CASE("Berezin integral") {
  const int n = 6;
  const CMatrix G = random_matrix(n, 2);
  CHECK(std::abs(berezin_gaussian(GrassmannPolynomial::constant(n, 1.0), G) - 1.0) <= 1e-13);
  CHECK(std::abs(berezin_gaussian(GrassmannPolynomial::monomial(n, {{true, 2}, {false, 5}}), G) - G(2, 5)) <= 1e-13);

  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> pick(0, n - 1), deg(1, 4);
  for (int t = 0; t < 100; ++t) {
    const int k = deg(rng);
    std::vector<Gen> w;
    for (int j = 0; j < k; ++j) {
      w.push_back({true, pick(rng)});
      w.push_back({false, pick(rng)});
    }
    std::shuffle(w.begin(), w.end(), rng);
    CHECK(std::abs(berezin_gaussian(GrassmannPolynomial::monomial(n, w), G) - integrate_monomial(w, G)) <= 1e-12);
  }
  CHECK_THROWS(GrassmannPolynomial(11));
  CHECK_THROWS(berezin_gaussian(GrassmannPolynomial::constant(2, 1.0), CMatrix::Zero(2, 2)));
}

TEST_CASE("polynomial algebra") {
  const int n = 3;
  const auto a = GrassmannPolynomial::monomial(n, {{true, 0}});
  const auto b = GrassmannPolynomial::monomial(n, {{false, 1}});
  const auto ab = a * b, ba = b * a;
  REQUIRE(ab.terms().size() == 1);
  CHECK(ab.terms().begin()->second == -ba.terms().begin()->second);
  CHECK((a * a).terms().empty());
  CHECK(merge_sign(0b10, 0b01) == -1);
  CHECK(merge_sign(0b01, 0b10) == 1);
  CHECK(merge_sign(0b110, 0b001) == 1);
}

TEST_CASE("partition function") {
  const LatticeSpec atom{1, 1};
  const ModelParams p{1.0, 0.0, 0.2, 1.0};
  const GrassmannIndexSpace space(atom, time_grid(1.0, 1));
  CHECK(discrete_partition(space, p, restrict_interaction(InteractionCoefficients(1), atom)).value == cplx(1.0));
  const auto fu = restrict_interaction(hubbard(1, 0.2), atom);
  CHECK(partition_via_exponential(space, p, fu, 0.0) == cplx(1.0));

  // Independent Berezin oracle at N = 4: prod_s (1 - (U/h) psibar_up psibar_dn psi_dn psi_up at s).
  const CMatrix C = covariance_matrix(Covariance(atom, p), space.grid);
  const int n = space.size();
  GrassmannPolynomial P = GrassmannPolynomial::constant(n, 1.0);
  for (int s = 0; s < 2; ++s) {
    GrassmannPolynomial f = GrassmannPolynomial::constant(n, 1.0);
    f += GrassmannPolynomial::monomial(
        n, {{true, space.index(0, Up, s)}, {true, space.index(0, Down, s)}, {false, space.index(0, Down, s)},
            {false, space.index(0, Up, s)}},
        -0.2 / space.grid.h());
    P = P * f;
  }
  const cplx oracle = berezin_gaussian(P, C);
  CHECK(std::abs(discrete_partition(space, p, fu).value - oracle) <= 1e-13);
  CHECK(std::abs(partition_via_exponential(space, p, fu, 1.0) - oracle) <= 1e-13);

  const auto truncated = discrete_partition(space, p, fu, nullptr, 1);
  CHECK(truncated.terms_order == 1);
  CHECK(truncated.tail_bound > 0);
  CHECK(std::abs(truncated.value - oracle) <= truncated.tail_bound);
}

TEST_CASE("discrete partition approaches the trace ratio") {
  const LatticeSpec atom{1, 1};
  const ModelParams p{1.0, 0.0, 0.2, 1.0};
  const double U = 0.3, eps = -2.2;
  const double exact = (1 + 2 * std::exp(-eps) + std::exp(-(2 * eps + U))) / std::pow(1 + std::exp(-eps), 2);
  const auto fu = restrict_interaction(hubbard(1, U), atom);
  double prev = 1e9;
  for (int hs : {1, 2, 4}) {
    const double err = std::abs(discrete_partition(GrassmannIndexSpace(atom, time_grid(1.0, hs)), p, fu).value - exact);
    CHECK(err < prev);
    prev = err;
  }
}

TEST_CASE("series division") {
  const auto q = series_divide({1.0, 2.0, 3.0}, {1.0, -1.0, 0.0}, 2);
  CHECK(q.coefficients == std::vector<cplx>{1.0, 3.0, 6.0});
  CHECK(q.evaluate(0.5) == cplx(1 + 1.5 + 1.5));
  CHECK_THROWS(series_divide({1.0}, {0.0}, 0));
}

TEST_CASE("Taylor coefficients of the Schwinger function") {
  const LatticeSpec spec{1, 2};
  const ModelParams p{1.0, 0.0, 0.2, 1.0};
  const GrassmannIndexSpace space(spec, time_grid(1.0, 1));
  CorrelationQuery q = density(0, Up);
  q.Y = {{1}};
  const Covariance c(spec, p);
  const auto free = schwinger_taylor(space, p, restrict_interaction(InteractionCoefficients(1), spec), q, 3);
  CHECK(std::abs(free.b.coefficients[0] - c.value(0, Up, 1, Up, 0.0)) <= 1e-14);
  for (int m = 1; m <= 3; ++m) CHECK(free.b.coefficients[m] == cplx(0.0));

  const auto fu = restrict_interaction(hubbard(1, 0.1), spec);
  const auto s = schwinger_taylor(space, p, fu, q, 2);
  CHECK(std::abs(s.b.coefficients[0] - c.value(0, Up, 1, Up, 0.0)) <= 1e-14);
  CHECK(std::abs(s.b.coefficients[1]) > 0);
  CHECK(s.denominator.coefficients[0] == cplx(1.0));
}

TEST_CASE("Grassmann correlation") {
  const LatticeSpec spec{1, 2};
  const ModelParams p{1.0, 0.0, 0.2, 1.0};
  const CorrelationQuery q = density(1, Down);
  const Covariance c(spec, p);
  for (const auto& r : correlation_via_grassmann(spec, p, InteractionCoefficients(1), q, {1, 2}))
    CHECK(std::abs(r.value - 2.0 * c.value(1, Down, 1, Down, 0.0)) <= 1e-12);

  const LatticeSpec atom{1, 1};
  const FockSpace fs = FockSpace::for_lattice(atom);
  const double exact = correlation(fs, atom, p, hubbard(1, 0.3), density(0, Up)).real();
  const auto rs = correlation_via_grassmann(atom, p, hubbard(1, 0.3), density(0, Up), {1, 4});
  CHECK(std::abs(rs[1].value - exact) < std::abs(rs[0].value - exact));
  for (const auto& r : rs) CHECK(std::abs(r.value.imag()) <= 1e-10);
}

TEST_CASE("coupled moments") {
  const LatticeSpec spec{1, 1};
  const GrassmannIndexSpace space(spec, time_grid(1.0, 1));
  const CMatrix G = random_matrix(space.size(), 9);
  const auto verts = make_vertices(space, coupling_table(restrict_interaction(hubbard(1, 0.5), spec)));
  CHECK(verts.size() == 2);
  const auto a = coupled_moments({}, verts, G, 2);
  CHECK(a[0] == cplx(1.0));
  // a_2 is the single pair of vertices.
  const int n = space.size();
  auto poly = [&](const Vertex& v) { return GrassmannPolynomial::monomial(n, v.word, v.coeff); };
  CHECK(std::abs(a[2] - berezin_gaussian(poly(verts[0]) * poly(verts[1]), G)) <= 1e-13);
}

TEST_CASE("Hubbard coefficients") {
  const LatticeSpec spec{1, 2};
  const ModelParams p{1.0, 0.0, 0.2, 1.0};
  const GrassmannIndexSpace space(spec, time_grid(1.0, 1));
  const auto pinned = hubbard_coefficients(space, p, 0.1, {{0}, {1}}, {{1}, {0}}, 2, HubbardVariant::Pinned);
  const auto full = hubbard_coefficients(space, p, 0.1, {{0}, {1}}, {{1}, {0}}, 2, HubbardVariant::FullLattice);
  CHECK(pinned.coefficients[0] == full.coefficients[0]);
  const auto f = pinned_hubbard(spec, 0.1, 1);
  REQUIRE(f.orders.at(2).size() == 1);
  CHECK(f.orders.at(2)[0].sites == std::vector<int>{1, 1});
}

TEST_CASE("index space limits") {
  CHECK_THROWS_AS(GrassmannIndexSpace({1, 4}, time_grid(1.0, 2)), std::length_error);
  const GrassmannIndexSpace s({1, 2}, time_grid(1.0, 1));
  CHECK(s.size() == 8);
  CHECK(s.index(1, Down, 1) == 7);
}
