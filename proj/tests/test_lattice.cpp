#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <numbers>

#include "fermi/lattice.hpp"

using namespace fermi;

TEST_CASE("sites are enumerated lexicographically") {
  CHECK(enumerate_sites({1, 3}) == std::vector<Site>{{0}, {1}, {2}});
  CHECK(enumerate_sites({2, 2}) == std::vector<Site>{{0, 0}, {0, 1}, {1, 0}, {1, 1}});
  CHECK(enumerate_sites({1, 1}) == std::vector<Site>{{0}});
}

TEST_CASE("momenta are 2 pi n / L") {
  const double pi = std::numbers::pi;
  const auto k2 = enumerate_momenta({1, 2});
  REQUIRE(k2.size() == 2);
  CHECK(k2[1][0] == doctest::Approx(pi));
  const auto k4 = enumerate_momenta({1, 4});
  REQUIRE(k4.size() == 4);
  CHECK(k4[3][0] == doctest::Approx(1.5 * pi));
  const auto kk = enumerate_momenta({2, 2});
  REQUIRE(kk.size() == 4);
  CHECK(kk[1][0] == 0.0);
  CHECK(kk[1][1] == doctest::Approx(pi));
  CHECK(kk[2][0] == doctest::Approx(pi));
}

TEST_CASE("periodic reduction window") {
  CHECK(periodic_reduce(3, 4) == -1);
  CHECK(periodic_reduce(-2, 4) == -2);
  CHECK(periodic_reduce(7, 5) == 2);
  CHECK(periodic_reduce(-3, 5) == 2);
  CHECK(periodic_reduce(std::vector<int>{5, -5}, 4) == std::vector<int>{1, -1});
  for (int L = 1; L <= 7; ++L)
    for (int x = -20; x <= 20; ++x) {
      const int r = periodic_reduce(x, L);
      CHECK(r >= -(L / 2));
      CHECK(r < -(L / 2) + L);
      CHECK((x - r) % L == 0);
    }
}

TEST_CASE("site index round trip") {
  const LatticeSpec spec{2, 3};
  for (int i = 0; i < spec.site_count(); ++i) CHECK(site_index(spec, site_at(spec, i)) == i);
  CHECK(site_index(spec, {-1, 4}) == site_index(spec, {2, 1}));
  CHECK(spec.mode_count() == 18);
  CHECK(mode_index(2, Down) == 5);
}

TEST_CASE("invalid lattices are rejected") {
  CHECK_THROWS(validate(LatticeSpec{0, 4}));
  CHECK_THROWS(validate(LatticeSpec{1, 0}));
  CHECK_THROWS(time_grid(0.0, 1));
  CHECK_THROWS(time_grid(1.0, 0));
}

TEST_CASE("time grid points") {
  const auto a = time_grid(1.0, 1);
  CHECK(a.h() == 2.0);
  CHECK(a.points() == std::vector<double>{0.0, 0.5});
  const auto b = time_grid(2.0, 2);
  CHECK(b.h() == 2.0);
  CHECK(b.points() == std::vector<double>{0.0, 0.5, 1.0, 1.5});
  const auto c = time_grid(1.0, 2);
  CHECK(c.h() == 4.0);
  CHECK(c.points() == std::vector<double>{0.0, 0.25, 0.5, 0.75});
}
