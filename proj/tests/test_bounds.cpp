#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include "fermi/bounds.hpp"

using namespace fermi;

namespace {

BoundContext context(double D) {
  BoundContext ctx;
  ctx.D = D;
  ctx.spec = {1, 2};
  return ctx;
}

CorrelationQuery pair_query(int x1, int x2, int y1, int y2) {
  CorrelationQuery q;
  q.m_hat = 2;
  q.X = {{x1}, {x2}};
  q.Y = {{y1}, {y2}};
  q.Xi = {Up, Down};
  q.Phi = {Up, Down};
  return q;
}

}  // namespace

TEST_CASE("determinant bound sampling") {
  const LatticeSpec spec{1, 4};
  const ModelParams p{1.0, 0.0, 0.2, 1.0};
  const Covariance c(spec, p);
  CHECK(det_bound_sample(c, 1, 1, 200, 1) <= 0.25);
  CHECK(det_bound_sample(c, 4, 4, 1000, 2) <= 1.0);
  const Covariance shifted(spec, p, {Shift{cplx(0.3, shift_radius_pi_over_2beta(p, 1)), 0}});
  CHECK(det_bound_sample(shifted, 4, 4, 1000, 3) <= 1.0);
  CHECK(det_bound_sample(c, 3, 2, 100, 42) == det_bound_sample(c, 3, 2, 100, 42));
  CHECK_THROWS(det_bound_sample(c, 0, 1, 10, 1));
}

TEST_CASE("covariance integral D") {
  const ModelParams p{1.0, 0.0, 0.2, 1.0};
  const TimeGrid grid = time_grid(1.0, 2);
  const double factor = l1_geometric_factor(p, 1);
  CHECK(covariance_l1_D(Covariance({1, 4}, p), grid) <= 4 * p.beta * factor);

  // Single site: max over the pinned time of (1/h) sum_x |C(0 x, 0 y)|.
  const Covariance c({1, 1}, p);
  const auto pts = grid.points();
  double best = 0;
  for (double y : pts) {
    double s = 0;
    for (double x : pts) s += std::abs(c.value(0, Up, 0, Up, y - x));
    best = std::max(best, s / grid.h());
  }
  CHECK(covariance_l1_D(c, grid) == doctest::Approx(best).epsilon(1e-14));
}

TEST_CASE("Taylor coefficient bounds") {
  const auto ctx = context(0.7);
  CHECK(prop41_bound(0, 1, ctx, {{2, 0.3}}) == 4.0);
  CHECK(prop41_bound(0, 2, ctx, {{2, 0.3}}) == 16.0);
  CHECK(prop41_bound(1, 1, ctx, {{2, 0.3}}) == doctest::Approx(16 * (2 * 16 * 4 * 0.3 * 0.7)));
  CHECK(prop41_bound(3, 1, ctx, {}) == 0.0);
  CHECK(prop42_bound(0, ctx, 0.2) == 16.0);
  CHECK(prop42_bound(1, ctx, 0.2) == doctest::Approx(4 * 64 * 0.7 * 0.2));

  // The series sits on its radius of convergence; terms decay like m^{-3/2}.
  double s = 0;
  const int terms = 1000000;
  for (int m = 0; m < terms; ++m)
    s += std::exp(std::log(4.0 / (3 * m + 4)) + std::lgamma(3 * m + 5) - std::lgamma(m + 1) - std::lgamma(2 * m + 5) +
                  m * std::log(4.0 / 27));
  CHECK(s < 81.0 / 16);
  CHECK(s == doctest::Approx(81.0 / 16).epsilon(2e-3));
  CHECK_THROWS(prop41_bound(-1, 1, ctx, {}));
}

TEST_CASE("theorem envelope") {
  const LatticeSpec spec{1, 4};
  const ModelParams p{1.0, 0.0, 0.2, 1.0};
  CHECK(envelope_prefactor(2, EnvelopeVariant::Hubbard, 0.5) == 324.0);
  CHECK(envelope_prefactor(2, EnvelopeVariant::General, 0.5) == doctest::Approx(64 + 2048 * std::log(2.0)));
  CHECK(envelope_prefactor(2, EnvelopeVariant::General, 0.5) == doctest::Approx(1483.6).epsilon(1e-4));
  const auto q0 = pair_query(0, 1, 1, 0);
  CHECK(theorem_envelope(q0, p, spec, EnvelopeVariant::Hubbard, DistanceMode::ChordL) == 324.0);
  double prev = 1e9;
  for (int sep = 0; sep <= 2; ++sep) {
    const double e = theorem_envelope(pair_query(sep, 0, 0, 0), p, spec, EnvelopeVariant::Hubbard, DistanceMode::ChordL);
    CHECK(e < prev);
    prev = e;
  }
  CHECK(envelope_exponent(pair_query(1, 0, 0, 0), spec, DistanceMode::ChordL) ==
        doctest::Approx(chord(1, 4) / (4 * std::numbers::e)));
}

TEST_CASE("Taylor report") {
  const LatticeSpec spec{1, 2};
  const ModelParams p{1.0, 0.0, 0.2, 1.0};
  const TimeGrid grid = time_grid(1.0, 1);
  for (double U : {0.1, 1.0}) {
    const auto rep = verify_taylor_bounds(spec, p, grid, hubbard(1, U), pair_query(0, 1, 1, 0), 3);
    CHECK(rep.all_pass());
    REQUIRE(rep.rows.size() == 4);
    CHECK(rep.rows[0].b_bound == 16.0);
    CHECK(rep.rows[1].c_bound.has_value());
  }
}

TEST_CASE("envelope verification") {
  const LatticeSpec spec{1, 4};
  const ModelParams p{1.0, 0.0, 0.2, 1.0};
  const double thr = 1.0 / (108 * l1_geometric_factor(p, 1));
  const std::vector<CorrelationQuery> qs{pair_query(0, 0, 0, 0), pair_query(0, 2, 1, 0)};
  for (const auto& r : verify_theorem_envelope(spec, p, hubbard(1, 0.5 * thr), qs, EnvelopeVariant::Hubbard))
    CHECK(r.pass);
  for (const auto& r : verify_theorem_envelope(spec, p, InteractionCoefficients(1), qs, EnvelopeVariant::General))
    CHECK(r.pass);
  CHECK_THROWS_AS(verify_theorem_envelope(spec, p, hubbard(1, 2 * thr), qs, EnvelopeVariant::Hubbard),
                  SmallnessViolation);
}
