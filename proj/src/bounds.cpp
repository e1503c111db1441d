#include "fermi/bounds.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include <boost/math/special_functions/binomial.hpp>
#include <Eigen/LU>

#include "fermi/parallel.hpp"

namespace fermi {

void BoundContext::validate() const {
  if (!(B >= 1.0)) throw std::invalid_argument("determinant bound constant must be >= 1");
  if (!(D >= 0.0)) throw std::invalid_argument("L1 integral must be >= 0");
}

double det_bound_sample(const Covariance& c, int n, int m, int trials, std::uint64_t seed) {
  if (n < 1 || m < 1 || trials < 1) throw std::invalid_argument("n, m and trials must be positive");
  const int sites = c.spec().site_count();
  const double beta = c.params().beta;
  std::vector<double> worst(static_cast<std::size_t>(trials), 0.0);
  parallel_for(worst.size(), [&](std::size_t t) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(t)};
    std::mt19937_64 rng(seq);
    std::uniform_int_distribution<int> site(0, sites - 1), spin(0, 1);
    std::uniform_real_distribution<double> time(0.0, beta);
    std::normal_distribution<double> gauss;
    auto unit = [&] {
      Eigen::VectorXcd v(m);
      for (int j = 0; j < m; ++j) v(j) = cplx(gauss(rng), gauss(rng));
      return Eigen::VectorXcd(v / v.norm());
    };
    std::vector<SpaceTimePoint> xs(n), ys(n);
    std::vector<Eigen::VectorXcd> us(n), vs(n);
    for (int j = 0; j < n; ++j) {
      xs[j] = {site(rng), spin(rng), time(rng)};
      ys[j] = {site(rng), spin(rng), time(rng)};
      us[j] = unit();
      vs[j] = unit();
    }
    CMatrix M(n, n);
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) M(j, k) = us[j].dot(vs[k]) * c(xs[j], ys[k]);
    worst[t] = std::abs(Eigen::PartialPivLU<CMatrix>(M).determinant()) / std::pow(4.0, n);
  });
  double w = 0.0;
  for (double v : worst) w = std::max(w, v);
  return w;
}

double covariance_l1_D(const Covariance& c, const TimeGrid& grid) {
  const CMatrix G = covariance_matrix(c, grid);
  const Eigen::MatrixXd A = G.cwiseAbs();
  const double h = grid.h();
  return std::max(A.colwise().sum().maxCoeff(), A.rowwise().sum().maxCoeff()) / h;
}

double prop41_bound(int m, int m_hat, const BoundContext& ctx, const std::map<int, double>& norms) {
  ctx.validate();
  if (m < 0 || m_hat < 1) throw std::invalid_argument("need m >= 0 and m_hat >= 1");
  const double Bm = std::pow(ctx.B, m_hat);
  if (m == 0) return Bm;
  double rate = 0.0;
  for (const auto& [l, norm] : norms) rate += l * std::pow(4.0, l) * std::pow(ctx.B, l - 1) * norm * ctx.D;
  return m_hat * std::pow(4.0, m_hat) * Bm / m * std::pow(rate, m);
}

double prop42_bound(int m, const BoundContext& ctx, double U) {
  ctx.validate();
  if (m < 0) throw std::invalid_argument("need m >= 0");
  const double binom = boost::math::binomial_coefficient<double>(3 * m + 4, m);
  return 4.0 * ctx.B * ctx.B / (3.0 * m + 4.0) * binom * std::pow(ctx.D * ctx.B * std::abs(U), m);
}

double envelope_exponent(const CorrelationQuery& q, const LatticeSpec& spec, DistanceMode mode) {
  q.validate(spec.d);
  std::vector<int> diff(spec.d, 0);
  for (int j = 0; j < q.m_hat; ++j)
    for (int k = 0; k < spec.d; ++k) diff[k] += q.X[j][k] - q.Y[j][k];
  double dist = 0.0;
  if (mode == DistanceMode::ChordL) {
    for (int v : diff) dist += chord(v, spec.L);
  } else {
    for (int v : diff) dist += double(periodic_reduce(v, spec.L)) * periodic_reduce(v, spec.L);
    dist = std::sqrt(dist);
  }
  return dist / (4.0 * std::numbers::e * spec.d);
}

double envelope_prefactor(int m_hat, EnvelopeVariant variant, double R) {
  if (variant == EnvelopeVariant::Hubbard) return 324.0;
  if (!(R > 0 && R < 1)) throw std::invalid_argument("R must lie in (0,1)");
  return std::pow(4.0, m_hat + 1) - m_hat * std::pow(4.0, 2 * m_hat + 1) * std::log(1.0 - R);
}

double theorem_envelope(const CorrelationQuery& q, const ModelParams& p, const LatticeSpec& spec,
                        EnvelopeVariant variant, DistanceMode mode, double R) {
  const double F = F_eval(std::numbers::pi / (2.0 * p.beta), p, spec.d);
  return envelope_prefactor(q.m_hat, variant, R) * std::pow(F, -envelope_exponent(q, spec, mode));
}

bool TaylorReport::all_pass() const {
  for (const auto& r : rows)
    if (!r.b_pass || !r.c_pass) return false;
  return true;
}

TaylorReport verify_taylor_bounds(const LatticeSpec& spec, const ModelParams& p, const TimeGrid& grid,
                                  const InteractionCoefficients& u, const CorrelationQuery& q, int m_max,
                                  double B) {
  const Covariance c(spec, p);
  const GrassmannIndexSpace space(spec, grid);
  const CMatrix C = covariance_matrix(c, grid);
  const FiniteInteraction fu = restrict_interaction(u, spec);

  TaylorReport rep;
  rep.D = covariance_l1_D(c, grid);
  BoundContext ctx{B, rep.D, p, spec};
  std::map<int, double> norms;
  for (const auto& [l, e] : fu.orders) norms[l] = interaction_norm(fu, l);

  const auto b = schwinger_taylor(space, p, fu, q, m_max, &C).b.coefficients;
  std::optional<EtaSeries> pinned, full;
  const auto U = onsite_hubbard_coupling(u);
  if (U) {
    std::vector<std::vector<int>> xh(2, std::vector<int>(spec.d, 0)), yh = xh;
    if (q.m_hat == 2) {
      xh = q.X;
      yh = q.Y;
    }
    pinned = hubbard_coefficients(space, p, *U, xh, yh, m_max, HubbardVariant::Pinned, 0);
    full = hubbard_coefficients(space, p, *U, xh, yh, m_max, HubbardVariant::FullLattice);
  }
  for (int m = 0; m <= m_max; ++m) {
    TaylorRow row{m, std::abs(b[m]), prop41_bound(m, q.m_hat, ctx, norms), false, {}, {}, {}, true};
    row.b_pass = row.b_abs <= row.b_bound;
    if (U) {
      row.c_pinned_abs = std::abs(pinned->coefficients[m]);
      row.c_full_abs = std::abs(full->coefficients[m]);
      row.c_bound = prop42_bound(m, ctx, *U);
      row.c_pass = *row.c_pinned_abs <= *row.c_bound && *row.c_full_abs <= *row.c_bound;
    }
    rep.rows.push_back(row);
  }
  return rep;
}

std::vector<EnvelopeReport> verify_theorem_envelope(const LatticeSpec& spec, const ModelParams& p,
                                                    const InteractionCoefficients& u,
                                                    const std::vector<CorrelationQuery>& queries,
                                                    EnvelopeVariant variant, double R) {
  const auto sv = variant == EnvelopeVariant::Hubbard ? SmallnessVariant::Hubbard : SmallnessVariant::General;
  const SmallnessReport small = check_smallness(u, p, spec.d, sv, R);
  if (!small.satisfied) {
    std::ostringstream os;
    os << "smallness condition violated: lhs " << small.lhs << " exceeds threshold " << small.rhs << " (margin "
       << small.rhs - small.lhs << ")";
    throw SmallnessViolation(os.str(), small);
  }
  const FockSpace space = FockSpace::for_lattice(spec);
  const ThermalState state(build_hamiltonian(space, spec, p, u), p.beta);
  std::vector<EnvelopeReport> out;
  for (const auto& q : queries) {
    if (variant == EnvelopeVariant::Hubbard && (q.m_hat != 2 || q.Xi != std::vector<int>{Up, Down} ||
                                                q.Phi != std::vector<int>{Up, Down}))
      throw std::invalid_argument("the Hubbard envelope covers m_hat = 2 queries with spins (up, down)");
    EnvelopeReport r{q, 0, 0, 0, 0, variant, false};
    r.computed = std::abs(state.average(correlation_operator(space, spec, q)));
    r.exponent = envelope_exponent(q, spec, DistanceMode::ChordL);
    r.envelope = theorem_envelope(q, p, spec, variant, DistanceMode::ChordL, R);
    r.envelope_euclidean = theorem_envelope(q, p, spec, variant, DistanceMode::Euclidean, R);
    r.pass = r.computed <= r.envelope;
    out.push_back(r);
  }
  return out;
}

}  // namespace fermi
