#include "fermi/covariance.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

namespace fermi {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kE = std::numbers::e;

// One momentum term of C, arranged so no exponential overflows for |dt| <= beta.
cplx branch_term(cplx E, double dt, double beta) {
  if (dt <= 0) {
    if (E.real() > 0) return std::exp(-(dt + beta) * E) / (std::exp(-beta * E) + 1.0);
    return std::exp(-dt * E) / (1.0 + std::exp(beta * E));
  }
  if (E.real() < 0) return -std::exp((beta - dt) * E) / (std::exp(beta * E) + 1.0);
  return -std::exp(-dt * E) / (1.0 + std::exp(-beta * E));
}

}  // namespace

double F_eval(double r, const ModelParams& p, int d) {
  const double A = hopping_scale(p, d);
  if (A == 0.0) throw std::invalid_argument("decay function needs |t| + 2(d-1)|t'| > 0");
  const double q = r / (2.0 * A);
  return q + std::sqrt(q * q + 1.0);
}

double shift_radius_pi_over_2beta(const ModelParams& p, int d) {
  return 0.5 * std::log(F_eval(kPi / (2.0 * p.beta), p, d));
}

double shift_radius_beta_over_2pi(const ModelParams& p, int d) {
  return 0.5 * std::log(F_eval(p.beta / (2.0 * kPi), p, d));
}

double shift_radius_pi_over_beta(const ModelParams& p, int d) {
  return 0.5 * std::log(F_eval(kPi / p.beta, p, d));
}

double contour_radius(int n, const ModelParams& p, int d, RadiusConvention conv) {
  if (n < 1) throw std::invalid_argument("contour order must be >= 1");
  const double r = conv == RadiusConvention::PiOver2Beta ? kPi / (2.0 * p.beta) : p.beta / (2.0 * kPi);
  return std::log(F_eval(r, p, d)) / (2.0 * n);
}

double chord(int n, int L) { return std::abs(std::sin(kPi * n / L)) * L / kPi; }

Covariance::Covariance(LatticeSpec spec, ModelParams params, std::vector<Shift> shifts)
    : spec_(spec), params_(params), shifts_(std::move(shifts)) {
  validate(spec_);
  validate(params_, spec_.d, true);
  momenta_ = enumerate_momenta(spec_);
  sites_ = enumerate_sites(spec_);
  energies_.reserve(momenta_.size());
  for (const Momentum& k : momenta_) {
    const cplx E = dispersion(k, params_, shifts_);
    if (std::abs(E.imag()) >= kPi / params_.beta) {
      std::ostringstream os;
      os << "|Im E_k| >= pi/beta at k = (";
      for (std::size_t j = 0; j < k.size(); ++j) os << (j ? "," : "") << k[j];
      os << "), E = " << E;
      throw std::domain_error(os.str());
    }
    energies_.push_back(E);
  }
}

Covariance Covariance::with_extra_shifts(const std::vector<Shift>& extra) const {
  std::vector<Shift> all = shifts_;
  all.insert(all.end(), extra.begin(), extra.end());
  return Covariance(spec_, params_, std::move(all));
}

double Covariance::max_imag_energy() const {
  double m = 0.0;
  for (const cplx& E : energies_) m = std::max(m, std::abs(E.imag()));
  return m;
}

cplx Covariance::value(int site_x, int spin_x, int site_y, int spin_y, double dt) const {
  if (spin_x != spin_y) return 0.0;
  const Site& x = sites_[site_x];
  const Site& y = sites_[site_y];
  cplx sum = 0.0;
  for (std::size_t k = 0; k < momenta_.size(); ++k) {
    double phase = 0.0;
    for (int j = 0; j < spec_.d; ++j) phase += momenta_[k][j] * (y[j] - x[j]);
    sum += std::exp(cplx(0, phase)) * branch_term(energies_[k], dt, params_.beta);
  }
  return sum / static_cast<double>(spec_.site_count());
}

int grid_dimension(const LatticeSpec& spec, const TimeGrid& grid) { return spec.mode_count() * grid.steps(); }

SpaceTimePoint grid_point(const LatticeSpec& spec, const TimeGrid& grid, int index) {
  const int m = spec.mode_count();
  const int mode = index % m;
  return SpaceTimePoint{mode / 2, mode % 2, grid.point(index / m)};
}

CMatrix covariance_matrix(const Covariance& c, const TimeGrid& grid) {
  const int N = grid_dimension(c.spec(), grid);
  if (N > 4096) throw std::length_error("covariance matrix larger than 4096");
  CMatrix G(N, N);
  for (int a = 0; a < N; ++a) {
    const SpaceTimePoint pa = grid_point(c.spec(), grid, a);
    for (int b = 0; b < N; ++b) G(a, b) = c(pa, grid_point(c.spec(), grid, b));
  }
  return G;
}

DetIdentity det_identity_check(const Covariance& c, const TimeGrid& grid) {
  const CMatrix G = covariance_matrix(c, grid);
  DetIdentity out;
  out.lhs = Eigen::PartialPivLU<CMatrix>(G).determinant();
  if (std::abs(out.lhs) < 1e-300) throw std::runtime_error("det C_h underflows");
  out.rhs = 1.0;
  for (const cplx& E : c.energies()) {
    const cplx f = 1.0 / (1.0 + std::exp(c.params().beta * E));
    out.rhs *= f * f;
  }
  out.relative_error = std::abs(out.lhs - out.rhs) / std::abs(out.rhs);
  return out;
}

std::vector<double> matsubara_frequencies(const TimeGrid& grid) {
  std::vector<double> w;
  const int n = grid.steps();
  for (int m = -n / 2; m < n / 2; ++m) w.push_back(kPi * (2 * m + 1) / grid.beta);
  return w;
}

MatsubaraReport matsubara_check(const Covariance& c, const TimeGrid& grid) {
  const LatticeSpec& spec = c.spec();
  const int N = grid_dimension(spec, grid);
  const auto omegas = matsubara_frequencies(grid);
  const auto sites = enumerate_sites(spec);
  const double h = grid.h();
  const double norm = 1.0 / std::sqrt(grid.beta * h * spec.site_count());
  const int nk = static_cast<int>(c.momenta().size());
  const int nw = static_cast<int>(omegas.size());

  CMatrix Y = CMatrix::Zero(N, N);
  for (int k = 0; k < nk; ++k)
    for (int phi = 0; phi < 2; ++phi)
      for (int w = 0; w < nw; ++w) {
        const int row = (k * 2 + phi) * nw + w;
        for (int col = 0; col < N; ++col) {
          const SpaceTimePoint p = grid_point(spec, grid, col);
          if (p.spin != phi) continue;
          double kx = 0.0;
          for (int j = 0; j < spec.d; ++j) kx += c.momenta()[k][j] * sites[p.site][j];
          Y(row, col) = norm * std::exp(cplx(0, kx - omegas[w] * p.time));
        }
      }
  const CMatrix D = Y * covariance_matrix(c, grid) * Y.adjoint();
  MatsubaraReport rep{0.0, 0.0};
  for (int r = 0; r < N; ++r)
    for (int s = 0; s < N; ++s) {
      if (r != s) {
        rep.max_offdiagonal = std::max(rep.max_offdiagonal, std::abs(D(r, s)));
        continue;
      }
      const int w = r % nw;
      const int k = r / (2 * nw);
      const cplx expect = 1.0 / (1.0 - std::exp(cplx(0, -omegas[w] / h) + c.energies()[k] / h));
      rep.max_diagonal_deviation = std::max(rep.max_diagonal_deviation, std::abs(D(r, r) - expect));
    }
  return rep;
}

double u1_shift_identity_check(const Covariance& c, const TimeGrid& grid, int q) {
  const LatticeSpec& spec = c.spec();
  if (q < 0 || q >= spec.d) throw std::invalid_argument("axis out of range");
  const Covariance shifted = c.with_extra_shifts({Shift{2.0 * kPi / spec.L, q}});
  const auto sites = enumerate_sites(spec);
  const int N = grid_dimension(spec, grid);
  double worst = 0.0;
  for (int a = 0; a < N; ++a) {
    const SpaceTimePoint pa = grid_point(spec, grid, a);
    for (int b = 0; b < N; ++b) {
      const SpaceTimePoint pb = grid_point(spec, grid, b);
      const double ph = 2.0 * kPi * (sites[pa.site][q] - sites[pb.site][q]) / spec.L;
      const cplx lhs = std::exp(cplx(0, ph)) * c(pa, pb);
      worst = std::max(worst, std::abs(lhs - shifted(pa, pb)));
    }
  }
  return worst;
}

void gauss_legendre(int n, double lo, double hi, std::vector<double>& x, std::vector<double>& w) {
  if (n < 1) throw std::invalid_argument("need at least one Gauss node");
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) {
    const double b = i / std::sqrt(4.0 * i * i - 1.0);
    J(i, i - 1) = J(i - 1, i) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  x.resize(n);
  w.resize(n);
  for (int i = 0; i < n; ++i) {
    const double v = es.eigenvectors()(0, i);
    x[i] = lo + (hi - lo) * (es.eigenvalues()(i) + 1.0) / 2.0;
    w[i] = (hi - lo) * v * v;
  }
}

ContourReport contour_formula_check(const Covariance& c, int q, int n, double radius, int circle_nodes,
                                    int gauss_nodes, const SpaceTimePoint& a, const SpaceTimePoint& b) {
  const LatticeSpec& spec = c.spec();
  if (q < 0 || q >= spec.d) throw std::invalid_argument("axis out of range");
  if (n < 1 || circle_nodes < 1 || gauss_nodes < 1) throw std::invalid_argument("bad quadrature parameters");
  const auto sites = enumerate_sites(spec);
  const double span = 2.0 * kPi / spec.L;
  const cplx ch = (std::exp(cplx(0, span * (sites[a.site][q] - sites[b.site][q]))) - 1.0) / span;

  ContourReport rep;
  rep.lhs = std::pow(ch, n) * c(a, b);

  std::vector<double> gx, gw;
  gauss_legendre(gauss_nodes, 0.0, span, gx, gw);
  // One (theta, circle) layer: nodes w = theta + r e^{i phi} with weight (L/2pi) g_theta e^{-i phi}/(r M).
  std::vector<cplx> node, weight;
  for (int i = 0; i < gauss_nodes; ++i)
    for (int m = 0; m < circle_nodes; ++m) {
      const double phi = 2.0 * kPi * m / circle_nodes;
      node.push_back(gx[i] + radius * std::exp(cplx(0, phi)));
      weight.push_back(gw[i] / span * std::exp(cplx(0, -phi)) / (radius * circle_nodes));
    }
  const std::size_t layer = node.size();
  std::vector<std::size_t> idx(n, 0);
  cplx total = 0.0;
  while (true) {
    cplx wsum = 0.0, wt = 1.0;
    for (int j = 0; j < n; ++j) {
      wsum += node[idx[j]];
      wt *= weight[idx[j]];
    }
    total += wt * c.with_extra_shifts({Shift{wsum, q}})(a, b);
    int j = 0;
    while (j < n && ++idx[j] == layer) idx[j++] = 0;
    if (j == n) break;
  }
  rep.rhs = total;
  rep.deviation = std::abs(rep.lhs - rep.rhs);
  return rep;
}

double decay_envelope_chord(const ModelParams& p, const LatticeSpec& spec, const std::vector<int>& diff) {
  double s = 0.0;
  for (int v : diff) s += chord(v, spec.L);
  const double F = F_eval(kPi / (2.0 * p.beta), p, spec.d);
  return 2.0 * std::pow(F, -s / (4.0 * kE * spec.d));
}

double decay_envelope_reduced(const ModelParams& p, const LatticeSpec& spec, const std::vector<int>& diff) {
  double s = 0.0;
  for (int v : diff) s += std::abs(periodic_reduce(v, spec.L));
  const double F = F_eval(kPi / (2.0 * p.beta), p, spec.d);
  return 2.0 * std::pow(F, -s / (2.0 * kE * kPi * spec.d));
}

DecayReport decay_envelope_check(const Covariance& c, const TimeGrid& grid) {
  const LatticeSpec& spec = c.spec();
  const auto sites = enumerate_sites(spec);
  const int n = spec.site_count();
  DecayReport rep;
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y) {
      std::vector<int> diff(spec.d);
      for (int j = 0; j < spec.d; ++j) diff[j] = sites[x][j] - sites[y][j];
      const double env_c = decay_envelope_chord(c.params(), spec, diff);
      const double env_r = decay_envelope_reduced(c.params(), spec, diff);
      for (int i = 0; i < grid.steps(); ++i)
        for (int j = 0; j < grid.steps(); ++j) {
          const double v = std::abs(c.value(x, Up, y, Up, grid.point(j) - grid.point(i)));
          rep.max_abs = std::max(rep.max_abs, v);
          rep.worst_ratio_chord = std::max(rep.worst_ratio_chord, v / env_c);
          rep.worst_ratio_reduced = std::max(rep.worst_ratio_reduced, v / env_r);
        }
    }
  return rep;
}

L1Report l1_bound_check(const Covariance& c, const TimeGrid& grid) {
  const LatticeSpec& spec = c.spec();
  const int steps = grid.steps();
  const double h = grid.h();
  double lhs = 0.0;
  for (int j = -steps; j < steps; ++j) {
    const double x = j / h;
    for (int s = 0; s < spec.site_count(); ++s) lhs += std::abs(c.value(s, Up, 0, Up, -x));
  }
  lhs /= h;
  const double rhs = 4.0 * c.params().beta * l1_geometric_factor(c.params(), spec.d);
  return L1Report{lhs, rhs, lhs <= rhs};
}

DetDecayReport det_decay_check(const Covariance& c, const std::vector<SpaceTimePoint>& xs,
                               const std::vector<SpaceTimePoint>& ys) {
  if (xs.size() != ys.size() || xs.empty()) throw std::invalid_argument("need n >= 1 points on each side");
  const int n = static_cast<int>(xs.size());
  const LatticeSpec& spec = c.spec();
  CMatrix M(n, n);
  std::vector<int> diff(spec.d, 0);
  for (int j = 0; j < n; ++j) {
    const Site sx = site_at(spec, xs[j].site);
    const Site sy = site_at(spec, ys[j].site);
    for (int q = 0; q < spec.d; ++q) diff[q] += sx[q] - sy[q];
    for (int k = 0; k < n; ++k) M(j, k) = c(xs[j], ys[k]);
  }
  DetDecayReport rep;
  rep.det_abs = std::abs(Eigen::PartialPivLU<CMatrix>(M).determinant());
  rep.bound = std::pow(4.0, n) * decay_envelope_chord(c.params(), spec, diff);
  rep.ratio = rep.det_abs / rep.bound;
  return rep;
}

}  // namespace fermi
