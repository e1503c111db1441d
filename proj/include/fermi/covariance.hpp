#pragma once

#include <vector>

#include "fermi/lattice.hpp"
#include "fermi/model.hpp"

namespace fermi {

// F_{t,t',d}(r) = r/(2A) + sqrt(r^2/(4A^2) + 1), A = |t| + 2(d-1)|t'|.
double F_eval(double r, const ModelParams& p, int d);

// Admissible imaginary shift 1/2 log F(pi/(2 beta)); keeps |Im E| <= pi/(2 beta).
double shift_radius_pi_over_2beta(const ModelParams& p, int d);
// 1/2 log F(beta/(2 pi)); the other radius constant written for the contour and decay statements.
double shift_radius_beta_over_2pi(const ModelParams& p, int d);
// 1/2 log F(pi/beta); keeps |Im E| < pi/beta, where C is analytic and det C_h != 0.
double shift_radius_pi_over_beta(const ModelParams& p, int d);

enum class RadiusConvention { PiOver2Beta, BetaOver2Pi };
// r_n = (1/(2n)) log F(.) for the selected argument.
double contour_radius(int n, const ModelParams& p, int d, RadiusConvention conv);

// |(e^{i 2 pi n/L} - 1)/(2 pi/L)|
double chord(int n, int L);

struct SpaceTimePoint {
  int site;
  int spin;
  double time;
};

// Free covariance C(x xi x, y phi y)(sum_j z_j e_{p_j}).
class Covariance {
 public:
  // Throws std::domain_error naming the momentum if some |Im E_k| >= pi/beta.
  Covariance(LatticeSpec spec, ModelParams params, std::vector<Shift> shifts = {});

  // Time difference y - x may lie anywhere in (-beta, beta].
  cplx value(int site_x, int spin_x, int site_y, int spin_y, double y_minus_x) const;
  cplx operator()(const SpaceTimePoint& a, const SpaceTimePoint& b) const {
    return value(a.site, a.spin, b.site, b.spin, b.time - a.time);
  }

  Covariance with_extra_shifts(const std::vector<Shift>& extra) const;

  const LatticeSpec& spec() const { return spec_; }
  const ModelParams& params() const { return params_; }
  const std::vector<Shift>& shifts() const { return shifts_; }
  const std::vector<Momentum>& momenta() const { return momenta_; }
  const std::vector<cplx>& energies() const { return energies_; }
  double max_imag_energy() const;

 private:
  LatticeSpec spec_;
  ModelParams params_;
  std::vector<Shift> shifts_;
  std::vector<Momentum> momenta_;
  std::vector<cplx> energies_;
  std::vector<Site> sites_;
};

// Global space-time index: time * 2L^d + site * 2 + spin.
int grid_dimension(const LatticeSpec& spec, const TimeGrid& grid);
SpaceTimePoint grid_point(const LatticeSpec& spec, const TimeGrid& grid, int index);

// C_h in global space-time order; rejects N > 4096.
CMatrix covariance_matrix(const Covariance& c, const TimeGrid& grid);

struct DetIdentity {
  cplx lhs;
  cplx rhs;
  double relative_error;
};
DetIdentity det_identity_check(const Covariance& c, const TimeGrid& grid);

struct MatsubaraReport {
  double max_offdiagonal;
  double max_diagonal_deviation;
};
std::vector<double> matsubara_frequencies(const TimeGrid& grid);
MatsubaraReport matsubara_check(const Covariance& c, const TimeGrid& grid);

// max |e^{i 2pi <x-y,e_q>/L} C(x,y) - C(x,y)(shifts + (2pi/L) e_q)| over grid pairs.
double u1_shift_identity_check(const Covariance& c, const TimeGrid& grid, int q);

struct ContourReport {
  cplx lhs;
  cplx rhs;
  double deviation;
};
// Compares ((e^{i2pi<x-y,e_q>/L}-1)/(2pi/L))^n C(x,y) with the iterated theta and circle
// integrals of radius r, trapezoid nodes on each circle and Gauss-Legendre nodes in theta.
ContourReport contour_formula_check(const Covariance& c, int q, int n, double radius, int circle_nodes,
                                    int gauss_nodes, const SpaceTimePoint& a, const SpaceTimePoint& b);

// Gauss-Legendre nodes and weights on [lo, hi].
void gauss_legendre(int n, double lo, double hi, std::vector<double>& x, std::vector<double>& w);

// 2 F(pi/(2beta))^{-(1/(4ed)) sum_q chord_q(x-y)}
double decay_envelope_chord(const ModelParams& p, const LatticeSpec& spec, const std::vector<int>& diff);
// 2 F(pi/(2beta))^{-(1/(2e pi d)) sum_q |(x-y)^L_q|}
double decay_envelope_reduced(const ModelParams& p, const LatticeSpec& spec, const std::vector<int>& diff);

struct DecayReport {
  double worst_ratio_chord = 0;
  double worst_ratio_reduced = 0;
  double max_abs = 0;
};
DecayReport decay_envelope_check(const Covariance& c, const TimeGrid& grid);

struct L1Report {
  double lhs;
  double rhs;
  bool satisfied;
};
L1Report l1_bound_check(const Covariance& c, const TimeGrid& grid);

struct DetDecayReport {
  double det_abs;
  double bound;
  double ratio;
};
DetDecayReport det_decay_check(const Covariance& c, const std::vector<SpaceTimePoint>& xs,
                               const std::vector<SpaceTimePoint>& ys);

}  // namespace fermi
