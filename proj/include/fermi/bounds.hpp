#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

#include "fermi/covariance.hpp"
#include "fermi/fock.hpp"
#include "fermi/grassmann.hpp"
#include "fermi/model.hpp"

namespace fermi {

struct BoundContext {
  double B = 4.0;  // determinant bound constant
  double D = 0.0;  // covariance L1 integral
  ModelParams params;
  LatticeSpec spec;

  void validate() const;
};

// Worst |det(<u_j,v_k> C(x_j, y_k))| / 4^n over random points in [0,beta) and random unit
// vectors in C^m.  Trial i draws from mt19937_64 seeded with (seed, i), so the result does not
// depend on the thread count.
double det_bound_sample(const Covariance& c, int n, int m, int trials, std::uint64_t seed);

// max over the pinned point of (1/h) sum |G_h| in either argument order.
double covariance_l1_D(const Covariance& c, const TimeGrid& grid);

// |b_m| bound; norms maps l to ||U_{L,l}||_{L,l}.
double prop41_bound(int m, int m_hat, const BoundContext& ctx, const std::map<int, double>& norms);
// |c_m| bound for the on-site interaction.
double prop42_bound(int m, const BoundContext& ctx, double U);

enum class EnvelopeVariant { General, Hubbard };
enum class DistanceMode { ChordL, Euclidean };

// Exponent (1/(4ed)) * distance(sum X - sum Y).
double envelope_exponent(const CorrelationQuery& q, const LatticeSpec& spec, DistanceMode mode);
double envelope_prefactor(int m_hat, EnvelopeVariant variant, double R);
double theorem_envelope(const CorrelationQuery& q, const ModelParams& p, const LatticeSpec& spec,
                        EnvelopeVariant variant, DistanceMode mode, double R = 0.5);

struct TaylorRow {
  int m;
  double b_abs;
  double b_bound;
  bool b_pass;
  // Only for an on-site Hubbard interaction.
  std::optional<double> c_pinned_abs, c_full_abs, c_bound;
  bool c_pass = true;
};

struct TaylorReport {
  double D = 0;
  std::vector<TaylorRow> rows;
  bool all_pass() const;
};

TaylorReport verify_taylor_bounds(const LatticeSpec& spec, const ModelParams& p, const TimeGrid& grid,
                                  const InteractionCoefficients& u, const CorrelationQuery& q, int m_max,
                                  double B = 4.0);

struct EnvelopeReport {
  CorrelationQuery query;
  double computed;
  double envelope;            // chord exponent
  double envelope_euclidean;  // reference only
  double exponent;
  EnvelopeVariant variant;
  bool pass;
};

struct SmallnessViolation : std::runtime_error {
  SmallnessViolation(const std::string& what, SmallnessReport r) : std::runtime_error(what), report(r) {}
  SmallnessReport report;
};

std::vector<EnvelopeReport> verify_theorem_envelope(const LatticeSpec& spec, const ModelParams& p,
                                                    const InteractionCoefficients& u,
                                                    const std::vector<CorrelationQuery>& queries,
                                                    EnvelopeVariant variant, double R = 0.5);

}  // namespace fermi
