#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fermi/lattice.hpp"

namespace fermi {

using CMatrix = Eigen::MatrixXcd;

struct ModelParams {
  double t = 1.0;
  double t_prime = 0.0;  // ignored when d = 1
  double mu = 0.2;
  double beta = 1.0;
};

// |t| + |t'| 1_{d>=2}
double hopping_strength(const ModelParams& p, int d);
// A = |t| + 2(d-1)|t'|, the scale inside the decay function.
double hopping_scale(const ModelParams& p, int d);

// Throws unless beta > 0 and (unless allow_trivial) the hopping is nonzero.
void validate(const ModelParams& p, int d, bool allow_trivial = false);

// Spin-diagonal hopping matrix over (site, spin) in global mode order.
CMatrix hopping_matrix(const LatticeSpec& spec, const ModelParams& p, bool allow_trivial = false);

struct Shift {
  cplx z;
  int axis;
};

// E_{k + sum_j z_j e_{p_j}}; the lattice dimension is k.size().
cplx dispersion(const Momentum& k, const ModelParams& p, const std::vector<Shift>& shifts = {});

// max_k |E_k - sum_x T(x xi, 0 xi) e^{-i<k,x>}|
double check_fourier_consistency(const LatticeSpec& spec, const ModelParams& p);

const std::array<std::array<std::array<cplx, 2>, 2>, 3>& pauli();

// Key of one coefficient U_l(X, Xi, Phi).  For l >= 2 the last site is the
// anchor and is stored as the origin.  For l = 1 an empty X marks a term that
// is present on every site.
struct CoeffKey {
  std::vector<std::vector<int>> X;
  std::vector<int> Xi;
  std::vector<int> Phi;

  int order() const { return static_cast<int>(Xi.size()); }
  bool uniform() const { return X.empty(); }
  bool operator<(const CoeffKey& o) const;
  bool operator==(const CoeffKey& o) const;
};

class InteractionCoefficients {
 public:
  explicit InteractionCoefficients(int d = 1) : d_(d) {}

  int d() const { return d_; }
  // Adds to any existing value.  Order-l site lists are translated so that
  // the last site is the origin.
  void add(std::vector<std::vector<int>> X, std::vector<int> Xi, std::vector<int> Phi, cplx value);
  void add_uniform(int xi, int phi, cplx value);

  int max_order() const;
  bool empty() const { return orders_.empty(); }
  const std::map<int, std::map<CoeffKey, cplx>>& orders() const { return orders_; }

  // Description of the first entry with conj(U(X,Xi,Phi)) != U(X,Phi,Xi).
  std::optional<std::string> hermiticity_violation() const;

 private:
  int d_;
  std::map<int, std::map<CoeffKey, cplx>> orders_;
};

std::string describe(const CoeffKey& key);

// One coefficient of U_{L,l} on the finite lattice; sites are global site indices.
struct FiniteEntry {
  std::vector<int> sites;
  std::vector<int> Xi;
  std::vector<int> Phi;
  cplx value;
};

struct FiniteInteraction {
  LatticeSpec spec;
  std::map<int, std::vector<FiniteEntry>> orders;

  int max_order() const { return orders.empty() ? 0 : orders.rbegin()->first; }
};

// U_{L,1}(x) = U_1(x^L); U_{L,l}(X) = U_l((x_1-x_l)^L, ..., 0).
FiniteInteraction restrict_interaction(const InteractionCoefficients& u, const LatticeSpec& spec);

// ||U_l||_l over Z^d.
double interaction_norm(const InteractionCoefficients& u, int l);
// ||U_{L,l}||_{L,l} over the finite lattice.
double interaction_norm(const FiniteInteraction& u, int l);

// Parameters lambda(X, Y, Xi, Phi); sites are global site indices.
struct LambdaKey {
  std::vector<int> X, Y, Xi, Phi;
  bool operator<(const LambdaKey& o) const;
};

struct LambdaCoefficients {
  int m_hat = 1;
  std::map<LambdaKey, double> values;
};

InteractionCoefficients hubbard(int d, double U);

struct DensityTerm {
  std::vector<std::vector<int>> X;  // empty for an order-1 term present on every site
  std::vector<int> Xi;
  double value;
};
InteractionCoefficients density_density(int d, const std::vector<DensityTerm>& terms);

// Uniform field B coupled to the spin.  Non-real components are rejected.
InteractionCoefficients spin_field(int d, const std::array<cplx, 3>& B);

// sum_{x,y} w_L(x-y) <S_x, S_y> with w given at finitely many displacements.
InteractionCoefficients spin_spin(int d, const std::vector<std::pair<std::vector<int>, cplx>>& w);

// U if u is exactly U * n_up n_down on every site, otherwise empty.
std::optional<double> onsite_hubbard_coupling(const InteractionCoefficients& u);

// Coefficients f(X_Xi, Y_Phi) indexed by global mode indices.
struct AntisymmetricCoefficients {
  int l = 1;
  std::map<std::pair<std::vector<int>, std::vector<int>>, cplx> values;
};

// f such that sum_g g psi*_{x1 xi1}..psi*_{xl xil} psi_{xl phil}..psi_{x1 phi1}
// equals sum_f f psi*_{a1}..psi*_{al} psi_{b1}..psi_{bl}.
AntisymmetricCoefficients antisymmetrize(const LatticeSpec& spec, int l, const std::vector<FiniteEntry>& g);

// Max-pinned l1 norm of f (pinning the first creation or first annihilation slot).
double antisymmetric_norm(const LatticeSpec& spec, const AntisymmetricCoefficients& f);
// Max-pinned l1 norm of g that dominates antisymmetric_norm.
double pinned_table_norm(const LatticeSpec& spec, int l, const std::vector<FiniteEntry>& g);

enum class SmallnessVariant { General, Hubbard };

struct SmallnessReport {
  double lhs = 0;
  double rhs = 0;
  bool satisfied = false;
};

// ((F^{a}+1)/(F^{a}-1))^d with F = F(pi/(2 beta)) and a = 1/(2 e pi d).
double l1_geometric_factor(const ModelParams& p, int d);

SmallnessReport check_smallness(const InteractionCoefficients& u, const ModelParams& p, int d,
                                SmallnessVariant variant, double R = 0.5);

}  // namespace fermi
