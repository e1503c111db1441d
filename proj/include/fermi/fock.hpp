#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "fermi/model.hpp"

namespace fermi {

using FockOperator = Eigen::SparseMatrix<cplx>;

// Fermionic Fock space over the 2L^d modes in global order.  Basis state s has
// mode a occupied iff bit a of s is set.
class FockSpace {
 public:
  static constexpr int kMaxModes = 24;

  explicit FockSpace(int mode_count);
  static FockSpace for_lattice(const LatticeSpec& spec);

  int mode_count() const { return modes_; }
  std::size_t dimension() const { return std::size_t{1} << modes_; }

 private:
  int modes_;
};

enum class OpKind { Create, Annihilate };

// Jordan-Wigner: the sign is (-1)^{number of occupied modes below `mode`}.
FockOperator mode_operator(const FockSpace& space, int mode, OpKind kind);

// psi*_{c_1} ... psi*_{c_k} psi_{a_1} ... psi_{a_j}, applied right to left.
FockOperator monomial_operator(const FockSpace& space, const std::vector<int>& create,
                               const std::vector<int>& annihilate);

FockOperator number_operator(const FockSpace& space);

// sum_{a,b} T(a,b) psi*_a psi_b.
FockOperator free_hamiltonian(const FockSpace& space, const LatticeSpec& spec, const ModelParams& p,
                              bool allow_trivial = false);

// sum_l sum_X U_{L,l}(X,Xi,Phi) psi*_{x1 xi1}..psi*_{xl xil} psi_{xl phil}..psi_{x1 phi1}.
FockOperator interaction_operator(const FockSpace& space, const FiniteInteraction& u);

// O(X,Y,Xi,Phi) = psi*_{x1 xi1}..psi*_{xm xim} psi_{ym phim}..psi_{y1 phi1}; sites are global indices.
FockOperator pair_operator(const FockSpace& space, const std::vector<int>& X, const std::vector<int>& Y,
                           const std::vector<int>& Xi, const std::vector<int>& Phi);

// sum over entries of lambda * (O(X,Y,Xi,Phi) + O(Y,X,Phi,Xi)).
FockOperator lambda_operator(const FockSpace& space, const LambdaCoefficients& lambda);

FockOperator build_hamiltonian(const FockSpace& space, const LatticeSpec& spec, const ModelParams& p,
                               const InteractionCoefficients& u, const LambdaCoefficients* lambda = nullptr,
                               bool allow_trivial = false);

double max_antihermitian(const FockOperator& H);

// Gibbs state of a Hermitian H, diagonalized once.
class ThermalState {
 public:
  ThermalState(const FockOperator& H, double beta);

  cplx average(const FockOperator& O) const;
  double log_partition() const { return log_z_; }
  double ground_energy() const { return e0_; }

 private:
  Eigen::MatrixXcd rho_;
  double log_z_ = 0;
  double e0_ = 0;
};

cplx thermal_average(const FockSpace& space, const FockOperator& H, const FockOperator& O, double beta);

struct CorrelationQuery {
  int m_hat = 1;
  std::vector<std::vector<int>> X, Y;  // sites in Z^d, taken mod L
  std::vector<int> Xi, Phi;

  void validate(int d) const;
};

// O(X,Y,Xi,Phi) + O(Y,X,Phi,Xi) for the query.
FockOperator correlation_operator(const FockSpace& space, const LatticeSpec& spec, const CorrelationQuery& q);

cplx correlation(const FockSpace& space, const LatticeSpec& spec, const ModelParams& p,
                 const InteractionCoefficients& u, const CorrelationQuery& q, bool allow_trivial = false);

struct LambdaDerivativeReport {
  double finite_difference;
  cplx direct;
  double deviation;
};

// Central difference of -(1/beta) log(Tr e^{-beta H_lambda} / Tr e^{-beta H_0}) in the single
// entry lambda(X,Y,Xi,Phi) at lambda = 0, against correlation(q).
LambdaDerivativeReport lambda_derivative_check(const FockSpace& space, const LatticeSpec& spec,
                                               const ModelParams& p, const InteractionCoefficients& u,
                                               const CorrelationQuery& q, double step);

}  // namespace fermi
