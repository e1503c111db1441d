#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "fermi/covariance.hpp"
#include "fermi/fock.hpp"
#include "fermi/model.hpp"

namespace fermi {

// Generators psi-bar_a (bar = true) and psi_a indexed by the global space-time index.
struct Gen {
  bool bar;
  int idx;
};

// The N = 2L^d * beta h space-time points of a lattice and time grid.
struct GrassmannIndexSpace {
  static constexpr int kMaxWickPoints = 24;

  GrassmannIndexSpace(LatticeSpec spec, TimeGrid grid);

  LatticeSpec spec;
  TimeGrid grid;

  int size() const { return spec.mode_count() * grid.steps(); }
  int index(int site, int spin, int step) const { return step * spec.mode_count() + mode_index(site, spin); }
};

// det(G(j_u, p_v)), i.e. the Gaussian integral of psibar_{j_k}..psibar_{j_1} psi_{p_1}..psi_{p_k}.
// Lists of different length give 0.
cplx wick_expectation(const std::vector<int>& barred, const std::vector<int>& unbarred, const CMatrix& G);

// Gaussian integral of an arbitrary ordered product of generators.
cplx integrate_monomial(const std::vector<Gen>& word, const CMatrix& G);

// Polynomial in 2N generators.  Bit i of a mask is psibar_i, bit N+i is psi_i;
// a stored monomial is the product of its generators in ascending bit order.
class GrassmannPolynomial {
 public:
  static constexpr int kMaxGenerators = 10;

  explicit GrassmannPolynomial(int n);
  static GrassmannPolynomial constant(int n, cplx c);
  static GrassmannPolynomial monomial(int n, const std::vector<Gen>& word, cplx coeff = 1.0);

  int n() const { return n_; }
  const std::unordered_map<std::uint32_t, cplx>& terms() const { return terms_; }
  cplx coefficient(std::uint32_t mask) const;

  GrassmannPolynomial& operator+=(const GrassmannPolynomial& o);
  GrassmannPolynomial operator*(const GrassmannPolynomial& o) const;
  GrassmannPolynomial operator*(cplx c) const;

  // Plain Berezin integral: the coefficient of the full mask.
  cplx berezin() const;

 private:
  void add(std::uint32_t mask, cplx c);

  int n_;
  std::unordered_map<std::uint32_t, cplx> terms_;
};

// Sign of moving the ascending product of mask b to the right of mask a.
int merge_sign(std::uint32_t a, std::uint32_t b);

// int f e^{-<psi, G^{-1} psibar>} / int e^{-<psi, G^{-1} psibar>} by full expansion.
cplx berezin_gaussian(const GrassmannPolynomial& f, const CMatrix& G);

// coeff * psibar_{x1 xi1 s}..psibar_{xl xil s} psi_{yl phil s}..psi_{y1 phi1 s}.
struct Vertex {
  cplx coeff;
  std::vector<Gen> word;
  std::uint64_t mask = 0;  // barred points in the low 32 bits, unbarred in the high 32
};

// U_lambda,l(X, Y, Xi, Phi) with global site indices.
using CouplingKey = std::tuple<std::vector<int>, std::vector<int>, std::vector<int>, std::vector<int>>;
using CouplingTable = std::map<CouplingKey, cplx>;

// U_{L,l}(X,Xi,Phi) on the diagonal Y = X plus lambda(X,Y,Xi,Phi) + lambda(Y,X,Phi,Xi).
CouplingTable coupling_table(const FiniteInteraction& u, const LambdaCoefficients* lambda = nullptr);

// U * V^l_{h,X,Y,Xi,Phi}: one vertex per grid time with coefficient -U/h.
std::vector<Vertex> make_vertices(const GrassmannIndexSpace& space, const CouplingTable& table);

// a_m = sum over m-subsets S of vertices of int O prod_{v in S} v dmu_G, for m <= m_max.
// An empty observable list stands for O = 1.
std::vector<cplx> coupled_moments(const std::vector<Vertex>& observable, const std::vector<Vertex>& vertices,
                                  const CMatrix& G, int m_max);

struct PartitionResult {
  cplx value;
  double tail_bound;  // 0 for the complete sum
  int terms_order;    // largest m included
};

// 1 + sum_m (-1)^m sum over m-subsets of (key, time) of prod (U/h) det C_h(x~_p, y~_q).
PartitionResult discrete_partition(const GrassmannIndexSpace& space, const ModelParams& p,
                                   const FiniteInteraction& u, const LambdaCoefficients* lambda = nullptr,
                                   std::optional<int> m_max = std::nullopt);

// int e^{eta sum U V} dmu_{C_h}, expanded over products of distinct vertices.
cplx partition_via_exponential(const GrassmannIndexSpace& space, const ModelParams& p, const FiniteInteraction& u,
                               cplx eta, const LambdaCoefficients* lambda = nullptr);

struct EtaSeries {
  std::vector<cplx> coefficients;
  cplx evaluate(cplx eta) const;
};

// Power-series quotient a / b to order m_max; b_0 must be nonzero.
EtaSeries series_divide(const std::vector<cplx>& a, const std::vector<cplx>& b, int m_max);

struct SchwingerSeries {
  EtaSeries numerator;    // int V^{m_hat}_{h,X,Y} e^{eta ...} dmu
  EtaSeries denominator;  // int e^{eta ...} dmu
  EtaSeries b;            // Taylor coefficients of S(G_h, eta)
};

// Observable vertices V^{m_hat}_{h,X,Y,Xi,Phi} for a query reduced to the lattice.
std::vector<Vertex> observable_vertices(const GrassmannIndexSpace& space, const CorrelationQuery& q,
                                        bool reversed = false);

SchwingerSeries schwinger_taylor(const GrassmannIndexSpace& space, const ModelParams& p, const FiniteInteraction& u,
                                 const CorrelationQuery& q, int m_max, const CMatrix* G = nullptr);

struct GrassmannCorrelation {
  int half_steps;
  cplx value;
  cplx denominator;
};

// S_{X,Y,Xi,Phi}(C_h, 1) + S_{Y,X,Phi,Xi}(C_h, 1) for each grid.
std::vector<GrassmannCorrelation> correlation_via_grassmann(const LatticeSpec& spec, const ModelParams& p,
                                                            const InteractionCoefficients& u,
                                                            const CorrelationQuery& q,
                                                            const std::vector<int>& half_steps);

// U psi*_{x up} psi*_{x down} psi_{x down} psi_{x up} at one site only.
FiniteInteraction pinned_hubbard(const LatticeSpec& spec, double U, int site);

enum class HubbardVariant { Pinned, FullLattice };

// c_m: Taylor coefficients of the m_hat = 2, spins (up, down) Schwinger function with the
// on-site interaction either pinned at `site` or summed over the lattice.
EtaSeries hubbard_coefficients(const GrassmannIndexSpace& space, const ModelParams& p, double U,
                               const std::vector<std::vector<int>>& x_hat,
                               const std::vector<std::vector<int>>& y_hat, int m_max,
                               HubbardVariant variant, int site = 0);

}  // namespace fermi
