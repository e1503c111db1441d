#include "fermi/fock.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>

namespace fermi {

namespace {

// Dense diagonalization cap; 2^12 states is 12 modes, i.e. L^d = 6.
constexpr std::size_t kMaxDenseDimension = std::size_t{1} << 12;

struct Op {
  int mode;
  bool create;
};

// Applies ops right to left.  Returns false if the state is annihilated.
bool apply(const std::vector<Op>& ops, std::uint32_t& state, int& sign) {
  for (auto it = ops.rbegin(); it != ops.rend(); ++it) {
    const std::uint32_t bit = std::uint32_t{1} << it->mode;
    const bool occupied = state & bit;
    if (occupied == it->create) return false;
    if (std::popcount(state & (bit - 1)) & 1) sign = -sign;
    state ^= bit;
  }
  return true;
}

void check_mode(const FockSpace& space, int mode) {
  if (mode < 0 || mode >= space.mode_count())
    throw std::out_of_range("mode " + std::to_string(mode) + " outside [0, " +
                            std::to_string(space.mode_count()) + ")");
}

void add_word(const FockSpace& space, const std::vector<Op>& ops, cplx coeff,
              std::vector<Eigen::Triplet<cplx>>& out) {
  for (const Op& o : ops) check_mode(space, o.mode);
  const auto dim = static_cast<std::uint32_t>(space.dimension());
  for (std::uint32_t s = 0; s < dim; ++s) {
    std::uint32_t t = s;
    int sign = 1;
    if (apply(ops, t, sign)) out.emplace_back(static_cast<int>(t), static_cast<int>(s), coeff * double(sign));
  }
}

std::vector<Op> word(const std::vector<int>& create, const std::vector<int>& annihilate) {
  std::vector<Op> ops;
  for (int c : create) ops.push_back({c, true});
  for (int a : annihilate) ops.push_back({a, false});
  return ops;
}

FockOperator from_triplets(const FockSpace& space, const std::vector<Eigen::Triplet<cplx>>& t) {
  const auto n = static_cast<Eigen::Index>(space.dimension());
  FockOperator m(n, n);
  m.setFromTriplets(t.begin(), t.end());
  m.prune(cplx(0.0));
  return m;
}

// Modes of psi*_{x1 xi1}..psi*_{xl xil} and psi_{yl phil}..psi_{y1 phi1}.
void pair_word(const std::vector<int>& X, const std::vector<int>& Y, const std::vector<int>& Xi,
               const std::vector<int>& Phi, std::vector<int>& create, std::vector<int>& annihilate) {
  const std::size_t l = X.size();
  if (Y.size() != l || Xi.size() != l || Phi.size() != l) throw std::invalid_argument("ragged operator word");
  create.clear();
  annihilate.clear();
  for (std::size_t k = 0; k < l; ++k) create.push_back(mode_index(X[k], Xi[k]));
  for (std::size_t k = l; k-- > 0;) annihilate.push_back(mode_index(Y[k], Phi[k]));
}

}  // namespace

FockSpace::FockSpace(int mode_count) : modes_(mode_count) {
  if (mode_count < 1 || mode_count > kMaxModes)
    throw std::length_error("Fock space needs 1.." + std::to_string(kMaxModes) + " modes, got " +
                            std::to_string(mode_count));
}

FockSpace FockSpace::for_lattice(const LatticeSpec& spec) {
  validate(spec);
  return FockSpace(spec.mode_count());
}

FockOperator mode_operator(const FockSpace& space, int mode, OpKind kind) {
  std::vector<Eigen::Triplet<cplx>> t;
  add_word(space, {{mode, kind == OpKind::Create}}, 1.0, t);
  return from_triplets(space, t);
}

FockOperator monomial_operator(const FockSpace& space, const std::vector<int>& create,
                               const std::vector<int>& annihilate) {
  std::vector<Eigen::Triplet<cplx>> t;
  add_word(space, word(create, annihilate), 1.0, t);
  return from_triplets(space, t);
}

FockOperator number_operator(const FockSpace& space) {
  std::vector<Eigen::Triplet<cplx>> t;
  for (int a = 0; a < space.mode_count(); ++a) add_word(space, {{a, true}, {a, false}}, 1.0, t);
  return from_triplets(space, t);
}

FockOperator free_hamiltonian(const FockSpace& space, const LatticeSpec& spec, const ModelParams& p,
                              bool allow_trivial) {
  if (spec.mode_count() != space.mode_count()) throw std::invalid_argument("lattice and Fock space differ");
  const CMatrix T = hopping_matrix(spec, p, allow_trivial);
  std::vector<Eigen::Triplet<cplx>> t;
  for (int a = 0; a < T.rows(); ++a)
    for (int b = 0; b < T.cols(); ++b)
      if (T(a, b) != 0.0) add_word(space, {{a, true}, {b, false}}, T(a, b), t);
  return from_triplets(space, t);
}

FockOperator interaction_operator(const FockSpace& space, const FiniteInteraction& u) {
  std::vector<Eigen::Triplet<cplx>> t;
  std::vector<int> c, a;
  for (const auto& [l, entries] : u.orders)
    for (const FiniteEntry& e : entries) {
      if (e.value == 0.0) continue;
      pair_word(e.sites, e.sites, e.Xi, e.Phi, c, a);
      add_word(space, word(c, a), e.value, t);
    }
  return from_triplets(space, t);
}

FockOperator pair_operator(const FockSpace& space, const std::vector<int>& X, const std::vector<int>& Y,
                           const std::vector<int>& Xi, const std::vector<int>& Phi) {
  std::vector<int> c, a;
  pair_word(X, Y, Xi, Phi, c, a);
  return monomial_operator(space, c, a);
}

FockOperator lambda_operator(const FockSpace& space, const LambdaCoefficients& lambda) {
  std::vector<Eigen::Triplet<cplx>> t;
  std::vector<int> c, a;
  for (const auto& [k, v] : lambda.values) {
    if (static_cast<int>(k.X.size()) != lambda.m_hat) throw std::invalid_argument("lambda entry of wrong order");
    pair_word(k.X, k.Y, k.Xi, k.Phi, c, a);
    add_word(space, word(c, a), v, t);
    pair_word(k.Y, k.X, k.Phi, k.Xi, c, a);
    add_word(space, word(c, a), v, t);
  }
  return from_triplets(space, t);
}

FockOperator build_hamiltonian(const FockSpace& space, const LatticeSpec& spec, const ModelParams& p,
                               const InteractionCoefficients& u, const LambdaCoefficients* lambda,
                               bool allow_trivial) {
  FockOperator H = free_hamiltonian(space, spec, p, allow_trivial);
  if (!u.empty()) H += interaction_operator(space, restrict_interaction(u, spec));
  if (lambda) H += lambda_operator(space, *lambda);
  return H;
}

double max_antihermitian(const FockOperator& H) {
  const FockOperator D = H - FockOperator(H.adjoint());
  double m = 0.0;
  for (int k = 0; k < D.outerSize(); ++k)
    for (FockOperator::InnerIterator it(D, k); it; ++it) m = std::max(m, std::abs(it.value()));
  return m;
}

ThermalState::ThermalState(const FockOperator& H, double beta) {
  if (H.rows() != H.cols()) throw std::invalid_argument("Hamiltonian must be square");
  if (static_cast<std::size_t>(H.rows()) > kMaxDenseDimension)
    throw std::length_error("Fock dimension too large for dense diagonalization");
  if (!(beta > 0)) throw std::invalid_argument("beta must be positive");
  const Eigen::MatrixXcd dense(H);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(dense);
  if (es.info() != Eigen::Success) throw std::runtime_error("eigendecomposition failed");
  const Eigen::VectorXd& E = es.eigenvalues();
  e0_ = E.minCoeff();
  Eigen::VectorXd w = (-beta * (E.array() - e0_)).exp();
  const double z = w.sum();
  log_z_ = -beta * e0_ + std::log(z);
  w /= z;
  const Eigen::MatrixXcd& V = es.eigenvectors();
  rho_ = V * w.asDiagonal() * V.adjoint();
}

cplx ThermalState::average(const FockOperator& O) const {
  if (O.rows() != rho_.rows() || O.cols() != rho_.cols()) throw std::invalid_argument("dimension mismatch");
  cplx tr = 0.0;
  for (int k = 0; k < O.outerSize(); ++k)
    for (FockOperator::InnerIterator it(O, k); it; ++it) tr += it.value() * rho_(it.col(), it.row());
  return tr;
}

cplx thermal_average(const FockSpace& space, const FockOperator& H, const FockOperator& O, double beta) {
  if (static_cast<std::size_t>(H.rows()) != space.dimension()) throw std::invalid_argument("dimension mismatch");
  return ThermalState(H, beta).average(O);
}

void CorrelationQuery::validate(int d) const {
  const auto n = static_cast<std::size_t>(m_hat);
  if (m_hat < 1) throw std::invalid_argument("m_hat must be >= 1");
  if (X.size() != n || Y.size() != n || Xi.size() != n || Phi.size() != n)
    throw std::invalid_argument("query lists must all have length m_hat");
  for (const auto* v : {&X, &Y})
    for (const auto& x : *v)
      if (static_cast<int>(x.size()) != d) throw std::invalid_argument("query site of wrong dimension");
  for (const auto* v : {&Xi, &Phi})
    for (int s : *v)
      if (s != Up && s != Down) throw std::invalid_argument("query spin must be 0 or 1");
}

FockOperator correlation_operator(const FockSpace& space, const LatticeSpec& spec, const CorrelationQuery& q) {
  q.validate(spec.d);
  LambdaCoefficients one;
  one.m_hat = q.m_hat;
  LambdaKey key;
  for (int j = 0; j < q.m_hat; ++j) {
    key.X.push_back(site_index(spec, q.X[j]));
    key.Y.push_back(site_index(spec, q.Y[j]));
  }
  key.Xi = q.Xi;
  key.Phi = q.Phi;
  one.values[key] = 1.0;
  return lambda_operator(space, one);
}

cplx correlation(const FockSpace& space, const LatticeSpec& spec, const ModelParams& p,
                 const InteractionCoefficients& u, const CorrelationQuery& q, bool allow_trivial) {
  const FockOperator H = build_hamiltonian(space, spec, p, u, nullptr, allow_trivial);
  return thermal_average(space, H, correlation_operator(space, spec, q), p.beta);
}

LambdaDerivativeReport lambda_derivative_check(const FockSpace& space, const LatticeSpec& spec,
                                               const ModelParams& p, const InteractionCoefficients& u,
                                               const CorrelationQuery& q, double step) {
  if (!(step > 0)) throw std::invalid_argument("step must be positive");
  const FockOperator H = build_hamiltonian(space, spec, p, u);
  const FockOperator O = correlation_operator(space, spec, q);
  auto free_energy = [&](double lam) {
    return -ThermalState(FockOperator(H + lam * O), p.beta).log_partition() / p.beta;
  };
  LambdaDerivativeReport r;
  // The H_0 normalization cancels in the difference.
  r.finite_difference = (free_energy(step) - free_energy(-step)) / (2.0 * step);
  r.direct = ThermalState(H, p.beta).average(O);
  r.deviation = std::abs(r.direct - r.finite_difference);
  return r;
}

}  // namespace fermi
