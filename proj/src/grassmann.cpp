#include "fermi/grassmann.hpp"

#include <atomic>
#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/LU>

#include "fermi/parallel.hpp"

namespace fermi {

namespace {

// Upper limit on visited vertex subsets per call.
constexpr long long kMaxSubsets = 50'000'000;

std::uint64_t gen_bit(const Gen& g) { return std::uint64_t{1} << (g.idx + (g.bar ? 0 : 32)); }

void check_grid_index(const GrassmannIndexSpace& space, int idx) {
  if (idx < 0 || idx >= space.size()) throw std::out_of_range("space-time index out of range");
}

}  // namespace

GrassmannIndexSpace::GrassmannIndexSpace(LatticeSpec spec_, TimeGrid grid_) : spec(spec_), grid(grid_) {
  validate(spec);
  time_grid(grid.beta, grid.half_steps);
  if (size() % 4 != 0) throw std::logic_error("generator count must be a multiple of 4");
  if (size() > kMaxWickPoints)
    throw std::length_error("Grassmann index space of " + std::to_string(size()) + " points exceeds " +
                            std::to_string(kMaxWickPoints));
}

cplx wick_expectation(const std::vector<int>& barred, const std::vector<int>& unbarred, const CMatrix& G) {
  if (barred.size() != unbarred.size()) return 0.0;
  const auto k = static_cast<Eigen::Index>(barred.size());
  if (k == 0) return 1.0;
  for (Eigen::Index u = 0; u < k; ++u)
    for (Eigen::Index v = u + 1; v < k; ++v)
      if (barred[u] == barred[v] || unbarred[u] == unbarred[v]) return 0.0;
  CMatrix M(k, k);
  for (Eigen::Index u = 0; u < k; ++u)
    for (Eigen::Index v = 0; v < k; ++v) M(u, v) = G(barred[u], unbarred[v]);
  if (k == 1) return M(0, 0);
  return Eigen::PartialPivLU<CMatrix>(M).determinant();
}

cplx integrate_monomial(const std::vector<Gen>& word, const CMatrix& G) {
  std::vector<int> bars, unbars;
  int swaps = 0;
  for (const Gen& g : word) {
    if (g.bar) {
      bars.push_back(g.idx);
      swaps += static_cast<int>(unbars.size());
    } else {
      unbars.push_back(g.idx);
    }
  }
  if (bars.size() != unbars.size()) return 0.0;
  // psibar_{b_1}..psibar_{b_k} psi.. is the Wick determinant with rows b_k, .., b_1.
  const std::vector<int> rows(bars.rbegin(), bars.rend());
  const cplx w = wick_expectation(rows, unbars, G);
  return (swaps & 1) ? -w : w;
}

GrassmannPolynomial::GrassmannPolynomial(int n) : n_(n) {
  if (n < 1 || n > kMaxGenerators)
    throw std::length_error("Berezin engine supports 1.." + std::to_string(kMaxGenerators) + " points");
}

GrassmannPolynomial GrassmannPolynomial::constant(int n, cplx c) {
  GrassmannPolynomial p(n);
  p.add(0, c);
  return p;
}

GrassmannPolynomial GrassmannPolynomial::monomial(int n, const std::vector<Gen>& word, cplx coeff) {
  GrassmannPolynomial p(n);
  std::uint32_t mask = 0;
  int sign = 1;
  for (const Gen& g : word) {
    if (g.idx < 0 || g.idx >= n) throw std::out_of_range("generator index out of range");
    const std::uint32_t bit = std::uint32_t{1} << (g.bar ? g.idx : n + g.idx);
    if (mask & bit) return p;
    if (std::popcount(mask & ~((bit << 1) - 1)) & 1) sign = -sign;
    mask |= bit;
  }
  p.add(mask, coeff * double(sign));
  return p;
}

cplx GrassmannPolynomial::coefficient(std::uint32_t mask) const {
  auto it = terms_.find(mask);
  return it == terms_.end() ? cplx(0.0) : it->second;
}

void GrassmannPolynomial::add(std::uint32_t mask, cplx c) {
  if (c == 0.0) return;
  auto [it, fresh] = terms_.try_emplace(mask, c);
  if (!fresh) {
    it->second += c;
    if (it->second == 0.0) terms_.erase(it);
  }
}

GrassmannPolynomial& GrassmannPolynomial::operator+=(const GrassmannPolynomial& o) {
  if (o.n_ != n_) throw std::invalid_argument("polynomials over different generator sets");
  for (const auto& [m, c] : o.terms_) add(m, c);
  return *this;
}

int merge_sign(std::uint32_t a, std::uint32_t b) {
  int count = 0;
  for (std::uint32_t rest = b; rest; rest &= rest - 1) {
    const std::uint32_t bit = rest & (~rest + 1);
    count += std::popcount(a & ~((bit << 1) - 1));
  }
  return (count & 1) ? -1 : 1;
}

GrassmannPolynomial GrassmannPolynomial::operator*(const GrassmannPolynomial& o) const {
  if (o.n_ != n_) throw std::invalid_argument("polynomials over different generator sets");
  GrassmannPolynomial r(n_);
  for (const auto& [a, ca] : terms_)
    for (const auto& [b, cb] : o.terms_)
      if ((a & b) == 0) r.add(a | b, ca * cb * double(merge_sign(a, b)));
  return r;
}

GrassmannPolynomial GrassmannPolynomial::operator*(cplx c) const {
  GrassmannPolynomial r(n_);
  for (const auto& [m, v] : terms_) r.add(m, v * c);
  return r;
}

cplx GrassmannPolynomial::berezin() const { return coefficient((std::uint32_t{1} << (2 * n_)) - 1); }

cplx berezin_gaussian(const GrassmannPolynomial& f, const CMatrix& G) {
  const int n = f.n();
  if (G.rows() != n || G.cols() != n) throw std::invalid_argument("covariance size does not match polynomial");
  Eigen::FullPivLU<CMatrix> lu(G);
  if (!lu.isInvertible()) throw std::domain_error("singular covariance");
  const CMatrix Ginv = lu.inverse();

  GrassmannPolynomial Q(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) Q += GrassmannPolynomial::monomial(n, {{false, i}, {true, j}}, -Ginv(i, j));
  GrassmannPolynomial expQ = GrassmannPolynomial::constant(n, 1.0);
  GrassmannPolynomial term = expQ;
  for (int k = 1; k <= n; ++k) {
    term = term * Q * cplx(1.0 / k);
    expQ += term;
  }
  const std::uint32_t full = (std::uint32_t{1} << (2 * n)) - 1;
  const cplx z = expQ.coefficient(full);
  cplx num = 0.0;
  for (const auto& [m, c] : f.terms()) {
    const std::uint32_t rest = full ^ m;
    num += c * double(merge_sign(m, rest)) * expQ.coefficient(rest);
  }
  return num / z;
}

CouplingTable coupling_table(const FiniteInteraction& u, const LambdaCoefficients* lambda) {
  CouplingTable t;
  for (const auto& [l, entries] : u.orders)
    for (const FiniteEntry& e : entries) t[{e.sites, e.sites, e.Xi, e.Phi}] += e.value;
  if (lambda)
    for (const auto& [k, v] : lambda->values) {
      t[{k.X, k.Y, k.Xi, k.Phi}] += v;
      t[{k.Y, k.X, k.Phi, k.Xi}] += v;
    }
  for (auto it = t.begin(); it != t.end();) it = it->second == 0.0 ? t.erase(it) : std::next(it);
  return t;
}

namespace {

Vertex vertex_at(const GrassmannIndexSpace& space, const CouplingKey& key, cplx coeff, int step) {
  const auto& [X, Y, Xi, Phi] = key;
  const std::size_t l = X.size();
  if (Y.size() != l || Xi.size() != l || Phi.size() != l || l == 0) throw std::invalid_argument("ragged vertex");
  Vertex v{coeff, {}, 0};
  for (std::size_t k = 0; k < l; ++k) v.word.push_back({true, space.index(X[k], Xi[k], step)});
  for (std::size_t k = l; k-- > 0;) v.word.push_back({false, space.index(Y[k], Phi[k], step)});
  for (const Gen& g : v.word) {
    check_grid_index(space, g.idx);
    const std::uint64_t b = gen_bit(g);
    if (v.mask & b) v.coeff = 0.0;  // repeated generator: the monomial vanishes
    v.mask |= b;
  }
  return v;
}

}  // namespace

std::vector<Vertex> make_vertices(const GrassmannIndexSpace& space, const CouplingTable& table) {
  std::vector<Vertex> out;
  const double h = space.grid.h();
  for (const auto& [key, U] : table)
    for (int s = 0; s < space.grid.steps(); ++s) {
      Vertex v = vertex_at(space, key, -U / h, s);
      if (v.coeff != 0.0) out.push_back(std::move(v));
    }
  return out;
}

std::vector<cplx> coupled_moments(const std::vector<Vertex>& observable, const std::vector<Vertex>& vertices,
                                  const CMatrix& G, int m_max) {
  if (m_max < 0) throw std::invalid_argument("m_max must be >= 0");
  const Vertex unit{1.0, {}, 0};
  const std::vector<Vertex> obs = observable.empty() ? std::vector<Vertex>{unit} : observable;
  const int nv = static_cast<int>(vertices.size());
  // One task per (observable term, smallest vertex in the subset or none).
  const std::size_t per_obs = static_cast<std::size_t>(nv) + 1;
  std::vector<std::vector<cplx>> partial(obs.size() * per_obs, std::vector<cplx>(m_max + 1, 0.0));
  std::atomic<long long> visited{0};

  parallel_for(partial.size(), [&](std::size_t task) {
    const Vertex& o = obs[task / per_obs];
    const int first = static_cast<int>(task % per_obs) - 1;
    auto& acc = partial[task];
    std::vector<Gen> word = o.word;
    if (first < 0) {
      acc[0] += o.coeff * integrate_monomial(word, G);
      return;
    }
    if (m_max < 1 || (vertices[first].mask & o.mask)) return;
    auto dfs = [&](auto&& self, int last, int depth, std::uint64_t mask, cplx coeff) -> void {
      if (++visited > kMaxSubsets) throw std::length_error("vertex expansion exceeds the feasibility cap");
      acc[depth] += coeff * integrate_monomial(word, G);
      if (depth == m_max) return;
      for (int j = last + 1; j < nv; ++j) {
        const Vertex& v = vertices[j];
        if (v.mask & mask) continue;
        const std::size_t keep = word.size();
        word.insert(word.end(), v.word.begin(), v.word.end());
        self(self, j, depth + 1, mask | v.mask, coeff * v.coeff);
        word.resize(keep);
      }
    };
    const Vertex& v0 = vertices[first];
    word.insert(word.end(), v0.word.begin(), v0.word.end());
    dfs(dfs, first, 1, o.mask | v0.mask, o.coeff * v0.coeff);
  });

  std::vector<cplx> a(m_max + 1, 0.0);
  for (const auto& p : partial)
    for (int m = 0; m <= m_max; ++m) a[m] += p[m];
  return a;
}

PartitionResult discrete_partition(const GrassmannIndexSpace& space, const ModelParams& p,
                                   const FiniteInteraction& u, const LambdaCoefficients* lambda,
                                   std::optional<int> m_max) {
  if (u.spec.site_count() != space.spec.site_count()) throw std::invalid_argument("interaction lattice differs");
  const CMatrix C = covariance_matrix(Covariance(space.spec, p), space.grid);
  const CouplingTable table = coupling_table(u, lambda);
  const double h = space.grid.h();

  struct Item {
    cplx weight;  // U / h
    std::vector<int> rows, cols;
    std::uint64_t mask;
  };
  std::vector<Item> items;
  double r = 0.0;
  int min_order = 0;
  for (const auto& [key, U] : table) {
    const auto& [X, Y, Xi, Phi] = key;
    r += std::abs(U) * p.beta * std::pow(4.0, static_cast<double>(X.size()));
    min_order = min_order == 0 ? static_cast<int>(X.size()) : std::min<int>(min_order, X.size());
    for (int s = 0; s < space.grid.steps(); ++s) {
      Item it{U / h, {}, {}, 0};
      for (std::size_t k = 0; k < X.size(); ++k) {
        it.rows.push_back(space.index(X[k], Xi[k], s));
        it.cols.push_back(space.index(Y[k], Phi[k], s));
      }
      bool zero = false;
      for (int a : it.rows) {
        const std::uint64_t b = std::uint64_t{1} << a;
        zero = zero || (it.mask & b);
        it.mask |= b;
      }
      for (int c : it.cols) {
        const std::uint64_t b = std::uint64_t{1} << (32 + c);
        zero = zero || (it.mask & b);
        it.mask |= b;
      }
      if (!zero) items.push_back(std::move(it));
    }
  }

  // No determinant larger than N survives, so the series ends at N / min l.
  const int natural = min_order == 0 ? 0 : space.size() / min_order;
  const int order = m_max ? std::min(*m_max, natural) : natural;
  const int n = static_cast<int>(items.size());
  std::vector<cplx> partial(static_cast<std::size_t>(n), 0.0);
  std::atomic<long long> visited{0};
  parallel_for(partial.size(), [&](std::size_t first) {
    std::vector<int> rows, cols;
    auto dfs = [&](auto&& self, int last, int depth, std::uint64_t mask, cplx w) -> void {
      if (++visited > kMaxSubsets) throw std::length_error("perturbation series exceeds the feasibility cap");
      const cplx d = wick_expectation(rows, cols, C);
      partial[first] += ((depth & 1) ? -1.0 : 1.0) * w * d;
      if (depth == order) return;
      for (int j = last + 1; j < n; ++j) {
        const Item& it = items[j];
        if (it.mask & mask) continue;  // repeated row or column: determinant is 0
        const std::size_t keep = rows.size();
        rows.insert(rows.end(), it.rows.begin(), it.rows.end());
        cols.insert(cols.end(), it.cols.begin(), it.cols.end());
        self(self, j, depth + 1, mask | it.mask, w * it.weight);
        rows.resize(keep);
        cols.resize(keep);
      }
    };
    const Item& it = items[first];
    if (order < 1) return;
    rows = it.rows;
    cols = it.cols;
    dfs(dfs, static_cast<int>(first), 1, it.mask, it.weight);
  });

  PartitionResult out{1.0, 0.0, order};
  for (const cplx& v : partial) out.value += v;
  if (m_max && *m_max < natural) {
    // Majorant: the m-th term is at most r^m / m! with |det| <= 4^{sum l}.
    double term = 1.0, tail = 0.0;
    for (int m = 1; m <= *m_max; ++m) term *= r / m;
    for (int m = *m_max + 1; m <= natural; ++m) {
      term *= r / m;
      tail += term;
      if (term < 1e-300) break;
    }
    out.tail_bound = tail;
  }
  return out;
}

cplx partition_via_exponential(const GrassmannIndexSpace& space, const ModelParams& p, const FiniteInteraction& u,
                               cplx eta, const LambdaCoefficients* lambda) {
  const CMatrix C = covariance_matrix(Covariance(space.spec, p), space.grid);
  const auto verts = make_vertices(space, coupling_table(u, lambda));
  const auto a = coupled_moments({}, verts, C, static_cast<int>(verts.size()));
  return EtaSeries{a}.evaluate(eta);
}

cplx EtaSeries::evaluate(cplx eta) const {
  cplx v = 0.0;
  for (auto it = coefficients.rbegin(); it != coefficients.rend(); ++it) v = v * eta + *it;
  return v;
}

EtaSeries series_divide(const std::vector<cplx>& a, const std::vector<cplx>& b, int m_max) {
  if (b.empty() || b[0] == 0.0) throw std::domain_error("series division by a series vanishing at 0");
  auto at = [](const std::vector<cplx>& v, int k) { return k < static_cast<int>(v.size()) ? v[k] : cplx(0.0); };
  EtaSeries q;
  q.coefficients.resize(m_max + 1);
  for (int m = 0; m <= m_max; ++m) {
    cplx s = at(a, m);
    for (int k = 1; k <= m; ++k) s -= at(b, k) * q.coefficients[m - k];
    q.coefficients[m] = s / b[0];
  }
  return q;
}

std::vector<Vertex> observable_vertices(const GrassmannIndexSpace& space, const CorrelationQuery& q, bool reversed) {
  q.validate(space.spec.d);
  std::vector<int> X, Y;
  for (int j = 0; j < q.m_hat; ++j) {
    X.push_back(site_index(space.spec, q.X[j]));
    Y.push_back(site_index(space.spec, q.Y[j]));
  }
  const CouplingKey key = reversed ? CouplingKey{Y, X, q.Phi, q.Xi} : CouplingKey{X, Y, q.Xi, q.Phi};
  std::vector<Vertex> out;
  for (int s = 0; s < space.grid.steps(); ++s) {
    Vertex v = vertex_at(space, key, -1.0 / space.grid.h(), s);
    if (v.coeff != 0.0) out.push_back(std::move(v));
  }
  return out;
}

SchwingerSeries schwinger_taylor(const GrassmannIndexSpace& space, const ModelParams& p, const FiniteInteraction& u,
                                 const CorrelationQuery& q, int m_max, const CMatrix* G) {
  if (m_max < 0) throw std::invalid_argument("m_max must be >= 0");
  const CMatrix C = G ? *G : covariance_matrix(Covariance(space.spec, p), space.grid);
  if (C.rows() != space.size()) throw std::invalid_argument("covariance size does not match index space");
  const auto verts = make_vertices(space, coupling_table(u));
  SchwingerSeries out;
  out.numerator.coefficients = coupled_moments(observable_vertices(space, q), verts, C, m_max);
  out.denominator.coefficients = coupled_moments({}, verts, C, m_max);
  out.b = series_divide(out.numerator.coefficients, out.denominator.coefficients, m_max);
  for (cplx& c : out.b.coefficients) c *= -1.0 / p.beta;
  return out;
}

std::vector<GrassmannCorrelation> correlation_via_grassmann(const LatticeSpec& spec, const ModelParams& p,
                                                            const InteractionCoefficients& u,
                                                            const CorrelationQuery& q,
                                                            const std::vector<int>& half_steps) {
  const FiniteInteraction fu = restrict_interaction(u, spec);
  std::vector<GrassmannCorrelation> out;
  for (int hs : half_steps) {
    const GrassmannIndexSpace space(spec, time_grid(p.beta, hs));
    const CMatrix C = covariance_matrix(Covariance(spec, p), space.grid);
    const auto verts = make_vertices(space, coupling_table(fu));
    const int full = static_cast<int>(verts.size());
    const cplx den = EtaSeries{coupled_moments({}, verts, C, full)}.evaluate(1.0);
    if (std::abs(den) < 1e-12)
      throw std::runtime_error("Grassmann denominator below 1e-12 at half_steps = " + std::to_string(hs));
    const cplx nxy = EtaSeries{coupled_moments(observable_vertices(space, q), verts, C, full)}.evaluate(1.0);
    const cplx nyx = EtaSeries{coupled_moments(observable_vertices(space, q, true), verts, C, full)}.evaluate(1.0);
    out.push_back({hs, -(nxy + nyx) / (p.beta * den), den});
  }
  return out;
}

FiniteInteraction pinned_hubbard(const LatticeSpec& spec, double U, int site) {
  validate(spec);
  if (site < 0 || site >= spec.site_count()) throw std::out_of_range("pinned site out of range");
  FiniteInteraction u;
  u.spec = spec;
  u.orders[2].push_back(FiniteEntry{{site, site}, {Up, Down}, {Up, Down}, U});
  return u;
}

EtaSeries hubbard_coefficients(const GrassmannIndexSpace& space, const ModelParams& p, double U,
                               const std::vector<std::vector<int>>& x_hat,
                               const std::vector<std::vector<int>>& y_hat, int m_max, HubbardVariant variant,
                               int site) {
  CorrelationQuery q;
  q.m_hat = 2;
  q.X = x_hat;
  q.Y = y_hat;
  q.Xi = {Up, Down};
  q.Phi = {Up, Down};
  const FiniteInteraction u = variant == HubbardVariant::Pinned
                                  ? pinned_hubbard(space.spec, U, site)
                                  : restrict_interaction(hubbard(space.spec.d, U), space.spec);
  return schwinger_taylor(space, p, u, q, m_max).b;
}

}  // namespace fermi
