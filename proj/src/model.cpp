#include "fermi/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "fermi/covariance.hpp"

namespace fermi {

double hopping_strength(const ModelParams& p, int d) {
  return std::abs(p.t) + (d >= 2 ? std::abs(p.t_prime) : 0.0);
}

double hopping_scale(const ModelParams& p, int d) {
  return std::abs(p.t) + 2.0 * (d - 1) * std::abs(p.t_prime);
}

void validate(const ModelParams& p, int d, bool allow_trivial) {
  if (!(p.beta > 0)) throw std::invalid_argument("beta must be positive");
  if (!allow_trivial && hopping_strength(p, d) == 0.0)
    throw std::invalid_argument("hopping must be nonzero: |t| + |t'| 1_{d>=2} = 0");
}

CMatrix hopping_matrix(const LatticeSpec& spec, const ModelParams& p, bool allow_trivial) {
  validate(spec);
  validate(p, spec.d, allow_trivial);
  const int n = spec.site_count();
  const int d = spec.d;
  CMatrix T = CMatrix::Zero(2 * n, 2 * n);
  auto add = [&](int x, const std::vector<int>& y_minus_x, double v) {
    Site xs = site_at(spec, x);
    for (int j = 0; j < d; ++j) xs[j] += y_minus_x[j];
    const int y = site_index(spec, xs);
    for (int s = 0; s < 2; ++s) T(mode_index(x, s), mode_index(y, s)) += v;
  };
  for (int x = 0; x < n; ++x) {
    std::vector<int> disp(d, 0);
    add(x, disp, -p.mu);
    for (int j = 0; j < d; ++j) {
      for (int sj : {1, -1}) {
        disp.assign(d, 0);
        disp[j] = sj;
        add(x, disp, -p.t);
      }
    }
    if (d >= 2) {
      for (int j = 0; j < d; ++j)
        for (int k = j + 1; k < d; ++k)
          for (int sj : {1, -1})
            for (int sk : {1, -1}) {
              disp.assign(d, 0);
              disp[j] = sj;
              disp[k] = sk;
              add(x, disp, -p.t_prime);
            }
    }
  }
  return T;
}

cplx dispersion(const Momentum& k, const ModelParams& p, const std::vector<Shift>& shifts) {
  const int d = static_cast<int>(k.size());
  std::vector<cplx> q(k.begin(), k.end());
  for (const Shift& s : shifts) {
    if (s.axis < 0 || s.axis >= d) throw std::invalid_argument("shift axis out of range");
    q[s.axis] += s.z;
  }
  cplx e = 0.0;
  for (int j = 0; j < d; ++j) e += -2.0 * p.t * std::cos(q[j]);
  if (d >= 2)
    for (int j = 0; j < d; ++j)
      for (int l = j + 1; l < d; ++l) e += -4.0 * p.t_prime * std::cos(q[j]) * std::cos(q[l]);
  return e - p.mu;
}

double check_fourier_consistency(const LatticeSpec& spec, const ModelParams& p) {
  const CMatrix T = hopping_matrix(spec, p, true);
  const auto sites = enumerate_sites(spec);
  double worst = 0.0;
  for (const Momentum& k : enumerate_momenta(spec)) {
    cplx sym = 0.0;
    for (std::size_t x = 0; x < sites.size(); ++x) {
      double phase = 0.0;
      for (int j = 0; j < spec.d; ++j) phase += k[j] * sites[x][j];
      sym += T(mode_index(static_cast<int>(x), Up), mode_index(0, Up)) * std::exp(cplx(0, -phase));
    }
    worst = std::max(worst, std::abs(dispersion(k, p) - sym));
  }
  return worst;
}

const std::array<std::array<std::array<cplx, 2>, 2>, 3>& pauli() {
  static const std::array<std::array<std::array<cplx, 2>, 2>, 3> P = {{
      {{{0.0, 1.0}, {1.0, 0.0}}},
      {{{0.0, cplx(0, -1)}, {cplx(0, 1), 0.0}}},
      {{{1.0, 0.0}, {0.0, -1.0}}},
  }};
  return P;
}

bool CoeffKey::operator<(const CoeffKey& o) const {
  return std::tie(Xi, X, Phi) < std::tie(o.Xi, o.X, o.Phi);
}

bool CoeffKey::operator==(const CoeffKey& o) const {
  return X == o.X && Xi == o.Xi && Phi == o.Phi;
}

bool LambdaKey::operator<(const LambdaKey& o) const {
  return std::tie(X, Y, Xi, Phi) < std::tie(o.X, o.Y, o.Xi, o.Phi);
}

void InteractionCoefficients::add(std::vector<std::vector<int>> X, std::vector<int> Xi, std::vector<int> Phi,
                                  cplx value) {
  const std::size_t l = Xi.size();
  if (l == 0 || Phi.size() != l || X.size() != l)
    throw std::invalid_argument("interaction entry needs l sites, l spins and l spins");
  for (const auto& x : X)
    if (static_cast<int>(x.size()) != d_) throw std::invalid_argument("interaction site has wrong dimension");
  for (int s : Xi)
    if (s != Up && s != Down) throw std::invalid_argument("spin must be 0 or 1");
  for (int s : Phi)
    if (s != Up && s != Down) throw std::invalid_argument("spin must be 0 or 1");
  if (l >= 2) {
    const std::vector<int> anchor = X.back();
    for (auto& x : X)
      for (int j = 0; j < d_; ++j) x[j] -= anchor[j];
  }
  orders_[static_cast<int>(l)][CoeffKey{std::move(X), std::move(Xi), std::move(Phi)}] += value;
}

void InteractionCoefficients::add_uniform(int xi, int phi, cplx value) {
  if ((xi != Up && xi != Down) || (phi != Up && phi != Down)) throw std::invalid_argument("spin must be 0 or 1");
  orders_[1][CoeffKey{{}, {xi}, {phi}}] += value;
}

int InteractionCoefficients::max_order() const { return orders_.empty() ? 0 : orders_.rbegin()->first; }

std::string describe(const CoeffKey& key) {
  std::ostringstream os;
  os << "order " << key.order() << " X=[";
  if (key.uniform()) os << "every site";
  for (std::size_t i = 0; i < key.X.size(); ++i) {
    os << (i ? "," : "") << "(";
    for (std::size_t j = 0; j < key.X[i].size(); ++j) os << (j ? "," : "") << key.X[i][j];
    os << ")";
  }
  os << "] Xi=[";
  for (std::size_t i = 0; i < key.Xi.size(); ++i) os << (i ? "," : "") << key.Xi[i];
  os << "] Phi=[";
  for (std::size_t i = 0; i < key.Phi.size(); ++i) os << (i ? "," : "") << key.Phi[i];
  os << "]";
  return os.str();
}

std::optional<std::string> InteractionCoefficients::hermiticity_violation() const {
  for (const auto& [l, table] : orders_) {
    for (const auto& [key, value] : table) {
      CoeffKey swapped{key.X, key.Phi, key.Xi};
      auto it = table.find(swapped);
      const cplx partner = it == table.end() ? cplx(0.0) : it->second;
      if (std::conj(value) != partner) {
        std::ostringstream os;
        os << "hermiticity violated at " << describe(key) << ": conj(U) = " << std::conj(value)
           << " but U with Xi and Phi swapped = " << partner;
        return os.str();
      }
    }
  }
  return std::nullopt;
}

namespace {

bool in_window(const std::vector<int>& x, int L) { return periodic_reduce(x, L) == x; }

using FiniteKey = std::tuple<std::vector<int>, std::vector<int>, std::vector<int>>;

}  // namespace

FiniteInteraction restrict_interaction(const InteractionCoefficients& u, const LatticeSpec& spec) {
  validate(spec);
  if (u.d() != spec.d) throw std::invalid_argument("interaction and lattice dimensions differ");
  FiniteInteraction out;
  out.spec = spec;
  const int n = spec.site_count();
  for (const auto& [l, table] : u.orders()) {
    std::map<FiniteKey, cplx> acc;
    for (const auto& [key, value] : table) {
      if (l == 1) {
        if (key.uniform()) {
          for (int s = 0; s < n; ++s) acc[{{s}, key.Xi, key.Phi}] += value;
        } else if (in_window(key.X[0], spec.L)) {
          acc[{{site_index(spec, key.X[0])}, key.Xi, key.Phi}] += value;
        }
        continue;
      }
      bool sampled = true;
      for (const auto& x : key.X) sampled = sampled && in_window(x, spec.L);
      if (!sampled) continue;
      for (int a = 0; a < n; ++a) {
        const Site anchor = site_at(spec, a);
        std::vector<int> sites(l);
        for (int k = 0; k < l; ++k) {
          std::vector<int> x = key.X[k];
          for (int j = 0; j < spec.d; ++j) x[j] += anchor[j];
          sites[k] = site_index(spec, x);
        }
        acc[{sites, key.Xi, key.Phi}] += value;
      }
    }
    auto& entries = out.orders[l];
    for (auto& [k, v] : acc) entries.push_back(FiniteEntry{std::get<0>(k), std::get<1>(k), std::get<2>(k), v});
  }
  return out;
}

double interaction_norm(const InteractionCoefficients& u, int l) {
  auto it = u.orders().find(l);
  if (it == u.orders().end()) return 0.0;
  const auto& table = it->second;
  double best = 0.0;
  if (l == 1) {
    std::map<std::vector<int>, std::array<std::array<cplx, 2>, 2>> local;
    std::array<std::array<cplx, 2>, 2> uni{};
    for (const auto& [key, v] : table) {
      if (key.uniform())
        uni[key.Xi[0]][key.Phi[0]] += v;
      else
        local[key.X[0]][key.Xi[0]][key.Phi[0]] += v;
    }
    auto row_max = [](const std::array<std::array<cplx, 2>, 2>& m) {
      return std::max(std::abs(m[0][0]) + std::abs(m[0][1]), std::abs(m[1][0]) + std::abs(m[1][1]));
    };
    best = row_max(uni);
    for (auto& [x, m] : local) {
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) m[a][b] += uni[a][b];
      best = std::max(best, row_max(m));
    }
    return best;
  }
  std::vector<std::array<double, 2>> pinned(l, {0.0, 0.0});
  for (const auto& [key, v] : table)
    for (int j = 0; j < l; ++j) pinned[j][key.Xi[j]] += std::abs(v);
  for (const auto& p : pinned) best = std::max({best, p[0], p[1]});
  return best;
}

double interaction_norm(const FiniteInteraction& u, int l) {
  auto it = u.orders.find(l);
  if (it == u.orders.end()) return 0.0;
  double best = 0.0;
  if (l == 1) {
    std::map<std::pair<int, int>, double> rows;
    for (const auto& e : it->second) rows[{e.sites[0], e.Xi[0]}] += std::abs(e.value);
    for (const auto& [k, v] : rows) best = std::max(best, v);
    return best;
  }
  std::vector<std::array<double, 2>> pinned(l, {0.0, 0.0});
  for (const auto& e : it->second) {
    if (e.sites[l - 1] != 0) continue;
    for (int j = 0; j < l; ++j) pinned[j][e.Xi[j]] += std::abs(e.value);
  }
  for (const auto& p : pinned) best = std::max({best, p[0], p[1]});
  return best;
}

InteractionCoefficients hubbard(int d, double U) {
  InteractionCoefficients u(d);
  const std::vector<int> o(d, 0);
  u.add({o, o}, {Up, Down}, {Up, Down}, U);
  return u;
}

InteractionCoefficients density_density(int d, const std::vector<DensityTerm>& terms) {
  InteractionCoefficients u(d);
  for (const DensityTerm& t : terms) {
    if (t.X.empty()) {
      if (t.Xi.size() != 1) throw std::invalid_argument("a uniform density term has order 1");
      u.add_uniform(t.Xi[0], t.Xi[0], t.value);
      continue;
    }
    for (std::size_t j = 0; j < t.X.size(); ++j)
      for (std::size_t k = j + 1; k < t.X.size(); ++k)
        if (t.X[j] == t.X[k] && t.Xi[j] == t.Xi[k])
          throw std::invalid_argument("density term repeats a (site, spin) pair");
    u.add(t.X, t.Xi, t.Xi, t.value);
  }
  return u;
}

InteractionCoefficients spin_field(int d, const std::array<cplx, 3>& B) {
  for (const cplx& b : B)
    if (b.imag() != 0.0) throw std::invalid_argument("magnetic field must be real");
  InteractionCoefficients u(d);
  const auto& P = pauli();
  for (int xi = 0; xi < 2; ++xi)
    for (int phi = 0; phi < 2; ++phi) {
      cplx v = 0.0;
      for (int l = 0; l < 3; ++l) v += 0.5 * B[l].real() * P[l][xi][phi];
      if (v != 0.0) u.add_uniform(xi, phi, v);
    }
  return u;
}

InteractionCoefficients spin_spin(int d, const std::vector<std::pair<std::vector<int>, cplx>>& w) {
  for (const auto& [x, v] : w)
    if (v.imag() != 0.0) throw std::invalid_argument("spin-spin coupling must be real");
  InteractionCoefficients u(d);
  const auto& P = pauli();
  const std::vector<int> o(d, 0);
  for (const auto& [x, wv] : w) {
    const double wr = wv.real();
    if (static_cast<int>(x.size()) != d) throw std::invalid_argument("displacement has wrong dimension");
    if (x == o) {
      for (int xi = 0; xi < 2; ++xi)
        for (int phi = 0; phi < 2; ++phi) {
          cplx v = 0.0;
          for (int l = 0; l < 3; ++l)
            for (int tau = 0; tau < 2; ++tau) v += wr / 4.0 * P[l][xi][tau] * P[l][tau][phi];
          if (v != 0.0) u.add_uniform(xi, phi, v);
        }
    }
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        for (int c = 0; c < 2; ++c)
          for (int e = 0; e < 2; ++e) {
            cplx v = 0.0;
            for (int l = 0; l < 3; ++l) v += wr / 4.0 * P[l][a][c] * P[l][b][e];
            if (v != 0.0) u.add({x, o}, {a, b}, {c, e}, v);
          }
  }
  return u;
}

std::optional<double> onsite_hubbard_coupling(const InteractionCoefficients& u) {
  if (u.orders().size() != 1 || u.orders().begin()->first != 2) return std::nullopt;
  const auto& table = u.orders().begin()->second;
  if (table.size() != 1) return std::nullopt;
  const auto& [key, v] = *table.begin();
  const std::vector<int> o(u.d(), 0);
  if (key.X != std::vector<std::vector<int>>{o, o}) return std::nullopt;
  if (key.Xi != std::vector<int>{Up, Down} || key.Phi != std::vector<int>{Up, Down}) return std::nullopt;
  if (v.imag() != 0.0) return std::nullopt;
  return v.real();
}

namespace {

int permutation_sign(const std::vector<int>& perm) {
  int sign = 1;
  for (std::size_t i = 0; i < perm.size(); ++i)
    for (std::size_t j = i + 1; j < perm.size(); ++j)
      if (perm[i] > perm[j]) sign = -sign;
  return sign;
}

std::map<FiniteKey, cplx> merge_table(const std::vector<FiniteEntry>& g) {
  std::map<FiniteKey, cplx> out;
  for (const auto& e : g) out[{e.sites, e.Xi, e.Phi}] += e.value;
  return out;
}

}  // namespace

AntisymmetricCoefficients antisymmetrize(const LatticeSpec& spec, int l, const std::vector<FiniteEntry>& g) {
  if (l < 1) throw std::invalid_argument("order must be >= 1");
  if (l > spec.mode_count()) throw std::invalid_argument("order exceeds the number of modes 2L^d");
  std::vector<int> perm(l);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<std::pair<std::vector<int>, int>> perms;
  do perms.emplace_back(perm, permutation_sign(perm));
  while (std::next_permutation(perm.begin(), perm.end()));
  const double fact = static_cast<double>(perms.size());
  const double sign_l = ((l * (l - 1) / 2) % 2 == 0) ? 1.0 : -1.0;

  AntisymmetricCoefficients f;
  f.l = l;
  for (const auto& [key, value] : merge_table(g)) {
    const auto& [sites, Xi, Phi] = key;
    if (static_cast<int>(sites.size()) != l) throw std::invalid_argument("table entry has the wrong order");
    std::vector<int> a(l), b(l);
    for (int i = 0; i < l; ++i) {
      a[i] = mode_index(sites[i], Xi[i]);
      b[i] = mode_index(sites[i], Phi[i]);
    }
    const cplx u = value * sign_l / (fact * fact);
    for (const auto& [p, sp] : perms) {
      std::vector<int> pa(l);
      for (int i = 0; i < l; ++i) pa[i] = a[p[i]];
      for (const auto& [q, sq] : perms) {
        std::vector<int> qb(l);
        for (int i = 0; i < l; ++i) qb[i] = b[q[i]];
        f.values[{pa, qb}] += static_cast<double>(sp * sq) * u;
      }
    }
  }
  return f;
}

double antisymmetric_norm(const LatticeSpec& spec, const AntisymmetricCoefficients& f) {
  std::vector<double> by_a(spec.mode_count(), 0.0), by_b(spec.mode_count(), 0.0);
  for (const auto& [k, v] : f.values) {
    by_a[k.first[0]] += std::abs(v);
    by_b[k.second[0]] += std::abs(v);
  }
  return std::max(*std::max_element(by_a.begin(), by_a.end()), *std::max_element(by_b.begin(), by_b.end()));
}

double pinned_table_norm(const LatticeSpec& spec, int l, const std::vector<FiniteEntry>& g) {
  const int m = spec.mode_count();
  std::vector<std::vector<double>> by_xi(l, std::vector<double>(m, 0.0)), by_phi = by_xi;
  for (const auto& [key, v] : merge_table(g)) {
    const auto& [sites, Xi, Phi] = key;
    for (int j = 0; j < l; ++j) {
      by_xi[j][mode_index(sites[j], Xi[j])] += std::abs(v);
      by_phi[j][mode_index(sites[j], Phi[j])] += std::abs(v);
    }
  }
  double best = 0.0;
  for (int j = 0; j < l; ++j)
    for (int a = 0; a < m; ++a) best = std::max({best, by_xi[j][a], by_phi[j][a]});
  return best;
}

double l1_geometric_factor(const ModelParams& p, int d) {
  const double F = F_eval(std::numbers::pi / (2.0 * p.beta), p, d);
  const double a = std::pow(F, 1.0 / (2.0 * std::numbers::e * std::numbers::pi * d));
  return std::pow((a + 1.0) / (a - 1.0), d);
}

SmallnessReport check_smallness(const InteractionCoefficients& u, const ModelParams& p, int d,
                                SmallnessVariant variant, double R) {
  validate(p, d);
  SmallnessReport rep;
  const double factor = l1_geometric_factor(p, d);
  if (variant == SmallnessVariant::General) {
    if (!(R > 0 && R < 1)) throw std::invalid_argument("R must lie in (0,1)");
    for (const auto& [l, table] : u.orders()) rep.lhs += l * std::pow(16.0, l) * interaction_norm(u, l);
    rep.rhs = R / (p.beta * factor);
    rep.satisfied = rep.lhs < rep.rhs;
  } else {
    double U = 0.0;
    if (!u.empty()) {
      auto c = onsite_hubbard_coupling(u);
      if (!c) throw std::invalid_argument("the Hubbard smallness condition needs a pure on-site interaction");
      U = *c;
    }
    rep.lhs = std::abs(U);
    rep.rhs = 1.0 / (108.0 * p.beta * factor);
    rep.satisfied = rep.lhs <= rep.rhs;
  }
  return rep;
}

}  // namespace fermi
