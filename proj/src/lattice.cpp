#include "fermi/lattice.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fermi {

int LatticeSpec::site_count() const {
  int n = 1;
  for (int j = 0; j < d; ++j) n *= L;
  return n;
}

void validate(const LatticeSpec& spec) {
  if (spec.d < 1) throw std::invalid_argument("lattice dimension must be >= 1");
  if (spec.L < 1) throw std::invalid_argument("lattice size must be >= 1");
}

Site site_at(const LatticeSpec& spec, int index) {
  Site s(spec.d);
  for (int j = spec.d - 1; j >= 0; --j) {
    s[j] = index % spec.L;
    index /= spec.L;
  }
  return s;
}

int site_index(const LatticeSpec& spec, const std::vector<int>& x) {
  if (static_cast<int>(x.size()) != spec.d) throw std::invalid_argument("site has wrong dimension");
  int idx = 0;
  for (int j = 0; j < spec.d; ++j) {
    int c = ((x[j] % spec.L) + spec.L) % spec.L;
    idx = idx * spec.L + c;
  }
  return idx;
}

std::vector<Site> enumerate_sites(const LatticeSpec& spec) {
  validate(spec);
  std::vector<Site> out;
  out.reserve(spec.site_count());
  for (int i = 0; i < spec.site_count(); ++i) out.push_back(site_at(spec, i));
  return out;
}

std::vector<Momentum> enumerate_momenta(const LatticeSpec& spec) {
  std::vector<Momentum> out;
  for (const Site& s : enumerate_sites(spec)) {
    Momentum k(spec.d);
    for (int j = 0; j < spec.d; ++j) k[j] = 2.0 * std::numbers::pi * s[j] / spec.L;
    out.push_back(std::move(k));
  }
  return out;
}

int periodic_reduce(int x, int L) {
  if (L < 1) throw std::invalid_argument("L must be >= 1");
  const int lo = -(L / 2);
  int r = (x - lo) % L;
  if (r < 0) r += L;
  return lo + r;
}

std::vector<int> periodic_reduce(const std::vector<int>& x, int L) {
  std::vector<int> out(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) out[j] = periodic_reduce(x[j], L);
  return out;
}

std::vector<double> TimeGrid::points() const {
  std::vector<double> p(steps());
  for (int j = 0; j < steps(); ++j) p[j] = point(j);
  return p;
}

TimeGrid time_grid(double beta, int half_steps) {
  if (!(beta > 0)) throw std::invalid_argument("beta must be positive");
  if (half_steps < 1) throw std::invalid_argument("half_steps must be >= 1");
  return TimeGrid{beta, half_steps};
}

}  // namespace fermi
