#pragma once

#include <complex>
#include <vector>

namespace fermi {

using cplx = std::complex<double>;

enum Spin : int { Up = 0, Down = 1 };

struct LatticeSpec {
  int d = 1;
  int L = 1;

  int site_count() const;
  int mode_count() const { return 2 * site_count(); }
};

using Site = std::vector<int>;
using Momentum = std::vector<double>;

void validate(const LatticeSpec& spec);

// Lexicographic order; the rank of a site in this list is its global site index.
std::vector<Site> enumerate_sites(const LatticeSpec& spec);
std::vector<Momentum> enumerate_momenta(const LatticeSpec& spec);

// Representative of x mod L in {-floor(L/2), ..., -floor(L/2)+L-1}.
int periodic_reduce(int x, int L);
std::vector<int> periodic_reduce(const std::vector<int>& x, int L);

// Accepts any integer vector; coordinates are taken mod L.
int site_index(const LatticeSpec& spec, const std::vector<int>& x);
Site site_at(const LatticeSpec& spec, int index);

inline int mode_index(int site, int spin) { return 2 * site + spin; }

struct TimeGrid {
  double beta = 1.0;
  int half_steps = 1;

  int steps() const { return 2 * half_steps; }
  double h() const { return 2.0 * half_steps / beta; }
  double point(int j) const { return j / h(); }
  std::vector<double> points() const;
};

TimeGrid time_grid(double beta, int half_steps);

}  // namespace fermi
