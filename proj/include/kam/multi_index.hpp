#pragma once

#include <algorithm>
#include <array>
#include <cstdlib>
#include <span>
#include <vector>

namespace kam {

/// Largest phase-space half-dimension supported by the fixed-size index type.
inline constexpr int kMaxDim = 3;

/// Integer multi-index. Entries beyond the active dimension are kept at zero
/// so that ordering and equality ignore them.
using Index = std::array<int, kMaxDim>;

inline Index zero_index() { return Index{}; }

inline Index unit_index(int axis) {
  Index e{};
  e[axis] = 1;
  return e;
}

inline int l1(const Index& n) {
  int s = 0;
  for (int v : n) s += std::abs(v);
  return s;
}

inline int linf(const Index& n) {
  int s = 0;
  for (int v : n) s = std::max(s, std::abs(v));
  return s;
}

inline Index negate(const Index& n) {
  Index m{};
  for (int k = 0; k < kMaxDim; ++k) m[k] = -n[k];
  return m;
}

inline Index operator+(const Index& a, const Index& b) {
  Index c{};
  for (int k = 0; k < kMaxDim; ++k) c[k] = a[k] + b[k];
  return c;
}

inline Index operator-(const Index& a, const Index& b) {
  Index c{};
  for (int k = 0; k < kMaxDim; ++k) c[k] = a[k] - b[k];
  return c;
}

inline bool is_zero(const Index& n) {
  for (int v : n)
    if (v != 0) return false;
  return true;
}

/// n is the canonical representative of {n, -n}: zero, or first nonzero entry positive.
inline bool is_canonical(const Index& n) {
  for (int v : n) {
    if (v > 0) return true;
    if (v < 0) return false;
  }
  return true;
}

inline double dot(std::span<const double> w, const Index& n) {
  double s = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) s += w[k] * n[k];
  return s;
}

/// All n in Z^dim with |n|_inf <= cutoff, in lexicographic order.
std::vector<Index> box_indices(int dim, int cutoff);

/// All action multi-indices a in N_0^dim with |a|_1 <= degree, graded order.
std::vector<Index> monomials(int dim, int degree);

/// All action multi-indices with |a|_1 == degree.
std::vector<Index> monomials_of_degree(int dim, int degree);

}  // namespace kam
