#include "kam/multi_index.hpp"

namespace kam {

std::vector<Index> box_indices(int dim, int cutoff) {
  std::vector<Index> out;
  Index n{};
  for (int k = 0; k < dim; ++k) n[k] = -cutoff;
  while (true) {
    out.push_back(n);
    int k = dim - 1;
    while (k >= 0 && n[k] == cutoff) {
      n[k] = -cutoff;
      --k;
    }
    if (k < 0) break;
    ++n[k];
  }
  return out;
}

std::vector<Index> monomials_of_degree(int dim, int degree) {
  std::vector<Index> out;
  if (dim == 1) {
    Index a{};
    a[0] = degree;
    out.push_back(a);
    return out;
  }
  // first coordinate descending gives lexicographically decreasing order
  for (int first = degree; first >= 0; --first) {
    for (const Index& tail : monomials_of_degree(dim - 1, degree - first)) {
      Index a{};
      a[0] = first;
      for (int k = 1; k < dim; ++k) a[k] = tail[k - 1];
      out.push_back(a);
    }
  }
  return out;
}

std::vector<Index> monomials(int dim, int degree) {
  std::vector<Index> out;
  for (int k = 0; k <= degree; ++k) {
    auto part = monomials_of_degree(dim, k);
    out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

}  // namespace kam
