#ifndef SGCALC_MULTI_INDEX_HPP
#define SGCALC_MULTI_INDEX_HPP

#include <cstdint>
#include <vector>

namespace sgcalc {

// Shared bookkeeping for truncated multivariate polynomials: the multi-indices
// of total degree <= order in nvars variables, enumerated in graded
// lexicographic order (degree 0 first, ties broken lexicographically).
// Instances are immutable and cached per (nvars, order).
class MultiIndexTable {
public:
  static const MultiIndexTable& get(int nvars, int order);

  int nvars() const { return nvars_; }
  int order() const { return order_; }
  int size() const { return size_; }

  // Exponent vector of entry k (nvars entries).
  const std::uint8_t* exps(int k) const { return &exps_[static_cast<std::size_t>(k) * nvars_]; }
  int degree(int k) const { return degree_[k]; }

  // Entry of the componentwise sum of entries i and j, or -1 when the total
  // degree exceeds the order.
  int product_index(int i, int j) const { return prod_[static_cast<std::size_t>(i) * size_ + j]; }

  // Entry for an explicit exponent vector, or -1 when absent.
  int find(const std::vector<int>& e) const;

  // Entry of the first-order monomial in variable v.
  int var_index(int v) const { return var_index_[v]; }

  // Entry of exps(k) + e_v, or -1 when the degree would exceed the order.
  int raise_index(int k, int v) const { return raise_[static_cast<std::size_t>(k) * nvars_ + v]; }

  // Product of factorials of the exponents of entry k (converts a Taylor
  // coefficient into a partial derivative).
  double factorial_product(int k) const { return factprod_[k]; }

  // Offset of the first entry of the given degree.
  int first_of_degree(int deg) const { return first_of_degree_[deg]; }

private:
  MultiIndexTable(int nvars, int order);

  int nvars_, order_, size_;
  std::vector<std::uint8_t> exps_;
  std::vector<int> degree_;
  std::vector<int> prod_;
  std::vector<int> raise_;
  std::vector<int> var_index_;
  std::vector<double> factprod_;
  std::vector<int> first_of_degree_;
  std::vector<int> lookup_;   // dense mixed-radix key -> entry
  int key_radix_;
};

} // namespace sgcalc

#endif
