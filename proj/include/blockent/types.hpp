#pragma once

// Method-of-types layer: balanced count tables on the de Bruijn graph,
// type classes of A^n under cyclic k-block equivalence, Eulerian
// realization, rounding of stationary measures onto types and the
// decomposition of stationary k-block measures into single cycles.
//
// Throughout, a k-word w is an arc from the vertex prefix(w) (its first
// k-1 symbols) to the vertex suffix(w) (its last k-1 symbols).

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "blockent/measures.hpp"

namespace blockent {

class CountTable {
 public:
  CountTable(int alphabet_size, int k, std::vector<std::int64_t> counts);

  static CountTable from_path(const SamplePath& x, int k);

  int alphabet_size() const noexcept { return alphabet_size_; }
  int k() const noexcept { return k_; }
  std::int64_t n() const noexcept { return n_; }
  const std::vector<std::int64_t>& counts() const noexcept { return counts_; }
  std::int64_t operator[](Word w) const { return counts_[w]; }

  bool balanced() const;
  /// counts / n; throws kEmptyTable if n = 0.
  BlockDistribution normalized() const;

  /// Total out-degree per (k-1)-word vertex.
  std::vector<std::int64_t> vertex_degrees() const;

  friend bool operator==(const CountTable&, const CountTable&) = default;

 private:
  int alphabet_size_;
  int k_;
  std::int64_t n_;
  std::vector<std::int64_t> counts_;
};

/// Distinct types of A^n together with their exact class sizes,
/// ordered by the first string (in lexicographic order) realizing them.
struct TypeClass {
  CountTable table;
  std::int64_t size;
};

std::vector<TypeClass> enumerate_type_classes(int n, int k, int alphabet_size);

/// U^k(A^n) as normalized distributions.
std::vector<BlockDistribution> enumerate_types(int n, int k, int alphabet_size);

struct TypeSizeBounds {
  // Factorial-ratio bounds from counting Eulerian circuits.
  double euler_lower;
  double euler_upper;
  // (en)^{-2|A|^k} e^{n h_k} and (n-1) e^{n h_k}.
  double entropy_lower;
  double entropy_upper;
  // Same quantities in log space, usable when the plain values overflow.
  double log_euler_lower;
  double log_euler_upper;
  double log_entropy_lower;
  double log_entropy_upper;
};

/// Exact class size by brute force over A^n; requires n <= 16 and |A|^n <= 2^24.
std::int64_t type_class_size_exact(const CountTable& table);

/// Vertices with zero degree are left out of the factorial products.
TypeSizeBounds type_class_size_bounds(const CountTable& table);

/// Sample path whose cyclic k-block counts equal `table` when the de Bruijn
/// multigraph is connected; otherwise the concatenation of one Eulerian
/// sample per component, components taken by ascending minimal vertex.
SamplePath realize_sample(const CountTable& table);

/// Number of connected components (over vertices of nonzero degree).
int component_count(const CountTable& table);

/// A realizable mu in U^k(A^n) close to the stationary nu.
BlockDistribution round_to_type(const BlockDistribution& nu, std::int64_t n);

/// Balanced integer table with total n close to n * nu (first rounding stage).
CountTable round_to_counts(const BlockDistribution& nu, std::int64_t n);

struct CycleMeasure {
  /// Arc labels (k-words) in traversal order; every vertex is visited once.
  std::vector<Word> arcs;
  BlockDistribution distribution(int alphabet_size, int k) const;
};

struct WeightedCycle {
  double weight;
  CycleMeasure cycle;
};

/// Convex decomposition of a stationary measure into single-cycle measures.
std::vector<WeightedCycle> cycle_decompose(const BlockDistribution& nu);

/// ln (n+1)^{|A|^k}.
double log_type_count_bound(std::int64_t n, int k, int alphabet_size);
/// (n+1)^{|A|^k}; +infinity when it overflows a double.
double type_count_bound(std::int64_t n, int k, int alphabet_size);

/// One CSV row per type: n,k,type_id,exact_size,euler_lo,euler_hi,entropy_lo,entropy_hi.
std::string type_audit_csv(int n, int k, int alphabet_size);

}  // namespace blockent
