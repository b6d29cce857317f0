#include "blockent/types.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <numeric>

#include "blockent/entropy.hpp"
#include "blockent/error.hpp"
#include "blockent/format.hpp"

namespace blockent {

namespace {

constexpr std::size_t kNoArc = std::numeric_limits<std::size_t>::max();

std::size_t checked_space(int alphabet_size, int n, std::size_t limit) {
  std::size_t space = 1;
  for (int i = 0; i < n; ++i) {
    space *= static_cast<std::size_t>(alphabet_size);
    if (space > limit) throw Error(ErrorCode::kTooLarge, "|A|^n exceeds the enumeration guard");
  }
  return space;
}

// Cyclic k-block counts of the string with code `code` (base-|A|, n digits).
void counts_of_code(std::size_t code, int n, int k, int alphabet_size, std::vector<std::uint8_t>& digits,
                    std::vector<std::int64_t>& counts) {
  const std::size_t a = static_cast<std::size_t>(alphabet_size);
  for (int i = n - 1; i >= 0; --i) {
    digits[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(code % a);
    code /= a;
  }
  std::fill(counts.begin(), counts.end(), 0);
  const std::size_t words = counts.size();
  std::size_t w = 0;
  for (int i = 0; i < k; ++i) w = w * a + digits[static_cast<std::size_t>(i) % static_cast<std::size_t>(n)];
  for (int i = 0; i < n; ++i) {
    ++counts[w];
    w = (w * a + digits[static_cast<std::size_t>(i + k) % static_cast<std::size_t>(n)]) % words;
  }
}

struct UnionFind {
  explicit UnionFind(std::size_t size) : parent(size) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
  std::vector<std::size_t> parent;
};

// Labels each vertex of nonzero degree with its component's minimal vertex.
std::vector<std::size_t> component_roots(const CountTable& table) {
  const std::size_t a = static_cast<std::size_t>(table.alphabet_size());
  const std::size_t vertices = table.counts().size() / a;
  UnionFind uf(vertices);
  for (std::size_t w = 0; w < table.counts().size(); ++w) {
    if (table[w] > 0) uf.unite(w / a, w % vertices);
  }
  std::vector<std::size_t> roots(vertices, kNoArc);
  const auto degrees = table.vertex_degrees();
  for (std::size_t v = 0; v < vertices; ++v) {
    if (degrees[v] > 0) roots[v] = uf.find(v);
  }
  return roots;
}

// Shortest directed path from `from` to `to` using arcs accepted by `usable`,
// exploring out-arcs in ascending label order. Returns arc labels.
template <typename Usable>
std::optional<std::vector<Word>> shortest_directed_path(std::size_t from, std::size_t to, std::size_t alphabet,
                                                        std::size_t vertices, Usable usable) {
  std::vector<std::size_t> via(vertices, kNoArc);
  std::vector<bool> seen(vertices, false);
  std::deque<std::size_t> queue{from};
  seen[from] = true;
  while (!queue.empty() && !seen[to]) {
    const std::size_t v = queue.front();
    queue.pop_front();
    for (std::size_t b = 0; b < alphabet; ++b) {
      const std::size_t arc = v * alphabet + b;
      const std::size_t head = arc % vertices;
      if (seen[head] || !usable(arc)) continue;
      seen[head] = true;
      via[head] = arc;
      queue.push_back(head);
    }
  }
  if (!seen[to]) return std::nullopt;
  std::vector<Word> path;
  for (std::size_t v = to; v != from;) {
    const std::size_t arc = via[v];
    path.push_back(arc);
    v = arc / alphabet;
  }
  std::reverse(path.begin(), path.end());
  return path;
}

}  // namespace

CountTable::CountTable(int alphabet_size, int k, std::vector<std::int64_t> counts)
    : alphabet_size_(alphabet_size), k_(k), n_(0), counts_(std::move(counts)) {
  if (k < 1) throw Error(ErrorCode::kInvalidBlockLength, "block length must be >= 1");
  if (counts_.size() != word_count(alphabet_size, k)) {
    throw Error(ErrorCode::kDimensionMismatch, "count table must have |A|^k entries");
  }
  for (auto c : counts_) {
    if (c < 0) throw Error(ErrorCode::kNotAType, "negative count");
    n_ += c;
  }
}

CountTable CountTable::from_path(const SamplePath& x, int k) {
  return CountTable(x.alphabet_size(), k, cyclic_block_counts(x, k));
}

std::vector<std::int64_t> CountTable::vertex_degrees() const {
  const std::size_t a = static_cast<std::size_t>(alphabet_size_);
  std::vector<std::int64_t> degrees(counts_.size() / a, 0);
  for (std::size_t w = 0; w < counts_.size(); ++w) degrees[w / a] += counts_[w];
  return degrees;
}

bool CountTable::balanced() const {
  if (k_ == 1) return true;
  const std::size_t a = static_cast<std::size_t>(alphabet_size_);
  const std::size_t vertices = counts_.size() / a;
  std::vector<std::int64_t> net(vertices, 0);
  for (std::size_t w = 0; w < counts_.size(); ++w) {
    net[w / a] += counts_[w];
    net[w % vertices] -= counts_[w];
  }
  return std::all_of(net.begin(), net.end(), [](std::int64_t v) { return v == 0; });
}

BlockDistribution CountTable::normalized() const {
  if (n_ == 0) throw Error(ErrorCode::kEmptyTable, "count table is empty");
  std::vector<double> weights(counts_.size());
  for (std::size_t w = 0; w < counts_.size(); ++w) {
    weights[w] = static_cast<double>(counts_[w]) / static_cast<double>(n_);
  }
  return BlockDistribution(alphabet_size_, k_, std::move(weights));
}

std::vector<TypeClass> enumerate_type_classes(int n, int k, int alphabet_size) {
  if (k < 1 || k > n) throw Error(ErrorCode::kInvalidBlockLength, "need 1 <= k <= n");
  const std::size_t space = checked_space(alphabet_size, n, std::size_t{1} << 24);
  std::vector<std::uint8_t> digits(static_cast<std::size_t>(n));
  std::vector<std::int64_t> counts(word_count(alphabet_size, k));
  std::map<std::vector<std::int64_t>, std::size_t> index;
  std::vector<TypeClass> classes;
  for (std::size_t code = 0; code < space; ++code) {
    counts_of_code(code, n, k, alphabet_size, digits, counts);
    auto [it, inserted] = index.try_emplace(counts, classes.size());
    if (inserted) classes.push_back({CountTable(alphabet_size, k, counts), 0});
    ++classes[it->second].size;
  }
  return classes;
}

std::vector<BlockDistribution> enumerate_types(int n, int k, int alphabet_size) {
  std::vector<BlockDistribution> types;
  for (const auto& c : enumerate_type_classes(n, k, alphabet_size)) types.push_back(c.table.normalized());
  return types;
}

std::int64_t type_class_size_exact(const CountTable& table) {
  if (!table.balanced()) throw Error(ErrorCode::kNotAType, "count table is not balanced");
  if (table.n() < table.k()) throw Error(ErrorCode::kInvalidBlockLength, "need n >= k");
  if (table.n() > 16) throw Error(ErrorCode::kTooLarge, "exact type sizes need n <= 16");
  const int n = static_cast<int>(table.n());
  const std::size_t space = checked_space(table.alphabet_size(), n, std::size_t{1} << 24);
  std::vector<std::uint8_t> digits(static_cast<std::size_t>(n));
  std::vector<std::int64_t> counts(table.counts().size());
  std::int64_t matches = 0;
  for (std::size_t code = 0; code < space; ++code) {
    counts_of_code(code, n, table.k(), table.alphabet_size(), digits, counts);
    if (counts == table.counts()) ++matches;
  }
  return matches;
}

TypeSizeBounds type_class_size_bounds(const CountTable& table) {
  if (!table.balanced()) throw Error(ErrorCode::kNotAType, "count table is not balanced");
  if (table.n() == 0) throw Error(ErrorCode::kEmptyTable, "count table is empty");
  const double n = static_cast<double>(table.n());
  double log_arcs = 0.0;
  for (auto c : table.counts()) log_arcs += std::lgamma(static_cast<double>(c) + 1.0);
  double log_vertex_lo = 0.0, log_vertex_hi = 0.0;
  for (auto d : table.vertex_degrees()) {
    if (d == 0) continue;
    log_vertex_lo += std::lgamma(static_cast<double>(d));
    log_vertex_hi += std::lgamma(static_cast<double>(d) + 1.0);
  }
  const double h = conditional_block_entropy(table.normalized());
  const double words = static_cast<double>(table.counts().size());

  TypeSizeBounds b{};
  b.log_euler_lower = log_vertex_lo - log_arcs;
  b.log_euler_upper = std::log(n) + log_vertex_hi - log_arcs;
  b.log_entropy_lower = -2.0 * words * (1.0 + std::log(n)) + n * h;
  b.log_entropy_upper = table.n() >= 2 ? std::log(n - 1.0) + n * h : -std::numeric_limits<double>::infinity();
  b.euler_lower = std::exp(b.log_euler_lower);
  b.euler_upper = std::exp(b.log_euler_upper);
  b.entropy_lower = std::exp(b.log_entropy_lower);
  b.entropy_upper = std::exp(b.log_entropy_upper);
  return b;
}

int component_count(const CountTable& table) {
  const auto roots = component_roots(table);
  int count = 0;
  for (std::size_t v = 0; v < roots.size(); ++v) {
    if (roots[v] == v) ++count;
  }
  return count;
}

SamplePath realize_sample(const CountTable& table) {
  if (table.n() == 0) throw Error(ErrorCode::kEmptyTable, "count table is empty");
  if (!table.balanced()) throw Error(ErrorCode::kNotAType, "count table is not balanced");
  const std::size_t a = static_cast<std::size_t>(table.alphabet_size());
  const std::size_t vertices = table.counts().size() / a;
  std::vector<std::int64_t> remaining = table.counts();
  std::vector<std::size_t> next_symbol(vertices, 0);
  const auto roots = component_roots(table);

  std::vector<std::uint8_t> symbols;
  symbols.reserve(static_cast<std::size_t>(table.n()));
  for (std::size_t start = 0; start < vertices; ++start) {
    if (roots[start] != start) continue;
    // Hierholzer, always leaving a vertex by its lowest-labelled unused arc.
    std::vector<std::pair<std::size_t, std::size_t>> stack{{start, kNoArc}};
    std::vector<std::size_t> circuit;
    while (!stack.empty()) {
      const std::size_t v = stack.back().first;
      std::size_t& b = next_symbol[v];
      while (b < a && remaining[v * a + b] == 0) ++b;
      if (b < a) {
        const std::size_t arc = v * a + b;
        --remaining[arc];
        stack.emplace_back(arc % vertices, arc);
      } else {
        if (stack.back().second != kNoArc) circuit.push_back(stack.back().second);
        stack.pop_back();
      }
    }
    for (auto it = circuit.rbegin(); it != circuit.rend(); ++it) {
      symbols.push_back(static_cast<std::uint8_t>(*it % a));
    }
  }
  return SamplePath(table.alphabet_size(), std::move(symbols));
}

CountTable round_to_counts(const BlockDistribution& nu, std::int64_t n) {
  if (!nu.stationary()) throw Error(ErrorCode::kNonStationary, "rounding needs a stationary measure");
  if (n < nu.k()) throw Error(ErrorCode::kInvalidBlockLength, "need n >= k");
  const std::size_t a = static_cast<std::size_t>(nu.alphabet_size());
  const std::size_t words = nu.size();
  const std::size_t vertices = words / a;
  constexpr double kSnap = 1e-9;

  std::vector<double> target(words), flow(words);
  for (std::size_t w = 0; w < words; ++w) target[w] = flow[w] = static_cast<double>(n) * nu[w];
  std::vector<bool> fractional(words, false);
  auto snap = [&](std::size_t w) {
    const double r = std::round(flow[w]);
    if (std::abs(flow[w] - r) <= kSnap) {
      flow[w] = r;
      fractional[w] = false;
    }
  };
  for (std::size_t w = 0; w < words; ++w) {
    fractional[w] = true;
    snap(w);
  }

  // Stage 1a: cancel fractional parts around undirected cycles of fractional
  // arcs. Each push moves every arc of the cycle by the smallest distance to an
  // integer, so no arc ever leaves [floor, ceil] of its target.
  while (true) {
    std::size_t pick = kNoArc;
    double gap = 2.0;
    for (std::size_t w = 0; w < words; ++w) {
      if (!fractional[w]) continue;
      const double g = std::min(flow[w] - std::floor(flow[w]), std::ceil(flow[w]) - flow[w]);
      if (g < gap) {
        gap = g;
        pick = w;
      }
    }
    if (pick == kNoArc) break;
    const double sign = (std::ceil(flow[pick]) - flow[pick] <= flow[pick] - std::floor(flow[pick])) ? 1.0 : -1.0;
    const std::size_t tail = pick / a;
    const std::size_t head = pick % vertices;

    // (arc, orientation) pairs; orientation +1 when traversed along the arc.
    std::vector<std::pair<std::size_t, double>> cycle{{pick, 1.0}};
    if (tail != head) {
      // Undirected BFS from head back to tail over the other fractional arcs.
      std::vector<std::pair<std::size_t, double>> via(vertices, {kNoArc, 0.0});
      std::vector<bool> seen(vertices, false);
      std::deque<std::size_t> queue{head};
      seen[head] = true;
      while (!queue.empty() && !seen[tail]) {
        const std::size_t v = queue.front();
        queue.pop_front();
        for (std::size_t b = 0; b < a; ++b) {
          const std::size_t out = v * a + b;  // v -> out % vertices
          if (out != pick && fractional[out] && !seen[out % vertices]) {
            seen[out % vertices] = true;
            via[out % vertices] = {out, 1.0};
            queue.push_back(out % vertices);
          }
          const std::size_t in = b * vertices + v;  // (in / a) -> v
          if (in != pick && fractional[in] && !seen[in / a]) {
            seen[in / a] = true;
            via[in / a] = {in, -1.0};
            queue.push_back(in / a);
          }
        }
      }
      if (!seen[tail]) {
        // Only reachable through accumulated round-off; the arc is integral
        // up to that error.
        flow[pick] = std::round(flow[pick]);
        fractional[pick] = false;
        continue;
      }
      std::vector<std::pair<std::size_t, double>> back;
      for (std::size_t v = tail; v != head;) {
        const auto [arc, orient] = via[v];
        back.push_back({arc, orient});
        v = orient > 0 ? arc / a : arc % vertices;
      }
      cycle.insert(cycle.end(), back.rbegin(), back.rend());
    }
    for (const auto& [arc, orient] : cycle) flow[arc] += sign * orient * gap;
    flow[pick] = sign > 0 ? std::ceil(flow[pick] - kSnap) : std::floor(flow[pick] + kSnap);
    fractional[pick] = false;
    for (const auto& [arc, orient] : cycle) {
      if (fractional[arc]) snap(arc);
    }
  }

  std::vector<std::int64_t> counts(words);
  std::int64_t total = 0;
  for (std::size_t w = 0; w < words; ++w) {
    counts[w] = std::max<std::int64_t>(0, std::llround(flow[w]));
    total += counts[w];
  }

  // Stage 1b: restore the total with unit self-loops (constant words), which
  // keep every vertex balanced.
  std::vector<std::size_t> loops;
  for (std::size_t s = 0; s < a; ++s) {
    std::size_t w = 0;
    for (int i = 0; i < nu.k(); ++i) w = w * a + s;
    loops.push_back(w);
  }
  while (total != n) {
    if (total < n) {
      std::size_t best = loops.front();
      for (auto w : loops) {
        if (target[w] - static_cast<double>(counts[w]) > target[best] - static_cast<double>(counts[best])) best = w;
      }
      ++counts[best];
      ++total;
      continue;
    }
    std::size_t best = kNoArc;
    for (auto w : loops) {
      if (counts[w] == 0) continue;
      if (best == kNoArc ||
          static_cast<double>(counts[w]) - target[w] > static_cast<double>(counts[best]) - target[best]) {
        best = w;
      }
    }
    if (best != kNoArc) {
      --counts[best];
      --total;
      continue;
    }
    // No loop mass left: drop one traversal of the shortest directed cycle
    // through the largest arc; any overshoot is refilled with loops.
    std::size_t arc = static_cast<std::size_t>(
        std::max_element(counts.begin(), counts.end()) - counts.begin());
    auto path = shortest_directed_path(arc % vertices, arc / a, a, vertices,
                                       [&](std::size_t w) { return counts[w] > 0; });
    if (!path) throw Error(ErrorCode::kNumeric, "rounded table lost its balance");
    --counts[arc];
    --total;
    for (auto w : *path) {
      --counts[w];
      --total;
    }
  }

  CountTable table(nu.alphabet_size(), nu.k(), std::move(counts));
  if (!table.balanced()) throw Error(ErrorCode::kNumeric, "rounded table is not balanced");
  return table;
}

BlockDistribution round_to_type(const BlockDistribution& nu, std::int64_t n) {
  const CountTable table = round_to_counts(nu, n);
  return empirical_block_measure(realize_sample(table), nu.k());
}

BlockDistribution CycleMeasure::distribution(int alphabet_size, int k) const {
  std::vector<double> weights(word_count(alphabet_size, k), 0.0);
  const double share = 1.0 / static_cast<double>(arcs.size());
  for (auto w : arcs) weights.at(w) = share;
  return BlockDistribution(alphabet_size, k, std::move(weights));
}

std::vector<WeightedCycle> cycle_decompose(const BlockDistribution& nu) {
  if (!nu.stationary()) throw Error(ErrorCode::kNonStationary, "cycle decomposition needs a stationary measure");
  constexpr double kCrumb = 1e-14;
  const std::size_t a = static_cast<std::size_t>(nu.alphabet_size());
  const std::size_t vertices = nu.size() / a;
  std::vector<double> rest(nu.weights().begin(), nu.weights().end());
  for (double& r : rest) {
    if (r <= kCrumb) r = 0.0;
  }
  std::vector<WeightedCycle> out;
  while (true) {
    std::size_t pick = kNoArc;
    for (std::size_t w = 0; w < rest.size(); ++w) {
      if (rest[w] > 0.0 && (pick == kNoArc || rest[w] < rest[pick])) pick = w;
    }
    if (pick == kNoArc) break;
    std::vector<Word> arcs{pick};
    const std::size_t tail = pick / a;
    const std::size_t head = pick % vertices;
    if (tail != head) {
      auto path = shortest_directed_path(head, tail, a, vertices, [&](std::size_t w) { return rest[w] > 0.0; });
      if (!path) {
        rest[pick] = 0.0;  // round-off residue with nowhere to flow
        continue;
      }
      arcs.insert(arcs.end(), path->begin(), path->end());
    }
    const double least = rest[pick];
    for (auto w : arcs) {
      rest[w] -= least;
      if (rest[w] <= kCrumb) rest[w] = 0.0;
    }
    rest[pick] = 0.0;
    out.push_back({least * static_cast<double>(arcs.size()), CycleMeasure{std::move(arcs)}});
  }
  return out;
}

double log_type_count_bound(std::int64_t n, int k, int alphabet_size) {
  return std::pow(static_cast<double>(alphabet_size), k) * std::log1p(static_cast<double>(n));
}

double type_count_bound(std::int64_t n, int k, int alphabet_size) {
  return std::exp(log_type_count_bound(n, k, alphabet_size));
}

std::string type_audit_csv(int n, int k, int alphabet_size) {
  std::string csv = "n,k,type_id,exact_size,euler_lo,euler_hi,entropy_lo,entropy_hi\n";
  const auto classes = enumerate_type_classes(n, k, alphabet_size);
  for (std::size_t id = 0; id < classes.size(); ++id) {
    const auto b = type_class_size_bounds(classes[id].table);
    csv += std::to_string(n) + "," + std::to_string(k) + "," + std::to_string(id) + "," +
           std::to_string(classes[id].size) + "," + format_real(b.euler_lower) + "," +
           format_real(b.euler_upper) + "," + format_real(b.entropy_lower) + "," +
           format_real(b.entropy_upper) + "\n";
  }
  return csv;
}

}  // namespace blockent
