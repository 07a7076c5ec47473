#pragma once

#include <compare>
#include <cstdint>
#include <vector>

#include "csvx/feature_space.hpp"

namespace csvx {

/// Canonical subset of feature indices: sorted, duplicate-free.
class Coalition {
 public:
  Coalition() = default;
  explicit Coalition(std::vector<int> members);

  static Coalition empty() { return Coalition(); }
  static Coalition full(int n);
  static Coalition from_mask(std::uint32_t mask);

  const std::vector<int>& members() const { return members_; }
  int size() const { return static_cast<int>(members_.size()); }
  bool is_empty() const { return members_.empty(); }
  bool contains(int i) const;
  bool is_full(int n) const { return size() == n; }

  Coalition with(int i) const;

  /// Cache/serialization key, e.g. "c_0_2"; the empty coalition is "c".
  std::string key() const;

  std::uint32_t mask() const;

  auto operator<=>(const Coalition&) const = default;

 private:
  std::vector<int> members_;
};

struct MaskedObservation {
  Coalition coalition;
  std::vector<int> values;  // one per coalition member, in index order

  bool operator==(const MaskedObservation&) const = default;
};

/// Projection of a state onto a coalition's features.
MaskedObservation mask_state(const FeatureSpace& space, const State& s,
                             const Coalition& c);

/// Mixed-radix index of a masked observation over the coalition's dimensions.
/// The empty coalition maps to 0.
long long obs_index(const FeatureSpace& space, const Coalition& c, const State& s);
long long obs_index_of(const FeatureSpace& space, const MaskedObservation& obs);
std::vector<int> obs_values_from_index(const FeatureSpace& space, const Coalition& c,
                                       long long index);

/// Exact enumeration limit: beyond this, callers are pointed at Monte Carlo.
inline constexpr int kMaxExactFeatures = 24;

/// All subsets of {0..n-1} \ {exclude}, ordered by size then lexicographically.
std::vector<Coalition> enumerate_coalitions(int n, int exclude);

/// All 2^n subsets of {0..n-1}, same ordering.
std::vector<Coalition> all_coalitions(int n);

/// |C|! (n - |C| - 1)! / n!, computed exactly before a single division.
double shapley_weight(int c_size, int n);

}  // namespace csvx
