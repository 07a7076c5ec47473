#include "csvx/coalition.hpp"

#include <algorithm>
#include <string>

namespace csvx {

Coalition::Coalition(std::vector<int> members) : members_(std::move(members)) {
  std::sort(members_.begin(), members_.end());
  auto dup = std::adjacent_find(members_.begin(), members_.end());
  if (dup != members_.end())
    throw ValidationError("coalition has duplicate member " + std::to_string(*dup));
  if (!members_.empty() && members_.front() < 0)
    throw ValidationError("coalition member index must be nonnegative");
}

Coalition Coalition::full(int n) {
  std::vector<int> m(n);
  for (int i = 0; i < n; ++i) m[i] = i;
  return Coalition(std::move(m));
}

Coalition Coalition::from_mask(std::uint32_t mask) {
  std::vector<int> m;
  for (int i = 0; mask != 0; ++i, mask >>= 1)
    if (mask & 1u) m.push_back(i);
  return Coalition(std::move(m));
}

bool Coalition::contains(int i) const {
  return std::binary_search(members_.begin(), members_.end(), i);
}

Coalition Coalition::with(int i) const {
  if (contains(i)) return *this;
  auto m = members_;
  m.push_back(i);
  return Coalition(std::move(m));
}

std::string Coalition::key() const {
  std::string k = "c";
  for (int i : members_) k += "_" + std::to_string(i);
  return k;
}

std::uint32_t Coalition::mask() const {
  std::uint32_t m = 0;
  for (int i : members_) {
    if (i >= 32) throw CapacityError("coalition member too large for bitmask");
    m |= 1u << i;
  }
  return m;
}

MaskedObservation mask_state(const FeatureSpace& space, const State& s,
                             const Coalition& c) {
  space.require_valid(s);
  MaskedObservation obs;
  obs.coalition = c;
  obs.values.reserve(c.size());
  for (int i : c.members()) {
    if (i >= space.size())
      throw ValidationError("coalition member " + std::to_string(i) +
                            " out of range for feature space of size " +
                            std::to_string(space.size()));
    obs.values.push_back(s[i]);
  }
  return obs;
}

long long obs_index(const FeatureSpace& space, const Coalition& c, const State& s) {
  space.require_valid(s);
  long long idx = 0;
  for (int i : c.members()) {
    if (i >= space.size())
      throw ValidationError("coalition member " + std::to_string(i) +
                            " out of range for feature space");
    idx = idx * space.dim(i).size + s[i];
  }
  return idx;
}

long long obs_index_of(const FeatureSpace& space, const MaskedObservation& obs) {
  const auto& members = obs.coalition.members();
  if (obs.values.size() != members.size())
    throw ValidationError("masked observation arity does not match its coalition");
  long long idx = 0;
  for (size_t k = 0; k < members.size(); ++k) {
    const auto& d = space.dim(members[k]);
    if (obs.values[k] < 0 || obs.values[k] >= d.size)
      throw ValidationError("masked observation value out of domain");
    idx = idx * d.size + obs.values[k];
  }
  return idx;
}

std::vector<int> obs_values_from_index(const FeatureSpace& space, const Coalition& c,
                                       long long index) {
  const auto& members = c.members();
  std::vector<int> values(members.size());
  for (int k = c.size() - 1; k >= 0; --k) {
    int sz = space.dim(members[k]).size;
    values[k] = static_cast<int>(index % sz);
    index /= sz;
  }
  return values;
}

namespace {

// Subsets of `pool`, size-major then lexicographic within a size.
std::vector<Coalition> subsets_ordered(const std::vector<int>& pool) {
  const int m = static_cast<int>(pool.size());
  std::vector<std::vector<int>> by_size;
  std::vector<Coalition> out;
  out.reserve(1ull << m);
  for (int size = 0; size <= m; ++size) {
    // standard combination enumeration in lexicographic order
    std::vector<int> idx(size);
    for (int i = 0; i < size; ++i) idx[i] = i;
    while (true) {
      std::vector<int> members(size);
      for (int i = 0; i < size; ++i) members[i] = pool[idx[i]];
      out.push_back(Coalition(std::move(members)));
      if (size == 0) break;
      int i = size - 1;
      while (i >= 0 && idx[i] == m - size + i) --i;
      if (i < 0) break;
      ++idx[i];
      for (int k = i + 1; k < size; ++k) idx[k] = idx[k - 1] + 1;
    }
  }
  return out;
}

unsigned long long binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  unsigned long long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

std::vector<Coalition> enumerate_coalitions(int n, int exclude) {
  if (exclude < 0 || exclude >= n)
    throw ValidationError("excluded feature index out of range");
  if (n > kMaxExactFeatures)
    throw CapacityError("exact coalition enumeration capped at n=" +
                        std::to_string(kMaxExactFeatures) +
                        " features; use the Monte-Carlo Shapley path");
  std::vector<int> pool;
  pool.reserve(n - 1);
  for (int i = 0; i < n; ++i)
    if (i != exclude) pool.push_back(i);
  return subsets_ordered(pool);
}

std::vector<Coalition> all_coalitions(int n) {
  if (n > kMaxExactFeatures)
    throw CapacityError("exact coalition enumeration capped at n=" +
                        std::to_string(kMaxExactFeatures) +
                        " features; use the Monte-Carlo Shapley path");
  std::vector<int> pool(n);
  for (int i = 0; i < n; ++i) pool[i] = i;
  return subsets_ordered(pool);
}

double shapley_weight(int c_size, int n) {
  if (n < 1 || c_size < 0 || c_size > n - 1)
    throw ValidationError("shapley_weight: coalition size out of range");
  // |C|!(n-|C|-1)!/n! == 1 / (n * binom(n-1, |C|)); the denominator is exact
  // in 64 bits for n <= 24, so only the final division rounds.
  return 1.0 / (static_cast<double>(n) * static_cast<double>(binomial(n - 1, c_size)));
}

}  // namespace csvx
