#include "csvx/shapley.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace csvx {

namespace {

// All 2^n coalition values, indexed by bitmask.
std::vector<double> memoize(const CharacteristicFn& fn, int n) {
  if (n > kMaxExactFeatures)
    throw CapacityError("feature count " + std::to_string(n) +
                        " exceeds the exact enumeration cap of " +
                        std::to_string(kMaxExactFeatures) + "; use shapley_mc");
  std::vector<double> v(1ull << n);
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask)
    v[mask] = fn(Coalition::from_mask(mask));
  return v;
}

long long factorial(int n) {
  long long f = 1;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

}  // namespace

Attribution shapley_exact(const CharacteristicFn& fn) {
  const int n = fn.num_features();
  const auto v = memoize(fn, n);
  const std::uint32_t full = (1u << n) - 1;

  std::vector<double> weight_by_size(n);
  for (int s = 0; s < n; ++s) weight_by_size[s] = shapley_weight(s, n);

  Attribution attr;
  attr.engine = "exact";
  attr.v_full = v[full];
  attr.phi.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    const std::uint32_t bit = 1u << i;
    double phi = 0.0;
    for (std::uint32_t mask = 0; mask <= full; ++mask) {
      if (mask & bit) continue;
      phi += weight_by_size[std::popcount(mask)] * (v[mask | bit] - v[mask]);
    }
    attr.phi[i] = phi;
  }
  return attr;
}

Attribution shapley_mc(const CharacteristicFn& fn, long long samples,
                       std::uint64_t seed) {
  if (samples < 1) throw ValidationError("shapley_mc needs at least one sample");
  const int n = fn.num_features();

  std::vector<double> memo(n <= kMaxExactFeatures ? (1ull << n) : 0,
                           std::numeric_limits<double>::quiet_NaN());
  auto value = [&](std::uint32_t mask) {
    if (!memo.empty()) {
      if (std::isnan(memo[mask])) memo[mask] = fn(Coalition::from_mask(mask));
      return memo[mask];
    }
    return fn(Coalition::from_mask(mask));
  };

  std::vector<double> sum(n, 0.0), sumsq(n, 0.0);
  long long count = 0;
  auto accumulate = [&](const std::vector<int>& perm) {
    std::uint32_t mask = 0;
    double prev = 0.0;  // v(empty) = 0
    for (int i : perm) {
      mask |= 1u << i;
      double cur = value(mask);
      double marginal = cur - prev;
      sum[i] += marginal;
      sumsq[i] += marginal * marginal;
      prev = cur;
    }
    ++count;
  };

  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  if (n <= 8 && samples >= factorial(n)) {
    do {
      accumulate(perm);
    } while (std::next_permutation(perm.begin(), perm.end()));
  } else {
    std::mt19937_64 rng(seed);
    for (long long k = 0; k < samples; ++k) {
      // Fisher-Yates with a platform-stable draw.
      for (int i = n - 1; i > 0; --i)
        std::swap(perm[i], perm[rng() % static_cast<std::uint64_t>(i + 1)]);
      accumulate(perm);
    }
  }

  Attribution attr;
  attr.engine = "mc";
  attr.samples = count;
  attr.v_full = value((1u << n) - 1);
  attr.phi.resize(n);
  attr.std_err.resize(n);
  for (int i = 0; i < n; ++i) {
    attr.phi[i] = sum[i] / static_cast<double>(count);
    double var = count > 1
                     ? (sumsq[i] - sum[i] * sum[i] / count) / static_cast<double>(count - 1)
                     : 0.0;
    attr.std_err[i] = std::sqrt(std::max(0.0, var) / static_cast<double>(count));
  }
  return attr;
}

bool AxiomReport::passed(double tol) const {
  if (std::abs(efficiency_residual) > tol) return false;
  for (double v : dummy_violations)
    if (v > tol) return false;
  for (double v : symmetry_violations)
    if (v > tol) return false;
  return true;
}

AxiomReport check_axioms(const CharacteristicFn& fn, const Attribution& attr,
                         double structural_tol) {
  const int n = fn.num_features();
  if (static_cast<int>(attr.phi.size()) != n)
    throw ValidationError("attribution arity does not match the characteristic fn");
  const auto v = memoize(fn, n);
  const std::uint32_t full = (1u << n) - 1;

  AxiomReport report;
  report.efficiency_residual =
      std::accumulate(attr.phi.begin(), attr.phi.end(), 0.0) - v[full];

  for (int i = 0; i < n; ++i) {
    const std::uint32_t bit = 1u << i;
    bool dummy = true;
    for (std::uint32_t mask = 0; mask <= full && dummy; ++mask)
      if (!(mask & bit) && std::abs(v[mask | bit] - v[mask]) > structural_tol)
        dummy = false;
    if (dummy) {
      report.dummy_features.push_back(i);
      report.dummy_violations.push_back(std::abs(attr.phi[i]));
    }
  }

  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const std::uint32_t bi = 1u << i, bj = 1u << j;
      bool symmetric = true;
      for (std::uint32_t mask = 0; mask <= full && symmetric; ++mask)
        if (!(mask & (bi | bj)) && std::abs(v[mask | bi] - v[mask | bj]) > structural_tol)
          symmetric = false;
      if (symmetric) {
        report.symmetric_pairs.emplace_back(i, j);
        report.symmetry_violations.push_back(std::abs(attr.phi[i] - attr.phi[j]));
      }
    }
  }
  return report;
}

}  // namespace csvx
