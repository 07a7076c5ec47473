#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "csvx/cvf.hpp"

namespace csvx {

struct Attribution {
  std::vector<double> phi;       // one value per explanation feature
  double v_full = 0.0;           // v(F), the efficiency total
  std::vector<double> std_err;   // per-feature, Monte-Carlo engine only
  long long samples = 0;         // 0 for the exact engine
  std::string engine;            // "exact" or "mc"
};

/// Exact Shapley attribution: phi_i = sum over C not containing i of
/// weight(|C|, n) * [v(C u {i}) - v(C)], with every v memoized once.
Attribution shapley_exact(const CharacteristicFn& fn);

/// Permutation-sampling estimate, deterministic per seed. When samples is at
/// least n! (and n <= 8) every distinct permutation is enumerated instead,
/// which makes the estimate coincide with the exact value.
Attribution shapley_mc(const CharacteristicFn& fn, long long samples,
                       std::uint64_t seed);

struct AxiomReport {
  double efficiency_residual = 0.0;
  std::vector<int> dummy_features;            // zero marginals everywhere
  std::vector<double> dummy_violations;       // |phi| for each dummy feature
  std::vector<std::pair<int, int>> symmetric_pairs;
  std::vector<double> symmetry_violations;    // |phi_i - phi_j| per pair

  bool passed(double tol) const;
};

/// Efficiency, dummy, and pairwise symmetry checks of an attribution
/// against its characteristic function.
AxiomReport check_axioms(const CharacteristicFn& fn, const Attribution& attr,
                         double structural_tol = 1e-12);

}  // namespace csvx
