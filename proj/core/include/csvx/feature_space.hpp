#pragma once

#include <string>
#include <vector>

#include "csvx/errors.hpp"

namespace csvx {

/// A factored state: one integer value per feature dimension.
using State = std::vector<int>;

struct FeatureDim {
  std::string name;
  int size = 0;  // values are 0..size-1
};

/// The factored state space S = S^(0) x ... x S^(n-1).
class FeatureSpace {
 public:
  FeatureSpace() = default;
  explicit FeatureSpace(std::vector<FeatureDim> dims);

  int size() const { return static_cast<int>(dims_.size()); }
  const FeatureDim& dim(int i) const;
  const std::vector<FeatureDim>& dims() const { return dims_; }

  long long num_states() const;

  bool contains(const State& s) const;
  void require_valid(const State& s) const;

  /// Mixed-radix index of a full state; inverse of unpack.
  long long pack(const State& s) const;
  State unpack(long long index) const;

 private:
  std::vector<FeatureDim> dims_;
};

}  // namespace csvx
