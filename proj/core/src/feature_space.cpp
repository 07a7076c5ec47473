#include "csvx/feature_space.hpp"

#include <string>

namespace csvx {

FeatureSpace::FeatureSpace(std::vector<FeatureDim> dims) : dims_(std::move(dims)) {
  if (dims_.empty()) throw ValidationError("FeatureSpace needs at least one dimension");
  for (const auto& d : dims_) {
    if (d.size < 1)
      throw ValidationError("feature '" + d.name + "' has domain size " +
                            std::to_string(d.size) + "; must be >= 1");
  }
}

const FeatureDim& FeatureSpace::dim(int i) const {
  if (i < 0 || i >= size())
    throw ValidationError("feature index " + std::to_string(i) + " out of range");
  return dims_[i];
}

long long FeatureSpace::num_states() const {
  long long n = 1;
  for (const auto& d : dims_) n *= d.size;
  return n;
}

bool FeatureSpace::contains(const State& s) const {
  if (static_cast<int>(s.size()) != size()) return false;
  for (int i = 0; i < size(); ++i)
    if (s[i] < 0 || s[i] >= dims_[i].size) return false;
  return true;
}

void FeatureSpace::require_valid(const State& s) const {
  if (!contains(s)) {
    std::string repr;
    for (int v : s) repr += (repr.empty() ? "" : ",") + std::to_string(v);
    throw ValidationError("state [" + repr + "] is not valid in this feature space");
  }
}

long long FeatureSpace::pack(const State& s) const {
  require_valid(s);
  long long idx = 0;
  for (int i = 0; i < size(); ++i) idx = idx * dims_[i].size + s[i];
  return idx;
}

State FeatureSpace::unpack(long long index) const {
  State s(size());
  for (int i = size() - 1; i >= 0; --i) {
    s[i] = static_cast<int>(index % dims_[i].size);
    index /= dims_[i].size;
  }
  return s;
}

}  // namespace csvx
