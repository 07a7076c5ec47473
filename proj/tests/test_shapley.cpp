#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "csvx/envs.hpp"
#include "csvx/shapley.hpp"

using namespace csvx;

namespace {

// Independent oracle: average marginal contribution over all n! permutations.
std::vector<double> permutation_average(const CharacteristicFn& fn) {
  const int n = fn.num_features();
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::sort(perm.begin(), perm.end());

  std::vector<double> phi(n, 0.0);
  long long count = 0;
  do {
    Coalition c;
    double prev = 0.0;
    for (int i : perm) {
      c = c.with(i);
      const double cur = fn(c);
      phi[i] += cur - prev;
      prev = cur;
    }
    ++count;
  } while (std::next_permutation(perm.begin(), perm.end()));
  for (double& p : phi) p /= static_cast<double>(count);
  return phi;
}

CharacteristicFn random_game(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-10.0, 10.0);
  auto values = std::make_shared<std::vector<double>>(1ull << n);
  for (auto& v : *values) v = dist(rng);
  (*values)[0] = 0.0;
  return synthetic_cvf(n, [values](const Coalition& c) { return (*values)[c.mask()]; });
}

}  // namespace

TEST_CASE("textbook two-player game") {
  auto fn = synthetic_cvf(2, [](const Coalition& c) {
    if (c == Coalition({0})) return 1.0;
    if (c == Coalition({1})) return 3.0;
    return 6.0;
  });
  const auto attr = shapley_exact(fn);
  REQUIRE(attr.phi.size() == 2);
  CHECK(attr.phi[0] == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(attr.phi[1] == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(attr.v_full == 6.0);
  CHECK(attr.engine == "exact");
  CHECK(attr.samples == 0);
}

TEST_CASE("a feature with no marginal contribution gets exactly zero") {
  // v depends only on feature 0's membership.
  auto fn = synthetic_cvf(3, [](const Coalition& c) { return c.contains(0) ? 5.0 : 0.0; });
  const auto attr = shapley_exact(fn);
  CHECK(attr.phi[0] == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(attr.phi[1] == 0.0);
  CHECK(attr.phi[2] == 0.0);
}

TEST_CASE("exact engine equals the all-permutations oracle on random games") {
  for (int k = 0; k < 50; ++k) {
    const int n = 2 + k % 3;
    const auto fn = random_game(n, 1000 + k);
    const auto attr = shapley_exact(fn);
    const auto oracle = permutation_average(fn);
    for (int i = 0; i < n; ++i) {
      CAPTURE(k);
      CAPTURE(i);
      CHECK(std::abs(attr.phi[i] - oracle[i]) <= 1e-12);
    }
  }
}

TEST_CASE("linearity over synthetic games") {
  const int n = 3;
  const auto f1 = random_game(n, 11);
  const auto f2 = random_game(n, 22);
  const double alpha = 2.5, beta = -1.25;
  auto combo = synthetic_cvf(
      n, [&](const Coalition& c) { return alpha * f1(c) + beta * f2(c); });

  const auto a1 = shapley_exact(f1);
  const auto a2 = shapley_exact(f2);
  const auto ac = shapley_exact(combo);
  for (int i = 0; i < n; ++i)
    CHECK(ac.phi[i] == doctest::Approx(alpha * a1.phi[i] + beta * a2.phi[i]).epsilon(1e-9));
}

TEST_CASE("monte-carlo enumerates all permutations when the budget allows") {
  for (int n : {2, 3, 4}) {
    const auto fn = random_game(n, 77 + n);
    const auto exact = shapley_exact(fn);
    long long fact = 1;
    for (int i = 2; i <= n; ++i) fact *= i;
    const auto mc = shapley_mc(fn, fact, 0);
    CHECK(mc.samples == fact);
    for (int i = 0; i < n; ++i) CHECK(std::abs(mc.phi[i] - exact.phi[i]) <= 1e-12);
  }
}

TEST_CASE("monte-carlo sampling is deterministic per seed and unbiased at dummies") {
  // 9 features keeps the sampler on the random-permutation path.
  auto fn = synthetic_cvf(9, [](const Coalition& c) {
    double v = 0.0;
    bool has0 = false, has1 = false;
    for (int i : c.members()) {
      if (i != 4) v += (i + 1) * 0.5;  // feature 4 is a dummy
      has0 |= i == 0;
      has1 |= i == 1;
    }
    if (has0 && has1) v += 2.0;  // interaction so sampled estimates vary by seed
    return v;
  });

  const auto a = shapley_mc(fn, 2000, 9);
  const auto b = shapley_mc(fn, 2000, 9);
  CHECK(a.phi == b.phi);
  CHECK(a.engine == "mc");
  CHECK(a.samples == 2000);

  const auto c = shapley_mc(fn, 2000, 10);
  CHECK(a.phi != c.phi);

  // Additive game: the dummy estimate is exactly zero marginal every draw.
  CHECK(std::abs(a.phi[4]) <= std::max(3.0 * a.std_err[4], 1e-12));

  CHECK_THROWS_AS(shapley_mc(fn, 0, 1), ValidationError);
}

TEST_CASE("capacity gate directs oversized games to monte carlo") {
  auto fn = synthetic_cvf(25, [](const Coalition&) { return 0.0; });
  CHECK_THROWS_AS(shapley_exact(fn), CapacityError);
}

TEST_CASE("axiom checker") {
  auto fn = synthetic_cvf(2, [](const Coalition& c) {
    return c.size() == 2 ? 8.0 : (c.is_empty() ? 0.0 : 2.0);  // symmetric players
  });
  const auto attr = shapley_exact(fn);
  const auto rep = check_axioms(fn, attr);

  CHECK(std::abs(rep.efficiency_residual) <= 1e-9);
  REQUIRE(rep.symmetric_pairs.size() == 1);
  CHECK(rep.symmetric_pairs[0] == std::pair<int, int>{0, 1});
  CHECK(rep.symmetry_violations[0] <= 1e-12);
  CHECK(rep.passed(1e-9));

  // Dummy detection flags the structurally irrelevant feature.
  auto dfn = synthetic_cvf(2, [](const Coalition& c) { return c.contains(0) ? 3.0 : 0.0; });
  const auto drep = check_axioms(dfn, shapley_exact(dfn));
  REQUIRE(drep.dummy_features == std::vector<int>{1});
  CHECK(drep.dummy_violations[0] <= 1e-12);
}

TEST_CASE("efficiency holds for attribution on a trained environment") {
  const auto spec = build_gridworld1();
  const CompiledEnv env(spec);
  TrainConfig cfg;
  cfg.backend = TrainBackend::exact;
  ArtifactStore store;
  for (const auto& c : all_coalitions(2))
    store.put(std::make_shared<PolicyArtifact>(train_artifact(env, c, cfg, 1)));

  for (Method m : {Method::vanilla, Method::cd, Method::acd}) {
    for (Source src : {Source::q, Source::v}) {
      CvfQuery q{spec.id, {1, 1}, m, src, 0, 1, ActionBinding::fixed};
      const auto fn = build_cvf(q, spec.space, store);
      const auto attr = shapley_exact(fn);
      const double total = std::accumulate(attr.phi.begin(), attr.phi.end(), 0.0);
      CHECK(std::abs(total - attr.v_full) <= 1e-9);
    }
  }
}

TEST_CASE("mirror-symmetric gridworld2 states receive equal attributions") {
  const auto spec = build_gridworld2();
  const CompiledEnv env(spec);
  TrainConfig cfg;
  cfg.backend = TrainBackend::exact;
  ArtifactStore store;
  for (const auto& c : all_coalitions(2))
    store.put(std::make_shared<PolicyArtifact>(train_artifact(env, c, cfg, 1)));

  CvfQuery top{spec.id, {0, 2}, Method::acd, Source::q, 0, 1, ActionBinding::fixed};
  CvfQuery bottom = top;
  bottom.state = {2, 2};
  const auto a = shapley_exact(build_cvf(top, spec.space, store));
  const auto b = shapley_exact(build_cvf(bottom, spec.space, store));
  REQUIRE(a.phi.size() == b.phi.size());
  for (size_t i = 0; i < a.phi.size(); ++i)
    CHECK(a.phi[i] == doctest::Approx(b.phi[i]).epsilon(1e-9));
}
