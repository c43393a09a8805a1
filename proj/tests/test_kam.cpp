#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "kamtorus/errors.hpp"
#include "kamtorus/kam.hpp"
#include "test_support.hpp"

using namespace kamtorus;
using kamtorus::testing::golden_perturbation;
using kamtorus::testing::kGolden;
using kamtorus::testing::l2_distance;
using kamtorus::testing::random_field;

namespace {

// Brute force over the full box, independent of the library's half-ball scan.
bool diophantine_brute(const std::vector<double>& alpha, double gamma, double tau, int K) {
  const int n = static_cast<int>(alpha.size());
  std::vector<int> k(n, -K);
  while (true) {
    int l1 = 0;
    double dot = 0.0;
    for (int a = 0; a < n; ++a) {
      l1 += std::abs(k[a]);
      dot += alpha[a] * k[a];
    }
    if (l1 > 0 && l1 <= K && std::abs(dot) <= gamma / std::pow(std::max(1, l1), tau)) return false;
    int a = n - 1;
    for (; a >= 0; --a) {
      if (++k[a] <= K) break;
      k[a] = -K;
    }
    if (a < 0) return true;
  }
}

const std::vector<double> kXi{1.0, kGolden};

}  // namespace

TEST_CASE("scheme constants") {
  const auto c = SchemeConstants::defaults(2);
  CHECK_NOTHROW(c.validate());
  CHECK(c.tau == 4);
  CHECK(c.s0 == 4);
  CHECK(c.mu > 28);
  CHECK(c.kbox == 32);

  for (int N : {1, 3, 4}) CHECK_NOTHROW(SchemeConstants::defaults(N).validate());

  auto bad = c;
  bad.mu = 28;
  try {
    bad.validate();
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("mu > 4 tau + 2 s0 + 4") != std::string::npos);
  }
  bad = c;
  bad.gamma = 1.5;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = c;
  bad.s1 = 100;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("truncation schedule") {
  const auto c = SchemeConstants::defaults(2);
  CHECK(truncation_schedule(c, 0) == 8);
  CHECK(truncation_schedule(c, 1) == 23);  // 8^1.5 = 22.63
  for (int n = 0; n < 5; ++n) CHECK(truncation_schedule(c, n + 1) > truncation_schedule(c, n));
  CHECK(truncation_schedule(c, 40) > 0);
}

TEST_CASE("diophantine checks") {
  const std::vector<double> flat{1.0, 1.0};
  CHECK_FALSE(diophantine_ok(flat, 1e-3, 4, 2));
  const auto hit = first_resonance(flat, 1e-3, 4, 2);
  REQUIRE(hit);
  CHECK(hit->k == MultiIndex{1, -1});
  CHECK(hit->divisor == 0.0);

  CHECK(diophantine_ok(kXi, 1e-3, 4, 64));
  CHECK(diophantine_brute(kXi, 1e-3, 4, 64));

  const std::vector<double> one{1.0};
  CHECK(diophantine_ok(one, 0.9, 4, 100));

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> box(1.0, 2.0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::vector<double> a{box(rng), box(rng)};
    CHECK(diophantine_ok(a, 0.02, 4, 12) == diophantine_brute(a, 0.02, 4, 12));
  }
}

TEST_CASE("split diophantine weight") {
  const std::vector<int> k{3, -1, 2};
  CHECK(diophantine_weight(k, 0) == 6.0);
  CHECK(diophantine_weight(k, 1) == 3.0);
  CHECK(diophantine_weight(k, 2) == 4.0);
  const std::vector<int> zero{0, 0};
  CHECK(diophantine_weight(zero, 1) == 1.0);
}

TEST_CASE("homological equation") {
  CHECK(solve_homological(FourierField(2, 2, 6), kXi, 6, 1e-2, 4).is_zero());

  SUBCASE("single mode closed form") {
    const double eps = 0.01;
    const MultiIndex k{2, -1};
    const double dot = kXi[0] * k[0] + kXi[1] * k[1];
    FourierField f(2, 2, 4);
    f.add_cos(1, k, eps);
    FourierField expected(2, 2, 4);
    expected.add_sin(1, k, -eps / dot);
    CHECK(l2_distance(solve_homological(f, kXi, 4, 1e-2, 4), expected) < 1e-17);
  }

  SUBCASE("identity on random fields") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 20; ++trial) {
      const auto f = random_field(rng, 2, 2, 16, 1.0, 0.2);
      const auto g = solve_homological(f, kXi, 16, 1e-2, 4);
      CHECK(homological_residual(f, g, kXi, 16) < 1e-12 * sobolev_norm(f, 0));
      CHECK(g.coefficients(0)[g.zero_index()] == Complex{});
      CHECK(g.hermitian_defect() == 0.0);
    }
  }

  SUBCASE("modes past K are left out") {
    FourierField f(2, 1, 6);
    f.add_cos(0, MultiIndex{3, 2}, 1.0);
    CHECK(solve_homological(f, kXi, 4, 1e-2, 4).is_zero());
  }

  SUBCASE("resonant frequency is refused") {
    FourierField f(2, 1, 3);
    f.add_cos(0, MultiIndex{1, 1}, 1.0);
    const std::vector<double> flat{1.0, -1.0};
    try {
      solve_homological(f, flat, 3, 1e-2, 4);
      FAIL("expected SmallDivisorError");
    } catch (const SmallDivisorError& e) {
      CHECK(e.mode() == MultiIndex{1, 1});
      CHECK(e.divisor() == 0.0);
    }
  }
}

TEST_CASE("KAM step") {
  const auto c = SchemeConstants::defaults(2);

  SUBCASE("zero perturbation") {
    const auto step = kam_step(kXi, FourierField(2, 2, c.kbox), c, 8);
    CHECK(step.alpha_plus == kXi);
    CHECK(step.f_plus.is_zero());
    CHECK(step.phi.displacement().is_zero());
  }

  SUBCASE("single mode against the second-order expansion") {
    // f = eps cos(k.theta) e_0, g = -(eps/d) sin(k.theta) e_0 with d = alpha.k;
    // f_+ = f . dg + O(eps^3) = -(eps^2 k_0 / 2d)(1 + cos(2k.theta)) e_0.
    const double eps = 1e-4;
    const MultiIndex k{1, 1};
    const double d = kXi[0] + kXi[1];
    FourierField f(2, 2, c.kbox);
    f.add_cos(0, k, eps);
    const auto step = kam_step(kXi, f, c, 8);
    FourierField expected(2, 2, c.kbox);
    const double a = -eps * eps * k[0] / (2 * d);
    expected.add_cos(0, MultiIndex{0, 0}, a);
    expected.add_cos(0, MultiIndex{2, 2}, a);
    CHECK(l2_distance(step.f_plus, expected) < 10 * eps * eps * eps);
    CHECK(std::abs(step.f_plus.coeff(0, k)) < 10 * eps * eps * eps);
    CHECK(sobolev_norm(step.f_plus, 0) > 0.1 * std::abs(a));
    CHECK(step.alpha_plus == kXi);
  }

  SUBCASE("mean shifts the frequency") {
    FourierField f(2, 2, c.kbox);
    f.add_cos(0, MultiIndex{0, 0}, 1e-3);
    f.add_cos(1, MultiIndex{0, 0}, -2e-3);
    const auto step = kam_step(kXi, f, c, 8);
    CHECK(step.alpha_plus[0] == doctest::Approx(1.001).epsilon(1e-15));
    CHECK(step.alpha_plus[1] == doctest::Approx(kGolden - 2e-3).epsilon(1e-15));
    CHECK(step.f_plus.is_zero());
  }

  SUBCASE("quadratic decay estimate") {
    std::mt19937_64 rng(23);
    double worst = 0.0;
    for (int trial = 0; trial < 4; ++trial) {
      // Content below K keeps the quadratic term dominant in the bound.
      auto f = random_field(rng, 2, 2, 3, 1.0, 0.5).with_kbox(c.kbox);
      f *= 1e-4 * c.gamma / sobolev_norm(f, c.s0);
      for (int K : {8, 12}) {
        const auto step = kam_step(kXi, f, c, K);
        const double bound =
            std::pow(K, c.s0 - c.s1) * sobolev_norm(f, c.s1) +
            std::pow(K, 2 * c.tau + 2) * std::pow(sobolev_norm(f, c.s0), 2) / c.gamma;
        worst = std::max(worst, step.diag.norm_plus_s0 / bound);
      }
    }
    MESSAGE("measured step constant " << worst);
    CHECK(worst <= 10.0);
  }
}

TEST_CASE("KAM iteration") {
  const auto c = SchemeConstants::defaults(2);

  SUBCASE("zero perturbation converges at step 0") {
    const auto r = kam_iterate(kXi, FourierField(2, 2, 4), c);
    CHECK(r.converged());
    CHECK(r.iterations == 0);
    CHECK(r.alpha_inf == kXi);
    CHECK(r.beta().is_zero());
  }

  SUBCASE("golden pair") {
    std::vector<bool> survived;
    std::vector<FourierField> gs;
    const auto f0 = golden_perturbation(c.kbox, 1e-3, false);
    const auto r = kam_iterate(kXi, f0, c, [&](const KamState& s) {
      survived.push_back(s.survived);
      if (s.n > 0) gs.push_back(s.g);
    });
    REQUIRE(r.converged());
    CHECK(r.iterations <= 8);
    for (bool s : survived) CHECK(s);

    const double delta = sobolev_norm(f0, c.s1) / c.gamma;
    const double shift = std::hypot(r.alpha_inf[0] - kXi[0], r.alpha_inf[1] - kXi[1]);
    CHECK(shift <= c.gamma * delta);
    CHECK(conjugacy_residual(kXi, f0, r.beta(), r.alpha_inf) < 1e-8);

    // Superlinear decay once the error is small.
    for (std::size_t n = 0; n + 1 < r.steps.size(); ++n) {
      if (r.steps[n].delta_s0 < 1e-4)
        CHECK(r.steps[n + 1].delta_s0 <= std::pow(r.steps[n].delta_s0, 1.3));
      CHECK(r.steps[n].homological_residual < 1e-12 * r.steps[n].delta_s0 * c.gamma + 1e-300);
    }

    // Composing the step maps in the opposite order does not straighten X0.
    FourierField flipped(2, 2, c.kbox);
    for (const auto& g : gs)
      flipped = g + compose_function(flipped, g, c.kbox);
    const double right = conjugacy_residual(kXi, f0, r.beta(), r.alpha_inf);
    const double wrong = conjugacy_residual(kXi, f0, flipped, r.alpha_inf);
    MESSAGE("conjugacy residual " << right << ", opposite composition order " << wrong);
    CHECK(wrong > 1e3 * std::max(right, 1e-16));

    // Final-set membership at 2 gamma implies every per-step check passed.
    CHECK(check_final_set(r.alpha_inf, c, 4 * r.max_K_eff));
    CHECK(check_final_set(r.alpha_inf, c, 256));
  }

  SUBCASE("even perturbation gives an odd conjugacy") {
    const auto r = kam_iterate(kXi, golden_perturbation(c.kbox, 1e-3, true), c);
    REQUIRE(r.converged());
    CHECK(parity_defect_odd(r.beta()) < 1e-10);
  }

  SUBCASE("resonant frequency is excluded at step 0") {
    const std::vector<double> flat{1.0, 2.0};
    const auto r = kam_iterate(flat, golden_perturbation(c.kbox, 1e-3, false), c);
    CHECK(r.status == KamStatus::kExcluded);
    CHECK(r.excluded_step == 0);
    REQUIRE(r.resonance);
    CHECK(r.resonance->k == MultiIndex{2, -1});
  }

  SUBCASE("large perturbation diverges") {
    auto cc = c;
    cc.max_steps = 3;
    CHECK_THROWS_AS(kam_iterate(kXi, golden_perturbation(c.kbox, 0.3, false), cc), DivergenceError);
  }

  SUBCASE("perturbation past the working box is rejected") {
    FourierField f(2, 2, 40);
    f.add_cos(0, MultiIndex{40, 0}, 1e-3);
    CHECK_THROWS_AS(kam_iterate(kXi, f, c), ShapeError);
  }
}

TEST_CASE("final set") {
  const auto c = SchemeConstants::defaults(2);
  const std::vector<double> res{1.0, 1.5};  // 3*1 - 2*1.5 = 0
  CHECK_FALSE(check_final_set(res, c, 10));
  CHECK(check_final_set(kXi, c, 256));
}
