#include <doctest.h>

#include <cmath>
#include <numbers>

#include "kamtorus/errors.hpp"
#include "kamtorus/verify.hpp"
#include "test_support.hpp"

using namespace kamtorus;
using testing::golden_perturbation;
using testing::kGolden;

namespace {

const std::vector<double> kXi{1.0, kGolden};
constexpr double kTwoPi = 2 * std::numbers::pi;

VectorFieldOnTorus golden_field(double eps, int kbox = 32) {
  return {kXi, golden_perturbation(kbox, eps, false)};
}

}  // namespace

TEST_CASE("flow integration") {
  const std::vector<double> th0{0.4, 2.0};

  SUBCASE("constant field") {
    const VectorFieldOnTorus x{kXi, FourierField(2, 2, 1)};
    const auto tr = flow(x, th0, 10.0, 0.01, 100);
    CHECK(tr.times.size() == 11);
    CHECK(tr.times.back() == doctest::Approx(10.0));
    for (std::size_t i = 0; i < tr.times.size(); ++i)
      for (int a = 0; a < 2; ++a) CHECK(std::abs(tr.at(i)[a] - th0[a] - kXi[a] * tr.times[i]) < 1e-12);
    CHECK(tr.max_local_error < 1e-14);
    const auto rot = rotation_vector(x, th0, 1e3);
    CHECK(std::abs(rot[0] - 1.0) < 1e-11);
    CHECK(std::abs(rot[1] - kGolden) < 1e-11);
  }

  SUBCASE("time reversal returns to the start") {
    const auto x = golden_field(0.05);
    const auto fwd = flow(x, th0, 10.0, 0.01);
    const auto back = flow(x, fwd.last(), -10.0, 0.01);
    for (int a = 0; a < 2; ++a) CHECK(std::abs(back.last()[a] - th0[a]) < 1e-9);
    // unwrapped: consecutive samples never jump by 2 pi
    for (std::size_t i = 1; i < fwd.times.size(); ++i)
      for (int a = 0; a < 2; ++a) CHECK(std::abs(fwd.at(i)[a] - fwd.at(i - 1)[a]) < 0.1);
  }

  SUBCASE("fourth order") {
    // theta1' = 1, theta2' = g + e cos theta1: theta2 = g t + e (sin(theta1) - sin(theta1(0)))
    FourierField f(2, 2, 1);
    f.add_cos(1, MultiIndex{1, 0}, 0.5);
    const VectorFieldOnTorus x{kXi, f};
    const double T = 7.0;
    auto err = [&](double dt) {
      const auto tr = flow(x, th0, T, dt, 1 << 30);
      const double exact = th0[1] + kGolden * T + 0.5 * (std::sin(th0[0] + T) - std::sin(th0[0]));
      return std::abs(tr.last()[1] - exact);
    };
    const double ratio = err(0.2) / err(0.1);
    MESSAGE("RK4 error ratio " << ratio);
    CHECK(ratio > 12);
    CHECK(ratio < 20);
  }

  CHECK_THROWS_AS(flow(golden_field(0.01), th0, 1.0, 0.0), ConfigError);
  CHECK_THROWS_AS(flow(golden_field(0.01), std::vector<double>{0.0}, 1.0, 0.1), ShapeError);
  CHECK(torus_distance(std::vector<double>{0.1, kTwoPi - 0.1}, std::vector<double>{kTwoPi, 0.0}) ==
        doctest::Approx(0.1));
}

TEST_CASE("rotation vector and flow-level conjugacy") {
  const auto c = SchemeConstants::defaults(2);
  const auto x = golden_field(1e-3);
  const auto r = kam_iterate(kXi, x.f, c);
  REQUIRE(r.converged());
  const std::vector<double> th0{0.3, 1.7};

  const auto rot = rotation_vector(x, th0);
  for (int a = 0; a < 2; ++a) CHECK(std::abs(rot[a] - r.alpha_inf[a]) < 1e-6);
  const auto rot2 = rotation_vector(x, std::vector<double>{4.0, 0.2});
  for (int a = 0; a < 2; ++a) CHECK(std::abs(rot[a] - rot2[a]) < 10 * kTwoPi / 1e4);
  const auto rot3 = rotation_vector(x, std::vector<double>{0.3 + kTwoPi, 1.7}, 1e3);
  const auto rot4 = rotation_vector(x, th0, 1e3);
  for (int a = 0; a < 2; ++a) CHECK(std::abs(rot3[a] - rot4[a]) < 1e-12);

  const double dev = conjugacy_flow_check(r, x, th0, 100.0);
  MESSAGE("flow-level deviation " << dev);
  CHECK(dev < 1e-6);
  const double shifted = conjugacy_flow_check(r, x, std::vector<double>{0.3, 1.7 - kTwoPi}, 100.0);
  CHECK(std::abs(dev - shifted) < 1e-9);

  const VectorFieldOnTorus flat{kXi, FourierField(2, 2, 4)};
  const auto r0 = kam_iterate(kXi, flat.f, c);
  CHECK(conjugacy_flow_check(r0, flat, th0, 100.0) < 1e-10);

  StraighteningResult excluded;
  excluded.status = KamStatus::kExcluded;
  CHECK_THROWS_AS(conjugacy_flow_check(excluded, x, th0, 1.0), ConsistencyError);
}

TEST_CASE("tame audit") {
  const auto c = SchemeConstants::defaults(2);
  const std::vector<double> s_list{4, 6, 8, 10};

  SUBCASE("zero perturbation is skipped") {
    const std::vector<double> eps{1e-3};
    const auto a = tame_audit(kXi, FourierField(2, 2, c.kbox), c, eps, s_list);
    CHECK(a.rows.empty());
    CHECK(a.failed_eps.empty());
  }

  SUBCASE("single mode matches the first-order closed form") {
    // beta ~ g = i f_k / (alpha . k): ratio = gamma / (|alpha . k| <k>^(2 tau + 4))
    FourierField f(2, 2, c.kbox);
    f.add_cos(0, MultiIndex{1, 1}, 1.0);
    const std::vector<double> eps{1e-3, 1e-4};
    const auto a = tame_audit(kXi, f, c, eps, s_list);
    REQUIRE(a.rows.size() == 8);
    const double expected = c.gamma / ((1 + kGolden) * std::pow(2.0, 2 * c.tau + 4));
    for (const auto& row : a.rows) {
      CHECK(row.ratio == doctest::Approx(expected).epsilon(1e-2));
      CHECK(row.ratio * (1 + kGolden) / c.gamma <= std::pow(2.0, c.tau));
    }
    CHECK(a.stable);
  }

  SUBCASE("golden ladder") {
    const std::vector<double> eps{1e-3, 1e-4, 1e-5};
    const auto a = tame_audit(kXi, golden_perturbation(c.kbox, 1.0, false), c, eps, s_list);
    CHECK(a.rows.size() == 12);
    MESSAGE("tame stability " << a.stability << ", max ratio " << a.max_ratio);
    CHECK(a.stable);
  }
}

TEST_CASE("Lipschitz audit") {
  const auto c = SchemeConstants::defaults(2);
  const auto f0 = golden_perturbation(c.kbox, 1e-3, false);

  const auto same = lipschitz_audit(kXi, f0, f0, c);
  CHECK(same.comparable);
  CHECK(same.d_alpha == 0.0);
  CHECK(same.d_beta == 0.0);
  CHECK(same.alpha_ok);

  FourierField dir(2, 2, c.kbox);
  dir.add_cos(0, MultiIndex{0, 1}, 1.0);
  const std::vector<double> amps{1e-6, 1e-7, 1e-8};
  const auto ladder = lipschitz_ladder(kXi, f0, dir, c, amps);
  for (const auto& rep : ladder.reports) {
    MESSAGE("d_alpha " << rep.d_alpha << " C " << rep.constant);
    CHECK(rep.alpha_ok);
  }
  CHECK(ladder.stability < 2.0);
  CHECK(ladder.ok);

  const std::vector<double> resonant{1.0, 2.0};
  const auto na = lipschitz_audit(resonant, f0, f0, c);
  CHECK_FALSE(na.comparable);
  CHECK(na.note.find("not comparable") == 0);
}
