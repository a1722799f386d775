#include <random>
#include <set>
#include <vector>

#include "doctest.h"
#include "relfl/closed_forms.hpp"

using namespace relfl;

namespace {

LocalElement series(const FieldConfig& cfg, std::mt19937& rng, int v, bool base_field) {
  std::uniform_int_distribution<int> digit(0, cfg.q() - 1);
  std::vector<ResidueElement> coeffs(static_cast<std::size_t>(cfg.precision()));
  for (auto& c : coeffs) c = {digit(rng), base_field ? 0 : digit(rng)};
  if (coeffs[0].is_zero()) coeffs[0] = {1, 0};
  return LocalElement::from_coefficients(cfg.field(), v, coeffs, v + cfg.precision());
}

Matrix2 random_unitary(const FieldConfig& cfg, std::mt19937& rng) {
  std::uniform_int_distribution<int> val(-1, 1), coin(0, 1);
  Matrix2 g = Matrix2::identity(cfg);
  for (int step = 0; step < 2; ++step) {
    g = g * unipotent(series(cfg, rng, val(rng), true), cfg) * torus_element(series(cfg, rng, val(rng), false));
    if (coin(rng)) g = g * weyl_element(cfg);
  }
  return g;
}

StableClassParams params_from_ab(const FieldConfig& cfg, const LocalElement& a, const LocalElement& b,
                                 const LocalElement& mu) {
  return StableClassParams(a, b * b / (mu * LocalElement::integer(cfg, cfg.ns())), mu);
}

QPoly q(int e) { return QPoly::q_power(e); }

}  // namespace

TEST_CASE("pushforward and basic orbital closed forms") {
  CHECK(phi_closed(2, 4) == QPoly::parse("1 + q + q^2"));
  CHECK(phi_closed(0, 1) == QPoly());
  CHECK(phi_closed(0, 0) == QPoly(1));
  CHECK(phi_closed(3, 1) == QPoly::parse("1 + q"));
  CHECK(orb_basic_closed(1, 2) == QPoly::parse("1 + q + q^2"));
  CHECK(orb_basic_closed(-1, 1) == QPoly(1));
  CHECK(orb_basic_closed(-1, 0) == QPoly());
  CHECK_THROWS_AS(orb_basic_closed(0, 1), InvalidParams);
}

TEST_CASE("three-case orbital closed forms") {
  CHECK(orbit_case(2, 1) == 1);
  CHECK(orbit_case(kInfinity, 1) == 1);
  CHECK(orbit_case(1, 2) == 2);
  CHECK(orbit_case(1, 1) == 3);
  CHECK(orb_phi_closed(1, 0, 0, 1) == QPoly(1));
  CHECK(orb_phi_closed(1, 0, 0, -1) == QPoly());
  CHECK(orb_phi_closed(1, 1, 3, 1) == QPoly());
  CHECK(orb_phi_closed(1, 1, 3, -1) == QPoly());
  // n1 = 1, n2 = 2: (1 + q + q^2) + (q + q^2) - q^2.
  CHECK(orb_phi_closed(1, 2, 2, 1) == QPoly::parse("1 + 2*q + q^2"));
  CHECK_THROWS_AS(orb_phi_closed(2, 1, 4, 1), InconsistentCase);
  CHECK_THROWS_AS(orb_phi_closed(1, 2, 4, 1), InconsistentCase);
  CHECK_THROWS_AS(orb_phi_closed(2, 2, 2, 1), InconsistentCase);
  CHECK_THROWS_AS(orb_phi_closed(1, 2, 2, 0), InvalidParams);

  const FieldConfig cfg(3, 16);
  const LocalElement w = LocalElement::uniformizer_power(cfg, 1);
  const LocalElement one = LocalElement::integer(cfg, 1);
  const StableClassParams p = params_from_ab(cfg, w, w * w, one);
  REQUIRE(p.n1() == 1);
  REQUIRE(p.n2() == 2);
  CHECK(orb_bruteforce(build_delta(p), IndicatorSpec::phi_n(2), cfg).value == orb_phi_closed(1, 2, 2, 1).evaluate(3));
}

TEST_CASE("difference of the two orbital closed forms is the kappa closed form") {
  for (int n2 = 0; n2 <= 6; ++n2) {
    for (int n1 = 0; n1 <= 7; ++n1) {
      if (n1 == n2) {
        for (int t = 0; t <= 3; ++t) {
          const int n = 2 * n2 + t;
          CHECK(orb_phi_closed(n1, n2, n, 1) - orb_phi_closed(n1, n2, n, -1) == kappa_orb_closed(n2, n2 + t, n2));
        }
        continue;
      }
      const int v = std::min(n1, n2);
      const int n = 2 * v;
      CHECK(orb_phi_closed(n1, n2, n, 1) - orb_phi_closed(n1, n2, n, -1) == kappa_orb_closed(v, v, n2));
    }
    CHECK(orb_phi_closed(kInfinity, n2, 2 * n2, 1) - orb_phi_closed(kInfinity, n2, 2 * n2, -1) ==
          kappa_orb_closed(n2, n2, n2));
  }
}

TEST_CASE("kappa, character and endoscopic closed forms") {
  CHECK(kappa_orb_closed(0, 0, 0) == QPoly(1));
  CHECK(kappa_orb_closed(1, 1, 1) == QPoly());
  CHECK(kappa_orb_closed(2, 2, 2) == q(2));
  CHECK(kappa_orb_closed(0, 3, 0) == QPoly());
  CHECK(kappa_character(0) == 1);
  CHECK(kappa_character(1) == -1);
  CHECK_THROWS_AS(kappa_character(2), InvalidParams);
  CHECK(endoscopic_so_closed(0, 0) == QPoly(1));
  CHECK(endoscopic_so_closed(1, 0) == QPoly());
  CHECK(endoscopic_so_closed(2, 4) == QPoly(1));
  CHECK(endoscopic_so_closed(-2, 0) == QPoly());

  // The character on the rational class invariant recovers eta(mu).
  const FieldConfig cfg(5, 10);
  const LocalElement one = LocalElement::integer(cfg, 1);
  const StableClassParams p = params_from_ab(cfg, one, LocalElement::uniformizer_power(cfg, 1), one);
  for (const StableClassParams& s : {p, companion_delta(p)}) {
    CHECK(kappa_character(rational_class_invariant(build_delta(s))) == s.eta_mu());
  }
}

TEST_CASE("transfer factor examples") {
  const FieldConfig cfg(3, 12);
  const LocalElement one = LocalElement::integer(cfg, 1);
  const LocalElement zero = LocalElement::zero(cfg.field());
  const LaurentQPoly inv_q = LaurentQPoly::q_power(-1);
  const auto at = [&](int n2) { return params_from_ab(cfg, zero, LocalElement::uniformizer_power(cfg, n2), one); };
  CHECK(transfer_factor(eigenvalue_split(at(0)), at(0), 1) == LaurentQPoly(1));
  CHECK(transfer_factor(eigenvalue_split(at(1)), at(1), 1) == inv_q);
  CHECK(transfer_factor(eigenvalue_split(at(2)), at(2), 1) == inv_q * inv_q);
  CHECK(transfer_factor(eigenvalue_split(at(1)), at(1), -1) == -inv_q);
  CHECK(transfer_factor(eigenvalue_split(at(2)), at(2), -1) == -(inv_q * inv_q));
  // Eigenvalues of another class do not match.
  CHECK(transfer_factor_specialized(eigenvalue_split(at(2)), at(1), 1).is_zero());
  CHECK(transfer_factor_general(eigenvalue_split(at(2)), build_delta(at(1))).is_zero());
  CHECK_THROWS_AS(transfer_factor(eigenvalue_split(at(1)), at(1), 0), InvalidParams);
  CHECK_THROWS_AS(transfer_factor(eigenvalue_split(at(1)), companion_delta(at(1)), 1), InvalidParams);
  // The nice element of the stable class is delta+ exactly when n2 is even.
  for (int n2 = 0; n2 <= 4; ++n2) {
    CHECK(is_nice_matching(build_delta(at(n2))) == (n2 % 2 == 0));
    CHECK(is_nice_matching(build_delta(companion_delta(at(n2)))) == (n2 % 2 != 0));
  }
  CHECK_THROWS_AS(is_nice_matching(HermitianElement(Matrix2::identity(cfg))), DegenerateDiscriminant);
}

TEST_CASE("general and specialized transfer factors agree symbolically") {
  std::mt19937 rng(55);
  for (int qq : {3, 5, 7}) {
    const FieldConfig cfg(qq, 16);
    for (int n2 = 0; n2 <= 6; ++n2) {
      for (int n1 : {0, n2, n2 + 1, kInfinity}) {
        for (int s : {-1, 0, 1}) {
          const LocalElement b = series(cfg, rng, n2, true);
          const LocalElement a =
              n1 == kInfinity ? LocalElement::zero(cfg.field()) : b + series(cfg, rng, n1 == n2 ? n2 + 1 : n1, true);
          const StableClassParams p = params_from_ab(cfg, a, b, series(cfg, rng, 2 * s, true));
          const auto eigs = eigenvalue_split(p);
          for (int which : {1, -1}) {
            const StableClassParams rep = which == 1 ? p : companion_delta(p);
            const LaurentQPoly special = transfer_factor_specialized(eigs, p, which);
            CHECK(special == transfer_factor_general(eigs, build_delta(rep)));
            CHECK(special == LaurentQPoly::monomial(which, -n2));
          }
        }
      }
    }
  }
}

TEST_CASE("transfer factors are conjugation invariant and the class invariant is stable") {
  std::mt19937 rng(89);
  const FieldConfig cfg(3, 40);
  const LocalElement one = LocalElement::integer(cfg, 1);
  const LocalElement w = LocalElement::uniformizer_power(cfg, 1);
  for (const StableClassParams& p : {params_from_ab(cfg, w, one, one), params_from_ab(cfg, one, w * w * w, one),
                                     companion_delta(params_from_ab(cfg, w * w, w, one))}) {
    const HermitianElement d = build_delta(p);
    const StableClassParams base = p.eta_mu() == 1 ? p : companion_delta_inverse(p);
    const auto eigs = eigenvalue_split(base);
    const LaurentQPoly reference = transfer_factor_general(eigs, d);
    const bool nice = is_nice_matching(d);
    const int rci = rational_class_invariant(d);
    for (int trial = 0; trial < 50; ++trial) {
      const Matrix2 g = random_unitary(cfg, rng);
      REQUIRE(is_unitary(g));
      const HermitianElement moved(g * d.matrix() * g.inverse());
      CHECK(is_nice_matching(moved) == nice);
      CHECK(transfer_factor_general(eigs, moved) == reference);
      // Conjugation back to normal form is by the split torus, which fixes val(mu) mod 2.
      const Matrix2 t = torus_element(series(cfg, rng, trial % 5 - 2, false));
      const HermitianElement scaled(t * d.matrix() * t.inverse());
      CHECK(rational_class_invariant(scaled) == rci);
    }
  }
}

TEST_CASE("relative transfer factor composes with the contraction") {
  const FieldConfig cfg(5, 12);
  const LocalElement one = LocalElement::integer(cfg, 1);
  const LocalElement w = LocalElement::uniformizer_power(cfg, 1);
  for (const StableClassParams& p : {params_from_ab(cfg, LocalElement::integer(cfg, 2), one, one),
                                     params_from_ab(cfg, w * w * w, w * w, one),
                                     params_from_ab(cfg, w * w, w * w * w * w, one)}) {
    const auto eigs = eigenvalue_split(p);
    const auto x = contraction_section(build_delta(p), cfg);
    REQUIRE(x.has_value());
    const std::pair<LocalElement, LocalElement> pair{norm_preimage(eigs.first), norm_preimage(eigs.second)};
    CHECK(relative_transfer_factor(pair, *x) == transfer_factor(eigs, p, 1));
  }
  const StableClassParams base = params_from_ab(cfg, LocalElement::integer(cfg, 2), one, one);
  const auto x = contraction_section(build_delta(base), cfg);
  CHECK(relative_transfer_factor({norm_preimage(eigenvalue_split(base).first), w}, *x).is_zero());
  CHECK(relative_transfer_factor({norm_preimage(eigenvalue_split(base).first),
                                  norm_preimage(eigenvalue_split(base).second)},
                                 *x) == LaurentQPoly(1));
}

TEST_CASE("fundamental lemma reports") {
  const FieldConfig cfg3(3, 16);
  const LocalElement one = LocalElement::integer(cfg3, 1);
  const LocalElement w = LocalElement::uniformizer_power(cfg3, 1);
  // n1 = n2 = 0 with val(a - b) = 2.
  const FlReport base = fl_verify(params_from_ab(cfg3, one + w * w, one, one), cfg3);
  CHECK(base.passed());
  CHECK(base.lhs == QPoly(1));
  CHECK(base.rhs_closed == LaurentQPoly(1));
  CHECK(base.delta_plus == LaurentQPoly(1));
  CHECK(base.kappa_closed == QPoly(1));
  CHECK_FALSE(base.wall_ms.has_value());
  CHECK(base.to_json()["wall_ms"].is_null());

  // val(a + b) = val(a - b) = 1: both sides vanish.
  const FlReport odd = fl_verify(params_from_ab(cfg3, LocalElement::zero(cfg3.field()), w, one), cfg3, {}, true);
  CHECK(odd.passed());
  CHECK(odd.lhs.is_zero());
  CHECK(odd.rhs_closed.is_zero());
  CHECK(odd.orb_plus_brute == odd.orb_minus_brute);
  CHECK(odd.wall_ms.has_value());

  const FieldConfig cfg5(5, 16);
  const LocalElement w5 = LocalElement::uniformizer_power(cfg5, 1);
  const FlReport sweep =
      fl_verify(params_from_ab(cfg5, w5 * w5 * LocalElement::integer(cfg5, 3), w5, LocalElement::integer(cfg5, 1)),
                cfg5);
  CHECK(sweep.n1 == 2);
  CHECK(sweep.n2 == 1);
  CHECK(sweep.orbit_case == 1);
  CHECK(sweep.passed());
  const nlohmann::json j = sweep.to_json();
  for (const char* key : {"params", "endoscopic", "transfer", "orbital", "relative", "verdicts", "wall_ms"}) {
    CHECK(j.contains(key));
  }
  CHECK(j["verdicts"]["covariance"] == true);
  CHECK(j["passed"] == true);

  CHECK_THROWS_AS(fl_verify(companion_delta(params_from_ab(cfg3, w, one, one)), cfg3), InvalidParams);
}

TEST_CASE("stable class grid") {
  for (int qq : {3, 5}) {
    const FieldConfig cfg(qq, 16);
    const auto grid = stable_class_grid(cfg, 3, 11);
    const auto again = stable_class_grid(cfg, 3, 11);
    REQUIRE(grid.size() == again.size());
    std::set<int> cases;
    bool zero_a = false, vanishing = false;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const StableClassParams& p = grid[i].params;
      CHECK(grid[i].label == again[i].label);
      CHECK(p.to_string() == again[i].params.to_string());
      CHECK(p.eta_mu() == 1);
      CHECK(p.n2() <= 3);
      cases.insert(orbit_case(p.n1(), p.n2()));
      zero_a = zero_a || p.a().is_exact_zero();
      const auto eigs = eigenvalue_split(p);
      vanishing = vanishing || eigs.first.valuation() % 2 != 0 || eigs.second.valuation() % 2 != 0;
      if (i > 0) CHECK(grid[i - 1].params.n2() <= p.n2());
    }
    CHECK(cases == std::set<int>{1, 2, 3});
    CHECK(zero_a);
    CHECK(vanishing);
    CHECK(grid.size() == static_cast<std::size_t>(qq >= 5 ? 4 * 7 : 4 * 6));
    CHECK_FALSE(stable_class_grid(cfg, 3, 12)[0].params.to_string() == grid[0].params.to_string());
  }
}
