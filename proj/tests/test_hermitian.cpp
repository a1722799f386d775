#include <random>
#include <vector>

#include "doctest.h"
#include "relfl/hermitian.hpp"

using namespace relfl;

namespace {

LocalElement random_element(const FieldConfig& cfg, std::mt19937& rng, int v, bool base_field) {
  std::uniform_int_distribution<int> digit(0, cfg.q() - 1);
  std::vector<ResidueElement> coeffs(static_cast<std::size_t>(cfg.precision()));
  for (auto& c : coeffs) c = {digit(rng), base_field ? 0 : digit(rng)};
  if (coeffs[0].is_zero()) coeffs[0] = {1, 0};
  return LocalElement::from_coefficients(cfg.field(), v, coeffs, v + cfg.precision());
}

Matrix2 random_matrix(const FieldConfig& cfg, std::mt19937& rng) {
  std::uniform_int_distribution<int> val(-1, 2);
  return {random_element(cfg, rng, val(rng), false), random_element(cfg, rng, val(rng), false),
          random_element(cfg, rng, val(rng), false), random_element(cfg, rng, val(rng), false)};
}

LocalElement unit_times(const FieldConfig& cfg, int c, int v) { return LocalElement::residue(cfg, {c, 0}, v); }

}  // namespace

TEST_CASE("involution matches the conjugated adjugate and is an anti-automorphism") {
  std::mt19937 rng(1);
  for (int q : {3, 5, 7}) {
    const FieldConfig cfg(q, 10);
    for (int trial = 0; trial < 30; ++trial) {
      const Matrix2 x = random_matrix(cfg, rng);
      const Matrix2 y = random_matrix(cfg, rng);
      const Matrix2 s = star_involution(x);
      const Matrix2 adj_bar{x(1, 1).conjugate(), -x(0, 1).conjugate(), -x(1, 0).conjugate(), x(0, 0).conjugate()};
      CHECK(congruent(s, adj_bar));
      CHECK(congruent(star_involution(s), x));
      CHECK(congruent(star_involution(x * y), star_involution(y) * star_involution(x)));
      const Matrix2 h = contract(x).matrix();
      CHECK(congruent(star_involution(h), h));
      // XX* = det(X) * I up to the conjugation twist: trace and det lie in F.
      CHECK(h.trace().in_base_field());
      CHECK(h.det().in_base_field());
      CHECK(congruent(h.det(), x.det().norm()));
    }
  }
}

TEST_CASE("split form and Hermitian validation") {
  const FieldConfig cfg(5, 8);
  const Matrix2 j = split_form(cfg);
  CHECK_NOTHROW(HermitianElement{j});
  CHECK_THROWS_AS(HermitianElement(Matrix2::diagonal(LocalElement::zeta(cfg), LocalElement::integer(cfg, 1))),
                  MalformedShape);
  CHECK(congruent(j * j, Matrix2::identity(cfg).scaled(LocalElement::integer(cfg, -cfg.ns()))));
}

TEST_CASE("unitary group elements") {
  std::mt19937 rng(2);
  const FieldConfig cfg(7, 10);
  for (int trial = 0; trial < 20; ++trial) {
    const LocalElement u = random_element(cfg, rng, trial % 5 - 2, true);
    const LocalElement t = random_element(cfg, rng, trial % 3 - 1, false);
    CHECK(is_unitary(unipotent(u, cfg)));
    CHECK(is_unitary(torus_element(t)));
    CHECK(is_unitary(unipotent(u, cfg) * torus_element(t) * weyl_element(cfg)));
    const Matrix2 x = random_matrix(cfg, rng);
    const Matrix2 g = unipotent(u, cfg) * torus_element(t);
    // The contraction is invariant under right multiplication by U(V_2).
    CHECK(congruent(contract(x * g).matrix(), contract(x).matrix()));
  }
  CHECK(is_unitary(weyl_element(cfg)));
  CHECK_FALSE(is_unitary(Matrix2::diagonal(LocalElement::integer(cfg, 2), LocalElement::integer(cfg, 1))));
  CHECK_THROWS_AS(unipotent(LocalElement::zeta(cfg), cfg), InvalidParams);
}

TEST_CASE("orbit sections contract onto the orbit representatives") {
  for (int q : {3, 5}) {
    const FieldConfig cfg(q, 12);
    for (int i = 0; i <= 4; ++i) {
      for (int j = i; j <= 8; j += 2) {
        const Matrix2 x = orbit_section({i, j}, cfg);
        CHECK(congruent(contract(x).matrix(), orbit_representative({i, j}, cfg)));
      }
    }
    CHECK_THROWS_AS(orbit_section({0, 1}, cfg), InvalidParams);
    CHECK_THROWS_AS(orbit_section({2, 0}, cfg), InvalidParams);
  }
}

TEST_CASE("stable class parameters") {
  const FieldConfig cfg(5, 12);
  const int ns = cfg.ns();
  // lambda * mu = ns * w^2 is a norm and not a square.
  const StableClassParams p(unit_times(cfg, 1, 1), unit_times(cfg, ns, 0), unit_times(cfg, 1, 2));
  CHECK(p.n1() == 1);
  CHECK(p.m() == 1);
  CHECK(congruent(p.b() * p.b(), p.lambda() * p.mu() * LocalElement::integer(cfg, ns)));
  CHECK(p.n2() == 1);
  CHECK(p.eta_mu() == 1);
  CHECK(p.det_valuation() >= 2);
  CHECK(StableClassParams(LocalElement::zero(cfg.field()), p.lambda(), p.mu()).n1() == kInfinity);

  CHECK_THROWS_AS(StableClassParams(p.a(), unit_times(cfg, 1, 0), unit_times(cfg, 1, 1)), InvalidParams);
  CHECK_THROWS_AS(StableClassParams(p.a(), unit_times(cfg, 1, 0), unit_times(cfg, 4, 0)), InvalidParams);
  CHECK_THROWS_AS(StableClassParams(p.a(), LocalElement::zero(cfg.field()), p.mu()), InvalidParams);
  CHECK_THROWS_AS(StableClassParams(LocalElement::zeta(cfg), p.lambda(), p.mu()), InvalidParams);

  const HermitianElement d = build_delta(p);
  CHECK(rational_class_invariant(d) == 0);
  const StableClassParams c = companion_delta(p);
  CHECK(rational_class_invariant(build_delta(c)) == 1);
  CHECK(c.eta_mu() == -1);
  CHECK(congruent(c.b(), p.b()));
  CHECK(congruent(companion_delta_inverse(c).mu(), p.mu()));
  const StableClassParams back = params_from_normal_form(d);
  CHECK(congruent(back.lambda(), p.lambda()));
  CHECK(congruent(back.mu(), p.mu()));
  CHECK_THROWS_AS(rational_class_invariant(HermitianElement(split_form(cfg).scaled(LocalElement::integer(cfg, 1)) +
                                                            Matrix2::diagonal(unit_times(cfg, 1, 0),
                                                                              unit_times(cfg, 2, 0)))),
                  MalformedShape);
}

TEST_CASE("eigenlines and centralizers of normal forms") {
  std::mt19937 rng(4);
  for (int q : {3, 5, 7}) {
    const FieldConfig cfg(q, 12);
    const int ns = cfg.ns();
    for (int trial = 0; trial < 20; ++trial) {
      const int vl = trial % 3 - 1;
      const int vm = vl + 2 * (trial % 2);
      const LocalElement lambda = random_element(cfg, rng, vl, true);
      LocalElement mu = random_element(cfg, rng, vm, true);
      // Force lambda*mu to be a non-square unit times an even power.
      if (cfg.field().is_square((lambda * mu).leading().x)) mu = mu.scaled({ns, 0});
      const LocalElement a = random_element(cfg, rng, trial % 4, true);
      const StableClassParams p(a, lambda, mu);
      const Matrix2 d = build_delta(p).matrix();
      const auto [e1, e2] = eigenvalue_split(p);
      const LocalElement v1 = p.lambda().scaled({0, 1});
      for (const auto& [ev, sign] : {std::pair{e1, 1}, std::pair{e2, -1}}) {
        const LocalElement v2 = sign == 1 ? p.b() : -p.b();
        CHECK(congruent(d(0, 0) * v1 + d(0, 1) * v2, ev * v1));
        CHECK(congruent(d(1, 0) * v1 + d(1, 1) * v2, ev * v2));
      }
      const auto [f1, f2] = eigenline_form_values(p);
      const LocalElement expected = (p.lambda() * p.b()).scaled({2 * ns, 0});
      CHECK(congruent(f1, expected));
      CHECK(congruent(f2, -expected));
      CHECK(has_split_centralizer(build_delta(p)));
      CHECK(has_compact_centralizer(build_delta(p)));
    }
  }
}

TEST_CASE("contraction section solves XX* = delta") {
  std::mt19937 rng(6);
  for (int q : {3, 5, 7}) {
    const FieldConfig cfg(q, 14);
    int solved = 0, empty = 0;
    for (int trial = 0; trial < 40; ++trial) {
      const int vl = trial % 4 - 1;
      const int vm = vl + 2 * (trial % 3 - 1);
      const LocalElement lambda = random_element(cfg, rng, vl, true);
      LocalElement mu = random_element(cfg, rng, vm, true);
      if (cfg.field().is_square((lambda * mu).leading().x)) mu = mu.scaled({cfg.ns(), 0});
      const LocalElement a = trial % 5 == 0 ? LocalElement::zero(cfg.field()) : random_element(cfg, rng, trial % 3, true);
      const StableClassParams p(a, lambda, mu);
      const HermitianElement d = build_delta(p);
      const auto x = contraction_section(d, cfg);
      if (p.det_valuation() % 2 == 0) {
        REQUIRE(x.has_value());
        CHECK(congruent(contract(*x).matrix(), d.matrix()));
        ++solved;
      } else {
        CHECK_FALSE(x.has_value());
        ++empty;
      }
    }
    CHECK(solved > 0);
    CHECK(empty > 0);
  }
}

TEST_CASE("regular semisimplicity and compactness of orbit representatives") {
  const FieldConfig cfg(3, 10);
  CHECK(is_regular_semisimple(orbit_section({0, 2}, cfg)));
  const HermitianElement rep(orbit_representative({1, 3}, cfg));
  // Eigenvalues +-sqrt(ns * w^4): the centralizer is the non-split anisotropic torus.
  CHECK_FALSE(has_split_centralizer(rep));
  CHECK_FALSE(has_compact_centralizer(HermitianElement(orbit_representative({0, 0}, cfg))));
  CHECK(has_compact_centralizer(HermitianElement(orbit_representative({0, 1}, cfg))));
  CHECK_FALSE(is_regular_semisimple(Matrix2::zero(cfg)));
  CHECK_THROWS_AS(is_regular_semisimple(Matrix2::identity(cfg)), InsufficientPrecision);
}

TEST_CASE("matrix text form round trips") {
  std::mt19937 rng(7);
  const FieldConfig cfg(5, 6);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix2 x = random_matrix(cfg, rng);
    CHECK(parse_matrix(x.to_string(), cfg) == x);
  }
  CHECK_THROWS_AS(parse_matrix("[[1, 2], [3]]", cfg), ParseError);
  CHECK_THROWS_AS(parse_matrix("[1, 2, 3, 4]", cfg), ParseError);
}

TEST_CASE("contraction section on arbitrary Hermitian elements") {
  std::mt19937 rng(9);
  for (int q : {3, 5, 7}) {
    const FieldConfig cfg(q, 12);
    for (int trial = 0; trial < 30; ++trial) {
      Matrix2 x = random_matrix(cfg, rng);
      if (trial % 5 == 1) x(1, 0) = LocalElement::zero(cfg.field());
      const HermitianElement y = contract(x);
      const auto s = contraction_section(y, cfg);
      REQUIRE(s.has_value());
      CHECK(congruent(contract(*s).matrix(), y.matrix()));
    }
    const LocalElement t = LocalElement::residue(cfg, {1, 1}, -1);
    const HermitianElement diag(Matrix2::diagonal(t, t.conjugate()));
    CHECK(congruent(contract(*contraction_section(diag, cfg)).matrix(), diag.matrix()));
    const HermitianElement upper(Matrix2{LocalElement::integer(cfg, 1), LocalElement::zeta(cfg),
                                         LocalElement::zero(cfg.field()), LocalElement::integer(cfg, 1)});
    CHECK(congruent(contract(*contraction_section(upper, cfg)).matrix(), upper.matrix()));
    CHECK_FALSE(contraction_section(HermitianElement(orbit_representative({0, 1}, cfg)), cfg).has_value());
  }
}
