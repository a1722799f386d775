#pragma once

// Counting-measure evaluation of the pushforward Phi = r_!(1_End(Λ)), orbital
// integrals on Herm(V_2), their κ and stable combinations, the relative orbital
// integral on End(V_2), and the rank-one endoscopic side. U(Λ) and compact tori
// have volume 1, so every integral is a non-negative integer.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include "relfl/enumeration.hpp"

namespace relfl {

struct IndicatorSpec {
  enum class Kind { end_lambda, herm_nk, phi_n, phi_kappa };
  Kind kind = Kind::end_lambda;
  int k = 0;
  int n = 0;

  /// 1 on End(Λ): all entries integral.
  static IndicatorSpec end_lambda() { return {Kind::end_lambda, 0, 0}; }
  /// 1 on Herm(Λ)_{n,k}: all entries of valuation >= k and val(det) = n.
  static IndicatorSpec herm_nk(int k, int n) { return {Kind::herm_nk, k, n}; }
  /// Phi_n = sum_{k=0}^{n/2} q^k 1_{Herm(Λ)_{n,k}} (0 for odd or negative n).
  static IndicatorSpec phi_n(int n) { return {Kind::phi_n, 0, n}; }
  /// Phi^κ on F x F: 1 when both valuations are even.
  static IndicatorSpec phi_kappa() { return {Kind::phi_kappa, 0, 0}; }

  std::string to_string() const;
};

/// Value of the indicator on every completion of a partially known matrix m
/// whose determinant is det.
Verdict indicator_verdict(const IndicatorSpec& f, const Matrix2& m, const LocalElement& det, int q);

/// Value of a matrix indicator at m; InsufficientPrecision if undecidable.
std::int64_t evaluate_indicator(const IndicatorSpec& f, const Matrix2& m, int q);

/// Phi at a Hermitian point through the weighted expansion sum_k q^k 1_{Herm(Λ)_{n,k}}.
std::int64_t phi_weighted(const HermitianElement& y, int q);
/// Phi at a Hermitian point through sum_k (sum_{j<=k} q^j) 1_{GL(Λ).w^(k,n-k)}, with the
/// orbit read off the elementary divisors of y.
std::int64_t phi_orbit_sum(const HermitianElement& y, int q);
/// Elementary divisors (e1 <= e2) of a nonsingular matrix over O_E, by elimination.
std::pair<int, int> elementary_divisors(const Matrix2& m);

struct IntegralResult {
  std::int64_t value = 0;
  EnumWindow window;
  /// boundary_vanishing held on the window.
  bool certified = false;
  std::uint64_t nodes = 0;
};

struct BruteForceOptions {
  /// Explicit window: evaluated and certified but never widened. Otherwise a
  /// default window is derived from the input and widened once if needed.
  std::optional<EnumWindow> window;
  CountOptions count;
};

EnumWindow default_pushforward_window(const Matrix2& x);
EnumWindow default_orbit_window(const HermitianElement& d);

/// sum over b in B/(B∩U(Λ)) of 1_End(Λ)(X b) = Phi(XX*).
IntegralResult pushforward_bruteforce(const Matrix2& x, const FieldConfig& cfg, const BruteForceOptions& opts = {});

/// Phi(y) through a section of the contraction over y; 0 when the fiber is empty.
IntegralResult pushforward_at(const HermitianElement& y, const FieldConfig& cfg, const BruteForceOptions& opts = {});

/// sum over h in B∩U(Λ)\B of f(h d h^{-1}); d must be regular semisimple with compact centralizer.
IntegralResult orb_bruteforce(const HermitianElement& d, const IndicatorSpec& f, const FieldConfig& cfg,
                              const BruteForceOptions& opts = {});

/// Orb(delta_+, f) - Orb(delta_-, f) with delta_- = companion_delta(p); p needs eta(mu) = +1.
std::int64_t kappa_orb_bruteforce(const StableClassParams& p, const IndicatorSpec& f, const FieldConfig& cfg,
                                  const BruteForceOptions& opts = {});
/// Orb(delta_+, f) + Orb(delta_-, f).
std::int64_t stable_orb_bruteforce(const StableClassParams& p, const IndicatorSpec& f, const FieldConfig& cfg,
                                   const BruteForceOptions& opts = {});

/// sum over (h, b) of 1_End(Λ)(h X b), h conjugation-oriented, b right-translation
/// oriented; requires X regular semisimple with compact stabilizer.
IntegralResult ro_bruteforce(const Matrix2& x, const FieldConfig& cfg, const BruteForceOptions& opts = {});

/// A function on E x E invariant under O_E^x scaling in each variable.
using EndoscopicFunction = std::function<std::int64_t(const LocalElement&, const LocalElement&)>;

/// Relative orbital integral of the rank-one pair on E x E: the evaluation f(x, y).
std::int64_t endoscopic_ro(const LocalElement& x, const LocalElement& y, const EndoscopicFunction& f);

/// 1_{O_E} x 1_{O_E}.
std::int64_t basic_endoscopic_function(const LocalElement& x, const LocalElement& y);

/// r_!(1_{O_E})(t) for t in F: integrate over the norm fiber above t (empty unless val(t) is even).
std::int64_t rank_one_pushforward(const LocalElement& t);

/// SO((x, y), Phi^κ) on the endoscopic side, computed as a product of rank-one pushforwards.
std::int64_t endoscopic_so_bruteforce(const LocalElement& x, const LocalElement& y);

}  // namespace relfl
