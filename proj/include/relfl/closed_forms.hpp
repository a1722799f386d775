#pragma once

// Closed forms in q for the pushforward, the orbital and κ-orbital integrals on
// Herm(V_2), transfer factors, the endoscopic side, and the fundamental-lemma check.

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "relfl/integrals.hpp"
#include "relfl/qpoly.hpp"

namespace relfl {

/// Phi(w^(i,j)): 0 if i + j is odd, else sum_{k=0}^{min(i,j)} q^k.
QPoly phi_closed(int i, int j);

/// Orb(X_{mu,lambda}, 1_End(Λ)) with val(lambda*mu) = 2m: sum_{k<=m} q^k for eta = +1,
/// sum_{k<=m-1} q^k for eta = -1.
QPoly orb_basic_closed(int eta, int m);

/// Which of the three valuation regimes (n1 > n2, n1 < n2, n1 = n2) applies.
int orbit_case(int n1, int n2);

/// Orb(delta_sign, Phi_n) for val(a) = n1 (kInfinity when a = 0), val(b) = n2, val(det) = n:
/// sum_{k=0}^{c} sum_{j=k}^{n2} q^j - floor((1+c)/2) q^n2 (sign +1) or floor((2+c)/2) q^n2
/// (sign -1), with c = n2, n1, n2 in the three cases, and 0 for odd n when n1 = n2.
/// Throws InconsistentCase when n does not fit the case.
QPoly orb_phi_closed(int n1, int n2, int n, int sign);

/// q^n2 when both eigenvalue valuations are even (and non-negative), else 0.
QPoly kappa_orb_closed(int v_plus, int v_minus, int n2);

/// +1 on parity 0, -1 on parity 1.
int kappa_character(int parity);

/// 1 when both valuations are even and non-negative, else 0.
QPoly endoscopic_so_closed(int vx, int vy);

/// Whether the matching of d with its eigenvalues is nice: the split form restricts
/// to a split form on both eigenlines. Throws DegenerateDiscriminant if d has a repeated
/// eigenvalue and NotInBaseField if the eigenvalues are not in F.
bool is_nice_matching(const HermitianElement& d);

/// Rank-two transfer factor of the base point p (eta(mu) = +1, which = +1) or its
/// companion (which = -1), from the parity of n2 = val(b). Zero when eigs do not match.
LaurentQPoly transfer_factor_specialized(const std::pair<LocalElement, LocalElement>& eigs, const StableClassParams& p,
                                         int which);

/// kappa(inv(d, d_nice)) * omega(D) * |D| with D = e1 - e2, for any Hermitian d with
/// eigenvalues in F; zero when eigs do not match d.
LaurentQPoly transfer_factor_general(const std::pair<LocalElement, LocalElement>& eigs, const HermitianElement& d);

/// The specialized value, after checking it against the general formula.
LaurentQPoly transfer_factor(const std::pair<LocalElement, LocalElement>& eigs, const StableClassParams& p, int which);

/// Delta((Nm x_a, Nm x_b), XX*).
LaurentQPoly relative_transfer_factor(const std::pair<LocalElement, LocalElement>& endoscopic_pair, const Matrix2& x);

struct FlReport {
  int q = 0;
  std::string a, lambda, mu;
  int n1 = 0, n2 = 0, n = 0, v_plus = 0, v_minus = 0, orbit_case = 0;
  QPoly lhs;
  std::int64_t lhs_brute = 0;
  LaurentQPoly delta_plus, delta_minus;
  QPoly orb_plus_closed, orb_minus_closed, kappa_closed;
  std::int64_t orb_plus_brute = 0, orb_minus_brute = 0;
  LaurentQPoly rhs_closed;
  Rational rhs_brute;
  struct Verdicts {
    bool closed_vs_closed = false;
    bool closed_vs_brute = false;
    bool orbits_match = false;
    bool kappa_identity = false;
    bool covariance = false;
    bool endoscopic_side = false;
    bool all() const {
      return closed_vs_closed && closed_vs_brute && orbits_match && kappa_identity && covariance && endoscopic_side;
    }
  } verdicts;
  std::optional<double> wall_ms;

  bool passed() const { return verdicts.all(); }
  nlohmann::json to_json() const;
};

/// Evaluate both sides of the fundamental lemma at the stable class of p (eta(mu) = +1).
FlReport fl_verify(const StableClassParams& p, const FieldConfig& cfg, const BruteForceOptions& opts = {},
                   bool timings = false);

struct GridPoint {
  StableClassParams params;
  /// Human label such as "n1=2,n2=1" or "n1=n2=1,t=1".
  std::string label;
};

/// Base points (eta(mu) = +1) covering n1, n2 <= max_n in all three valuation regimes,
/// including a = 0 and, when n1 = n2, val(a - b) = n2 + t for t = 0 (q >= 5), 1, 2.
/// Units and the even valuation of mu are drawn from a deterministic generator.
std::vector<GridPoint> stable_class_grid(const FieldConfig& cfg, int max_n, std::uint64_t seed);

}  // namespace relfl
