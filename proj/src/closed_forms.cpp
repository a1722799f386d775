#include "relfl/closed_forms.hpp"

#include <algorithm>
#include <chrono>
#include <random>
#include <tuple>

namespace relfl {

namespace {

bool even(int v) { return v % 2 == 0; }

std::string rational_string(const Rational& r) {
  if (r.denominator() == 1) return std::to_string(r.numerator());
  return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

FieldConfig config_of(const LocalElement& e, int precision) {
  return FieldConfig(e.field().q(), precision);
}

bool pair_matches(const std::pair<LocalElement, LocalElement>& eigs, const LocalElement& e1, const LocalElement& e2) {
  return (congruent(eigs.first, e1) && congruent(eigs.second, e2)) ||
         (congruent(eigs.first, e2) && congruent(eigs.second, e1));
}

struct Eigen {
  LocalElement e1, e2;
};

// Eigenvalues (tr +- sqrt(disc)) / 2 of a Hermitian element with eigenvalues in F.
Eigen eigenvalues(const HermitianElement& d) {
  const Matrix2& m = d.matrix();
  const LocalElement tr = m.trace();
  const LocalElement det = m.det();
  const FieldConfig cfg = config_of(tr, std::max(1, m.precision() == kInfinity ? 32 : m.precision()));
  const LocalElement four = LocalElement::integer(cfg, 4);
  const LocalElement disc = tr * tr - four * det;
  if (disc.is_zero()) throw DegenerateDiscriminant("repeated eigenvalue");
  if (!is_square_in_base_field(disc)) throw NotInBaseField("eigenvalues do not lie in F");
  const LocalElement s = sqrt_in_base_field(disc);
  const LocalElement half = LocalElement::integer(cfg, 2).inverse();
  return {(tr + s) * half, (tr - s) * half};
}

// The split-form value z(v1 conj(v2) - v2 conj(v1)) on an eigenvector for e.
LocalElement eigenline_value(const HermitianElement& d, const LocalElement& e, const LocalElement& z) {
  const Matrix2& m = d.matrix();
  LocalElement v1, v2;
  if (!m(0, 1).is_zero()) {
    v1 = m(0, 1);
    v2 = e - m(0, 0);
  } else {
    v1 = e - m(1, 1);
    v2 = m(1, 0);
  }
  return z * (v1 * v2.conjugate() - v2 * v1.conjugate());
}

}  // namespace

QPoly phi_closed(int i, int j) {
  if (i < 0 || j < 0) throw InvalidParams("orbit indices must be non-negative");
  if (!even(i + j)) return QPoly();
  return QPoly::geometric(0, std::min(i, j));
}

QPoly orb_basic_closed(int eta, int m) {
  if (eta != 1 && eta != -1) throw InvalidParams("eta must be +1 or -1");
  if (m < 0) return QPoly();
  return QPoly::geometric(0, eta == 1 ? m : m - 1);
}

int orbit_case(int n1, int n2) {
  if (n1 > n2) return 1;
  if (n1 < n2) return 2;
  return 3;
}

QPoly orb_phi_closed(int n1, int n2, int n, int sign) {
  if (sign != 1 && sign != -1) throw InvalidParams("sign must be +1 or -1");
  if (n2 < 0 || n1 < 0) throw InconsistentCase("closed orbital integrals need val(a), val(b) >= 0");
  const int regime = orbit_case(n1, n2);
  int c = 0;
  switch (regime) {
    case 1:
      if (n != 2 * n2) throw InconsistentCase("n1 > n2 forces n = 2*n2");
      c = n2;
      break;
    case 2:
      if (n != 2 * n1) throw InconsistentCase("n1 < n2 forces n = 2*n1");
      c = n1;
      break;
    default:
      if (n < 2 * n1) throw InconsistentCase("n1 = n2 forces n >= 2*n1");
      if (!even(n)) return QPoly();
      c = n2;
      break;
  }
  QPoly total;
  for (int k = 0; k <= c; ++k) total += QPoly::geometric(k, n2);
  const int correction = sign == 1 ? (1 + c) / 2 : (2 + c) / 2;
  return total - QPoly::monomial(correction, n2);
}

QPoly kappa_orb_closed(int v_plus, int v_minus, int n2) {
  if (std::min(v_plus, v_minus) < 0 || n2 < 0) return QPoly();
  return even(v_plus) && even(v_minus) ? QPoly::q_power(n2) : QPoly();
}

int kappa_character(int parity) {
  if (parity != 0 && parity != 1) throw InvalidParams("parity must be 0 or 1");
  return parity == 0 ? 1 : -1;
}

QPoly endoscopic_so_closed(int vx, int vy) {
  return vx >= 0 && vy >= 0 && even(vx) && even(vy) ? QPoly(1) : QPoly();
}

bool is_nice_matching(const HermitianElement& d) {
  const Eigen ev = eigenvalues(d);
  const LocalElement& tr_ref = ev.e1;
  const FieldConfig cfg = config_of(tr_ref, 32);
  const LocalElement z = LocalElement::zeta(cfg);
  const LocalElement f1 = eigenline_value(d, ev.e1, z);
  const LocalElement f2 = eigenline_value(d, ev.e2, z);
  const bool nice1 = even(f1.valuation());
  const bool nice2 = even(f2.valuation());
  if (nice1 != nice2) throw Error("eigenline form values disagree in parity");
  return nice1;
}

LaurentQPoly transfer_factor_specialized(const std::pair<LocalElement, LocalElement>& eigs, const StableClassParams& p,
                                         int which) {
  if (which != 1 && which != -1) throw InvalidParams("which must be +1 or -1");
  if (p.eta_mu() != 1) throw InvalidParams("the base point needs eta(mu) = +1");
  if (p.b().is_zero()) throw DegenerateDiscriminant("b = 0");
  const auto [e1, e2] = eigenvalue_split(p);
  if (!pair_matches(eigs, e1, e2)) return LaurentQPoly();
  const int n2 = p.n2();
  // The nice representative is the base point for even n2 and its companion for odd n2.
  const int nice_sign = even(n2) == (which == 1) ? 1 : -1;
  const int sign = even(n2) ? nice_sign : -nice_sign;
  return LaurentQPoly::monomial(sign, -n2);
}

LaurentQPoly transfer_factor_general(const std::pair<LocalElement, LocalElement>& eigs, const HermitianElement& d) {
  Eigen ev;
  try {
    ev = eigenvalues(d);
  } catch (const NotInBaseField&) {
    return LaurentQPoly();
  }
  if (!pair_matches(eigs, ev.e1, ev.e2)) return LaurentQPoly();
  const LocalElement gap = eigs.first - eigs.second;
  const bool nice = is_nice_matching(d);
  int parity = nice ? 0 : 1;
  try {
    const StableClassParams p = params_from_normal_form(d);
    const StableClassParams nice_params = nice ? p : companion_delta(p);
    parity = rational_class_invariant(d) ^ rational_class_invariant(build_delta(nice_params));
  } catch (const MalformedShape&) {
  } catch (const InvalidParams&) {
  }
  const int sign = kappa_character(parity) * quadratic_character(gap);
  return LaurentQPoly::monomial(sign, -gap.valuation());
}

LaurentQPoly transfer_factor(const std::pair<LocalElement, LocalElement>& eigs, const StableClassParams& p, int which) {
  const LaurentQPoly special = transfer_factor_specialized(eigs, p, which);
  const HermitianElement d = build_delta(which == 1 ? p : companion_delta(p));
  const LaurentQPoly general = transfer_factor_general(eigs, d);
  if (!(special == general)) {
    throw Error("transfer factor mismatch at " + p.to_string() + ": " + special.to_string() + " vs " +
                general.to_string());
  }
  return special;
}

LaurentQPoly relative_transfer_factor(const std::pair<LocalElement, LocalElement>& endoscopic_pair, const Matrix2& x) {
  const std::pair<LocalElement, LocalElement> eigs{endoscopic_pair.first.norm(), endoscopic_pair.second.norm()};
  return transfer_factor_general(eigs, contract(x));
}

nlohmann::json FlReport::to_json() const {
  nlohmann::json j;
  j["q"] = q;
  j["params"] = {{"a", a}, {"lambda", lambda}, {"mu", mu}};
  j["valuations"] = {{"n1", n1 == kInfinity ? nlohmann::json(nullptr) : nlohmann::json(n1)},
                     {"n2", n2},
                     {"n", n},
                     {"v_plus", v_plus},
                     {"v_minus", v_minus},
                     {"case", orbit_case}};
  j["endoscopic"] = {{"closed", lhs.to_string()}, {"brute", lhs_brute}};
  j["transfer"] = {{"delta_plus", delta_plus.to_string()}, {"delta_minus", delta_minus.to_string()}};
  j["orbital"] = {{"plus_closed", orb_plus_closed.to_string()},
                  {"minus_closed", orb_minus_closed.to_string()},
                  {"kappa_closed", kappa_closed.to_string()},
                  {"plus_brute", orb_plus_brute},
                  {"minus_brute", orb_minus_brute}};
  j["relative"] = {{"closed", rhs_closed.to_string()}, {"brute", rational_string(rhs_brute)}};
  j["verdicts"] = {{"closed_vs_closed", verdicts.closed_vs_closed},
                   {"closed_vs_brute", verdicts.closed_vs_brute},
                   {"orbits_match", verdicts.orbits_match},
                   {"kappa_identity", verdicts.kappa_identity},
                   {"covariance", verdicts.covariance},
                   {"endoscopic_side", verdicts.endoscopic_side}};
  j["passed"] = passed();
  j["wall_ms"] = wall_ms ? nlohmann::json(*wall_ms) : nlohmann::json(nullptr);
  return j;
}

FlReport fl_verify(const StableClassParams& p, const FieldConfig& cfg, const BruteForceOptions& opts, bool timings) {
  if (p.eta_mu() != 1) throw InvalidParams("fl_verify needs a base point with eta(mu) = +1");
  const auto start = std::chrono::steady_clock::now();
  FlReport r;
  r.q = cfg.q();
  r.a = p.a().to_string();
  r.lambda = p.lambda().to_string();
  r.mu = p.mu().to_string();
  const auto eigs = eigenvalue_split(p);
  r.n1 = p.n1();
  r.n2 = p.n2();
  r.n = p.det_valuation();
  r.v_plus = eigs.first.valuation();
  r.v_minus = eigs.second.valuation();
  r.orbit_case = orbit_case(r.n1, r.n2);

  r.lhs = endoscopic_so_closed(r.v_plus, r.v_minus);
  r.lhs_brute = endoscopic_so_bruteforce(eigs.first, eigs.second);
  r.delta_plus = transfer_factor(eigs, p, 1);
  r.delta_minus = transfer_factor(eigs, p, -1);
  r.orb_plus_closed = orb_phi_closed(r.n1, r.n2, r.n, 1);
  r.orb_minus_closed = orb_phi_closed(r.n1, r.n2, r.n, -1);
  r.kappa_closed = kappa_orb_closed(r.v_plus, r.v_minus, r.n2);

  const IndicatorSpec f = IndicatorSpec::phi_n(r.n);
  r.orb_plus_brute = orb_bruteforce(build_delta(p), f, cfg, opts).value;
  r.orb_minus_brute = orb_bruteforce(build_delta(companion_delta(p)), f, cfg, opts).value;
  r.rhs_closed = r.delta_plus * LaurentQPoly(r.kappa_closed);
  const Rational dp = r.delta_plus.evaluate(r.q);
  const Rational dm = r.delta_minus.evaluate(r.q);
  const Rational diff(r.orb_plus_brute - r.orb_minus_brute);
  r.rhs_brute = dp * diff;

  r.verdicts.closed_vs_closed = LaurentQPoly(r.lhs) == r.rhs_closed;
  r.verdicts.closed_vs_brute = r.rhs_closed.evaluate(r.q) == r.rhs_brute;
  r.verdicts.orbits_match =
      r.orb_plus_closed.evaluate(r.q) == r.orb_plus_brute && r.orb_minus_closed.evaluate(r.q) == r.orb_minus_brute;
  r.verdicts.kappa_identity = r.orb_plus_closed - r.orb_minus_closed == r.kappa_closed;
  r.verdicts.covariance = dp * diff == dm * (-diff) &&
                          r.delta_plus * LaurentQPoly(r.kappa_closed) == r.delta_minus * LaurentQPoly(-r.kappa_closed);
  r.verdicts.endoscopic_side = r.lhs.evaluate(r.q) == r.lhs_brute;
  if (timings) {
    r.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  }
  return r;
}

namespace {

class UnitSampler {
 public:
  UnitSampler(const FieldConfig& cfg, std::uint64_t seed) : cfg_(cfg), rng_(seed) {}

  int digit() { return static_cast<int>(rng_() % static_cast<std::uint64_t>(cfg_.q())); }
  int nonzero_digit() { return 1 + static_cast<int>(rng_() % static_cast<std::uint64_t>(cfg_.q() - 1)); }
  int choice(int n) { return static_cast<int>(rng_() % static_cast<std::uint64_t>(n)); }

  /// A unit of O_F with a random leading digit and three random higher digits, times w^v.
  LocalElement unit(int v) { return unit_with_leading(nonzero_digit(), v); }

  LocalElement unit_with_leading(int lead, int v) {
    std::vector<ResidueElement> digits{cfg_.field().make(lead)};
    for (int i = 0; i < 3; ++i) digits.push_back(cfg_.field().make(digit()));
    return LocalElement::from_coefficients(cfg_.field(), v, digits, v + cfg_.precision());
  }

 private:
  FieldConfig cfg_;
  std::mt19937_64 rng_;
};

}  // namespace

std::vector<GridPoint> stable_class_grid(const FieldConfig& cfg, int max_n, std::uint64_t seed) {
  if (max_n < 0) throw InvalidParams("max_n must be non-negative");
  UnitSampler sample(cfg, seed);
  const LocalElement ns = LocalElement::integer(cfg, cfg.ns());
  std::vector<GridPoint> out;

  for (int n2 = 0; n2 <= max_n; ++n2) {
    const LocalElement b = sample.unit(n2);
    const int s = sample.choice(3) - 1;
    const LocalElement mu = sample.unit(2 * s);
    const LocalElement lambda = b * b / (mu * ns);

    auto push = [&](const LocalElement& a, std::string label) {
      out.push_back({StableClassParams(a, lambda, mu), std::move(label)});
    };

    for (int n1 = 0; n1 <= max_n; ++n1) {
      if (n1 != n2) {
        push(sample.unit(n1), "n1=" + std::to_string(n1) + ",n2=" + std::to_string(n2));
        continue;
      }
      const std::string base = "n1=n2=" + std::to_string(n2) + ",t=";
      if (cfg.q() >= 5) {
        // c * b with c not in {0, 1, -1} keeps both a + b and a - b of valuation n2.
        const int c = 2 + sample.choice(cfg.q() - 3);
        push(b * LocalElement::integer(cfg, c), base + "0");
      }
      for (int t = 1; t <= 2; ++t) push(b + sample.unit(n2 + t), base + std::to_string(t));
    }
    push(LocalElement::zero(cfg.field()), "a=0,n2=" + std::to_string(n2));
  }

  std::sort(out.begin(), out.end(), [](const GridPoint& x, const GridPoint& y) {
    const auto key = [](const GridPoint& g) {
      return std::make_tuple(g.params.n2(), g.params.n1(), g.label);
    };
    return key(x) < key(y);
  });
  return out;
}

}  // namespace relfl
