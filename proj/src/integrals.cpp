#include "relfl/integrals.hpp"

#include <algorithm>

namespace relfl {

namespace {

std::int64_t geometric_sum(int q, int top) {
  std::int64_t total = 0, term = 1;
  for (int j = 0; j <= top; ++j) {
    if (__builtin_add_overflow(total, term, &total)) throw Error("closed sum overflows int64");
    if (j < top && __builtin_mul_overflow(term, static_cast<std::int64_t>(q), &term)) {
      throw Error("closed sum overflows int64");
    }
  }
  return total;
}

// Lower bound for the minimal entry valuation, and whether it is attained.
struct MinValuation {
  int lower = kInfinity;
  bool exact = true;

  // -1 undecided, 0 false, 1 true for "min valuation >= t".
  int at_least(int t) const {
    if (lower >= t) return 1;
    return exact ? 0 : -1;
  }
};

MinValuation min_valuation(const Matrix2& m) {
  MinValuation r;
  bool attained = false;
  for (const auto& e : m.entries()) {
    if (e.is_exact_zero()) continue;
    const int bound = e.valuation_bound();
    const bool known = !e.is_zero();
    if (bound < r.lower) {
      r.lower = bound;
      attained = known;
    } else if (bound == r.lower && known) {
      attained = true;
    }
  }
  r.exact = r.lower == kInfinity || attained;
  return r;
}

int det_valuation(const LocalElement& det) {
  if (det.is_exact_zero()) throw ZeroInput("singular matrix");
  return det.valuation();
}

int floor_div2(int v) { return v >= 0 ? v / 2 : -((-v + 1) / 2); }
int ceil_div2(int v) { return -floor_div2(-v); }

int finite_valuation(const LocalElement& e, const char* what) {
  if (e.is_zero()) {
    if (e.is_exact_zero()) throw ZeroInput(std::string(what) + " vanishes");
    throw InsufficientPrecision(std::string(what) + " undetermined: " + e.to_string());
  }
  return e.valuation();
}

// Evaluate on a window, certifying with boundary_vanishing; the default window is
// widened once before giving up.
IntegralResult certified_count(const Matrix2& target, Orientation o, const CosetIntegrand& f, EnumWindow fallback,
                               const FieldConfig& cfg, const BruteForceOptions& opts) {
  IntegralResult r;
  if (opts.window) {
    r.window = *opts.window;
    r.certified = boundary_vanishing(target, o, r.window, f, cfg, opts.count);
  } else {
    r.window = fallback;
    r.certified = boundary_vanishing(target, o, r.window, f, cfg, opts.count);
    if (!r.certified) {
      r.window = fallback.widened(2, 4);
      r.certified = boundary_vanishing(target, o, r.window, f, cfg, opts.count);
    }
    if (!r.certified) {
      throw UncertifiedWindow("integrand does not vanish on the boundary of " + r.window.to_string() + " (" +
                              to_string(o) + ")");
    }
  }
  const CountStats s = count_window(target, o, r.window, f, cfg, opts.count);
  r.value = s.value;
  r.nodes = s.nodes;
  return r;
}

void require_compact_regular(const HermitianElement& d) {
  if (!has_compact_centralizer(d)) {
    throw InvalidParams("orbital integrals need a regular semisimple element with compact centralizer");
  }
}

}  // namespace

std::string IndicatorSpec::to_string() const {
  switch (kind) {
    case Kind::end_lambda:
      return "end_lambda";
    case Kind::herm_nk:
      return "herm_nk(" + std::to_string(k) + "," + std::to_string(n) + ")";
    case Kind::phi_n:
      return "phi_n(" + std::to_string(n) + ")";
    case Kind::phi_kappa:
      return "phi_kappa";
  }
  return "?";
}

Verdict indicator_verdict(const IndicatorSpec& f, const Matrix2& m, const LocalElement& det, int q) {
  const MinValuation c = min_valuation(m);
  auto from_predicate = [](int p) {
    if (p < 0) return Verdict::undecided();
    return p ? Verdict::constant(1) : Verdict::vanishing();
  };
  switch (f.kind) {
    case IndicatorSpec::Kind::end_lambda:
      return from_predicate(c.at_least(0));
    case IndicatorSpec::Kind::herm_nk:
      if (det_valuation(det) != f.n) return Verdict::vanishing();
      return from_predicate(c.at_least(f.k));
    case IndicatorSpec::Kind::phi_n: {
      if (f.n < 0 || f.n % 2 != 0 || det_valuation(det) != f.n) return Verdict::vanishing();
      const int top = f.n / 2;
      if (c.lower >= top) return Verdict::constant(geometric_sum(q, top));
      if (!c.exact) return Verdict::undecided();
      if (c.lower < 0) return Verdict::vanishing();
      return Verdict::constant(geometric_sum(q, c.lower));
    }
    case IndicatorSpec::Kind::phi_kappa:
      break;
  }
  throw InvalidParams("phi_kappa is a function on the endoscopic side, not on matrices");
}

std::int64_t evaluate_indicator(const IndicatorSpec& f, const Matrix2& m, int q) {
  const Verdict v = indicator_verdict(f, m, m.det(), q);
  if (v.kind == Verdict::Kind::undecided) {
    throw InsufficientPrecision(f.to_string() + " undecided at " + m.to_string());
  }
  return v.value;
}

std::int64_t phi_weighted(const HermitianElement& y, int q) {
  const int n = det_valuation(y.matrix().det());
  if (n < 0 || n % 2 != 0) return 0;
  std::int64_t total = 0, weight = 1;
  for (int k = 0; k <= n / 2; ++k) {
    total += weight * evaluate_indicator(IndicatorSpec::herm_nk(k, n), y.matrix(), q);
    weight *= q;
  }
  return total;
}

std::pair<int, int> elementary_divisors(const Matrix2& m) {
  int best = 0;
  for (int i = 1; i < 4; ++i) {
    if (m.entries()[static_cast<std::size_t>(i)].valuation_bound() <
        m.entries()[static_cast<std::size_t>(best)].valuation_bound()) {
      best = i;
    }
  }
  // Move the pivot to the corner by row and column swaps, then clear its row and column.
  const int r = best / 2, c = best % 2;
  const LocalElement& p = m(r, c);
  const LocalElement& b = m(r, 1 - c);
  const LocalElement& cc = m(1 - r, c);
  const LocalElement& d = m(1 - r, 1 - c);
  const int e1 = finite_valuation(p, "pivot");
  const LocalElement rest = d - cc * (b / p);
  const int e2 = finite_valuation(rest, "second elementary divisor");
  return {e1, e2};
}

std::int64_t phi_orbit_sum(const HermitianElement& y, int q) {
  const int n = det_valuation(y.matrix().det());
  if (n < 0 || n % 2 != 0) return 0;
  const auto [e1, e2] = elementary_divisors(y.matrix());
  if (e1 < 0) return 0;
  std::int64_t total = 0;
  for (int k = 0; k <= n / 2; ++k) {
    const bool in_orbit = e1 == k && e2 == n - k;
    if (in_orbit) total += geometric_sum(q, k);
  }
  return total;
}

EnumWindow default_pushforward_window(const Matrix2& x) {
  const int vdet = det_valuation(x.det());
  const int vx = x(0, 0).valuation_bound(), vz = x(1, 0).valuation_bound();
  const int c0 = std::min(vx, vz);
  if (c0 == kInfinity) throw ZeroInput("first column vanishes");
  const int k_min = -c0 - 2;
  const int k_max = vdet - c0 + 2;
  int u_bound = kInfinity;
  for (int row = 0; row < 2; ++row) {
    const int va = x(row, 0).valuation_bound();
    if (va == kInfinity) continue;
    int b = -c0 - va;
    const int vb = x(row, 1).valuation_bound();
    if (vb != kInfinity) b = std::min(b, vb - va);
    u_bound = std::min(u_bound, b);
  }
  return {k_min, k_max, std::min(2 * k_min, u_bound) - 2};
}

EnumWindow default_orbit_window(const HermitianElement& d) {
  const Matrix2& m = d.matrix();
  const int vg = finite_valuation(m(1, 0), "lower-left entry");
  const LocalElement t = m.trace();
  const LocalElement disc = t * t - m.det().scaled({4, 0});
  const int vdisc = finite_valuation(disc, "discriminant");
  int vmin = kInfinity;
  for (const auto& e : m.entries()) vmin = std::min(vmin, e.valuation_bound());
  const int k_min = ceil_div2(-vg) - 2;
  const int k_max = floor_div2(vdisc - vg) + 2;
  return {k_min, std::max(k_min, k_max), std::min(2 * k_min, vmin - vg) - 2};
}

IntegralResult pushforward_bruteforce(const Matrix2& x, const FieldConfig& cfg, const BruteForceOptions& opts) {
  det_valuation(x.det());
  const int q = cfg.q();
  const LocalElement det = x.det();
  const CosetIntegrand f = [&](const CosetView& v) {
    return indicator_verdict(IndicatorSpec::end_lambda(), v.transformed, det, q);
  };
  return certified_count(x, Orientation::right_translate, f, default_pushforward_window(x), cfg, opts);
}

IntegralResult pushforward_at(const HermitianElement& y, const FieldConfig& cfg, const BruteForceOptions& opts) {
  const auto x = contraction_section(y, cfg);
  if (!x) {
    IntegralResult r;
    r.certified = true;
    return r;
  }
  return pushforward_bruteforce(*x, cfg, opts);
}

IntegralResult orb_bruteforce(const HermitianElement& d, const IndicatorSpec& f, const FieldConfig& cfg,
                              const BruteForceOptions& opts) {
  if (f.kind == IndicatorSpec::Kind::phi_kappa) throw InvalidParams("phi_kappa lives on the endoscopic side");
  require_compact_regular(d);
  const int q = cfg.q();
  const LocalElement det = d.matrix().det();
  const CosetIntegrand integrand = [&](const CosetView& v) { return indicator_verdict(f, v.transformed, det, q); };
  return certified_count(d.matrix(), Orientation::conjugate, integrand, default_orbit_window(d), cfg, opts);
}

namespace {

std::int64_t certified_orb(const StableClassParams& p, const IndicatorSpec& f, const FieldConfig& cfg,
                           const BruteForceOptions& opts) {
  const IntegralResult r = orb_bruteforce(build_delta(p), f, cfg, opts);
  if (!r.certified) throw UncertifiedWindow("orbital integral at " + p.to_string() + " not certified on " + r.window.to_string());
  return r.value;
}

void require_base_point(const StableClassParams& p) {
  if (p.eta_mu() != 1) throw InvalidParams("base point of the stable class needs eta(mu) = +1");
}

}  // namespace

std::int64_t kappa_orb_bruteforce(const StableClassParams& p, const IndicatorSpec& f, const FieldConfig& cfg,
                                  const BruteForceOptions& opts) {
  require_base_point(p);
  return certified_orb(p, f, cfg, opts) - certified_orb(companion_delta(p), f, cfg, opts);
}

std::int64_t stable_orb_bruteforce(const StableClassParams& p, const IndicatorSpec& f, const FieldConfig& cfg,
                                   const BruteForceOptions& opts) {
  require_base_point(p);
  return certified_orb(p, f, cfg, opts) + certified_orb(companion_delta(p), f, cfg, opts);
}

IntegralResult ro_bruteforce(const Matrix2& x, const FieldConfig& cfg, const BruteForceOptions& opts) {
  if (!is_regular_semisimple(x)) throw InvalidParams("relative orbital integrals need X regular semisimple");
  const HermitianElement delta = contract(x);
  if (!has_compact_centralizer(delta)) {
    throw InvalidParams("the counting normalization needs a compact stabilizer of X");
  }
  const int q = cfg.q();
  const LocalElement det = delta.matrix().det();
  BruteForceOptions inner_opts;
  inner_opts.count = opts.count;
  inner_opts.count.jobs = 1;
  const CosetIntegrand outer = [&](const CosetView& v) {
    // h X b integral forces h delta h^{-1} = (hXb)(hXb)* integral.
    const Verdict necessary = indicator_verdict(IndicatorSpec::end_lambda(), v.transformed, det, q);
    if (necessary.kind == Verdict::Kind::zero || !v.leaf) {
      return necessary.kind == Verdict::Kind::zero ? Verdict::vanishing() : Verdict::undecided();
    }
    const Matrix2 hx = coset_matrix({v.k, v.u}, Orientation::conjugate, cfg) * x;
    return Verdict::constant(pushforward_bruteforce(hx, cfg, inner_opts).value);
  };
  return certified_count(delta.matrix(), Orientation::conjugate, outer, default_orbit_window(delta), cfg, opts);
}

std::int64_t endoscopic_ro(const LocalElement& x, const LocalElement& y, const EndoscopicFunction& f) {
  if (x.is_zero() || y.is_zero()) throw ZeroInput("endoscopic relative orbital integral needs x, y in E^x");
  return f(x, y);
}

std::int64_t basic_endoscopic_function(const LocalElement& x, const LocalElement& y) {
  auto integral = [](const LocalElement& e) { return e.is_exact_zero() || finite_valuation(e, "argument") >= 0; };
  return integral(x) && integral(y) ? 1 : 0;
}

std::int64_t rank_one_pushforward(const LocalElement& t) {
  if (!t.in_base_field()) throw NotInBaseField("rank-one pushforward is a function on F");
  if (finite_valuation(t, "argument") % 2 != 0) return 0;
  const LocalElement e = norm_preimage(t);
  // The fiber is a single U(1)-orbit of volume 1, and 1_{O_E} is unit invariant.
  return e.valuation() >= 0 ? 1 : 0;
}

std::int64_t endoscopic_so_bruteforce(const LocalElement& x, const LocalElement& y) {
  return rank_one_pushforward(x) * rank_one_pushforward(y);
}

}  // namespace relfl
