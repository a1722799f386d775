#include "relfl/hermitian.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>
#include <vector>

namespace relfl {

// ---------------------------------------------------------------------------
// Matrix2

Matrix2 Matrix2::identity(const FieldConfig& cfg) {
  const ResidueField& f = cfg.field();
  return {LocalElement::integer(cfg, 1), LocalElement::zero(f), LocalElement::zero(f), LocalElement::integer(cfg, 1)};
}

Matrix2 Matrix2::zero(const FieldConfig& cfg) {
  const LocalElement z = LocalElement::zero(cfg.field());
  return {z, z, z, z};
}

Matrix2 Matrix2::diagonal(LocalElement a, LocalElement d) {
  const LocalElement z = LocalElement::zero(a.field());
  return {std::move(a), z, z, std::move(d)};
}

int Matrix2::precision() const {
  int p = kInfinity;
  for (const auto& e : e_) p = std::min(p, e.precision());
  return p;
}

Matrix2 Matrix2::conjugate() const {
  return {e_[0].conjugate(), e_[1].conjugate(), e_[2].conjugate(), e_[3].conjugate()};
}

Matrix2 Matrix2::transpose() const { return {e_[0], e_[2], e_[1], e_[3]}; }

LocalElement Matrix2::det() const { return e_[0] * e_[3] - e_[1] * e_[2]; }

LocalElement Matrix2::trace() const { return e_[0] + e_[3]; }

Matrix2 Matrix2::inverse() const {
  const LocalElement dinv = det().inverse();
  return {e_[3] * dinv, -e_[1] * dinv, -e_[2] * dinv, e_[0] * dinv};
}

Matrix2 Matrix2::scaled(const LocalElement& s) const { return {e_[0] * s, e_[1] * s, e_[2] * s, e_[3] * s}; }

Matrix2 operator+(const Matrix2& a, const Matrix2& b) {
  return {a.e_[0] + b.e_[0], a.e_[1] + b.e_[1], a.e_[2] + b.e_[2], a.e_[3] + b.e_[3]};
}

Matrix2 operator-(const Matrix2& a, const Matrix2& b) {
  return {a.e_[0] - b.e_[0], a.e_[1] - b.e_[1], a.e_[2] - b.e_[2], a.e_[3] - b.e_[3]};
}

Matrix2 operator*(const Matrix2& a, const Matrix2& b) {
  return {a.e_[0] * b.e_[0] + a.e_[1] * b.e_[2], a.e_[0] * b.e_[1] + a.e_[1] * b.e_[3],
          a.e_[2] * b.e_[0] + a.e_[3] * b.e_[2], a.e_[2] * b.e_[1] + a.e_[3] * b.e_[3]};
}

std::string Matrix2::to_string() const {
  std::ostringstream out;
  out << "[[" << e_[0].to_string() << ", " << e_[1].to_string() << "], [" << e_[2].to_string() << ", "
      << e_[3].to_string() << "]]";
  return out.str();
}

bool congruent(const Matrix2& a, const Matrix2& b) {
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < 2; ++c) {
      if (!congruent(a(r, c), b(r, c))) return false;
    }
  }
  return true;
}

Matrix2 parse_matrix(std::string_view text, const FieldConfig& cfg) {
  std::vector<std::string> cells;
  std::string current;
  int depth = 0;
  for (char ch : text) {
    if (ch == '[') {
      ++depth;
      continue;
    }
    if (ch == ']') {
      if (depth == 2) {
        cells.push_back(current);
        current.clear();
      }
      --depth;
      continue;
    }
    if (depth == 2 && ch == ',') {
      cells.push_back(current);
      current.clear();
      continue;
    }
    if (depth == 2) {
      current.push_back(ch);
    } else if (!std::isspace(static_cast<unsigned char>(ch)) && ch != ',') {
      throw ParseError("unexpected '" + std::string(1, ch) + "' in matrix literal");
    }
  }
  if (depth != 0 || cells.size() != 4) throw ParseError("matrix literal must be [[a, b], [c, d]]");
  return {parse_local_element(cells[0], cfg), parse_local_element(cells[1], cfg), parse_local_element(cells[2], cfg),
          parse_local_element(cells[3], cfg)};
}

Matrix2 split_form(const FieldConfig& cfg) {
  const LocalElement z = LocalElement::zeta(cfg);
  const LocalElement zero = LocalElement::zero(cfg.field());
  return {zero, z, -z, zero};
}

// ---------------------------------------------------------------------------
// Involution and contraction

Matrix2 star_involution(const Matrix2& x) {
  // J and J^{-1} = ns^{-1} [[0, -z], [z, 0]] are monomial, so multiplying by them
  // permutes entries and scales by residues without losing precision.
  const ResidueField& f = x(0, 0).field();
  const ResidueElement z{0, 1};
  const ResidueElement z_over_ns{0, f.inv_prime(f.ns())};
  const Matrix2 m = x.conjugate().transpose();
  // J * m: row0 = z * row1(m), row1 = -z * row0(m).
  const Matrix2 jm{m(1, 0).scaled(z), m(1, 1).scaled(z), -m(0, 0).scaled(z), -m(0, 1).scaled(z)};
  // (J m) * J^{-1}: col0 = (z/ns) * col1, col1 = -(z/ns) * col0.
  return {jm(0, 1).scaled(z_over_ns), -jm(0, 0).scaled(z_over_ns), jm(1, 1).scaled(z_over_ns),
          -jm(1, 0).scaled(z_over_ns)};
}

HermitianElement::HermitianElement(Matrix2 m) : m_(std::move(m)) {
  if (!congruent(star_involution(m_), m_)) {
    throw MalformedShape("matrix is not Hermitian for the split form: " + m_.to_string());
  }
}

HermitianElement contract(const Matrix2& x) { return HermitianElement(x * star_involution(x)); }

bool is_unitary(const Matrix2& g) {
  const Matrix2 p = g * star_involution(g);
  const ResidueField& f = g(0, 0).field();
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < 2; ++c) {
      LocalElement d = p(r, c);
      if (r == c) {
        const int prec = d.is_exact_zero() ? 1 : d.precision();
        if (prec < 1) throw InsufficientPrecision("unitarity undecidable at precision " + std::to_string(prec));
        d = d - LocalElement::monomial(f, {1, 0}, 0, prec);
      }
      if (!d.is_zero()) return false;
      if (d.precision() < 1) throw InsufficientPrecision("unitarity undecidable at precision " + std::to_string(d.precision()));
    }
  }
  return true;
}

std::pair<LocalElement, LocalElement> invariant_polynomial(const Matrix2& x) {
  const Matrix2 y = contract(x).matrix();
  return {y.trace(), y.det()};
}

namespace {

void require_decided_nonzero_or_exact(const LocalElement& v, const char* what) {
  if (v.is_zero() && !v.is_exact_zero()) {
    throw InsufficientPrecision(std::string(what) + " undetermined: " + v.to_string());
  }
}

LocalElement discriminant(const Matrix2& y) {
  const LocalElement t = y.trace();
  const LocalElement d = y.det();
  return t * t - d.scaled({4, 0});
}

}  // namespace

bool is_regular_semisimple(const Matrix2& x) {
  const auto [tr, det] = invariant_polynomial(x);
  require_decided_nonzero_or_exact(det, "determinant of XX*");
  if (det.is_exact_zero()) return false;
  const LocalElement disc = tr * tr - det.scaled({4, 0});
  require_decided_nonzero_or_exact(disc, "discriminant of XX*");
  return !disc.is_exact_zero();
}

bool has_compact_centralizer(const HermitianElement& d) {
  const LocalElement disc = discriminant(d.matrix());
  require_decided_nonzero_or_exact(disc, "discriminant");
  if (disc.is_exact_zero()) return false;
  if (!disc.in_base_field()) throw NotInBaseField("discriminant outside F: " + disc.to_string());
  // Non-compact exactly when F(sqrt(disc)) = E.
  const bool generates_e = disc.valuation() % 2 == 0 && !disc.field().is_square(disc.leading().x);
  return !generates_e;
}

bool has_split_centralizer(const HermitianElement& d) {
  const LocalElement disc = discriminant(d.matrix());
  require_decided_nonzero_or_exact(disc, "discriminant");
  if (disc.is_exact_zero()) return false;
  return is_square_in_base_field(disc);
}

Matrix2 orbit_representative(OrbitClassIndex idx, const FieldConfig& cfg) {
  const ResidueField& f = cfg.field();
  return {LocalElement::zero(f), LocalElement::residue(cfg, {0, 1}, idx.i), LocalElement::residue(cfg, {0, 1}, idx.j),
          LocalElement::zero(f)};
}

Matrix2 orbit_section(OrbitClassIndex idx, const FieldConfig& cfg) {
  if (idx.i < 0 || idx.j < idx.i || (idx.j - idx.i) % 2 != 0) {
    throw InvalidParams("section X_(i,j) needs 0 <= i <= j with j - i even");
  }
  const ResidueField& f = cfg.field();
  const int l = (idx.j - idx.i) / 2;
  const int half = f.inv_prime(2);
  return {LocalElement::integer(cfg, 1), LocalElement::residue(cfg, {0, half}, idx.i),
          LocalElement::uniformizer_power(cfg, l), LocalElement::residue(cfg, {0, f.q() - half}, idx.i + l)};
}

// ---------------------------------------------------------------------------
// Stable-class normal forms

namespace {

LocalElement ns_element(const ResidueField& f, int precision) {
  return LocalElement::monomial(f, {f.ns(), 0}, 0, precision);
}

}  // namespace

StableClassParams::StableClassParams(LocalElement a, LocalElement lambda, LocalElement mu)
    : a_(std::move(a)), lambda_(std::move(lambda)), mu_(std::move(mu)) {
  if (!a_.in_base_field() || !lambda_.in_base_field() || !mu_.in_base_field()) {
    throw InvalidParams("a, lambda, mu must lie in F");
  }
  if (lambda_.is_zero() || mu_.is_zero()) throw InvalidParams("lambda and mu must be nonzero");
  const LocalElement prod = lambda_ * mu_;
  if (prod.valuation() % 2 != 0) throw InvalidParams("lambda*mu must be a norm (even valuation)");
  if (prod.field().is_square(prod.leading().x)) throw InvalidParams("lambda*mu must not be a square in F");
  try {
    b_ = sqrt_in_base_field(prod * ns_element(prod.field(), prod.precision() - prod.valuation()));
  } catch (const SquareRootFailure& e) {
    throw InvalidParams(std::string("lambda*mu*z^2 is not a square in F: ") + e.what());
  }
}

int StableClassParams::n1() const { return a_.is_exact_zero() ? kInfinity : a_.valuation(); }

int StableClassParams::det_valuation() const {
  const LocalElement det = a_ * a_ - b_ * b_;
  if (det.is_zero()) throw InsufficientPrecision("val(a^2 - b^2) undetermined at precision " + std::to_string(det.precision()));
  return det.valuation();
}

std::string StableClassParams::to_string() const {
  return "(a=" + a_.to_string() + ", lambda=" + lambda_.to_string() + ", mu=" + mu_.to_string() + ")";
}

HermitianElement build_delta(const StableClassParams& p) {
  const ResidueElement z{0, 1};
  return HermitianElement(Matrix2{p.a(), p.lambda().scaled(z), p.mu().scaled(z), p.a()});
}

StableClassParams companion_delta(const StableClassParams& p) {
  return StableClassParams(p.a(), p.lambda().shifted(-1), p.mu().shifted(1));
}

StableClassParams companion_delta_inverse(const StableClassParams& p) {
  return StableClassParams(p.a(), p.lambda().shifted(1), p.mu().shifted(-1));
}

namespace {

// Entry c*z, c in F  ->  c.
LocalElement divide_by_zeta(const LocalElement& e) {
  const ResidueField& f = e.field();
  if (!e.scaled({0, 1}).in_base_field()) throw MalformedShape("off-diagonal entry is not in F*z: " + e.to_string());
  return e.scaled({0, f.inv_prime(f.ns())});
}

}  // namespace

StableClassParams params_from_normal_form(const HermitianElement& d) {
  const Matrix2& m = d.matrix();
  if (!congruent(m(0, 0), m(1, 1)) || !m(0, 0).in_base_field()) {
    throw MalformedShape("diagonal is not a scalar in F: " + m.to_string());
  }
  return StableClassParams(m(0, 0), divide_by_zeta(m(0, 1)), divide_by_zeta(m(1, 0)));
}

int rational_class_invariant(const HermitianElement& d) {
  const Matrix2& m = d.matrix();
  if (!congruent(m(0, 0), m(1, 1)) || !m(0, 0).in_base_field()) {
    throw MalformedShape("diagonal is not a scalar in F: " + m.to_string());
  }
  const LocalElement mu = divide_by_zeta(m(1, 0));
  divide_by_zeta(m(0, 1));
  if (mu.is_zero()) throw MalformedShape("lower-left entry vanishes");
  const int v = mu.valuation();
  return ((v % 2) + 2) % 2;
}

std::pair<LocalElement, LocalElement> eigenvalue_split(const StableClassParams& p) {
  return {p.a() + p.b(), p.a() - p.b()};
}

std::pair<LocalElement, LocalElement> eigenline_form_values(const StableClassParams& p) {
  // delta (lambda z, +-b)^T = (a +- b) (lambda z, +-b)^T.
  const LocalElement v1 = p.lambda().scaled({0, 1});
  const ResidueField& f = v1.field();
  auto form_value = [&](const LocalElement& v2) {
    // <v, v> = v^T J conj(v) = z (v1 conj(v2) - v2 conj(v1)).
    return (v1 * v2.conjugate() - v2 * v1.conjugate()).scaled({0, 1});
  };
  (void)f;
  return {form_value(p.b()), form_value(-p.b())};
}

std::optional<Matrix2> contraction_section(const HermitianElement& d, const FieldConfig& cfg) {
  const Matrix2& m = d.matrix();
  const ResidueField& f = cfg.field();
  const LocalElement det = m.det();
  if (det.is_zero()) throw InsufficientPrecision("determinant undetermined: " + det.to_string());
  if (det.valuation() % 2 != 0) return std::nullopt;
  const LocalElement one = LocalElement::integer(cfg, 1);
  const LocalElement zero = LocalElement::zero(f);
  if (m(1, 0).is_zero()) {
    if (m(0, 1).is_zero()) return Matrix2{m(0, 0), zero, zero, one};
    // s d s* = -[[d11, d10], [d01, d00]] for s = antidiag(1, 1), and s^{-1} = s.
    const Matrix2 s{zero, one, one, zero};
    const auto x = contraction_section(HermitianElement(s * m * star_involution(s)), cfg);
    return s * *x;
  }
  // X = [[x, x conj(w) - alpha], [1, w]] with w = -(gamma/2) z, where d = [[alpha, beta z], [gamma z, conj(alpha)]]
  // and alpha = a + s z. Solving XX* = d reduces to norm(x') = -det / (gamma^2 ns) with
  // x = x' + s / gamma + (a / (gamma ns)) z.
  const int half = f.inv_prime(2);
  const LocalElement ns = ns_element(f, cfg.precision());
  const LocalElement gamma = divide_by_zeta(m(1, 0));
  const LocalElement alpha = m(0, 0);
  const LocalElement a = (alpha + alpha.conjugate()).scaled({half, 0});
  const LocalElement s = (alpha - alpha.conjugate()).scaled({0, f.inv_prime(2 * f.ns())});
  const LocalElement w = gamma.scaled({0, f.q() - half});
  const LocalElement c = -det / (gamma * gamma * ns);
  const LocalElement x = norm_preimage(c) + s / gamma + (a / (gamma * ns)).scaled({0, 1});
  const LocalElement y = x * w.conjugate() - alpha;
  return Matrix2{x, y, one, w};
}

// ---------------------------------------------------------------------------
// Group elements

Matrix2 unipotent(const LocalElement& u, const FieldConfig& cfg) {
  if (!u.in_base_field()) throw InvalidParams("unipotent parameter must lie in F");
  return {LocalElement::integer(cfg, 1), u, LocalElement::zero(cfg.field()), LocalElement::integer(cfg, 1)};
}

Matrix2 torus_element(const LocalElement& t) { return Matrix2::diagonal(t, t.conjugate().inverse()); }

Matrix2 weyl_element(const FieldConfig& cfg) {
  const LocalElement zero = LocalElement::zero(cfg.field());
  return {zero, LocalElement::integer(cfg, 1), LocalElement::integer(cfg, -1), zero};
}

}  // namespace relfl
