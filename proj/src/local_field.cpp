#include "relfl/local_field.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>
#include <sstream>

namespace relfl {

bool is_odd_prime(int q) {
  if (q < 3 || q % 2 == 0) return false;
  for (int d = 3; d * d <= q; d += 2) {
    if (q % d == 0) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// ResidueField

ResidueField::ResidueField(int q, int ns) : q_(q), ns_(ns) {}

int ResidueField::inv_prime(int a) const {
  a = reduce(a);
  if (a == 0) throw DivisionByZero("inverse of 0 in F_q");
  // Fermat: a^(q-2).
  std::int64_t result = 1, base = a;
  for (int e = q_ - 2; e > 0; e >>= 1) {
    if (e & 1) result = result * base % q_;
    base = base * base % q_;
  }
  return static_cast<int>(result);
}

ResidueElement ResidueField::inv(ResidueElement a) const {
  const int n = norm(a);
  if (n == 0) throw DivisionByZero("inverse of 0 in F_{q^2}");
  const int ninv = inv_prime(n);
  const ResidueElement c = conj(a);
  return {static_cast<int>(std::int64_t{c.x} * ninv % q_), static_cast<int>(std::int64_t{c.y} * ninv % q_)};
}

bool ResidueField::is_square(int a) const {
  a = reduce(a);
  if (a == 0) return true;
  for (int r = 1; r < q_; ++r) {
    if (r * r % q_ == a) return true;
  }
  return false;
}

int ResidueField::sqrt(int a) const {
  a = reduce(a);
  for (int r = 0; r < q_; ++r) {
    if (r * r % q_ == a) return r;
  }
  throw SquareRootFailure("residue " + std::to_string(a) + " is not a square mod " + std::to_string(q_));
}

ResidueElement ResidueField::norm_preimage(int c) const {
  c = reduce(c);
  if (c == 0) throw ZeroInput("norm preimage of 0");
  for (int x = 0; x < q_; ++x) {
    for (int y = 0; y < q_; ++y) {
      if (norm({x, y}) == c) return {x, y};
    }
  }
  // The residue norm F_{q^2} -> F_q is surjective.
  throw Error("norm map not surjective; residue field misconfigured");
}

FieldConfig::FieldConfig(int q, int precision) : precision_(precision) {
  if (!is_odd_prime(q)) throw InvalidParams("q must be an odd prime, got " + std::to_string(q));
  if (precision < 1) throw InvalidParams("precision must be >= 1");
  int ns = 2;
  ResidueField probe(q, 1);
  while (probe.is_square(ns)) ++ns;
  field_ = ResidueField(q, ns);
}

// ---------------------------------------------------------------------------
// LocalElement construction

void LocalElement::normalize() {
  std::size_t lead = 0;
  while (lead < coeffs_.size() && coeffs_[lead].is_zero()) ++lead;
  if (lead == coeffs_.size()) {
    coeffs_.clear();
    valuation_ = precision_;
    return;
  }
  if (lead > 0) {
    coeffs_.erase(coeffs_.begin(), coeffs_.begin() + static_cast<std::ptrdiff_t>(lead));
    valuation_ += static_cast<int>(lead);
  }
}

LocalElement LocalElement::zero_mod(const ResidueField& field, int precision) {
  LocalElement r(field);
  r.precision_ = precision;
  r.valuation_ = precision;
  return r;
}

LocalElement LocalElement::monomial(const ResidueField& field, ResidueElement c, int valuation, int precision) {
  if (c.is_zero() || valuation >= precision) return zero_mod(field, precision);
  LocalElement r(field);
  r.precision_ = precision;
  r.valuation_ = valuation;
  r.coeffs_.assign(static_cast<std::size_t>(precision - valuation), ResidueElement{});
  r.coeffs_[0] = c;
  return r;
}

LocalElement LocalElement::from_coefficients(const ResidueField& field, int valuation,
                                             const std::vector<ResidueElement>& coeffs, int precision) {
  if (precision == kInfinity) throw InvalidParams("from_coefficients needs a finite precision");
  if (valuation >= precision) return zero_mod(field, precision);
  LocalElement r(field);
  r.precision_ = precision;
  r.valuation_ = valuation;
  r.coeffs_.assign(static_cast<std::size_t>(precision - valuation), ResidueElement{});
  const std::size_t n = std::min(coeffs.size(), r.coeffs_.size());
  for (std::size_t i = 0; i < n; ++i) r.coeffs_[i] = field.make(coeffs[i].x, coeffs[i].y);
  r.normalize();
  return r;
}

LocalElement LocalElement::integer(const FieldConfig& cfg, std::int64_t c) {
  return monomial(cfg.field(), cfg.field().make(c), 0, cfg.precision());
}

LocalElement LocalElement::uniformizer_power(const FieldConfig& cfg, int v) {
  return monomial(cfg.field(), {1, 0}, v, v + cfg.precision());
}

LocalElement LocalElement::zeta(const FieldConfig& cfg) {
  return monomial(cfg.field(), {0, 1}, 0, cfg.precision());
}

LocalElement LocalElement::residue(const FieldConfig& cfg, ResidueElement c, int valuation) {
  return monomial(cfg.field(), cfg.field().make(c.x, c.y), valuation, valuation + cfg.precision());
}

// ---------------------------------------------------------------------------
// Accessors

int LocalElement::valuation() const {
  if (coeffs_.empty() && precision_ != kInfinity) {
    throw InsufficientPrecision("valuation of an element known only as O(w^" + std::to_string(precision_) + ")");
  }
  return valuation_;
}

ResidueElement LocalElement::coefficient(int v) const {
  if (v >= precision_) {
    throw InsufficientPrecision("digit w^" + std::to_string(v) + " beyond precision " + std::to_string(precision_));
  }
  if (v < valuation_) return {};
  return coeffs_[static_cast<std::size_t>(v - valuation_)];
}

ResidueElement LocalElement::leading() const {
  if (coeffs_.empty()) {
    if (is_exact_zero()) throw ZeroInput("leading coefficient of exact zero");
    throw InsufficientPrecision("leading coefficient undetermined at precision " + std::to_string(precision_));
  }
  return coeffs_.front();
}

bool LocalElement::in_base_field() const {
  return std::all_of(coeffs_.begin(), coeffs_.end(), [](const ResidueElement& c) { return c.y == 0; });
}

LocalElement LocalElement::with_precision(int p) const {
  if (p >= precision_) return *this;
  if (p <= valuation_) return zero_mod(field_, p);
  LocalElement r = *this;
  r.precision_ = p;
  r.coeffs_.resize(static_cast<std::size_t>(p - valuation_));
  return r;
}

LocalElement LocalElement::shifted(int s) const {
  if (is_exact_zero()) return *this;
  LocalElement r = *this;
  r.valuation_ += s;
  r.precision_ += s;
  return r;
}

LocalElement LocalElement::scaled(ResidueElement c) const {
  c = field_.make(c.x, c.y);
  if (is_exact_zero()) return *this;
  if (c.is_zero()) return zero_mod(field_, valuation_);
  LocalElement r = *this;
  for (auto& d : r.coeffs_) d = field_.mul(d, c);
  return r;
}

// ---------------------------------------------------------------------------
// Arithmetic

LocalElement LocalElement::operator-() const {
  LocalElement r = *this;
  for (auto& d : r.coeffs_) d = field_.neg(d);
  return r;
}

namespace {

template <typename Op>
LocalElement combine(const LocalElement& a, const LocalElement& b, Op op) {
  const ResidueField& f = a.field();
  const int p = std::min(a.precision(), b.precision());
  const int lo = std::min(a.valuation_bound(), b.valuation_bound());
  if (lo >= p) return LocalElement::zero_mod(f, p);
  std::vector<ResidueElement> out(static_cast<std::size_t>(p - lo));
  for (int v = lo; v < p; ++v) {
    const ResidueElement da = v < a.valuation_bound() ? ResidueElement{} : a.coefficient(v);
    const ResidueElement db = v < b.valuation_bound() ? ResidueElement{} : b.coefficient(v);
    out[static_cast<std::size_t>(v - lo)] = op(f, da, db);
  }
  return LocalElement::from_coefficients(f, lo, out, p);
}

}  // namespace

LocalElement& LocalElement::operator+=(const LocalElement& o) {
  if (o.is_exact_zero()) return *this;
  if (is_exact_zero()) return *this = o;
  *this = combine(*this, o, [](const ResidueField& f, ResidueElement x, ResidueElement y) { return f.add(x, y); });
  return *this;
}

LocalElement& LocalElement::operator-=(const LocalElement& o) {
  if (o.is_exact_zero()) return *this;
  if (is_exact_zero()) return *this = -o;
  *this = combine(*this, o, [](const ResidueField& f, ResidueElement x, ResidueElement y) { return f.sub(x, y); });
  return *this;
}

LocalElement operator*(const LocalElement& a, const LocalElement& b) {
  const ResidueField& f = a.field_;
  if (a.is_exact_zero()) return a;
  if (b.is_exact_zero()) return b;
  const int va = a.valuation_, vb = b.valuation_;
  const int p = std::min(va + b.precision_, vb + a.precision_);
  if (a.coeffs_.empty() || b.coeffs_.empty()) return LocalElement::zero_mod(f, p);
  const std::size_t len = std::min(a.coeffs_.size(), b.coeffs_.size());
  LocalElement r(f);
  r.valuation_ = va + vb;
  r.precision_ = p;
  r.coeffs_.resize(len);
  const int q = f.q(), ns = f.ns();
  for (std::size_t i = 0; i < len; ++i) {
    std::int64_t xx = 0, yy = 0, xy = 0;
    for (std::size_t j = 0; j <= i; ++j) {
      const ResidueElement& s = a.coeffs_[j];
      const ResidueElement& t = b.coeffs_[i - j];
      xx += s.x * t.x;
      yy += s.y * t.y;
      xy += s.x * t.y + s.y * t.x;
    }
    r.coeffs_[i] = {static_cast<int>((xx + ns * (yy % q)) % q), static_cast<int>(xy % q)};
  }
  return r;
}

LocalElement LocalElement::inverse() const {
  if (is_exact_zero()) throw DivisionByZero("inverse of exact zero");
  if (coeffs_.empty()) {
    throw InsufficientPrecision("inverse of an element known only as O(w^" + std::to_string(precision_) + ")");
  }
  const std::size_t len = coeffs_.size();
  LocalElement r(field_);
  r.valuation_ = -valuation_;
  r.precision_ = -valuation_ + static_cast<int>(len);
  r.coeffs_.resize(len);
  const ResidueElement c0 = field_.inv(coeffs_[0]);
  r.coeffs_[0] = c0;
  for (std::size_t i = 1; i < len; ++i) {
    ResidueElement acc{};
    for (std::size_t j = 1; j <= i; ++j) acc = field_.add(acc, field_.mul(coeffs_[j], r.coeffs_[i - j]));
    r.coeffs_[i] = field_.neg(field_.mul(c0, acc));
  }
  return r;
}

LocalElement operator/(const LocalElement& a, const LocalElement& b) { return a * b.inverse(); }

LocalElement LocalElement::conjugate() const {
  LocalElement r = *this;
  for (auto& d : r.coeffs_) d = field_.conj(d);
  return r;
}

LocalElement LocalElement::norm() const { return *this * conjugate(); }

bool congruent(const LocalElement& a, const LocalElement& b) { return (a - b).is_zero(); }

int quadratic_character(const LocalElement& a) {
  if (a.is_exact_zero()) throw ZeroInput("quadratic character of zero");
  if (!a.in_base_field()) throw NotInBaseField("quadratic character of an element outside F: " + a.to_string());
  const int v = a.valuation();
  return (v % 2 == 0) ? 1 : -1;
}

bool is_square_in_base_field(const LocalElement& a) {
  if (!a.in_base_field()) throw NotInBaseField("square test outside F: " + a.to_string());
  if (a.is_exact_zero()) return true;
  const int v = a.valuation();
  if (v % 2 != 0) return false;
  return a.field().is_square(a.leading().x);
}

LocalElement sqrt_in_base_field(const LocalElement& a) {
  const ResidueField& f = a.field();
  if (!a.in_base_field()) throw SquareRootFailure("square root of an element outside F");
  if (a.is_exact_zero()) return a;
  const int v = a.valuation();
  if (v % 2 != 0) throw SquareRootFailure("square root of odd valuation element " + a.to_string());
  const int len = a.length();
  std::vector<ResidueElement> b(static_cast<std::size_t>(len));
  const int b0 = f.sqrt(a.leading().x);
  if (b0 == 0) throw SquareRootFailure("leading digit vanished");
  b[0] = {b0, 0};
  const int inv2b0 = f.inv_prime(2 * b0);
  for (int i = 1; i < len; ++i) {
    std::int64_t acc = a.coefficient(v + i).x;
    for (int j = 1; j < i; ++j) acc -= std::int64_t{b[j].x} * b[i - j].x;
    b[i] = {f.reduce(f.reduce(acc) * std::int64_t{inv2b0}), 0};
  }
  return LocalElement::from_coefficients(f, v / 2, b, v / 2 + len);
}

LocalElement norm_preimage(const LocalElement& c) {
  const ResidueField& f = c.field();
  if (!c.in_base_field()) throw NotInBaseField("norm preimage of an element outside F");
  if (c.is_exact_zero()) throw ZeroInput("norm preimage of zero");
  const int v = c.valuation();
  if (v % 2 != 0) throw SquareRootFailure("odd valuation element " + c.to_string() + " is not a norm");
  const ResidueElement r = f.norm_preimage(c.leading().x);
  const LocalElement r_elem = LocalElement::monomial(f, r, 0, c.precision() - v);
  // c = w^v * norm(r) * s^2 with s a principal unit of F.
  const LocalElement unit = c.shifted(-v) / r_elem.norm();
  return (r_elem * sqrt_in_base_field(unit)).shifted(v / 2);
}

// ---------------------------------------------------------------------------
// Text form

namespace {

std::string residue_to_string(ResidueElement c) {
  if (c.y == 0) return std::to_string(c.x);
  const std::string zpart = c.y == 1 ? std::string("z") : std::to_string(c.y) + "*z";
  if (c.x == 0) return zpart;
  return "(" + std::to_string(c.x) + "+" + zpart + ")";
}

std::string power_to_string(int v) {
  if (v == 1) return "w";
  return "w^" + std::to_string(v);
}

}  // namespace

std::string LocalElement::to_string() const {
  if (is_exact_zero()) return "0";
  std::ostringstream out;
  bool first = true;
  for (int i = 0; i < length(); ++i) {
    const ResidueElement c = coeffs_[static_cast<std::size_t>(i)];
    if (c.is_zero()) continue;
    const int v = valuation_ + i;
    if (!first) out << " + ";
    first = false;
    if (v == 0) {
      out << residue_to_string(c);
    } else if (c == ResidueElement{1, 0}) {
      out << power_to_string(v);
    } else {
      out << residue_to_string(c) << "*" << power_to_string(v);
    }
  }
  if (!first) out << " + ";
  out << "O(" << power_to_string(precision_) << ")";
  return out.str();
}

namespace {

// Sparse Laurent polynomial in w with F_{q^2} coefficients, used while parsing.
using SparsePoly = std::map<int, ResidueElement>;

class Parser {
 public:
  Parser(std::string_view text, const ResidueField& f) : s_(text), f_(f) {}

  LocalElement parse(int default_precision) {
    SparsePoly value = expr(/*top_level=*/true);
    skip_ws();
    if (pos_ != s_.size()) fail("trailing input");
    const int precision = explicit_precision_ ? *explicit_precision_ : default_precision;
    if (value.empty() && !explicit_precision_) return LocalElement::zero(f_);
    int lo = precision;
    for (const auto& [v, c] : value) lo = std::min(lo, v);
    if (lo >= precision) return LocalElement::zero_mod(f_, precision);
    std::vector<ResidueElement> coeffs(static_cast<std::size_t>(precision - lo));
    for (const auto& [v, c] : value) {
      if (v < precision) coeffs[static_cast<std::size_t>(v - lo)] = c;
    }
    return LocalElement::from_coefficients(f_, lo, coeffs, precision);
  }

 private:
  [[noreturn]] void fail(const std::string& why) const {
    throw ParseError("cannot parse local element '" + std::string(s_) + "': " + why + " at offset " +
                     std::to_string(pos_));
  }
  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool accept(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  long long integer() {
    skip_ws();
    bool neg = false;
    if (pos_ < s_.size() && s_[pos_] == '-') {
      neg = true;
      ++pos_;
    }
    if (pos_ >= s_.size() || !std::isdigit(static_cast<unsigned char>(s_[pos_]))) fail("expected integer");
    long long v = 0;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
      v = v * 10 + (s_[pos_] - '0');
      if (v > (1LL << 40)) fail("integer too large");
      ++pos_;
    }
    return neg ? -v : v;
  }

  SparsePoly add(SparsePoly a, const SparsePoly& b, bool subtract) const {
    for (const auto& [v, c] : b) {
      ResidueElement& slot = a[v];
      slot = subtract ? f_.sub(slot, c) : f_.add(slot, c);
      if (slot.is_zero()) a.erase(v);
    }
    return a;
  }
  SparsePoly mul(const SparsePoly& a, const SparsePoly& b) const {
    SparsePoly out;
    for (const auto& [va, ca] : a) {
      for (const auto& [vb, cb] : b) {
        ResidueElement& slot = out[va + vb];
        slot = f_.add(slot, f_.mul(ca, cb));
      }
    }
    std::erase_if(out, [](const auto& kv) { return kv.second.is_zero(); });
    return out;
  }

  SparsePoly expr(bool top_level) {
    SparsePoly acc;
    bool subtract = accept('-');
    while (true) {
      skip_ws();
      if (top_level && s_.substr(pos_, 2) == "O(") {
        if (subtract) fail("negated O-term");
        pos_ += 2;
        if (!accept('w')) fail("expected w in O-term");
        int p = 1;
        if (accept('^')) p = static_cast<int>(integer());
        if (!accept(')')) fail("expected )");
        if (explicit_precision_) fail("duplicate O-term");
        explicit_precision_ = p;
      } else {
        acc = add(std::move(acc), term(), subtract);
      }
      if (accept('+')) {
        subtract = false;
      } else if (accept('-')) {
        subtract = true;
      } else {
        break;
      }
    }
    return acc;
  }

  SparsePoly term() {
    SparsePoly acc = factor();
    while (accept('*')) acc = mul(acc, factor());
    return acc;
  }

  SparsePoly factor() {
    skip_ws();
    if (accept('(')) {
      SparsePoly inner = expr(false);
      if (!accept(')')) fail("expected )");
      return inner;
    }
    if (accept('z')) return {{0, ResidueElement{0, 1}}};
    if (accept('w')) {
      int v = 1;
      if (accept('^')) v = static_cast<int>(integer());
      return {{v, ResidueElement{1, 0}}};
    }
    const ResidueElement c = f_.make(integer());
    if (c.is_zero()) return {};
    return {{0, c}};
  }

  std::string_view s_;
  const ResidueField& f_;
  std::size_t pos_ = 0;
  std::optional<int> explicit_precision_;
};

}  // namespace

LocalElement parse_local_element(std::string_view text, const FieldConfig& cfg) {
  return Parser(text, cfg.field()).parse(cfg.precision());
}

}  // namespace relfl
