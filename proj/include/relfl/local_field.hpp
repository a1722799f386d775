#pragma once

// Exact arithmetic in F = F_q((w)) and its unramified quadratic extension
// E = F_{q^2}((w)), E = F(z) with z^2 = ns a non-residue of F_q.
//
// Elements are truncated Laurent series carrying an absolute precision: an
// element of precision N is known modulo w^N. Precision only ever decreases
// through arithmetic, and any question the known digits cannot answer raises
// InsufficientPrecision.

#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "relfl/errors.hpp"

namespace relfl {

/// Valuation (and precision) of an exact zero.
inline constexpr int kInfinity = std::numeric_limits<int>::max();

/// x + y*z in F_{q^2} = F_q[z]/(z^2 - ns).
struct ResidueElement {
  int x = 0;
  int y = 0;

  constexpr bool is_zero() const { return x == 0 && y == 0; }
  constexpr bool in_prime_field() const { return y == 0; }
  friend constexpr bool operator==(const ResidueElement&, const ResidueElement&) = default;
};

/// Arithmetic context of the residue field F_{q^2}.
class ResidueField {
 public:
  ResidueField() = default;
  ResidueField(int q, int ns);

  int q() const { return q_; }
  int ns() const { return ns_; }

  int reduce(std::int64_t v) const {
    const int r = static_cast<int>(v % q_);
    return r < 0 ? r + q_ : r;
  }

  ResidueElement make(std::int64_t x, std::int64_t y = 0) const { return {reduce(x), reduce(y)}; }
  ResidueElement add(ResidueElement a, ResidueElement b) const {
    return {wrap(a.x + b.x), wrap(a.y + b.y)};
  }
  ResidueElement sub(ResidueElement a, ResidueElement b) const {
    return {wrap(a.x - b.x + q_), wrap(a.y - b.y + q_)};
  }
  ResidueElement neg(ResidueElement a) const { return {a.x ? q_ - a.x : 0, a.y ? q_ - a.y : 0}; }
  ResidueElement conj(ResidueElement a) const { return {a.x, a.y ? q_ - a.y : 0}; }
  ResidueElement mul(ResidueElement a, ResidueElement b) const {
    return {(a.x * b.x + ns_ * ((a.y * b.y) % q_)) % q_, (a.x * b.y + a.y * b.x) % q_};
  }
  /// Norm to F_q: x^2 - ns*y^2.
  int norm(ResidueElement a) const { return reduce(std::int64_t{a.x} * a.x - std::int64_t{ns_} * a.y * a.y); }
  ResidueElement inv(ResidueElement a) const;
  int inv_prime(int a) const;

  bool is_square(int a) const;
  /// Least representative r in [0, q) with r^2 = a; throws SquareRootFailure.
  int sqrt(int a) const;
  /// Some r in F_{q^2} with norm(r) = c (c nonzero in F_q).
  ResidueElement norm_preimage(int c) const;

  friend bool operator==(const ResidueField&, const ResidueField&) = default;

 private:
  int wrap(int v) const { return v >= q_ ? v - q_ : v; }
  int q_ = 3;
  int ns_ = 2;
};

/// Field data shared by every computation: q, the non-residue ns defining z,
/// and the default absolute precision N of freshly created elements.
class FieldConfig {
 public:
  /// Validates that q is an odd prime and precision >= 1; ns is the smallest non-residue.
  explicit FieldConfig(int q, int precision = 32);

  int q() const { return field_.q(); }
  int ns() const { return field_.ns(); }
  int precision() const { return precision_; }
  const ResidueField& field() const { return field_; }

  friend bool operator==(const FieldConfig&, const FieldConfig&) = default;

 private:
  ResidueField field_;
  int precision_;
};

bool is_odd_prime(int q);

class LocalElement {
 public:
  /// Exact zero (valuation and precision +infinity).
  LocalElement() = default;
  explicit LocalElement(const ResidueField& field) : field_(field) {}

  static LocalElement zero(const ResidueField& field) { return LocalElement(field); }
  /// Zero known only modulo w^precision.
  static LocalElement zero_mod(const ResidueField& field, int precision);
  /// c * w^valuation known modulo w^precision.
  static LocalElement monomial(const ResidueField& field, ResidueElement c, int valuation, int precision);
  /// Sum of coeffs[i] * w^(valuation + i), known modulo w^precision.
  static LocalElement from_coefficients(const ResidueField& field, int valuation,
                                        const std::vector<ResidueElement>& coeffs, int precision);

  // Convenience constructors at the configuration's default precision.
  static LocalElement integer(const FieldConfig& cfg, std::int64_t c);
  static LocalElement uniformizer_power(const FieldConfig& cfg, int v);
  /// z, with z^2 = ns.
  static LocalElement zeta(const FieldConfig& cfg);
  static LocalElement residue(const FieldConfig& cfg, ResidueElement c, int valuation = 0);

  const ResidueField& field() const { return field_; }

  bool is_exact_zero() const { return precision_ == kInfinity; }
  /// No nonzero digit is known (exact zero or zero modulo w^precision).
  bool is_zero() const { return coeffs_.empty(); }
  /// Valuation; kInfinity for an exact zero; throws InsufficientPrecision for a zero
  /// known only to finite precision.
  int valuation() const;
  /// The valuation if known, otherwise the precision (a lower bound for the valuation).
  int valuation_bound() const { return valuation_; }
  int precision() const { return precision_; }
  /// Number of known digits.
  int length() const { return static_cast<int>(coeffs_.size()); }
  /// Coefficient of w^v; throws InsufficientPrecision if v >= precision.
  ResidueElement coefficient(int v) const;
  ResidueElement leading() const;
  bool in_base_field() const;

  /// Truncate to a lower precision (no-op if p >= precision()).
  LocalElement with_precision(int p) const;
  /// Multiply by w^s exactly.
  LocalElement shifted(int s) const;
  LocalElement scaled(ResidueElement c) const;

  LocalElement operator-() const;
  LocalElement& operator+=(const LocalElement& o);
  LocalElement& operator-=(const LocalElement& o);
  LocalElement& operator*=(const LocalElement& o) { return *this = *this * o; }
  friend LocalElement operator+(LocalElement a, const LocalElement& b) { return a += b; }
  friend LocalElement operator-(LocalElement a, const LocalElement& b) { return a -= b; }
  friend LocalElement operator*(const LocalElement& a, const LocalElement& b);
  friend LocalElement operator/(const LocalElement& a, const LocalElement& b);

  /// Multiplicative inverse; DivisionByZero for an exact zero, InsufficientPrecision
  /// for a zero known to finite precision.
  LocalElement inverse() const;
  LocalElement conjugate() const;
  /// a * conjugate(a), an element of F.
  LocalElement norm() const;

  /// Structural equality: same precision and same known digits.
  friend bool operator==(const LocalElement&, const LocalElement&) = default;

  /// Sparse text form: "c*w^v + ... + O(w^N)", coefficients "x+y*z".
  std::string to_string() const;

 private:
  void normalize();

  ResidueField field_;
  int valuation_ = kInfinity;
  int precision_ = kInfinity;
  std::vector<ResidueElement> coeffs_;  // coeffs_[i] multiplies w^(valuation_ + i)
};

inline LocalElement conjugate(const LocalElement& a) { return a.conjugate(); }
inline LocalElement norm(const LocalElement& a) { return a.norm(); }
inline LocalElement inv(const LocalElement& a) { return a.inverse(); }

/// a - b has no known nonzero digit.
bool congruent(const LocalElement& a, const LocalElement& b);

/// (-1)^val(a) for a in F^x: the kernel of the character of the unramified extension
/// is the group of norms, i.e. the elements of even valuation.
int quadratic_character(const LocalElement& a);

/// Square root in F, leading digit the least representative. Throws SquareRootFailure
/// if a is not a square in F (odd valuation, non-square leading digit, or a not in F).
LocalElement sqrt_in_base_field(const LocalElement& a);

/// True iff a in F^x is a square (decided from the valuation and leading digit).
bool is_square_in_base_field(const LocalElement& a);

/// Some x in E^x with norm(x) = c, for c in F^x of even valuation.
LocalElement norm_preimage(const LocalElement& c);

/// Parse the text form produced by to_string. Missing "O(w^N)" means precision cfg.precision().
LocalElement parse_local_element(std::string_view text, const FieldConfig& cfg);

}  // namespace relfl
