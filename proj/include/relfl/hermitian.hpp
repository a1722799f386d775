#pragma once

// 2x2 matrix calculus over E for the rank-two computations: the split form J,
// the involution X -> X*, Hermitian elements, the contraction X -> XX*, and the
// stable-class normal forms aI + antidiag(lambda*z, mu*z).

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include "relfl/local_field.hpp"

namespace relfl {

class Matrix2 {
 public:
  Matrix2() = default;
  Matrix2(LocalElement a, LocalElement b, LocalElement c, LocalElement d)
      : e_{std::move(a), std::move(b), std::move(c), std::move(d)} {}

  static Matrix2 identity(const FieldConfig& cfg);
  static Matrix2 zero(const FieldConfig& cfg);
  static Matrix2 diagonal(LocalElement a, LocalElement d);

  const LocalElement& operator()(int r, int c) const { return e_[static_cast<std::size_t>(2 * r + c)]; }
  LocalElement& operator()(int r, int c) { return e_[static_cast<std::size_t>(2 * r + c)]; }
  const std::array<LocalElement, 4>& entries() const { return e_; }

  /// Common (minimum) precision of the entries.
  int precision() const;

  Matrix2 conjugate() const;
  Matrix2 transpose() const;
  LocalElement det() const;
  LocalElement trace() const;
  /// Inverse via the adjugate; throws like LocalElement::inverse on a singular determinant.
  Matrix2 inverse() const;
  Matrix2 scaled(const LocalElement& s) const;

  friend Matrix2 operator+(const Matrix2& a, const Matrix2& b);
  friend Matrix2 operator-(const Matrix2& a, const Matrix2& b);
  friend Matrix2 operator*(const Matrix2& a, const Matrix2& b);
  friend bool operator==(const Matrix2&, const Matrix2&) = default;

  /// Row-major literal "[[a, b], [c, d]]" in the local element syntax.
  std::string to_string() const;

 private:
  std::array<LocalElement, 4> e_;
};

/// Entrywise congruence at the available precision.
bool congruent(const Matrix2& a, const Matrix2& b);

Matrix2 parse_matrix(std::string_view text, const FieldConfig& cfg);

/// The split Hermitian form J = [[0, z], [-z, 0]].
Matrix2 split_form(const FieldConfig& cfg);

/// Sign relating contract() to the contraction on the graded Lie algebra, which
/// sends the block element with corner X to -XX*. All rank-two formulas here use contract().
inline constexpr int kGradedContractionSign = -1;

/// X* = J conj(X)^T J^{-1}.
Matrix2 star_involution(const Matrix2& x);

/// A matrix fixed by star_involution.
class HermitianElement {
 public:
  /// Throws MalformedShape unless star_involution(m) is congruent to m.
  explicit HermitianElement(Matrix2 m);
  const Matrix2& matrix() const { return m_; }

 private:
  Matrix2 m_;
};

/// XX*.
HermitianElement contract(const Matrix2& x);

/// g g* == 1 at available precision; InsufficientPrecision when undecidable.
bool is_unitary(const Matrix2& g);

/// (trace, det) of contract(x), i.e. the coefficients of det(tI - XX*) up to sign.
std::pair<LocalElement, LocalElement> invariant_polynomial(const Matrix2& x);

/// det(tI - XX*) has distinct nonzero roots.
bool is_regular_semisimple(const Matrix2& x);

/// The centralizer of the Hermitian element in U(V_2) is compact, i.e. its
/// eigenvalues do not generate E over F.
bool has_compact_centralizer(const HermitianElement& d);

/// Eigenvalues of d lie in F and are distinct (centralizer U(1) x U(1)).
bool has_split_centralizer(const HermitianElement& d);

/// Class of w^(i,j) = z * antidiag(w^i, w^j).
struct OrbitClassIndex {
  int i = 0;
  int j = 0;
};

Matrix2 orbit_representative(OrbitClassIndex idx, const FieldConfig& cfg);

/// The canonical section X_(i,j) of the contraction over w^(i,j); requires
/// i <= j and j - i even.
Matrix2 orbit_section(OrbitClassIndex idx, const FieldConfig& cfg);

/// Normal-form data of a regular semisimple Hermitian element with centralizer
/// U(1) x U(1): delta = [[a, lambda*z], [mu*z, a]] with lambda*mu a norm that is
/// not a square, so that b^2 = lambda*mu*z^2 is a square in F.
class StableClassParams {
 public:
  /// Validates the normal-form conditions; throws InvalidParams.
  StableClassParams(LocalElement a, LocalElement lambda, LocalElement mu);

  const LocalElement& a() const { return a_; }
  const LocalElement& lambda() const { return lambda_; }
  const LocalElement& mu() const { return mu_; }
  /// Canonical square root of lambda*mu*z^2 in F.
  const LocalElement& b() const { return b_; }

  /// val(a); kInfinity when a = 0.
  int n1() const;
  /// val(b).
  int n2() const { return b_.valuation(); }
  /// val(lambda*mu) / 2.
  int m() const { return (lambda_ * mu_).valuation() / 2; }
  /// val(det delta).
  int det_valuation() const;
  /// eta(mu).
  int eta_mu() const { return quadratic_character(mu_); }

  std::string to_string() const;

 private:
  LocalElement a_, lambda_, mu_, b_;
};

/// [[a, lambda*z], [mu*z, a]].
HermitianElement build_delta(const StableClassParams& p);

/// Representative of the other rational class in the stable class:
/// (a, lambda, mu) -> (a, lambda/w, mu*w).
StableClassParams companion_delta(const StableClassParams& p);

/// Inverse of companion_delta.
StableClassParams companion_delta_inverse(const StableClassParams& p);

/// val(mu) mod 2 for d = aI + antidiag(lambda*z, mu*z); MalformedShape otherwise.
int rational_class_invariant(const HermitianElement& d);

/// Read (a, lambda, mu) off a Hermitian matrix in normal form; MalformedShape otherwise.
StableClassParams params_from_normal_form(const HermitianElement& d);

/// (a + b, a - b): the matching pair on the endoscopic side.
std::pair<LocalElement, LocalElement> eigenvalue_split(const StableClassParams& p);

/// Values <v, v> of the split form on the two eigenlines of build_delta(p).
std::pair<LocalElement, LocalElement> eigenline_form_values(const StableClassParams& p);

/// Some X with XX* = d; std::nullopt when val(det d) is odd (the fiber is empty).
std::optional<Matrix2> contraction_section(const HermitianElement& d, const FieldConfig& cfg);

// Elements of U(V_2) used for sampling and enumeration.

/// [[1, u], [0, 1]], u in F.
Matrix2 unipotent(const LocalElement& u, const FieldConfig& cfg);
/// diag(t, conj(t)^{-1}), t in E^x.
Matrix2 torus_element(const LocalElement& t);
/// [[0, 1], [-1, 0]].
Matrix2 weyl_element(const FieldConfig& cfg);

}  // namespace relfl
