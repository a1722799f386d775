#pragma once

// Borel coset representatives (k, u) of B/(B∩U(Λ)) and counting sums over them.
//
// Two orientations are used:
//   right_translate: b = n(u) d(w^k),        acting by X -> X b
//   conjugate:       h = d(w^-k) n(u),       acting by d -> h d h^{-1}
// with d(t) = diag(t, t^-1), n(u) = [[1, u], [0, 1]], k in Z and u in F / w^{2k} O,
// u supported on valuations [u_floor, 2k).

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "relfl/hermitian.hpp"

namespace relfl {

struct EnumWindow {
  int k_min = 0;
  int k_max = 0;
  int u_floor = 0;

  /// Throws InvalidParams unless k_min <= k_max.
  void validate() const;
  /// Number of enumerated u digits for torus exponent k.
  int u_digits(int k) const { return 2 * k > u_floor ? 2 * k - u_floor : 0; }
  /// q^u_digits(k), saturating at UINT64_MAX.
  std::uint64_t shell_count(int k, int q) const;
  /// Total number of representatives, saturating at UINT64_MAX.
  std::uint64_t count(int q) const;
  /// The window grown by dk on both k ends and du below the u floor.
  EnumWindow widened(int dk, int du) const { return {k_min - dk, k_max + dk, u_floor - du}; }
  std::string to_string() const;

  friend bool operator==(const EnumWindow&, const EnumWindow&) = default;
};

struct BorelCoset {
  int k = 0;
  LocalElement u;
};

enum class Orientation { right_translate, conjugate };

std::string to_string(Orientation o);

/// n(u) d(w^k) for right_translate, d(w^-k) n(u) for conjugate.
Matrix2 coset_matrix(const BorelCoset& c, Orientation o, const FieldConfig& cfg);

/// X b (right_translate) or h X h^{-1} (conjugate) for the coset with data (k, u),
/// computed entrywise; u may be a partially known element.
Matrix2 transform_by_coset(const Matrix2& x, int k, const LocalElement& u, Orientation o);

/// Streams every representative of a window exactly once, k ascending and the
/// digit tuple (c_{u_floor}, ..., c_{2k-1}) in lexicographic order.
class CosetEnumerator {
 public:
  /// Throws WindowTooLarge if w.count(q) exceeds cap.
  CosetEnumerator(const FieldConfig& cfg, EnumWindow w, Orientation o, std::uint64_t cap = 1'000'000);

  /// Writes the next representative and its matrix; false when exhausted.
  bool next(BorelCoset& coset, Matrix2& matrix);

 private:
  void start_shell();

  FieldConfig cfg_;
  EnumWindow w_;
  Orientation o_;
  int k_;
  std::vector<int> digits_;
  bool shell_started_ = false;
};

/// Representative u for digits (c_{u_floor}, ...) of a coset with torus exponent k,
/// padded with zero digits to absolute precision 2k + cfg.precision().
LocalElement coset_parameter(const FieldConfig& cfg, int k, int u_floor, const std::vector<int>& digits);

/// Outcome of evaluating an integrand on every completion of a partial coset.
struct Verdict {
  enum class Kind { zero, constant, undecided };
  Kind kind = Kind::undecided;
  std::int64_t value = 0;

  static Verdict vanishing() { return {Kind::zero, 0}; }
  static Verdict constant(std::int64_t v) { return v == 0 ? vanishing() : Verdict{Kind::constant, v}; }
  static Verdict undecided() { return {Kind::undecided, 0}; }
};

/// What an integrand sees: the coset data, with u known to precision u.precision()
/// (all of its significant digits when leaf is true), and the transformed target.
struct CosetView {
  int k;
  const LocalElement& u;
  bool leaf;
  const Matrix2& transformed;
};

/// Must be a function of the coset: constant on B∩U(Λ)-classes. Values must be
/// non-negative. At a leaf the verdict must not be undecided.
using CosetIntegrand = std::function<Verdict(const CosetView&)>;

struct CountOptions {
  int jobs = 1;
  /// Number of leading u digits fixed per parallel task.
  int partition_depth = 2;
  std::uint64_t node_cap = 50'000'000;
  /// Evaluate partial cosets and skip decided subtrees; false visits every leaf.
  bool prune = true;
};

struct CountStats {
  std::int64_t value = 0;
  /// Number of cosets on which the integrand is nonzero.
  std::int64_t support = 0;
  std::uint64_t nodes = 0;
  friend bool operator==(const CountStats&, const CountStats&) = default;
};

/// Sum of the integrand over the window. Partition order and job count never
/// affect the result. Throws WindowTooLarge when the node cap is exceeded.
CountStats count_window(const Matrix2& target, Orientation o, const EnumWindow& w, const CosetIntegrand& f,
                        const FieldConfig& cfg, const CountOptions& opts = {});

/// Sum over the cosets with torus exponent k only; when floor_only, only cosets whose
/// u digit at valuation u_floor is nonzero.
CountStats count_shell(const Matrix2& target, Orientation o, const EnumWindow& w, int k, bool floor_only,
                       const CosetIntegrand& f, const FieldConfig& cfg, const CountOptions& opts = {});

/// True iff the integrand vanishes on the shells k = k_min, k = k_max and on the
/// u floor shell of every k. False whenever some k has 2k <= u_floor (the u window
/// there is truncated to u = 0 and cannot be certified).
bool boundary_vanishing(const Matrix2& target, Orientation o, const EnumWindow& w, const CosetIntegrand& f,
                        const FieldConfig& cfg, const CountOptions& opts = {});

}  // namespace relfl
