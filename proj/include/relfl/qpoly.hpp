#pragma once

// Integer (Laurent) polynomials in a formal variable q.

#include <boost/rational.hpp>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>

#include "relfl/errors.hpp"

namespace relfl {

using Rational = boost::rational<std::int64_t>;

template <bool Laurent>
class BasicQPoly {
 public:
  using Coefficients = std::map<int, std::int64_t>;

  BasicQPoly() = default;
  BasicQPoly(std::int64_t c) { add_term(0, c); }  // NOLINT: integers are constant polynomials

  static BasicQPoly monomial(std::int64_t c, int e) {
    BasicQPoly p;
    p.add_term(e, c);
    return p;
  }
  static BasicQPoly q_power(int e) { return monomial(1, e); }
  /// sum_{j=lo}^{hi} q^j; zero when hi < lo.
  static BasicQPoly geometric(int lo, int hi) {
    BasicQPoly p;
    for (int j = lo; j <= hi; ++j) p.add_term(j, 1);
    return p;
  }

  const Coefficients& coefficients() const { return c_; }
  bool is_zero() const { return c_.empty(); }
  std::int64_t coefficient(int e) const {
    const auto it = c_.find(e);
    return it == c_.end() ? 0 : it->second;
  }

  BasicQPoly operator-() const {
    BasicQPoly r;
    for (const auto& [e, c] : c_) r.add_term(e, -c);
    return r;
  }
  BasicQPoly& operator+=(const BasicQPoly& o) {
    for (const auto& [e, c] : o.c_) add_term(e, c);
    return *this;
  }
  BasicQPoly& operator-=(const BasicQPoly& o) { return *this += -o; }
  friend BasicQPoly operator+(BasicQPoly a, const BasicQPoly& b) { return a += b; }
  friend BasicQPoly operator-(BasicQPoly a, const BasicQPoly& b) { return a -= b; }
  friend BasicQPoly operator*(const BasicQPoly& a, const BasicQPoly& b) {
    BasicQPoly r;
    for (const auto& [ea, ca] : a.c_) {
      for (const auto& [eb, cb] : b.c_) {
        std::int64_t prod;
        if (__builtin_mul_overflow(ca, cb, &prod)) throw Error("q-polynomial coefficient overflow");
        r.add_term(ea + eb, prod);
      }
    }
    return r;
  }
  friend bool operator==(const BasicQPoly&, const BasicQPoly&) = default;

  /// Exact value at an integer q (a rational number for Laurent polynomials).
  auto evaluate(std::int64_t q) const {
    if constexpr (Laurent) {
      if (q == 0 && !c_.empty() && c_.begin()->first < 0) throw DivisionByZero("negative power of q at q = 0");
      Rational total(0);
      for (const auto& [e, c] : c_) total += Rational(c) * rational_power(q, e);
      return total;
    } else {
      std::int64_t total = 0;
      for (const auto& [e, c] : c_) {
        std::int64_t term;
        if (__builtin_mul_overflow(c, int_power(q, e), &term) || __builtin_add_overflow(total, term, &total)) {
          throw Error("q-polynomial value overflow");
        }
      }
      return total;
    }
  }

  /// "1 + q + q^2", "2 - 3*q^-1", "0"; terms sorted by exponent.
  std::string to_string() const {
    if (c_.empty()) return "0";
    std::string out;
    bool first = true;
    for (const auto& [e, c] : c_) {
      const std::int64_t mag = c < 0 ? -c : c;
      if (first) {
        if (c < 0) out += "-";
      } else {
        out += c < 0 ? " - " : " + ";
      }
      first = false;
      if (e == 0) {
        out += std::to_string(mag);
        continue;
      }
      if (mag != 1) out += std::to_string(mag) + "*";
      out += e == 1 ? "q" : "q^" + std::to_string(e);
    }
    return out;
  }

  /// Inverse of to_string; also accepts terms in any order and repeated exponents.
  static BasicQPoly parse(std::string_view text);

  template <bool L>
  friend class BasicQPoly;

  /// Polynomials convert to Laurent polynomials.
  template <bool L, typename = std::enable_if_t<Laurent && !L>>
  BasicQPoly(const BasicQPoly<L>& p) : c_(p.c_) {}  // NOLINT: widening conversion

 private:
  void add_term(int e, std::int64_t c) {
    if constexpr (!Laurent) {
      if (e < 0) throw InvalidParams("negative exponent in a q-polynomial");
    }
    if (c == 0) return;
    std::int64_t& slot = c_[e];
    if (__builtin_add_overflow(slot, c, &slot)) throw Error("q-polynomial coefficient overflow");
    if (slot == 0) c_.erase(e);
  }

  static std::int64_t int_power(std::int64_t q, int e) {
    std::int64_t r = 1;
    for (int i = 0; i < e; ++i) {
      if (__builtin_mul_overflow(r, q, &r)) throw Error("q-polynomial value overflow");
    }
    return r;
  }
  static Rational rational_power(std::int64_t q, int e) {
    return e >= 0 ? Rational(int_power(q, e)) : Rational(1, int_power(q, -e));
  }

  Coefficients c_;
};

using QPoly = BasicQPoly<false>;
using LaurentQPoly = BasicQPoly<true>;

extern template class BasicQPoly<false>;
extern template class BasicQPoly<true>;

}  // namespace relfl
