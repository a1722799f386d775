#include "relfl/qpoly.hpp"

#include <cctype>

namespace relfl {

namespace {

class TermReader {
 public:
  explicit TermReader(std::string_view s) : s_(s) {}

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool done() {
    skip_ws();
    return pos_ >= s_.size();
  }
  bool accept(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  bool at_digit() {
    skip_ws();
    return pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]));
  }
  std::int64_t number() {
    skip_ws();
    bool neg = false;
    if (pos_ < s_.size() && s_[pos_] == '-') {
      neg = true;
      ++pos_;
    }
    if (!at_digit()) fail("expected a number");
    std::int64_t v = 0;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
      if (__builtin_mul_overflow(v, 10, &v) || __builtin_add_overflow(v, s_[pos_] - '0', &v)) fail("number too large");
      ++pos_;
    }
    return neg ? -v : v;
  }
  [[noreturn]] void fail(const std::string& why) const {
    throw ParseError("cannot parse q-polynomial '" + std::string(s_) + "': " + why + " at offset " + std::to_string(pos_));
  }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace

template <bool Laurent>
BasicQPoly<Laurent> BasicQPoly<Laurent>::parse(std::string_view text) {
  TermReader r(text);
  BasicQPoly out;
  if (r.done()) r.fail("empty input");
  bool negative = r.accept('-');
  while (true) {
    std::int64_t c = 1;
    bool have_coefficient = false;
    if (r.at_digit()) {
      c = r.number();
      have_coefficient = true;
    }
    int e = 0;
    bool have_q = false;
    if (have_coefficient ? r.accept('*') : false) {
      if (!r.accept('q')) r.fail("expected q after *");
      have_q = true;
    } else if (r.accept('q')) {
      have_q = true;
    }
    if (!have_coefficient && !have_q) r.fail("expected a term");
    if (have_q) {
      e = 1;
      if (r.accept('^')) e = static_cast<int>(r.number());
    }
    out.add_term(e, negative ? -c : c);
    if (r.done()) break;
    if (r.accept('+')) {
      negative = false;
    } else if (r.accept('-')) {
      negative = true;
    } else {
      r.fail("expected + or -");
    }
  }
  return out;
}

template class BasicQPoly<false>;
template class BasicQPoly<true>;

}  // namespace relfl
