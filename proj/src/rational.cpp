#include "parskit/rational.hpp"

#include "parskit/errors.hpp"

#include <cctype>

namespace parskit {

namespace {

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

}  // namespace

Rat parse_rational(std::string_view text) {
  std::string_view s = text;
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);

  bool negative = false;
  if (!s.empty() && (s.front() == '+' || s.front() == '-')) {
    negative = s.front() == '-';
    s.remove_prefix(1);
  }
  if (s.empty()) throw ParseError("BadRational", "empty rational literal in \"" + std::string(text) + "\"");

  Rat value;
  if (auto slash = s.find('/'); slash != std::string_view::npos) {
    std::string_view num = s.substr(0, slash);
    std::string_view den = s.substr(slash + 1);
    if (!all_digits(num) || !all_digits(den)) {
      throw ParseError("BadRational", "expected \"a/b\" with integer a, b: \"" + std::string(text) + "\"");
    }
    Int d{std::string(den)};
    if (d == 0) throw ParseError("BadRational", "zero denominator in \"" + std::string(text) + "\"");
    value = Rat(Int{std::string(num)}, d);
  } else if (auto dot = s.find('.'); dot != std::string_view::npos) {
    std::string_view whole = s.substr(0, dot);
    std::string_view frac = s.substr(dot + 1);
    if (whole.empty() && frac.empty()) {
      throw ParseError("BadRational", "bare '.' is not a number: \"" + std::string(text) + "\"");
    }
    if ((!whole.empty() && !all_digits(whole)) || (!frac.empty() && !all_digits(frac))) {
      throw ParseError("BadRational", "bad decimal literal \"" + std::string(text) + "\"");
    }
    Int scaled = whole.empty() ? Int(0) : Int{std::string(whole)};
    Int denom = 1;
    for (char c : frac) {
      scaled = scaled * 10 + (c - '0');
      denom *= 10;
    }
    value = Rat(scaled, denom);
  } else {
    if (!all_digits(s)) throw ParseError("BadRational", "bad integer literal \"" + std::string(text) + "\"");
    value = Rat(Int{std::string(s)});
  }
  return negative ? Rat(-value) : value;
}

std::string format_rational(const Rat& value) {
  std::string num = numerator(value).str();
  if (denominator(value) == 1) return num;
  return num + "/" + denominator(value).str();
}

double to_double(const Rat& value) { return value.convert_to<double>(); }

Rat rat_pow(const Rat& base, unsigned long exponent) {
  Rat result = 1;
  Rat b = base;
  unsigned long e = exponent;
  while (e > 0) {
    if (e & 1UL) result *= b;
    b *= b;
    e >>= 1UL;
  }
  return result;
}

}  // namespace parskit
