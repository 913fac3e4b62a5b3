#ifndef PARSKIT_RATIONAL_HPP
#define PARSKIT_RATIONAL_HPP

#include <boost/multiprecision/cpp_int.hpp>

#include <string>
#include <string_view>

namespace parskit {

// All probabilities and margins are exact rationals; doubles appear only in
// human-facing output and Monte Carlo estimates.
using Int = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;

/// Parses "a/b", "a", or a decimal literal like "0.25" (-> 1/4).
/// Throws ParseError on anything else.
Rat parse_rational(std::string_view text);

/// Canonical form: "n" when the denominator is 1, else "n/d".
std::string format_rational(const Rat& value);

double to_double(const Rat& value);

/// p^k for k >= 0.
Rat rat_pow(const Rat& base, unsigned long exponent);

}  // namespace parskit

#endif
