#pragma once

#include <stdexcept>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

namespace ontoq {

using Integer = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline Integer numerator_of(const Rational& r) { return boost::multiprecision::numerator(r); }
inline Integer denominator_of(const Rational& r) { return boost::multiprecision::denominator(r); }

// "7", "-3/14", "0.25" (finite decimals are converted exactly).
inline Rational parse_rational(const std::string& text) {
  auto parse_int = [&](const std::string& s) -> Integer {
    if (s.empty() || s.find_first_not_of("+-0123456789") != std::string::npos ||
        s.find_first_of("+-", 1) != std::string::npos) {
      throw std::invalid_argument("not a rational number: '" + text + "'");
    }
    return Integer(s.front() == '+' ? s.substr(1) : s);
  };
  if (const auto slash = text.find('/'); slash != std::string::npos) {
    const Integer den = parse_int(text.substr(slash + 1));
    if (den == 0) throw std::invalid_argument("zero denominator in '" + text + "'");
    return Rational(parse_int(text.substr(0, slash)), den);
  }
  if (const auto dot = text.find('.'); dot != std::string::npos) {
    const std::string frac = text.substr(dot + 1);
    if (frac.find_first_not_of("0123456789") != std::string::npos) {
      throw std::invalid_argument("not a rational number: '" + text + "'");
    }
    std::string whole = text.substr(0, dot);
    const bool negative = !whole.empty() && whole.front() == '-';
    if (whole.empty() || whole == "-" || whole == "+") whole += "0";
    Integer scale = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) scale *= 10;
    const Integer f = frac.empty() ? Integer(0) : Integer(frac);
    const Integer w = parse_int(whole);
    const Integer num = negative ? Integer(w * scale - f) : Integer(w * scale + f);
    return Rational(num, scale);
  }
  return Rational(parse_int(text));
}

inline std::string to_string(const Rational& r) {
  if (denominator_of(r) == 1) return numerator_of(r).str();
  return numerator_of(r).str() + "/" + denominator_of(r).str();
}

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

}  // namespace ontoq
