#include "cmh/rational.hpp"

#include <cctype>
#include <ostream>

namespace cmh {

Rat Rat::parse(const std::string& text) {
  if (text.empty()) throw std::invalid_argument("Rat::parse: empty string");
  std::size_t pos = 0;
  auto take_int = [&](const char* what) {
    std::size_t start = pos;
    if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) ++pos;
    std::size_t digits = 0;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
      ++pos;
      ++digits;
    }
    if (digits == 0)
      throw std::invalid_argument(std::string("Rat::parse: missing ") + what + " in '" + text + "'");
    return text.substr(start, pos - start);
  };

  const std::string num = take_int("numerator");
  std::string den = "1";
  if (pos < text.size() && text[pos] == '/') {
    ++pos;
    den = take_int("denominator");
  }
  if (pos != text.size())
    throw std::invalid_argument("Rat::parse: trailing characters in '" + text + "'");

  mpz_class n(num), d(den);
  if (d == 0) throw std::invalid_argument("Rat::parse: zero denominator in '" + text + "'");
  mpq_class q(n, d);
  q.canonicalize();
  return Rat(q);
}

Rat parse_rat(const std::string& text) { return Rat::parse(text); }

std::ostream& operator<<(std::ostream& os, const Rat& r) { return os << r.v_.get_str(); }

}  // namespace cmh
