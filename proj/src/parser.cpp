#include "freespec/ncpoly.hpp"

#include <json.hpp>

#include <cctype>
#include <cstdlib>
#include <optional>

namespace freespec {

ParseError::ParseError(const std::string& msg, std::size_t pos)
    : Error(msg + " at position " + std::to_string(pos)), pos_(pos) {}

namespace {

// Recursive-descent parser over the polynomial DSL.
class Parser {
 public:
  explicit Parser(std::string_view text) : s_(text) {}

  NcPolynomial parse() {
    NcPolynomial p = expr();
    skip_ws();
    if (pos_ != s_.size()) fail("unexpected character '" + std::string(1, s_[pos_]) + "'");
    return p;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, pos_); }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool peek(char c) {
    skip_ws();
    return pos_ < s_.size() && s_[pos_] == c;
  }

  bool accept(char c) {
    if (!peek(c)) return false;
    ++pos_;
    return true;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  bool starts_with(std::string_view word) {
    skip_ws();
    return s_.substr(pos_, word.size()) == word;
  }

  NcPolynomial expr() {
    NcPolynomial acc = term();
    for (;;) {
      if (accept('+')) {
        acc += term();
      } else if (accept('-')) {
        acc -= term();
      } else {
        return acc;
      }
    }
  }

  NcPolynomial term() {
    NcPolynomial acc = signed_factor();
    while (accept('*')) acc = acc * signed_factor();
    return acc;
  }

  NcPolynomial signed_factor() {
    if (accept('-')) return -signed_factor();
    if (accept('+')) return signed_factor();
    return powered(primary());
  }

  NcPolynomial powered(NcPolynomial base) {
    while (accept('^')) {
      skip_ws();
      const std::size_t start = pos_;
      unsigned long e = read_uint();
      if (e > 64) {
        pos_ = start;
        fail("exponent too large");
      }
      NcPolynomial r(1.0);
      for (unsigned long k = 0; k < e; ++k) r = r * base;
      base = std::move(r);
    }
    return base;
  }

  unsigned long read_uint() {
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    if (start == pos_) fail("expected unsigned integer");
    return std::stoul(std::string(s_.substr(start, pos_ - start)));
  }

  // Reads a floating-point literal (optionally signed); returns false without
  // consuming input when none is present.
  bool read_float(double& out) {
    skip_ws();
    if (pos_ >= s_.size()) return false;
    const char c = s_[pos_];
    if (!(std::isdigit(static_cast<unsigned char>(c)) || c == '.' || c == '-' || c == '+')) return false;
    std::string buf(s_.substr(pos_));
    char* end = nullptr;
    out = std::strtod(buf.c_str(), &end);
    if (end == buf.c_str()) return false;
    // Reject hex floats, inf and nan which strtod would happily accept.
    const std::string lit(buf.c_str(), static_cast<std::size_t>(end - buf.c_str()));
    for (char ch : lit)
      if (std::isalpha(static_cast<unsigned char>(ch)) && ch != 'e' && ch != 'E') return false;
    pos_ += lit.size();
    return true;
  }

  NcPolynomial primary() {
    skip_ws();
    if (pos_ >= s_.size()) fail("unexpected end of input");
    if (starts_with("adj")) {
      pos_ += 3;
      expect('(');
      NcPolynomial inner = expr();
      expect(')');
      return inner.adjoint();
    }
    const char c = s_[pos_];
    if (c == 'x') {
      ++pos_;
      const std::size_t at = pos_;
      unsigned long idx = read_uint();
      if (idx == 0) {
        pos_ = at;
        fail("variable index must be >= 1");
      }
      if (idx > 1000000) {
        pos_ = at;
        fail("variable index too large");
      }
      return NcPolynomial::variable(static_cast<int>(idx));
    }
    if (c == '(') {
      const std::size_t save = pos_;
      if (auto z = try_complex_literal()) return NcPolynomial(*z);
      pos_ = save;
      ++pos_;
      NcPolynomial inner = expr();
      expect(')');
      return inner;
    }
    double v = 0.0;
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      if (read_float(v)) return NcPolynomial(cplx(v, 0.0));
    }
    fail("unexpected character '" + std::string(1, c) + "'");
  }

  // '(' float ('+'|'-') float 'i' ')'
  std::optional<cplx> try_complex_literal() {
    ++pos_;  // '('
    double re = 0.0, im = 0.0;
    if (!read_float(re)) return std::nullopt;
    skip_ws();
    if (pos_ >= s_.size() || (s_[pos_] != '+' && s_[pos_] != '-')) return std::nullopt;
    const double sign = s_[pos_] == '-' ? -1.0 : 1.0;
    ++pos_;
    skip_ws();
    if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) return std::nullopt;
    if (!read_float(im)) return std::nullopt;
    if (!accept('i')) return std::nullopt;
    if (!accept(')')) return std::nullopt;
    return cplx(re, sign * im);
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace

NcPolynomial parse_polynomial(std::string_view text) { return Parser(text).parse(); }

MatrixPolynomial parse_matrix_polynomial(std::string_view text) {
  std::size_t first = 0;
  while (first < text.size() && std::isspace(static_cast<unsigned char>(text[first]))) ++first;
  if (first >= text.size() || text[first] != '{') return MatrixPolynomial(parse_polynomial(text));

  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what(), e.byte);
  }
  if (!j.contains("entries") || !j["entries"].is_array()) throw ParseError("missing \"entries\" array", 0);
  const auto& rows = j["entries"];
  const int n = j.contains("n") ? j["n"].get<int>() : static_cast<int>(rows.size());
  if (n < 1) throw ParseError("matrix size must be positive", 0);
  if (static_cast<int>(rows.size()) != n) throw ParseError("non-square entry grid: row count differs from n", 0);
  MatrixPolynomial f(n);
  for (int i = 0; i < n; ++i) {
    const auto& row = rows[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<int>(row.size()) != n)
      throw ParseError("non-square entry grid in row " + std::to_string(i), 0);
    for (int k = 0; k < n; ++k) {
      const auto& cell = row[static_cast<std::size_t>(k)];
      if (cell.is_string()) {
        try {
          f(i, k) = parse_polynomial(cell.get<std::string>());
        } catch (const ParseError& e) {
          throw ParseError("entry (" + std::to_string(i) + "," + std::to_string(k) + "): " + e.what(),
                           e.position());
        }
      } else if (cell.is_number()) {
        f(i, k) = NcPolynomial(cplx(cell.get<double>(), 0.0));
      } else {
        throw ParseError("entry (" + std::to_string(i) + "," + std::to_string(k) + ") is not a string", 0);
      }
    }
  }
  return f;
}

}  // namespace freespec
