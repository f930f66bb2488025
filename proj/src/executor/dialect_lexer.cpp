#include <cctype>

#include "dgforge/dialect.hpp"

namespace dgforge::dgk {

const char* type_name(Type t) {
  switch (t) {
    case Type::i64: return "int";
    case Type::f32: return "float";
    case Type::f64: return "double";
  }
  return "?";
}

std::vector<Token> tokenize(const std::string& src) {
  std::vector<Token> out;
  int line = 1;
  size_t i = 0;
  const size_t n = src.size();
  while (i < n) {
    const char c = src[i];
    if (c == '\n') {
      ++line;
      ++i;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (c == '/' && i + 1 < n && src[i + 1] == '/') {
      while (i < n && src[i] != '\n') ++i;
      continue;
    }
    if (c == '/' && i + 1 < n && src[i + 1] == '*') {
      const int start = line;
      i += 2;
      while (i + 1 < n && !(src[i] == '*' && src[i + 1] == '/')) {
        if (src[i] == '\n') ++line;
        ++i;
      }
      if (i + 1 >= n) throw ParseError("unterminated comment", start);
      i += 2;
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t j = i;
      while (j < n && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
      out.push_back({Tok::ident, src.substr(i, j - i), line});
      i = j;
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || (c == '.' && i + 1 < n && std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
      size_t j = i;
      bool real = false;
      while (j < n && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      if (j < n && src[j] == '.') {
        real = true;
        ++j;
        while (j < n && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      }
      if (j < n && (src[j] == 'e' || src[j] == 'E')) {
        real = true;
        ++j;
        if (j < n && (src[j] == '+' || src[j] == '-')) ++j;
        if (j >= n || !std::isdigit(static_cast<unsigned char>(src[j]))) throw ParseError("malformed exponent", line);
        while (j < n && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      }
      if (j < n && src[j] == 'f') {
        real = true;
        ++j;
      }
      if (j < n && (std::isalpha(static_cast<unsigned char>(src[j])) || src[j] == '_')) {
        throw ParseError("malformed number", line);
      }
      out.push_back({real ? Tok::real_lit : Tok::int_lit, src.substr(i, j - i), line});
      i = j;
      continue;
    }
    static const char* two[] = {"+=", "-=", "*=", "<=", ">=", "==", "!=", "&&", "||"};
    bool matched = false;
    for (const char* t : two) {
      if (src.compare(i, 2, t) == 0) {
        out.push_back({Tok::punct, t, line});
        i += 2;
        matched = true;
        break;
      }
    }
    if (matched) continue;
    if (std::string("+-*/%<>=!?:;,(){}[]").find(c) != std::string::npos) {
      out.push_back({Tok::punct, std::string(1, c), line});
      ++i;
      continue;
    }
    throw ParseError(std::string("unexpected character '") + c + "'", line);
  }
  out.push_back({Tok::end, "", line});
  return out;
}

}  // namespace dgforge::dgk
