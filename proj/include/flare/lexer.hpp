#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "flare/source.hpp"

namespace flare {

enum class TokenKind {
  identifier,
  int_literal,
  string_literal,
  // keywords
  kw_func,
  kw_when,
  kw_after,
  kw_var,
  kw_global,
  kw_if,
  kw_else,
  kw_while,
  kw_repeat,
  kw_print,
  kw_emit,
  kw_return,
  kw_true,
  kw_false,
  kw_and,
  kw_or,
  kw_not,
  kw_hw,
  // punctuation
  lparen,
  rparen,
  lbrace,
  rbrace,
  comma,
  semicolon,
  dot,
  assign,
  eq,
  ne,
  lt,
  le,
  gt,
  ge,
  plus,
  minus,
  star,
  slash,
  end_of_file,
};

struct Token {
  TokenKind kind;
  std::string text;   // identifier name, decoded string contents, or lexeme
  std::int64_t int_value = 0;
  SourceSpan span;
};

inline const char* token_kind_name(TokenKind k) {
  switch (k) {
    case TokenKind::identifier: return "identifier";
    case TokenKind::int_literal: return "integer";
    case TokenKind::string_literal: return "string";
    case TokenKind::kw_func: return "'func'";
    case TokenKind::kw_when: return "'when'";
    case TokenKind::kw_after: return "'after'";
    case TokenKind::kw_var: return "'var'";
    case TokenKind::kw_global: return "'global'";
    case TokenKind::kw_if: return "'if'";
    case TokenKind::kw_else: return "'else'";
    case TokenKind::kw_while: return "'while'";
    case TokenKind::kw_repeat: return "'repeat'";
    case TokenKind::kw_print: return "'print'";
    case TokenKind::kw_emit: return "'emit'";
    case TokenKind::kw_return: return "'return'";
    case TokenKind::kw_true: return "'true'";
    case TokenKind::kw_false: return "'false'";
    case TokenKind::kw_and: return "'and'";
    case TokenKind::kw_or: return "'or'";
    case TokenKind::kw_not: return "'not'";
    case TokenKind::kw_hw: return "'hw'";
    case TokenKind::lparen: return "'('";
    case TokenKind::rparen: return "')'";
    case TokenKind::lbrace: return "'{'";
    case TokenKind::rbrace: return "'}'";
    case TokenKind::comma: return "','";
    case TokenKind::semicolon: return "';'";
    case TokenKind::dot: return "'.'";
    case TokenKind::assign: return "'='";
    case TokenKind::eq: return "'=='";
    case TokenKind::ne: return "'!='";
    case TokenKind::lt: return "'<'";
    case TokenKind::le: return "'<='";
    case TokenKind::gt: return "'>'";
    case TokenKind::ge: return "'>='";
    case TokenKind::plus: return "'+'";
    case TokenKind::minus: return "'-'";
    case TokenKind::star: return "'*'";
    case TokenKind::slash: return "'/'";
    case TokenKind::end_of_file: return "end of file";
  }
  return "?";
}

namespace detail {

inline bool is_ident_start(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
}
inline bool is_ident_char(char c) { return is_ident_start(c) || (c >= '0' && c <= '9'); }
inline bool is_digit(char c) { return c >= '0' && c <= '9'; }

inline TokenKind keyword_or_identifier(std::string_view word) {
  struct Entry {
    std::string_view text;
    TokenKind kind;
  };
  static constexpr Entry keywords[] = {
      {"func", TokenKind::kw_func},     {"when", TokenKind::kw_when},
      {"after", TokenKind::kw_after},   {"var", TokenKind::kw_var},
      {"global", TokenKind::kw_global}, {"if", TokenKind::kw_if},
      {"else", TokenKind::kw_else},     {"while", TokenKind::kw_while},
      {"repeat", TokenKind::kw_repeat}, {"print", TokenKind::kw_print},
      {"emit", TokenKind::kw_emit},     {"return", TokenKind::kw_return},
      {"true", TokenKind::kw_true},     {"false", TokenKind::kw_false},
      {"and", TokenKind::kw_and},       {"or", TokenKind::kw_or},
      {"not", TokenKind::kw_not},       {"hw", TokenKind::kw_hw},
  };
  for (const auto& e : keywords)
    if (e.text == word) return e.kind;
  return TokenKind::identifier;
}

}  // namespace detail

/// Splits FlareLang source into tokens. Whitespace and `#` line comments are
/// skipped; the returned list does not include an end-of-file token.
inline std::vector<Token> tokenize(std::string_view source, const std::string& file = "<input>") {
  std::vector<Token> tokens;
  std::size_t i = 0;
  int line = 1;
  int col = 1;

  auto span_from = [&](int l0, int c0) {
    return SourceSpan{file, l0, c0, line, col - 1};
  };
  auto advance = [&]() {
    if (source[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
    ++i;
  };

  while (i < source.size()) {
    char c = source[i];
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      advance();
      continue;
    }
    if (c == '#') {
      while (i < source.size() && source[i] != '\n') advance();
      continue;
    }
    const int l0 = line;
    const int c0 = col;

    if (detail::is_ident_start(c)) {
      std::size_t start = i;
      while (i < source.size() && detail::is_ident_char(source[i])) advance();
      std::string word(source.substr(start, i - start));
      tokens.push_back({detail::keyword_or_identifier(word), word, 0, span_from(l0, c0)});
      continue;
    }

    if (detail::is_digit(c)) {
      std::size_t start = i;
      std::int64_t value = 0;
      bool overflow = false;
      while (i < source.size() && detail::is_digit(source[i])) {
        int digit = source[i] - '0';
        if (value > (std::numeric_limits<std::int64_t>::max() - digit) / 10) overflow = true;
        if (!overflow) value = value * 10 + digit;
        advance();
      }
      if (i < source.size() && detail::is_ident_start(source[i]))
        throw LexError(span_from(l0, c0 + 1), "malformed integer literal");
      if (overflow) throw LexError(span_from(l0, c0), "integer literal out of range");
      tokens.push_back({TokenKind::int_literal, std::string(source.substr(start, i - start)),
                        value, span_from(l0, c0)});
      continue;
    }

    if (c == '"') {
      advance();
      std::string text;
      bool closed = false;
      while (i < source.size()) {
        char d = source[i];
        if (d == '"') {
          advance();
          closed = true;
          break;
        }
        if (d == '\n') break;
        if (d == '\\') {
          advance();
          if (i >= source.size()) break;
          char e = source[i];
          switch (e) {
            case 'n': text += '\n'; break;
            case 't': text += '\t'; break;
            case '"': text += '"'; break;
            case '\\': text += '\\'; break;
            default:
              throw LexError(SourceSpan{file, line, col - 1, line, col},
                             std::string("unknown escape sequence '\\") + e + "'");
          }
          advance();
          continue;
        }
        text += d;
        advance();
      }
      if (!closed) throw LexError(span_from(l0, c0), "unterminated string literal");
      tokens.push_back({TokenKind::string_literal, std::move(text), 0, span_from(l0, c0)});
      continue;
    }

    auto single = [&](TokenKind k) {
      advance();
      tokens.push_back({k, std::string(1, c), 0, span_from(l0, c0)});
    };
    auto maybe_double = [&](TokenKind one, TokenKind two) {
      advance();
      if (i < source.size() && source[i] == '=') {
        advance();
        tokens.push_back({two, std::string(1, c) + "=", 0, span_from(l0, c0)});
      } else {
        tokens.push_back({one, std::string(1, c), 0, span_from(l0, c0)});
      }
    };

    switch (c) {
      case '(': single(TokenKind::lparen); break;
      case ')': single(TokenKind::rparen); break;
      case '{': single(TokenKind::lbrace); break;
      case '}': single(TokenKind::rbrace); break;
      case ',': single(TokenKind::comma); break;
      case ';': single(TokenKind::semicolon); break;
      case '.': single(TokenKind::dot); break;
      case '+': single(TokenKind::plus); break;
      case '-': single(TokenKind::minus); break;
      case '*': single(TokenKind::star); break;
      case '/': single(TokenKind::slash); break;
      case '=': maybe_double(TokenKind::assign, TokenKind::eq); break;
      case '<': maybe_double(TokenKind::lt, TokenKind::le); break;
      case '>': maybe_double(TokenKind::gt, TokenKind::ge); break;
      case '!':
        if (i + 1 < source.size() && source[i + 1] == '=') {
          advance();
          advance();
          tokens.push_back({TokenKind::ne, "!=", 0, span_from(l0, c0)});
          break;
        }
        [[fallthrough]];
      default: {
        SourceSpan at{file, l0, c0, l0, c0};
        if (static_cast<unsigned char>(c) >= 0x80)
          throw LexError(at, "non-ASCII character outside a string or comment");
        throw LexError(at, std::string("unexpected character '") + c + "'");
      }
    }
  }
  return tokens;
}

}  // namespace flare
