#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "flare/ast.hpp"
#include "flare/lexer.hpp"

namespace flare {

namespace detail {

/// Recursive-descent parser. No error recovery: the first violation throws.
class Parser {
 public:
  Parser(std::vector<Token> tokens, std::string file)
      : tokens_(std::move(tokens)), file_(std::move(file)) {
    SourceSpan eof_span{file_, 1, 1, 1, 1};
    if (!tokens_.empty()) {
      const auto& last = tokens_.back().span;
      eof_span = SourceSpan{file_, last.end_line, last.end_col + 1, last.end_line, last.end_col + 1};
    }
    tokens_.push_back({TokenKind::end_of_file, "", 0, eof_span});
  }

  Program parse_program() {
    Program program;
    program.file = file_;
    while (!at(TokenKind::end_of_file)) program.items.push_back(parse_top_item());
    return program;
  }

 private:
  std::vector<Token> tokens_;
  std::string file_;
  std::size_t pos_ = 0;
  bool in_function_ = false;

  const Token& peek(std::size_t ahead = 0) const {
    return tokens_[std::min(pos_ + ahead, tokens_.size() - 1)];
  }
  bool at(TokenKind k) const { return peek().kind == k; }
  const Token& advance() { return tokens_[pos_ < tokens_.size() - 1 ? pos_++ : pos_]; }

  [[noreturn]] void fail(const std::string& expected) const {
    const Token& t = peek();
    std::string found = t.kind == TokenKind::end_of_file ? "end of file" : "'" + t.text + "'";
    if (t.kind == TokenKind::string_literal) found = "string literal";
    throw ParseError(t.span, expected, found);
  }

  const Token& expect(TokenKind k, const std::string& expected = {}) {
    if (!at(k)) fail(expected.empty() ? token_kind_name(k) : expected);
    return advance();
  }

  bool accept(TokenKind k) {
    if (!at(k)) return false;
    advance();
    return true;
  }

  TopItem parse_top_item() {
    if (at(TokenKind::kw_func)) return parse_func();
    if (at(TokenKind::kw_when)) return parse_handler();
    Stmt s = parse_stmt();
    SourceSpan span = s.span;
    return TopItem{span, std::move(s)};
  }

  std::vector<Param> parse_params() {
    std::vector<Param> params;
    expect(TokenKind::lparen);
    if (accept(TokenKind::rparen)) return params;
    for (;;) {
      if (!at(TokenKind::identifier)) fail(params.empty() ? "parameter name or ')'" : "parameter name");
      const Token& name = advance();
      params.push_back({name.text, name.span});
      if (accept(TokenKind::rparen)) return params;
      if (!at(TokenKind::comma)) fail("',' or ')'");
      advance();
    }
  }

  TopItem parse_func() {
    SourceSpan start = expect(TokenKind::kw_func).span;
    const Token& name = expect(TokenKind::identifier, "function name");
    FuncDef fn{name.text, name.span, {}, {}};
    fn.params = parse_params();
    bool saved = in_function_;
    in_function_ = true;
    fn.body = parse_block();
    in_function_ = saved;
    SourceSpan span = merge(start, fn.body.span);
    return TopItem{span, std::move(fn)};
  }

  TopItem parse_handler() {
    SourceSpan start = expect(TokenKind::kw_when).span;
    const Token& ev = expect(TokenKind::identifier, "event name");
    Handler h{ev.text, ev.span, {}, {}};
    if (at(TokenKind::lparen)) h.params = parse_params();
    bool saved = in_function_;
    in_function_ = false;
    h.body = parse_block();
    in_function_ = saved;
    SourceSpan span = merge(start, h.body.span);
    return TopItem{span, std::move(h)};
  }

  Block parse_block() {
    Block b;
    SourceSpan open = expect(TokenKind::lbrace).span;
    while (!at(TokenKind::rbrace)) {
      if (at(TokenKind::end_of_file)) fail("statement or '}'");
      if (at(TokenKind::kw_func) || at(TokenKind::kw_when))
        fail("statement or '}' (definitions are only allowed at top level)");
      b.stmts.push_back(parse_stmt());
    }
    SourceSpan close = advance().span;
    b.span = merge(open, close);
    return b;
  }

  SourceSpan finish_simple(const SourceSpan& start) {
    SourceSpan semi = expect(TokenKind::semicolon).span;
    return merge(start, semi);
  }

  Stmt parse_stmt() {
    const Token& t = peek();
    SourceSpan start = t.span;
    switch (t.kind) {
      case TokenKind::kw_var:
      case TokenKind::kw_global: {
        bool is_global = t.kind == TokenKind::kw_global;
        advance();
        const Token& name = expect(TokenKind::identifier, "variable name");
        std::string n = name.text;
        SourceSpan ns = name.span;
        expect(TokenKind::assign);
        Expr value = parse_expr();
        SourceSpan span = finish_simple(start);
        if (is_global) return Stmt{span, GlobalDecl{n, ns, std::move(value)}};
        return Stmt{span, VarDecl{n, ns, std::move(value)}};
      }
      case TokenKind::identifier: {
        const Token& name = advance();
        std::string n = name.text;
        SourceSpan ns = name.span;
        if (accept(TokenKind::assign)) {
          Expr value = parse_expr();
          SourceSpan span = finish_simple(start);
          return Stmt{span, Assign{n, ns, std::move(value)}};
        }
        if (at(TokenKind::lparen)) {
          CallExpr call{n, ns, parse_args()};
          SourceSpan span = finish_simple(start);
          return Stmt{span, CallStmt{std::move(call)}};
        }
        fail("'=' or '('");
      }
      case TokenKind::kw_if: return parse_if();
      case TokenKind::kw_while: {
        advance();
        Expr cond = parse_expr();
        Block body = parse_block();
        SourceSpan span = merge(start, body.span);
        return Stmt{span, While{std::move(cond), std::move(body)}};
      }
      case TokenKind::kw_repeat: {
        advance();
        Expr count = parse_expr();
        Block body = parse_block();
        SourceSpan span = merge(start, body.span);
        return Stmt{span, Repeat{std::move(count), std::move(body)}};
      }
      case TokenKind::kw_after: {
        advance();
        Expr delay = parse_expr();
        bool saved = in_function_;
        in_function_ = false;
        Block body = parse_block();
        in_function_ = saved;
        SourceSpan span = merge(start, body.span);
        return Stmt{span, After{std::move(delay), std::move(body)}};
      }
      case TokenKind::kw_print: {
        advance();
        expect(TokenKind::lparen);
        Expr value = parse_expr();
        expect(TokenKind::rparen);
        SourceSpan span = finish_simple(start);
        return Stmt{span, Print{std::move(value)}};
      }
      case TokenKind::kw_emit: {
        advance();
        const Token& ev = expect(TokenKind::identifier, "event name");
        Emit e{ev.text, ev.span, {}};
        if (at(TokenKind::lparen)) e.args = parse_args();
        SourceSpan span = finish_simple(start);
        return Stmt{span, std::move(e)};
      }
      case TokenKind::kw_return: {
        if (!in_function_) throw ParseError(t.span, "statement", "'return' outside a function body");
        advance();
        Return r;
        if (!at(TokenKind::semicolon)) r.value = parse_expr();
        SourceSpan span = finish_simple(start);
        return Stmt{span, std::move(r)};
      }
      case TokenKind::kw_hw: {
        advance();
        expect(TokenKind::dot);
        const Token& method = expect(TokenKind::identifier, "'write'");
        if (method.text != "write") {
          pos_--;
          fail("'write'");
        }
        expect(TokenKind::lparen);
        const Token& dev = expect(TokenKind::string_literal, "device name string");
        HwWrite w{dev.text, dev.span, {}};
        expect(TokenKind::comma, "','");
        w.args.push_back(parse_expr());
        expect(TokenKind::rparen);
        SourceSpan span = finish_simple(start);
        return Stmt{span, std::move(w)};
      }
      default:
        fail("statement");
    }
  }

  Stmt parse_if() {
    SourceSpan start = expect(TokenKind::kw_if).span;
    Expr cond = parse_expr();
    Block then_block = parse_block();
    SourceSpan span = merge(start, then_block.span);
    std::optional<Block> else_block;
    if (accept(TokenKind::kw_else)) {
      if (at(TokenKind::kw_if)) {
        // `else if` is sugar for an else block holding a single if statement.
        Stmt nested = parse_if();
        Block b;
        b.span = nested.span;
        b.stmts.push_back(std::move(nested));
        else_block = std::move(b);
      } else {
        else_block = parse_block();
      }
      span = merge(start, else_block->span);
    }
    return Stmt{span, If{std::move(cond), std::move(then_block), std::move(else_block)}};
  }

  std::vector<Expr> parse_args() {
    std::vector<Expr> args;
    expect(TokenKind::lparen);
    if (accept(TokenKind::rparen)) return args;
    for (;;) {
      args.push_back(parse_expr());
      if (accept(TokenKind::rparen)) return args;
      if (!at(TokenKind::comma)) fail("',' or ')'");
      advance();
    }
  }

  // Precedence, loosest first: or, and, equality, comparison, additive,
  // multiplicative, unary.
  Expr parse_expr() { return parse_or(); }

  Expr make_binary(BinaryOp op, Expr lhs, Expr rhs) {
    SourceSpan span = merge(lhs.span, rhs.span);
    return Expr{span, Binary{op, std::move(lhs), std::move(rhs)}};
  }

  Expr parse_or() {
    Expr lhs = parse_and();
    while (accept(TokenKind::kw_or)) lhs = make_binary(BinaryOp::logical_or, std::move(lhs), parse_and());
    return lhs;
  }
  Expr parse_and() {
    Expr lhs = parse_equality();
    while (accept(TokenKind::kw_and))
      lhs = make_binary(BinaryOp::logical_and, std::move(lhs), parse_equality());
    return lhs;
  }
  Expr parse_equality() {
    Expr lhs = parse_comparison();
    for (;;) {
      if (accept(TokenKind::eq)) lhs = make_binary(BinaryOp::eq, std::move(lhs), parse_comparison());
      else if (accept(TokenKind::ne)) lhs = make_binary(BinaryOp::ne, std::move(lhs), parse_comparison());
      else return lhs;
    }
  }
  Expr parse_comparison() {
    Expr lhs = parse_additive();
    for (;;) {
      if (accept(TokenKind::lt)) lhs = make_binary(BinaryOp::lt, std::move(lhs), parse_additive());
      else if (accept(TokenKind::le)) lhs = make_binary(BinaryOp::le, std::move(lhs), parse_additive());
      else if (accept(TokenKind::gt)) lhs = make_binary(BinaryOp::gt, std::move(lhs), parse_additive());
      else if (accept(TokenKind::ge)) lhs = make_binary(BinaryOp::ge, std::move(lhs), parse_additive());
      else return lhs;
    }
  }
  Expr parse_additive() {
    Expr lhs = parse_multiplicative();
    for (;;) {
      if (accept(TokenKind::plus)) lhs = make_binary(BinaryOp::add, std::move(lhs), parse_multiplicative());
      else if (accept(TokenKind::minus)) lhs = make_binary(BinaryOp::sub, std::move(lhs), parse_multiplicative());
      else return lhs;
    }
  }
  Expr parse_multiplicative() {
    Expr lhs = parse_unary();
    for (;;) {
      if (accept(TokenKind::star)) lhs = make_binary(BinaryOp::mul, std::move(lhs), parse_unary());
      else if (accept(TokenKind::slash)) lhs = make_binary(BinaryOp::div, std::move(lhs), parse_unary());
      else return lhs;
    }
  }
  Expr parse_unary() {
    if (at(TokenKind::minus) || at(TokenKind::kw_not)) {
      const Token& op = advance();
      UnaryOp u = op.kind == TokenKind::minus ? UnaryOp::neg : UnaryOp::logical_not;
      SourceSpan start = op.span;
      Expr operand = parse_unary();
      SourceSpan span = merge(start, operand.span);
      return Expr{span, Unary{u, std::move(operand)}};
    }
    return parse_primary();
  }

  Expr parse_primary() {
    const Token& t = peek();
    switch (t.kind) {
      case TokenKind::int_literal: advance(); return Expr{t.span, IntLit{t.int_value}};
      case TokenKind::string_literal: advance(); return Expr{t.span, StrLit{t.text}};
      case TokenKind::kw_true: advance(); return Expr{t.span, BoolLit{true}};
      case TokenKind::kw_false: advance(); return Expr{t.span, BoolLit{false}};
      case TokenKind::identifier: {
        const Token& name = advance();
        if (at(TokenKind::lparen)) {
          std::string callee = name.text;
          SourceSpan cs = name.span;
          std::vector<Expr> args = parse_args();
          SourceSpan span = merge(cs, tokens_[pos_ - 1].span);
          return Expr{span, CallExpr{callee, cs, std::move(args)}};
        }
        return Expr{name.span, NameRef{name.text}};
      }
      case TokenKind::kw_hw: {
        SourceSpan start = advance().span;
        expect(TokenKind::dot);
        const Token& method = expect(TokenKind::identifier, "'read'");
        if (method.text != "read") {
          pos_--;
          fail("'read'");
        }
        expect(TokenKind::lparen);
        const Token& dev = expect(TokenKind::string_literal, "device name string");
        std::string device = dev.text;
        SourceSpan ds = dev.span;
        SourceSpan close = expect(TokenKind::rparen).span;
        return Expr{merge(start, close), HwRead{device, ds}};
      }
      case TokenKind::lparen: {
        advance();
        Expr inner = parse_expr();
        expect(TokenKind::rparen);
        return inner;
      }
      default:
        fail("expression");
    }
  }
};

}  // namespace detail

/// Parses a whole FlareLang source file.
inline Program parse(std::string_view source, const std::string& file = "<input>") {
  detail::Parser parser(tokenize(source, file), file);
  return parser.parse_program();
}

}  // namespace flare
