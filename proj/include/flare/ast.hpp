#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "flare/source.hpp"

namespace flare {

/// Owning, deep-copying pointer for recursive AST nodes.
template <typename T>
class Box {
 public:
  Box(T value) : ptr_(std::make_unique<T>(std::move(value))) {}
  Box(const Box& other) : ptr_(std::make_unique<T>(*other.ptr_)) {}
  Box(Box&&) noexcept = default;
  Box& operator=(const Box& other) {
    if (this != &other) ptr_ = std::make_unique<T>(*other.ptr_);
    return *this;
  }
  Box& operator=(Box&&) noexcept = default;

  T& operator*() { return *ptr_; }
  const T& operator*() const { return *ptr_; }
  T* operator->() { return ptr_.get(); }
  const T* operator->() const { return ptr_.get(); }
  const T* get() const { return ptr_.get(); }

 private:
  std::unique_ptr<T> ptr_;
};

// ---------------------------------------------------------------- expressions

enum class BinaryOp { add, sub, mul, div, lt, le, gt, ge, eq, ne, logical_and, logical_or };
enum class UnaryOp { neg, logical_not };

inline const char* op_text(BinaryOp op) {
  switch (op) {
    case BinaryOp::add: return "+";
    case BinaryOp::sub: return "-";
    case BinaryOp::mul: return "*";
    case BinaryOp::div: return "/";
    case BinaryOp::lt: return "<";
    case BinaryOp::le: return "<=";
    case BinaryOp::gt: return ">";
    case BinaryOp::ge: return ">=";
    case BinaryOp::eq: return "==";
    case BinaryOp::ne: return "!=";
    case BinaryOp::logical_and: return "and";
    case BinaryOp::logical_or: return "or";
  }
  return "?";
}

inline const char* op_text(UnaryOp op) { return op == UnaryOp::neg ? "-" : "not"; }

struct Expr;

struct IntLit {
  std::int64_t value;
};
struct StrLit {
  std::string value;
};
struct BoolLit {
  bool value;
};
struct NameRef {
  std::string name;
};
struct HwRead {
  std::string device;
  SourceSpan device_span;
};
struct CallExpr {
  std::string callee;
  SourceSpan callee_span;
  std::vector<Expr> args;
};
struct Binary {
  BinaryOp op;
  Box<Expr> lhs;
  Box<Expr> rhs;
};
struct Unary {
  UnaryOp op;
  Box<Expr> operand;
};

struct Expr {
  SourceSpan span;
  std::variant<IntLit, StrLit, BoolLit, NameRef, HwRead, CallExpr, Binary, Unary> node;
};

// ----------------------------------------------------------------- statements

struct Stmt;

struct Block {
  SourceSpan span;  // from '{' to '}'
  std::vector<Stmt> stmts;
};

struct VarDecl {
  std::string name;
  SourceSpan name_span;
  Expr value;
};
struct GlobalDecl {
  std::string name;
  SourceSpan name_span;
  Expr value;
};
struct Assign {
  std::string name;
  SourceSpan name_span;
  Expr value;
};
struct If {
  Expr cond;
  Block then_block;
  std::optional<Block> else_block;
};
struct While {
  Expr cond;
  Block body;
};
struct Repeat {
  Expr count;
  Block body;
};
struct After {
  Expr delay_ms;
  Block body;
};
struct Print {
  Expr value;
};
struct Emit {
  std::string event;
  SourceSpan event_span;
  std::vector<Expr> args;
};
struct Return {
  std::optional<Expr> value;
};
struct CallStmt {
  CallExpr call;
};
struct HwWrite {
  std::string device;
  SourceSpan device_span;
  std::vector<Expr> args;
};

struct Stmt {
  SourceSpan span;
  std::variant<VarDecl, GlobalDecl, Assign, If, While, Repeat, After, Print, Emit, Return,
               CallStmt, HwWrite>
      node;
};

// ------------------------------------------------------------------ top level

struct Param {
  std::string name;
  SourceSpan span;
};

struct FuncDef {
  std::string name;
  SourceSpan name_span;
  std::vector<Param> params;
  Block body;
};

struct Handler {
  std::string event;
  SourceSpan event_span;
  std::vector<Param> params;
  Block body;
};

struct TopItem {
  SourceSpan span;
  std::variant<FuncDef, Handler, Stmt> node;
};

struct Program {
  std::string file;
  std::vector<TopItem> items;

  template <typename F>
  void for_each_function(F&& f) const {
    for (const auto& item : items)
      if (auto* fn = std::get_if<FuncDef>(&item.node)) f(item, *fn);
  }
  template <typename F>
  void for_each_handler(F&& f) const {
    for (const auto& item : items)
      if (auto* h = std::get_if<Handler>(&item.node)) f(item, *h);
  }

  /// The ordered top-level statements outside any definition.
  std::vector<const Stmt*> top_level_statements() const {
    std::vector<const Stmt*> out;
    for (const auto& item : items)
      if (auto* s = std::get_if<Stmt>(&item.node)) out.push_back(s);
    return out;
  }

  const FuncDef* find_function(const std::string& name) const {
    for (const auto& item : items)
      if (auto* fn = std::get_if<FuncDef>(&item.node); fn && fn->name == name) return fn;
    return nullptr;
  }
};

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Generic pre-order walks. Expression walks visit sub-expressions in source order.

template <typename F>
void walk_expr(const Expr& e, F&& f) {
  f(e);
  std::visit(overloaded{
                 [&](const CallExpr& c) {
                   for (const auto& a : c.args) walk_expr(a, f);
                 },
                 [&](const Binary& b) {
                   walk_expr(*b.lhs, f);
                   walk_expr(*b.rhs, f);
                 },
                 [&](const Unary& u) { walk_expr(*u.operand, f); },
                 [](const auto&) {},
             },
             e.node);
}

/// Calls `f` on each expression directly owned by `s` (not those in nested blocks).
template <typename F>
void for_each_own_expr(const Stmt& s, F&& f) {
  std::visit(overloaded{
                 [&](const VarDecl& v) { f(v.value); },
                 [&](const GlobalDecl& v) { f(v.value); },
                 [&](const Assign& v) { f(v.value); },
                 [&](const If& v) { f(v.cond); },
                 [&](const While& v) { f(v.cond); },
                 [&](const Repeat& v) { f(v.count); },
                 [&](const After& v) { f(v.delay_ms); },
                 [&](const Print& v) { f(v.value); },
                 [&](const Emit& v) {
                   for (const auto& a : v.args) f(a);
                 },
                 [&](const Return& v) {
                   if (v.value) f(*v.value);
                 },
                 [&](const CallStmt& v) {
                   for (const auto& a : v.call.args) f(a);
                 },
                 [&](const HwWrite& v) {
                   for (const auto& a : v.args) f(a);
                 },
             },
             s.node);
}

/// Nested blocks that execute within the same segment (`if`/`while`/`repeat`
/// bodies). `after` bodies are separate segments and are not included.
inline std::vector<const Block*> inline_blocks(const Stmt& s) {
  std::vector<const Block*> out;
  if (auto* i = std::get_if<If>(&s.node)) {
    out.push_back(&i->then_block);
    if (i->else_block) out.push_back(&*i->else_block);
  } else if (auto* w = std::get_if<While>(&s.node)) {
    out.push_back(&w->body);
  } else if (auto* r = std::get_if<Repeat>(&s.node)) {
    out.push_back(&r->body);
  }
  return out;
}

}  // namespace flare
