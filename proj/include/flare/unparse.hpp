#pragma once

#include <string>

#include "json.hpp"

#include "flare/ast.hpp"

namespace flare {

namespace detail {

inline std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  return out + "\"";
}

inline std::string unparse_expr(const Expr& e);

inline std::string unparse_args(const std::vector<Expr>& args) {
  std::string out = "(";
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i) out += ", ";
    out += unparse_expr(args[i]);
  }
  return out + ")";
}

inline std::string unparse_expr(const Expr& e) {
  return std::visit(
      overloaded{
          [](const IntLit& v) { return std::to_string(v.value); },
          [](const StrLit& v) { return quote(v.value); },
          [](const BoolLit& v) { return std::string(v.value ? "true" : "false"); },
          [](const NameRef& v) { return v.name; },
          [](const HwRead& v) { return "hw.read(" + quote(v.device) + ")"; },
          [](const CallExpr& v) { return v.callee + unparse_args(v.args); },
          [](const Binary& v) {
            return "(" + unparse_expr(*v.lhs) + " " + op_text(v.op) + " " + unparse_expr(*v.rhs) + ")";
          },
          [](const Unary& v) {
            std::string sep = v.op == UnaryOp::neg ? "" : " ";
            return "(" + std::string(op_text(v.op)) + sep + unparse_expr(*v.operand) + ")";
          },
      },
      e.node);
}

inline void unparse_stmt(const Stmt& s, int indent, std::string& out);

inline void unparse_block(const Block& b, int indent, std::string& out) {
  out += "{\n";
  for (const auto& s : b.stmts) unparse_stmt(s, indent + 1, out);
  out += std::string(static_cast<std::size_t>(indent) * 2, ' ') + "}";
}

inline void unparse_stmt(const Stmt& s, int indent, std::string& out) {
  std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  out += pad;
  std::visit(overloaded{
                 [&](const VarDecl& v) { out += "var " + v.name + " = " + unparse_expr(v.value) + ";"; },
                 [&](const GlobalDecl& v) {
                   out += "global " + v.name + " = " + unparse_expr(v.value) + ";";
                 },
                 [&](const Assign& v) { out += v.name + " = " + unparse_expr(v.value) + ";"; },
                 [&](const If& v) {
                   out += "if " + unparse_expr(v.cond) + " ";
                   unparse_block(v.then_block, indent, out);
                   if (v.else_block) {
                     out += " else ";
                     unparse_block(*v.else_block, indent, out);
                   }
                 },
                 [&](const While& v) {
                   out += "while " + unparse_expr(v.cond) + " ";
                   unparse_block(v.body, indent, out);
                 },
                 [&](const Repeat& v) {
                   out += "repeat " + unparse_expr(v.count) + " ";
                   unparse_block(v.body, indent, out);
                 },
                 [&](const After& v) {
                   out += "after " + unparse_expr(v.delay_ms) + " ";
                   unparse_block(v.body, indent, out);
                 },
                 [&](const Print& v) { out += "print(" + unparse_expr(v.value) + ");"; },
                 [&](const Emit& v) {
                   out += "emit " + v.event;
                   if (!v.args.empty()) out += unparse_args(v.args);
                   out += ";";
                 },
                 [&](const Return& v) {
                   out += v.value ? "return " + unparse_expr(*v.value) + ";" : std::string("return;");
                 },
                 [&](const CallStmt& v) { out += v.call.callee + unparse_args(v.call.args) + ";"; },
                 [&](const HwWrite& v) {
                   out += "hw.write(" + quote(v.device);
                   for (const auto& a : v.args) out += ", " + unparse_expr(a);
                   out += ");";
                 },
             },
             s.node);
  out += "\n";
}

inline std::string unparse_params(const std::vector<Param>& params) {
  std::string out = "(";
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (i) out += ", ";
    out += params[i].name;
  }
  return out + ")";
}

}  // namespace detail

/// Canonical source text. Binary and unary expressions are fully parenthesised,
/// so re-parsing yields a structurally identical program.
inline std::string unparse(const Program& program) {
  std::string out;
  for (const auto& item : program.items) {
    std::visit(overloaded{
                   [&](const FuncDef& f) {
                     out += "func " + f.name + detail::unparse_params(f.params) + " ";
                     detail::unparse_block(f.body, 0, out);
                     out += "\n";
                   },
                   [&](const Handler& h) {
                     out += "when " + h.event;
                     if (!h.params.empty()) out += detail::unparse_params(h.params);
                     out += " ";
                     detail::unparse_block(h.body, 0, out);
                     out += "\n";
                   },
                   [&](const Stmt& s) { detail::unparse_stmt(s, 0, out); },
               },
               item.node);
  }
  return out;
}

// ------------------------------------------------------------------ AST JSON

inline nlohmann::json span_json(const SourceSpan& s) {
  return {{"file", s.file}, {"line", s.start_line}, {"col", s.start_col},
          {"end_line", s.end_line}, {"end_col", s.end_col}};
}

namespace detail {

struct AstJson {
  bool with_spans;

  nlohmann::json node(const char* kind, const SourceSpan& span) const {
    nlohmann::json j;
    j["kind"] = kind;
    j["children"] = nlohmann::json::array();
    if (with_spans) j["span"] = span_json(span);
    return j;
  }

  nlohmann::json expr(const Expr& e) const {
    return std::visit(
        overloaded{
            [&](const IntLit& v) {
              auto j = node("IntLiteral", e.span);
              j["value"] = v.value;
              return j;
            },
            [&](const StrLit& v) {
              auto j = node("StringLiteral", e.span);
              j["value"] = v.value;
              return j;
            },
            [&](const BoolLit& v) {
              auto j = node("BoolLiteral", e.span);
              j["value"] = v.value;
              return j;
            },
            [&](const NameRef& v) {
              auto j = node("NameRef", e.span);
              j["name"] = v.name;
              return j;
            },
            [&](const HwRead& v) {
              auto j = node("HwRead", e.span);
              j["device"] = v.device;
              return j;
            },
            [&](const CallExpr& v) {
              auto j = node("CallExpr", e.span);
              j["callee"] = v.callee;
              for (const auto& a : v.args) j["children"].push_back(expr(a));
              return j;
            },
            [&](const Binary& v) {
              auto j = node("Binary", e.span);
              j["op"] = op_text(v.op);
              j["children"].push_back(expr(*v.lhs));
              j["children"].push_back(expr(*v.rhs));
              return j;
            },
            [&](const Unary& v) {
              auto j = node("Unary", e.span);
              j["op"] = op_text(v.op);
              j["children"].push_back(expr(*v.operand));
              return j;
            },
        },
        e.node);
  }

  nlohmann::json block(const Block& b) const {
    auto j = node("Block", b.span);
    for (const auto& s : b.stmts) j["children"].push_back(stmt(s));
    return j;
  }

  nlohmann::json stmt(const Stmt& s) const {
    return std::visit(
        overloaded{
            [&](const VarDecl& v) {
              auto j = node("VarDecl", s.span);
              j["name"] = v.name;
              j["children"].push_back(expr(v.value));
              return j;
            },
            [&](const GlobalDecl& v) {
              auto j = node("GlobalDecl", s.span);
              j["name"] = v.name;
              j["children"].push_back(expr(v.value));
              return j;
            },
            [&](const Assign& v) {
              auto j = node("Assign", s.span);
              j["name"] = v.name;
              j["children"].push_back(expr(v.value));
              return j;
            },
            [&](const If& v) {
              auto j = node("If", s.span);
              j["children"].push_back(expr(v.cond));
              j["children"].push_back(block(v.then_block));
              if (v.else_block) j["children"].push_back(block(*v.else_block));
              return j;
            },
            [&](const While& v) {
              auto j = node("While", s.span);
              j["children"].push_back(expr(v.cond));
              j["children"].push_back(block(v.body));
              return j;
            },
            [&](const Repeat& v) {
              auto j = node("Repeat", s.span);
              j["children"].push_back(expr(v.count));
              j["children"].push_back(block(v.body));
              return j;
            },
            [&](const After& v) {
              auto j = node("After", s.span);
              j["children"].push_back(expr(v.delay_ms));
              j["children"].push_back(block(v.body));
              return j;
            },
            [&](const Print& v) {
              auto j = node("Print", s.span);
              j["children"].push_back(expr(v.value));
              return j;
            },
            [&](const Emit& v) {
              auto j = node("Emit", s.span);
              j["event"] = v.event;
              for (const auto& a : v.args) j["children"].push_back(expr(a));
              return j;
            },
            [&](const Return& v) {
              auto j = node("Return", s.span);
              if (v.value) j["children"].push_back(expr(*v.value));
              return j;
            },
            [&](const CallStmt& v) {
              auto j = node("CallStmt", s.span);
              j["callee"] = v.call.callee;
              for (const auto& a : v.call.args) j["children"].push_back(expr(a));
              return j;
            },
            [&](const HwWrite& v) {
              auto j = node("HwWrite", s.span);
              j["device"] = v.device;
              for (const auto& a : v.args) j["children"].push_back(expr(a));
              return j;
            },
        },
        s.node);
  }

  nlohmann::json params(const std::vector<Param>& ps) const {
    auto arr = nlohmann::json::array();
    for (const auto& p : ps) arr.push_back(p.name);
    return arr;
  }

  nlohmann::json program(const Program& p) const {
    SourceSpan whole{p.file, 1, 1, 1, 1};
    if (!p.items.empty()) whole = merge(p.items.front().span, p.items.back().span);
    auto j = node("Program", whole);
    for (const auto& item : p.items) {
      std::visit(overloaded{
                     [&](const FuncDef& f) {
                       auto fj = node("FuncDef", item.span);
                       fj["name"] = f.name;
                       fj["params"] = params(f.params);
                       fj["children"].push_back(block(f.body));
                       j["children"].push_back(std::move(fj));
                     },
                     [&](const Handler& h) {
                       auto hj = node("Handler", item.span);
                       hj["event"] = h.event;
                       hj["params"] = params(h.params);
                       hj["children"].push_back(block(h.body));
                       j["children"].push_back(std::move(hj));
                     },
                     [&](const Stmt& s) { j["children"].push_back(stmt(s)); },
                 },
                 item.node);
    }
    return j;
  }
};

}  // namespace detail

inline nlohmann::json ast_to_json(const Program& program, bool with_spans = true) {
  return detail::AstJson{with_spans}.program(program);
}

/// Structural equality: same tree shape, names, operators and literals; spans ignored.
inline bool structurally_equal(const Program& a, const Program& b) {
  return ast_to_json(a, false) == ast_to_json(b, false);
}

}  // namespace flare
