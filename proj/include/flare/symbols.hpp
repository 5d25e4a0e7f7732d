#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "flare/ast.hpp"

namespace flare {

// ------------------------------------------------------------------- segments

enum class SegmentKind { script, function, handler, timer };

/// A segment-scale code region: a function body, a `when` handler body, an
/// `after` body, or the ordered top-level statements outside any definition.
struct SegmentRef {
  SegmentKind kind;
  std::string name;
  SourceSpan span;
  std::vector<const Stmt*> stmts;
  const FuncDef* func = nullptr;
  const Handler* handler = nullptr;
  const Stmt* after_stmt = nullptr;  // the `after` statement owning a timer body

  SourcePos start() const { return span.start(); }
  const std::vector<Param>* params() const {
    if (func) return &func->params;
    if (handler) return &handler->params;
    return nullptr;
  }
};

inline std::string timer_name(const Stmt& after_stmt) {
  return "after@" + std::to_string(after_stmt.span.start_line) + ":" +
         std::to_string(after_stmt.span.start_col);
}

namespace detail {

inline void collect_timers(const std::vector<const Stmt*>& stmts, std::vector<SegmentRef>& out);

inline void collect_timers_in(const Stmt& s, std::vector<SegmentRef>& out) {
  for (const Block* b : inline_blocks(s)) {
    std::vector<const Stmt*> inner;
    for (const auto& st : b->stmts) inner.push_back(&st);
    collect_timers(inner, out);
  }
  if (auto* a = std::get_if<After>(&s.node)) {
    SegmentRef seg{SegmentKind::timer, timer_name(s), a->body.span, {}};
    for (const auto& st : a->body.stmts) seg.stmts.push_back(&st);
    seg.after_stmt = &s;
    auto body = seg.stmts;
    out.push_back(std::move(seg));
    collect_timers(body, out);
  }
}

inline void collect_timers(const std::vector<const Stmt*>& stmts, std::vector<SegmentRef>& out) {
  for (const Stmt* s : stmts) collect_timers_in(*s, out);
}

}  // namespace detail

/// All segments of a program ordered by source position.
inline std::vector<SegmentRef> enumerate_segments(const Program& program) {
  std::vector<SegmentRef> out;
  auto top = program.top_level_statements();
  if (!top.empty()) {
    SegmentRef script{SegmentKind::script, "script", merge(top.front()->span, top.back()->span), top};
    out.push_back(std::move(script));
  }
  for (const auto& item : program.items) {
    if (auto* f = std::get_if<FuncDef>(&item.node)) {
      SegmentRef seg{SegmentKind::function, f->name, item.span, {}};
      for (const auto& s : f->body.stmts) seg.stmts.push_back(&s);
      seg.func = f;
      out.push_back(std::move(seg));
    } else if (auto* h = std::get_if<Handler>(&item.node)) {
      SegmentRef seg{SegmentKind::handler, "handler:" + h->event, item.span, {}};
      for (const auto& s : h->body.stmts) seg.stmts.push_back(&s);
      seg.handler = h;
      out.push_back(std::move(seg));
    }
  }
  std::vector<SegmentRef> timers;
  for (const auto& seg : out) detail::collect_timers(seg.stmts, timers);
  for (auto& t : timers) out.push_back(std::move(t));
  std::stable_sort(out.begin(), out.end(),
                   [](const SegmentRef& a, const SegmentRef& b) { return a.start() < b.start(); });
  return out;
}

// --------------------------------------------------------------- symbol table

enum class SymbolKind { local, parameter, global, hardware_device, event_name, function };

inline const char* symbol_kind_name(SymbolKind k) {
  switch (k) {
    case SymbolKind::local: return "local";
    case SymbolKind::parameter: return "parameter";
    case SymbolKind::global: return "global";
    case SymbolKind::hardware_device: return "hardware-device";
    case SymbolKind::event_name: return "event-name";
    case SymbolKind::function: return "function";
  }
  return "?";
}

enum class Access { read, write, call, declare };

struct Reference {
  SourceSpan span;
  Access access;
};

struct Symbol {
  std::string name;
  SymbolKind kind;
  std::string owner;  // owning segment name for locals and parameters
  std::optional<SourcePos> owner_start;
  SourceSpan decl_span;
  std::vector<Reference> refs;
};

/// Classification of every name occurrence in a program. Occurrences are keyed
/// by the start position of the identifier (or device/event string) token.
class SymbolTable {
 public:
  const std::vector<Symbol>& symbols() const { return symbols_; }

  const Symbol* at(SourcePos site) const {
    auto it = by_site_.find(site);
    return it == by_site_.end() ? nullptr : &symbols_[it->second];
  }

  const Symbol* find(const std::string& name, SymbolKind kind) const {
    for (const auto& s : symbols_)
      if (s.name == name && s.kind == kind) return &s;
    return nullptr;
  }

  const Symbol* find_local(const std::string& name, SourcePos owner) const {
    for (const auto& s : symbols_)
      if (s.name == name && (s.kind == SymbolKind::local || s.kind == SymbolKind::parameter) &&
          s.owner_start == owner)
        return &s;
    return nullptr;
  }

  std::vector<const Symbol*> of_kind(SymbolKind kind) const {
    std::vector<const Symbol*> out;
    for (const auto& s : symbols_)
      if (s.kind == kind) out.push_back(&s);
    return out;
  }

  std::size_t size() const { return symbols_.size(); }
  std::size_t site_count() const { return by_site_.size(); }

 private:
  friend class NameResolver;

  std::size_t add(Symbol s) {
    symbols_.push_back(std::move(s));
    return symbols_.size() - 1;
  }
  void record(std::size_t id, const SourceSpan& span, Access access) {
    symbols_[id].refs.push_back({span, access});
    by_site_[span.start()] = id;
  }

  std::vector<Symbol> symbols_;
  std::map<SourcePos, std::size_t> by_site_;
};

class NameResolver {
 public:
  explicit NameResolver(const Program& program) : program_(program) {}

  SymbolTable run() {
    collect_functions();
    collect_events();
    collect_globals();
    for (const auto& seg : enumerate_segments(program_)) resolve_segment(seg);
    return std::move(table_);
  }

 private:
  const Program& program_;
  SymbolTable table_;
  std::map<std::string, std::size_t> functions_;
  std::map<std::string, std::size_t> events_;
  std::map<std::string, std::size_t> globals_;
  std::map<std::string, std::size_t> devices_;
  std::map<std::string, std::size_t> arity_;  // function name -> parameter count
  std::map<std::string, std::size_t> handler_arity_;

  // Per-segment scope: visible from the declaration point onward.
  std::map<std::string, std::size_t> scope_;
  const SegmentRef* segment_ = nullptr;

  void collect_functions() {
    for (const auto& item : program_.items) {
      auto* f = std::get_if<FuncDef>(&item.node);
      if (!f) continue;
      if (functions_.count(f->name))
        throw ResolveError(f->name_span, "duplicate function '" + f->name + "'");
      auto id = table_.add({f->name, SymbolKind::function, {}, {}, f->name_span, {}});
      table_.record(id, f->name_span, Access::declare);
      functions_[f->name] = id;
      arity_[f->name] = f->params.size();
    }
  }

  std::size_t event_symbol(const std::string& name, const SourceSpan& span) {
    if (functions_.count(name))
      throw ResolveError(span, "'" + name + "' is used both as a function and as an event name");
    auto it = events_.find(name);
    if (it != events_.end()) return it->second;
    auto id = table_.add({name, SymbolKind::event_name, {}, {}, span, {}});
    events_[name] = id;
    return id;
  }

  void collect_events() {
    for (const auto& item : program_.items) {
      auto* h = std::get_if<Handler>(&item.node);
      if (!h) continue;
      auto id = event_symbol(h->event, h->event_span);
      table_.record(id, h->event_span, Access::declare);
      auto [it, inserted] = handler_arity_.emplace(h->event, h->params.size());
      if (!inserted && it->second != h->params.size())
        throw ResolveError(h->event_span, "handlers for event '" + h->event +
                                              "' disagree on the number of parameters");
    }
  }

  std::size_t global_symbol(const std::string& name, const SourceSpan& span) {
    auto it = globals_.find(name);
    if (it != globals_.end()) return it->second;
    auto id = table_.add({name, SymbolKind::global, {}, {}, span, {}});
    globals_[name] = id;
    return id;
  }

  void collect_global_decls(const Stmt& s) {
    if (auto* g = std::get_if<GlobalDecl>(&s.node)) global_symbol(g->name, g->name_span);
    for (const Block* b : inline_blocks(s))
      for (const auto& st : b->stmts) collect_global_decls(st);
    if (auto* a = std::get_if<After>(&s.node))
      for (const auto& st : a->body.stmts) collect_global_decls(st);
  }

  // Top-level bare assignments to names that are not top-level locals declare globals.
  void collect_implicit_globals(const Stmt& s, std::set<std::string>& script_locals) {
    if (auto* v = std::get_if<VarDecl>(&s.node)) script_locals.insert(v->name);
    if (auto* a = std::get_if<Assign>(&s.node))
      if (!script_locals.count(a->name)) global_symbol(a->name, a->name_span);
    for (const Block* b : inline_blocks(s))
      for (const auto& st : b->stmts) collect_implicit_globals(st, script_locals);
  }

  void collect_globals() {
    for (const auto& item : program_.items) {
      std::visit(overloaded{
                     [&](const FuncDef& f) {
                       for (const auto& s : f.body.stmts) collect_global_decls(s);
                     },
                     [&](const Handler& h) {
                       for (const auto& s : h.body.stmts) collect_global_decls(s);
                     },
                     [&](const Stmt& s) { collect_global_decls(s); },
                 },
                 item.node);
    }
    std::set<std::string> script_locals;
    for (const Stmt* s : program_.top_level_statements()) collect_implicit_globals(*s, script_locals);
  }

  void resolve_segment(const SegmentRef& seg) {
    segment_ = &seg;
    scope_.clear();
    if (const auto* params = seg.params()) {
      for (const auto& p : *params) {
        if (scope_.count(p.name))
          throw ResolveError(p.span, "duplicate parameter '" + p.name + "'");
        auto id = table_.add({p.name, SymbolKind::parameter, seg.name, seg.start(), p.span, {}});
        table_.record(id, p.span, Access::declare);
        scope_[p.name] = id;
      }
    }
    for (const Stmt* s : seg.stmts) resolve_stmt(*s);
  }

  void resolve_block(const Block& b) {
    for (const auto& s : b.stmts) resolve_stmt(s);
  }

  void resolve_stmt(const Stmt& s) {
    std::visit(overloaded{
                   [&](const VarDecl& v) {
                     resolve_expr(v.value);
                     if (scope_.count(v.name))
                       throw ResolveError(v.name_span, "'" + v.name + "' is already declared in segment '" +
                                                           segment_->name + "'");
                     auto id = table_.add(
                         {v.name, SymbolKind::local, segment_->name, segment_->start(), v.name_span, {}});
                     table_.record(id, v.name_span, Access::write);
                     scope_[v.name] = id;
                   },
                   [&](const GlobalDecl& v) {
                     resolve_expr(v.value);
                     table_.record(globals_.at(v.name), v.name_span, Access::write);
                   },
                   [&](const Assign& v) {
                     resolve_expr(v.value);
                     if (auto it = scope_.find(v.name); it != scope_.end()) {
                       table_.record(it->second, v.name_span, Access::write);
                     } else if (auto g = globals_.find(v.name); g != globals_.end()) {
                       table_.record(g->second, v.name_span, Access::write);
                     } else {
                       throw ResolveError(v.name_span, "assignment to undeclared name '" + v.name +
                                                           "' (declare it with 'var' or 'global')");
                     }
                   },
                   [&](const If& v) {
                     resolve_expr(v.cond);
                     resolve_block(v.then_block);
                     if (v.else_block) resolve_block(*v.else_block);
                   },
                   [&](const While& v) {
                     resolve_expr(v.cond);
                     resolve_block(v.body);
                   },
                   [&](const Repeat& v) {
                     resolve_expr(v.count);
                     resolve_block(v.body);
                   },
                   [&](const After& v) { resolve_expr(v.delay_ms); },  // body is its own segment
                   [&](const Print& v) { resolve_expr(v.value); },
                   [&](const Emit& v) {
                     for (const auto& a : v.args) resolve_expr(a);
                     auto id = event_symbol(v.event, v.event_span);
                     table_.record(id, v.event_span, Access::write);
                     if (auto it = handler_arity_.find(v.event);
                         it != handler_arity_.end() && it->second != v.args.size())
                       throw ResolveError(v.event_span, "event '" + v.event + "' is handled with " +
                                                            std::to_string(it->second) +
                                                            " parameter(s) but emitted with " +
                                                            std::to_string(v.args.size()));
                   },
                   [&](const Return& v) {
                     if (v.value) resolve_expr(*v.value);
                   },
                   [&](const CallStmt& v) { resolve_call(v.call); },
                   [&](const HwWrite& v) {
                     for (const auto& a : v.args) resolve_expr(a);
                     table_.record(device_symbol(v.device, v.device_span), v.device_span, Access::write);
                   },
               },
               s.node);
  }

  std::size_t device_symbol(const std::string& name, const SourceSpan& span) {
    auto it = devices_.find(name);
    if (it != devices_.end()) return it->second;
    auto id = table_.add({name, SymbolKind::hardware_device, {}, {}, span, {}});
    devices_[name] = id;
    return id;
  }

  void resolve_call(const CallExpr& c) {
    for (const auto& a : c.args) resolve_expr(a);
    auto it = functions_.find(c.callee);
    if (it == functions_.end())
      throw ResolveError(c.callee_span, "call to undefined function '" + c.callee + "'");
    if (arity_.at(c.callee) != c.args.size())
      throw ResolveError(c.callee_span, "function '" + c.callee + "' expects " +
                                            std::to_string(arity_.at(c.callee)) + " argument(s), got " +
                                            std::to_string(c.args.size()));
    table_.record(it->second, c.callee_span, Access::call);
  }

  void resolve_expr(const Expr& e) {
    std::visit(overloaded{
                   [&](const NameRef& n) {
                     if (auto it = scope_.find(n.name); it != scope_.end()) {
                       table_.record(it->second, e.span, Access::read);
                     } else if (auto g = globals_.find(n.name); g != globals_.end()) {
                       table_.record(g->second, e.span, Access::read);
                     } else {
                       throw ResolveError(e.span, "use of undeclared name '" + n.name + "' in segment '" +
                                                      segment_->name + "'");
                     }
                   },
                   [&](const HwRead& h) {
                     table_.record(device_symbol(h.device, h.device_span), h.device_span, Access::read);
                   },
                   [&](const CallExpr& c) { resolve_call(c); },
                   [&](const Binary& b) {
                     resolve_expr(*b.lhs);
                     resolve_expr(*b.rhs);
                   },
                   [&](const Unary& u) { resolve_expr(*u.operand); },
                   [](const auto&) {},
               },
               e.node);
  }
};

/// Classifies every name in the program; throws ResolveError on the first
/// undeclared use, duplicate definition, or arity mismatch.
inline SymbolTable resolve_names(const Program& program) { return NameResolver(program).run(); }

}  // namespace flare
