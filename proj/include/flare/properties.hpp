#pragma once

#include <string>
#include <utility>

#include "flare/elements.hpp"
#include "flare/property_set.hpp"
#include "flare/symbols.hpp"

namespace flare {

/// One syntactic access to a name, device or callee.
struct AccessSite {
  std::string name;
  SourceSpan span;
  Access access;
};

/// Classifies a single access relative to the element it occurs in:
/// owned locals are Effects, parameters are Receives (writes to a parameter
/// slot are local Effects), globals and hardware devices are Shares, and a
/// call is a Send of the argument message at the caller.
inline PropertyEntry classify_access(const AccessSite& site, const Element& /*enclosing*/,
                                     const SymbolTable& symbols) {
  const Symbol* sym = symbols.at(site.span.start());
  if (!sym) throw InvariantError("unresolved name '" + site.name + "' at " + to_string(site.span));
  const AccessMode mode = site.access == Access::write ? AccessMode::write : AccessMode::read;
  switch (sym->kind) {
    case SymbolKind::local:
      return {PropertyKind::effect, SubjectKind::local_state, sym->name, mode, site.span};
    case SymbolKind::parameter:
      if (site.access == Access::write)
        return {PropertyKind::effect, SubjectKind::local_state, sym->name, AccessMode::write, site.span};
      return {PropertyKind::receive, SubjectKind::parameter, sym->name, AccessMode::none, site.span};
    case SymbolKind::global:
      return {PropertyKind::share, SubjectKind::global_state, sym->name, mode, site.span};
    case SymbolKind::hardware_device:
      return {PropertyKind::share, SubjectKind::hardware_state, sym->name, mode, site.span};
    case SymbolKind::function:
      return {PropertyKind::send, SubjectKind::message, sym->name, AccessMode::none, site.span};
    case SymbolKind::event_name:
      return {PropertyKind::send, SubjectKind::message, sym->name, AccessMode::none, site.span};
  }
  throw InvariantError("unclassifiable access");
}

/// A value passed from a caller to a callee: the caller Sends a message,
/// the callee Receives it as parameters. Never a Share.
struct CallCrossing {
  PropertyEntry caller_send;
  PropertyEntry callee_receive;
};

inline CallCrossing classify_call_argument(const CallExpr& call, const FuncDef& callee) {
  CallCrossing c{{PropertyKind::send, SubjectKind::message, call.callee, AccessMode::none, call.callee_span},
                 {PropertyKind::receive, SubjectKind::call_trigger, callee.name, AccessMode::none,
                  callee.name_span}};
  if (!callee.params.empty())
    c.callee_receive = {PropertyKind::receive, SubjectKind::parameter, callee.params.front().name,
                        AccessMode::none, callee.params.front().span};
  return c;
}

namespace detail {

class PropertyWalker {
 public:
  PropertyWalker(const Element& element, const ElementTree& tree, const SymbolTable& symbols)
      : element_(element), tree_(tree), symbols_(symbols) {
    const Element* seg = tree.enclosing_segment(element);
    if (seg && seg->segment && seg->segment->func) function_ = seg->segment->func->name;
  }

  PropertySet run() {
    if (element_.kind == ElementKind::segment) {
      header(*element_.segment);
      for (const Stmt* s : element_.segment->stmts) stmt(*s);
    } else if (element_.kind == ElementKind::statement) {
      stmt(*element_.stmt);
    } else {
      throw InvariantError("compute_properties requires a source-derived element; " + element_.id +
                           " is composed");
    }
    return std::move(out_);
  }

 private:
  const Element& element_;
  const ElementTree& tree_;
  const SymbolTable& symbols_;
  std::string function_;
  PropertySet out_;

  void access(const std::string& name, const SourceSpan& span, Access a) {
    out_.add(classify_access({name, span, a}, element_, symbols_));
  }

  void header(const SegmentRef& seg) {
    switch (seg.kind) {
      case SegmentKind::function:
        for (const auto& p : seg.func->params)
          out_.add({PropertyKind::receive, SubjectKind::parameter, p.name, AccessMode::none, p.span});
        if (seg.func->params.empty())
          out_.add({PropertyKind::receive, SubjectKind::call_trigger, seg.func->name, AccessMode::none,
                    seg.func->name_span});
        break;
      case SegmentKind::handler:
        out_.add({PropertyKind::receive, SubjectKind::event_trigger, seg.handler->event, AccessMode::none,
                  seg.handler->event_span});
        for (const auto& p : seg.handler->params)
          out_.add({PropertyKind::receive, SubjectKind::parameter, p.name, AccessMode::none, p.span});
        if (!seg.handler->params.empty())
          out_.add({PropertyKind::receive, SubjectKind::message, seg.handler->event, AccessMode::none,
                    seg.handler->event_span});
        break;
      case SegmentKind::timer:
        out_.add({PropertyKind::receive, SubjectKind::timer_trigger, seg.name, AccessMode::none,
                  seg.after_stmt->span});
        break;
      case SegmentKind::script:
        break;
    }
  }

  void call(const CallExpr& c, bool value_used) {
    if (!c.args.empty())
      out_.add({PropertyKind::send, SubjectKind::message, c.callee, AccessMode::none, c.callee_span});
    if (value_used)
      out_.add({PropertyKind::receive, SubjectKind::message, c.callee, AccessMode::none, c.callee_span});
    for (const auto& a : c.args) expr(a);
  }

  void expr(const Expr& e) {
    std::visit(overloaded{
                   [&](const NameRef& n) { access(n.name, e.span, Access::read); },
                   [&](const HwRead& h) { access(h.device, h.device_span, Access::read); },
                   [&](const CallExpr& c) { call(c, true); },
                   [&](const Binary& b) {
                     expr(*b.lhs);
                     expr(*b.rhs);
                   },
                   [&](const Unary& u) { expr(*u.operand); },
                   [](const auto&) {},
               },
               e.node);
  }

  void block(const Block& b) {
    for (const auto& s : b.stmts) stmt(s);
  }

  void stmt(const Stmt& s) {
    std::visit(overloaded{
                   [&](const VarDecl& v) {
                     access(v.name, v.name_span, Access::write);
                     expr(v.value);
                   },
                   [&](const GlobalDecl& v) {
                     access(v.name, v.name_span, Access::write);
                     expr(v.value);
                   },
                   [&](const Assign& v) {
                     access(v.name, v.name_span, Access::write);
                     expr(v.value);
                   },
                   [&](const If& v) {
                     expr(v.cond);
                     block(v.then_block);
                     if (v.else_block) block(*v.else_block);
                   },
                   [&](const While& v) {
                     expr(v.cond);
                     block(v.body);
                   },
                   [&](const Repeat& v) {
                     expr(v.count);
                     block(v.body);
                   },
                   [&](const After& v) { expr(v.delay_ms); },
                   [&](const Print& v) { expr(v.value); },
                   [&](const Emit& v) {
                     out_.add({PropertyKind::send, SubjectKind::message, v.event, AccessMode::none,
                               v.event_span});
                     for (const auto& a : v.args) expr(a);
                   },
                   [&](const Return& v) {
                     if (v.value) {
                       out_.add({PropertyKind::send, SubjectKind::return_value, function_, AccessMode::none,
                                 s.span});
                       expr(*v.value);
                     }
                   },
                   [&](const CallStmt& v) { call(v.call, false); },
                   [&](const HwWrite& v) {
                     out_.add({PropertyKind::send, SubjectKind::hardware_command, v.device, AccessMode::none,
                               v.device_span});
                     access(v.device, v.device_span, Access::write);
                     for (const auto& a : v.args) expr(a);
                   },
               },
               s.node);
  }
};

}  // namespace detail

/// Receives, Sends, Effects and Shares of a source-derived element.
inline PropertySet compute_properties(const Element& element, const ElementTree& tree,
                                      const SymbolTable& symbols) {
  return detail::PropertyWalker(element, tree, symbols).run();
}

/// Fills `properties` on every source-derived element of the tree.
inline void compute_all_properties(ElementTree& tree, const SymbolTable& symbols) {
  for (const auto& e : tree.elements()) {
    if (!e.source_derived()) continue;
    tree.mutable_at(e.id).properties = compute_properties(e, tree, symbols);
  }
}

/// The four element questions, in order.
inline std::vector<std::string> element_question_stems() {
  return {"What does this element receive?", "What does it send?", "What does it change inside itself?",
          "What does it share?"};
}

}  // namespace flare
