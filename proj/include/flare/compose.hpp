#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "flare/bindings.hpp"
#include "flare/elements.hpp"
#include "flare/property_set.hpp"
#include "flare/symbols.hpp"

namespace flare {

struct CompositionResult {
  Element composite;
  std::vector<std::string> absorbed;            // ids of bindings between distinct members
  std::vector<std::string> external_bindings;   // ids of bindings crossing the new boundary
  std::vector<std::string> promoted;            // globals now confined to the composite
  PropertySet retained;

  // Accounting over the members' entries (before the merge into `retained`).
  std::size_t member_entries = 0;
  std::size_t absorbed_entries = 0;
  std::size_t promoted_entries = 0;
  std::size_t retained_entries = 0;
};

/// Composites that may themselves be composed again.
class CompositeRegistry {
 public:
  void add(const CompositionResult& r) { composites_[r.composite.id] = r.composite; }
  const Element* find(const std::string& id) const {
    auto it = composites_.find(id);
    return it == composites_.end() ? nullptr : &it->second;
  }

 private:
  std::map<std::string, Element> composites_;
};

namespace detail {

class Composer {
 public:
  Composer(const ElementTree& tree, const std::vector<Binding>& bindings, const SymbolTable& symbols,
           const CompositeRegistry* registry)
      : tree_(tree), bindings_(bindings), symbols_(symbols), registry_(registry) {}

  CompositionResult run(const std::vector<std::string>& member_ids, const std::string& name) {
    std::vector<const Element*> members = resolve_members(member_ids);
    CompositionResult r;
    r.composite = make_composite(members, name);

    for (const Element* m : members) {
      auto leaves = expand(*m);
      for (const auto& l : leaves) {
        if (!leaves_.insert(l).second)
          throw CompositionError(m->span, "composition members overlap at element " + l);
        owner_[l] = m->id;
      }
    }

    if (members.size() == 1) {
      // The boundary is unchanged: a singleton composite is the element itself.
      r.retained = members.front()->properties;
      r.member_entries = r.retained_entries = r.retained.size();
      r.composite.properties = r.retained;
      classify_bindings(r);
      return r;
    }

    std::vector<std::pair<const Element*, PropertyEntry>> promoted_raw;
    for (const auto& leaf_id : leaves_) {
      const Element& leaf = tree_.at(leaf_id);
      for (auto kind : kAllPropertyKinds) {
        for (const auto& entry : leaf.properties.list(kind)) {
          ++r.member_entries;
          switch (fate(leaf, entry)) {
            case Fate::absorbed: ++r.absorbed_entries; break;
            case Fate::promoted:
              ++r.promoted_entries;
              promoted_raw.push_back({&leaf, entry});
              break;
            case Fate::retained:
              ++r.retained_entries;
              r.retained.add(entry);
              break;
          }
        }
      }
    }
    for (const auto& [leaf, entry] : promoted_raw) {
      r.retained.add({PropertyKind::effect, SubjectKind::local_state, entry.subject, entry.mode, entry.span});
      if (std::find(r.promoted.begin(), r.promoted.end(), entry.subject) == r.promoted.end())
        r.promoted.push_back(entry.subject);
    }
    r.retained.canonicalize();
    r.composite.properties = r.retained;
    classify_bindings(r);
    return r;
  }

 private:
  enum class Fate { absorbed, promoted, retained };

  const ElementTree& tree_;
  const std::vector<Binding>& bindings_;
  const SymbolTable& symbols_;
  const CompositeRegistry* registry_;
  std::set<std::string> leaves_;
  std::map<std::string, std::string> owner_;  // leaf id -> member id

  const Element* lookup(const std::string& id) const {
    if (const Element* e = tree_.find(id)) return e;
    return registry_ ? registry_->find(id) : nullptr;
  }

  std::vector<const Element*> resolve_members(const std::vector<std::string>& ids) {
    std::vector<const Element*> members;
    std::set<std::string> seen;
    for (const auto& id : ids) {
      const Element* e = lookup(id);
      if (!e) throw CompositionError(tree_.root().span, "unknown element '" + id + "'");
      if (!seen.insert(id).second) throw CompositionError(e->span, "duplicate member '" + id + "'");
      if (e->kind == ElementKind::system)
        throw CompositionError(e->span, "the system element cannot be a composition member");
      members.push_back(e);
    }
    if (members.empty()) throw CompositionError(tree_.root().span, "composition needs at least one member");
    for (const Element* m : members) {
      if (m->scale != members.front()->scale)
        throw CompositionError(m->span, "members have different scales (" + m->scale.name() + " vs " +
                                            members.front()->scale.name() + ")");
      if (m->parent != members.front()->parent)
        throw CompositionError(m->span, "members have different parents");
    }
    std::sort(members.begin(), members.end(),
              [](const Element* a, const Element* b) { return a->span.start() < b->span.start(); });
    return members;
  }

  std::vector<std::string> expand(const Element& e) const {
    if (e.source_derived()) return {e.id};
    std::vector<std::string> out;
    for (const auto& c : e.constituents) {
      const Element* ce = lookup(c);
      if (!ce) throw InvariantError("dangling constituent " + c);
      auto sub = expand(*ce);
      out.insert(out.end(), sub.begin(), sub.end());
    }
    return out;
  }

  Element make_composite(const std::vector<const Element*>& members, const std::string& name) const {
    Element c;
    c.kind = ElementKind::composite;
    c.name = name;
    int max_level = 0;
    SourceSpan span = members.front()->span;
    for (const Element* m : members) {
      max_level = std::max(max_level, m->scale.level);
      if (m->span.start() < span.start()) {
        span.start_line = m->span.start_line;
        span.start_col = m->span.start_col;
      }
      if (span.end() < m->span.end()) {
        span.end_line = m->span.end_line;
        span.end_col = m->span.end_col;
      }
      c.constituents.push_back(m->id);
      c.regions.insert(c.regions.end(), m->regions.begin(), m->regions.end());
    }
    c.scale = Scale{max_level + 1};
    c.span = span;
    c.parent = members.front()->parent;
    c.id = "composite:" + span.file + ":" + std::to_string(span.start_line) + ":" +
           std::to_string(span.start_col) + ":" + name;
    return c;
  }

  bool inside(const Element& e) const { return tree_.inside(e, leaves_); }

  const Element* owning_function(const Element& e) const {
    const Element* seg = tree_.enclosing_segment(e);
    if (seg && seg->segment->kind == SegmentKind::function) return seg;
    return nullptr;
  }

  // Callers are read off the Branch bindings that target the function segment.
  bool all_callers_inside(const Element& fn) const {
    bool any = false;
    for (const auto& b : bindings_) {
      if (b.dimension != Dimension::causal_temporal || b.subtype != CtSubtype::branch || b.to != fn.id) continue;
      const Element& site = tree_.at(b.from);
      if (site.kind != ElementKind::statement) continue;
      any = true;
      if (!inside(site)) return false;
    }
    return any;
  }

  bool callee_side_absorbed(const Element& leaf) const {
    const Element* fn = owning_function(leaf);
    return fn && inside(*fn) && all_callers_inside(*fn);
  }

  bool global_confined(const std::string& name) const {
    const Symbol* g = symbols_.find(name, SymbolKind::global);
    if (!g) return false;
    for (const auto& ref : g->refs) {
      if (ref.access != Access::read && ref.access != Access::write) continue;
      if (!inside(tree_.element_at(ref.span.start()))) return false;
    }
    return true;
  }

  Fate fate(const Element& leaf, const PropertyEntry& e) const {
    switch (e.kind) {
      case PropertyKind::effect: return Fate::retained;
      case PropertyKind::share:
        if (e.subject_kind == SubjectKind::global_state && global_confined(e.subject)) return Fate::promoted;
        return Fate::retained;
      case PropertyKind::receive:
        switch (e.subject_kind) {
          case SubjectKind::parameter:
          case SubjectKind::call_trigger:
            return callee_side_absorbed(leaf) ? Fate::absorbed : Fate::retained;
          case SubjectKind::message:
            if (const Element* fn = tree_.function_segment(e.subject)) return inside(*fn) ? Fate::absorbed : Fate::retained;
            return Fate::retained;  // handler payloads come from the dispatcher
          default: return Fate::retained;
        }
      case PropertyKind::send:
        switch (e.subject_kind) {
          case SubjectKind::return_value: return callee_side_absorbed(leaf) ? Fate::absorbed : Fate::retained;
          case SubjectKind::message: {
            if (const Element* fn = tree_.function_segment(e.subject)) return inside(*fn) ? Fate::absorbed : Fate::retained;
            auto handlers = tree_.handlers_for(e.subject);
            if (handlers.empty()) return Fate::retained;
            for (const Element* h : handlers)
              if (!inside(*h)) return Fate::retained;
            return Fate::absorbed;
          }
          default: return Fate::retained;
        }
    }
    return Fate::retained;
  }

  std::string member_of(const std::string& element_id) const {
    const Element* e = tree_.find(element_id);
    for (const Element* cur = e; cur; cur = tree_.parent(*cur))
      if (auto it = owner_.find(cur->id); it != owner_.end()) return it->second;
    return {};
  }

  void classify_bindings(CompositionResult& r) const {
    for (const auto& b : bindings_) {
      std::string from = member_of(b.from);
      std::string to = member_of(b.to);
      if (!from.empty() && !to.empty()) {
        if (from != to) r.absorbed.push_back(b.id);
      } else if (!from.empty() || !to.empty()) {
        r.external_bindings.push_back(b.id);
      }
    }
  }
};

}  // namespace detail

/// Treats a bound set of elements as one element at the next scale. Members
/// must share a scale and a parent. With two or more members, send/receive
/// pairs matched inside the set are absorbed, globals touched only inside the
/// set become Effects, and everything else is retained.
inline CompositionResult compose(const ElementTree& tree, const std::vector<Binding>& bindings,
                                 const SymbolTable& symbols, const std::vector<std::string>& member_ids,
                                 const std::string& name, const CompositeRegistry* registry = nullptr) {
  return detail::Composer(tree, bindings, symbols, registry).run(member_ids, name);
}

// ------------------------------------------------------------ flatten oracle

namespace detail {

/// Recomputes a region's four properties straight from the syntax tree,
/// treating the whole region as one boundary. Shares no code with the
/// per-element property walk or the composer.
class FlattenOracle {
 public:
  FlattenOracle(const Program& program, const std::vector<std::string>& member_ids) : program_(program) {
    for (const auto& id : member_ids) members_.insert(parse_member(id));
    multi_ = member_ids.size() >= 2;
  }

  PropertySet run() {
    if (members_.empty()) return {};
    scan_program();
    if (found_ != members_.size()) throw CompositionError({program_.file, 1, 1, 1, 1}, "unknown member id");
    PropertySet out;
    std::vector<Raw> promoted;
    for (const auto& raw : raw_) {
      switch (decide(raw)) {
        case Fate::absorbed: break;
        case Fate::promoted: promoted.push_back(raw); break;
        case Fate::retained: out.add(raw.entry); break;
      }
    }
    for (const auto& raw : promoted)
      out.add({PropertyKind::effect, SubjectKind::local_state, raw.entry.subject, raw.entry.mode, raw.entry.span});
    out.canonicalize();
    return out;
  }

 private:
  enum class Fate { absorbed, promoted, retained };

  struct Raw {
    PropertyEntry entry;
    std::string function;  // enclosing function, empty outside functions
  };

  struct Ctx {
    std::string function;        // function name when inside a function body
    std::set<std::string> params;
    std::set<std::string> locals;
  };

  const Program& program_;
  using Key = std::pair<bool, SourcePos>;  // (is segment, start)
  std::set<Key> members_;
  bool multi_ = false;
  std::size_t found_ = 0;
  int region_depth_ = 0;

  std::vector<Raw> raw_;
  std::set<std::string> member_functions_;
  std::set<std::string> member_handlers_;     // by start position text
  std::map<std::string, int> handler_count_;  // event -> total handlers
  std::map<std::string, int> member_handler_count_;
  std::map<std::string, int> calls_total_;
  std::map<std::string, int> calls_outside_;
  std::set<std::string> globals_touched_outside_;

  static Key parse_member(const std::string& id) {
    auto last = id.rfind(':');
    auto prev = last == std::string::npos || last == 0 ? std::string::npos : id.rfind(':', last - 1);
    bool segment = id.rfind("segment:", 0) == 0;
    if (prev == std::string::npos || (!segment && id.rfind("statement:", 0) != 0))
      throw CompositionError({}, "malformed leaf element id '" + id + "'");
    return {segment, {std::stoi(id.substr(prev + 1, last - prev - 1)), std::stoi(id.substr(last + 1))}};
  }

  bool in_region() const { return region_depth_ > 0; }

  void record(PropertyEntry e, const Ctx& ctx) {
    if (in_region()) raw_.push_back({std::move(e), ctx.function});
  }

  // Enters the region when `start` names a member.
  template <typename F>
  void maybe_region(bool segment, SourcePos start, F&& body) {
    bool member = members_.count({segment, start}) > 0;
    if (member) {
      ++found_;
      ++region_depth_;
    }
    body();
    if (member) --region_depth_;
  }

  void scan_program() {
    for (const auto& item : program_.items)
      if (auto* h = std::get_if<Handler>(&item.node)) ++handler_count_[h->event];

    // Top-level script: one segment identified by its first statement.
    Ctx script;
    std::vector<const Stmt*> top;
    for (const auto& item : program_.items)
      if (auto* s = std::get_if<Stmt>(&item.node)) top.push_back(s);
    if (!top.empty()) {
      maybe_region(true, top.front()->span.start(), [&] {
        for (const Stmt* s : top) stmt(*s, script);
      });
    }

    for (const auto& item : program_.items) {
      if (auto* f = std::get_if<FuncDef>(&item.node)) {
        Ctx ctx;
        ctx.function = f->name;
        for (const auto& p : f->params) ctx.params.insert(p.name);
        maybe_region(true, item.span.start(), [&] {
          if (in_region() && members_.count({true, item.span.start()})) member_functions_.insert(f->name);
          for (const auto& p : f->params)
            record({PropertyKind::receive, SubjectKind::parameter, p.name, AccessMode::none, p.span}, ctx);
          if (f->params.empty())
            record({PropertyKind::receive, SubjectKind::call_trigger, f->name, AccessMode::none, f->name_span}, ctx);
          for (const auto& s : f->body.stmts) stmt(s, ctx);
        });
      } else if (auto* h = std::get_if<Handler>(&item.node)) {
        Ctx ctx;
        for (const auto& p : h->params) ctx.params.insert(p.name);
        maybe_region(true, item.span.start(), [&] {
          if (in_region() && members_.count({true, item.span.start()})) ++member_handler_count_[h->event];
          record({PropertyKind::receive, SubjectKind::event_trigger, h->event, AccessMode::none, h->event_span}, ctx);
          for (const auto& p : h->params)
            record({PropertyKind::receive, SubjectKind::parameter, p.name, AccessMode::none, p.span}, ctx);
          if (!h->params.empty())
            record({PropertyKind::receive, SubjectKind::message, h->event, AccessMode::none, h->event_span}, ctx);
          for (const auto& s : h->body.stmts) stmt(s, ctx);
        });
      }
    }
  }

  void name_access(const std::string& name, const SourceSpan& span, bool write, const Ctx& ctx) {
    AccessMode mode = write ? AccessMode::write : AccessMode::read;
    if (ctx.locals.count(name)) {
      record({PropertyKind::effect, SubjectKind::local_state, name, mode, span}, ctx);
    } else if (ctx.params.count(name)) {
      if (write) record({PropertyKind::effect, SubjectKind::local_state, name, AccessMode::write, span}, ctx);
      else record({PropertyKind::receive, SubjectKind::parameter, name, AccessMode::none, span}, ctx);
    } else {
      if (!in_region()) globals_touched_outside_.insert(name);
      record({PropertyKind::share, SubjectKind::global_state, name, mode, span}, ctx);
    }
  }

  void call(const CallExpr& c, bool value_used, Ctx& ctx) {
    ++calls_total_[c.callee];
    if (!in_region()) ++calls_outside_[c.callee];
    if (!c.args.empty()) record({PropertyKind::send, SubjectKind::message, c.callee, AccessMode::none, c.callee_span}, ctx);
    if (value_used) record({PropertyKind::receive, SubjectKind::message, c.callee, AccessMode::none, c.callee_span}, ctx);
    for (const auto& a : c.args) expr(a, ctx);
  }

  void expr(const Expr& e, Ctx& ctx) {
    if (auto* n = std::get_if<NameRef>(&e.node)) {
      name_access(n->name, e.span, false, ctx);
    } else if (auto* h = std::get_if<HwRead>(&e.node)) {
      record({PropertyKind::share, SubjectKind::hardware_state, h->device, AccessMode::read, h->device_span}, ctx);
    } else if (auto* c = std::get_if<CallExpr>(&e.node)) {
      call(*c, true, ctx);
    } else if (auto* b = std::get_if<Binary>(&e.node)) {
      expr(*b->lhs, ctx);
      expr(*b->rhs, ctx);
    } else if (auto* u = std::get_if<Unary>(&e.node)) {
      expr(*u->operand, ctx);
    }
  }

  void stmts(const Block& b, Ctx& ctx) {
    for (const auto& s : b.stmts) stmt(s, ctx);
  }

  void stmt(const Stmt& s, Ctx& ctx) {
    maybe_region(false, s.span.start(), [&] { stmt_body(s, ctx); });
  }

  void stmt_body(const Stmt& s, Ctx& ctx) {
    if (auto* v = std::get_if<VarDecl>(&s.node)) {
      ctx.locals.insert(v->name);
      name_access(v->name, v->name_span, true, ctx);
      expr(v->value, ctx);
    } else if (auto* g = std::get_if<GlobalDecl>(&s.node)) {
      if (!in_region()) globals_touched_outside_.insert(g->name);
      record({PropertyKind::share, SubjectKind::global_state, g->name, AccessMode::write, g->name_span}, ctx);
      expr(g->value, ctx);
    } else if (auto* a = std::get_if<Assign>(&s.node)) {
      name_access(a->name, a->name_span, true, ctx);
      expr(a->value, ctx);
    } else if (auto* i = std::get_if<If>(&s.node)) {
      expr(i->cond, ctx);
      stmts(i->then_block, ctx);
      if (i->else_block) stmts(*i->else_block, ctx);
    } else if (auto* w = std::get_if<While>(&s.node)) {
      expr(w->cond, ctx);
      stmts(w->body, ctx);
    } else if (auto* r = std::get_if<Repeat>(&s.node)) {
      expr(r->count, ctx);
      stmts(r->body, ctx);
    } else if (auto* af = std::get_if<After>(&s.node)) {
      expr(af->delay_ms, ctx);
      // The body is a segment of its own with a fresh scope, outside any
      // region that contains the `after` statement.
      int saved = region_depth_;
      region_depth_ = 0;
      Ctx timer;
      maybe_region(true, af->body.span.start(), [&] {
        record({PropertyKind::receive, SubjectKind::timer_trigger,
                "after@" + std::to_string(s.span.start_line) + ":" + std::to_string(s.span.start_col),
                AccessMode::none, s.span},
               timer);
        stmts(af->body, timer);
      });
      region_depth_ = saved;
    } else if (auto* p = std::get_if<Print>(&s.node)) {
      expr(p->value, ctx);
    } else if (auto* e = std::get_if<Emit>(&s.node)) {
      record({PropertyKind::send, SubjectKind::message, e->event, AccessMode::none, e->event_span}, ctx);
      for (const auto& arg : e->args) expr(arg, ctx);
    } else if (auto* ret = std::get_if<Return>(&s.node)) {
      if (ret->value) {
        record({PropertyKind::send, SubjectKind::return_value, ctx.function, AccessMode::none, s.span}, ctx);
        expr(*ret->value, ctx);
      }
    } else if (auto* cs = std::get_if<CallStmt>(&s.node)) {
      call(cs->call, false, ctx);
    } else if (auto* hw = std::get_if<HwWrite>(&s.node)) {
      record({PropertyKind::send, SubjectKind::hardware_command, hw->device, AccessMode::none, hw->device_span}, ctx);
      record({PropertyKind::share, SubjectKind::hardware_state, hw->device, AccessMode::write, hw->device_span}, ctx);
      for (const auto& arg : hw->args) expr(arg, ctx);
    }
  }

  bool function_is_member(const std::string& fn) const { return member_functions_.count(fn) > 0; }

  bool callee_side_absorbed(const std::string& fn) const {
    if (fn.empty() || !function_is_member(fn)) return false;
    auto total = calls_total_.find(fn);
    if (total == calls_total_.end() || total->second == 0) return false;
    auto outside = calls_outside_.find(fn);
    return outside == calls_outside_.end() || outside->second == 0;
  }

  bool is_function(const std::string& name) const { return program_.find_function(name) != nullptr; }

  Fate decide(const Raw& raw) const {
    if (!multi_) return Fate::retained;
    const PropertyEntry& e = raw.entry;
    switch (e.kind) {
      case PropertyKind::effect: return Fate::retained;
      case PropertyKind::share:
        if (e.subject_kind == SubjectKind::global_state && !globals_touched_outside_.count(e.subject))
          return Fate::promoted;
        return Fate::retained;
      case PropertyKind::receive:
        if (e.subject_kind == SubjectKind::parameter || e.subject_kind == SubjectKind::call_trigger)
          return callee_side_absorbed(raw.function) ? Fate::absorbed : Fate::retained;
        if (e.subject_kind == SubjectKind::message && is_function(e.subject))
          return function_is_member(e.subject) ? Fate::absorbed : Fate::retained;
        return Fate::retained;
      case PropertyKind::send:
        if (e.subject_kind == SubjectKind::return_value)
          return callee_side_absorbed(raw.function) ? Fate::absorbed : Fate::retained;
        if (e.subject_kind == SubjectKind::message) {
          if (is_function(e.subject)) return function_is_member(e.subject) ? Fate::absorbed : Fate::retained;
          auto total = handler_count_.find(e.subject);
          if (total == handler_count_.end()) return Fate::retained;
          auto inside = member_handler_count_.find(e.subject);
          return inside != member_handler_count_.end() && inside->second == total->second ? Fate::absorbed
                                                                                           : Fate::retained;
        }
        return Fate::retained;
    }
    return Fate::retained;
  }
};

}  // namespace detail

/// Independent recomputation of a member set's composite PropertySet from
/// the syntax tree. Member ids are leaf element ids (statements or segments).
inline PropertySet flatten_oracle(const Program& program, const std::vector<std::string>& member_ids) {
  return detail::FlattenOracle(program, member_ids).run();
}

}  // namespace flare
