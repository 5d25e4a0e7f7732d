#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "flare/elements.hpp"
#include "flare/properties.hpp"
#include "flare/unparse.hpp"

namespace flare {

enum class Dimension { causal_temporal, communicative };
enum class CtSubtype { sequential, branch, event };
enum class CommKind { send_receive, share };

inline const char* to_string(Dimension d) {
  return d == Dimension::causal_temporal ? "causal-temporal" : "communicative";
}
inline const char* to_string(CtSubtype s) {
  switch (s) {
    case CtSubtype::sequential: return "sequential";
    case CtSubtype::branch: return "branch";
    case CtSubtype::event: return "event";
  }
  return "?";
}
inline std::optional<CtSubtype> parse_ct_subtype(const std::string& s) {
  if (s == "sequential") return CtSubtype::sequential;
  if (s == "branch") return CtSubtype::branch;
  if (s == "event") return CtSubtype::event;
  return std::nullopt;
}
inline const char* to_string(CommKind k) { return k == CommKind::send_receive ? "send-receive" : "share"; }

/// Points at one entry of one element's PropertySet.
struct EntryRef {
  std::string element;
  PropertyKind kind;
  SubjectKind subject_kind;
  std::string subject;
  AccessMode mode = AccessMode::none;

  friend bool operator==(const EntryRef&, const EntryRef&) = default;
};

struct CommPayload {
  CommKind kind;
  EntryRef from_entry;
  EntryRef to_entry;
};

struct Binding {
  std::string id;
  std::string from;
  std::string to;
  Dimension dimension;
  std::optional<CtSubtype> subtype;        // causal-temporal only
  std::optional<CommPayload> payload;      // communicative only
  std::optional<SourceSpan> condition;     // branch on if/while/repeat only
  std::string condition_text;
  SourceSpan evidence;
};

struct Warning {
  std::string severity;  // "warning" or "note"
  std::string code;
  std::string message;
  SourceSpan span;
  std::string element;
};

struct CausalTemporalResult {
  std::vector<Binding> bindings;
  std::vector<Warning> warnings;
};

namespace detail {

class CausalTemporalExtractor {
 public:
  explicit CausalTemporalExtractor(const ElementTree& tree) : tree_(tree) {}

  CausalTemporalResult run() {
    std::set<std::string> emitted;
    for (const Element* seg : tree_.segments()) collect_emits(seg->segment->stmts, emitted);

    for (const Element* seg : tree_.segments()) {
      const SegmentRef& ref = *seg->segment;
      if (ref.kind == SegmentKind::handler) {
        add(tree_.root().id, seg->id, CtSubtype::event, ref.handler->event_span);
        if (!emitted.count(ref.handler->event))
          out_.warnings.push_back({"note", "external-only-handler",
                                   "event '" + ref.handler->event +
                                       "' is never emitted by the program; " + seg->name +
                                       " runs only on external stimuli",
                                   ref.handler->event_span, seg->id});
      }
      sequence(ref.stmts);
    }
    return std::move(out_);
  }

 private:
  const ElementTree& tree_;
  CausalTemporalResult out_;
  std::set<std::tuple<std::string, std::string, CtSubtype>> seen_;

  void collect_emits(const std::vector<const Stmt*>& stmts, std::set<std::string>& emitted) {
    for (const Stmt* s : stmts) {
      if (auto* e = std::get_if<Emit>(&s->node)) emitted.insert(e->event);
      for (const Block* b : inline_blocks(*s)) {
        std::vector<const Stmt*> inner;
        for (const auto& st : b->stmts) inner.push_back(&st);
        collect_emits(inner, emitted);
      }
    }
  }

  void add(const std::string& from, const std::string& to, CtSubtype subtype, const SourceSpan& evidence,
           const Expr* condition = nullptr) {
    if (!seen_.insert({from, to, subtype}).second) return;
    Binding b;
    b.from = from;
    b.to = to;
    b.dimension = Dimension::causal_temporal;
    b.subtype = subtype;
    b.evidence = evidence;
    if (condition) {
      b.condition = condition->span;
      b.condition_text = detail::unparse_expr(*condition);
    }
    out_.bindings.push_back(std::move(b));
  }

  void sequence(const std::vector<const Stmt*>& stmts) {
    for (std::size_t i = 0; i < stmts.size(); ++i) {
      statement(*stmts[i]);
      if (i + 1 < stmts.size())
        add(tree_.element_of(*stmts[i]).id, tree_.element_of(*stmts[i + 1]).id, CtSubtype::sequential,
            stmts[i + 1]->span);
    }
  }

  void sequence(const Block& b) {
    std::vector<const Stmt*> stmts;
    for (const auto& s : b.stmts) stmts.push_back(&s);
    sequence(stmts);
  }

  void enter(const Stmt& s, const Block& body, const Expr& condition) {
    if (!body.stmts.empty())
      add(tree_.element_of(s).id, tree_.element_of(body.stmts.front()).id, CtSubtype::branch,
          condition.span, &condition);
  }

  void statement(const Stmt& s) {
    const std::string self = tree_.element_of(s).id;
    for_each_own_expr(s, [&](const Expr& root) {
      walk_expr(root, [&](const Expr& e) {
        if (auto* c = std::get_if<CallExpr>(&e.node)) call(self, *c);
      });
    });
    std::visit(overloaded{
                   [&](const If& v) {
                     enter(s, v.then_block, v.cond);
                     if (v.else_block) enter(s, *v.else_block, v.cond);
                     sequence(v.then_block);
                     if (v.else_block) sequence(*v.else_block);
                   },
                   [&](const While& v) {
                     enter(s, v.body, v.cond);
                     sequence(v.body);
                   },
                   [&](const Repeat& v) {
                     enter(s, v.body, v.count);
                     sequence(v.body);
                   },
                   [&](const After& v) {
                     add(self, element_id(Scale::segment(), v.body.span), CtSubtype::event, s.span);
                   },
                   [&](const Emit& v) {
                     auto handlers = tree_.handlers_for(v.event);
                     if (handlers.empty())
                       out_.warnings.push_back({"warning", "unbound-event",
                                                "event '" + v.event + "' is emitted but has no handler",
                                                v.event_span, self});
                     for (const Element* h : handlers) add(self, h->id, CtSubtype::event, v.event_span);
                   },
                   [&](const CallStmt& v) { call(self, v.call); },
                   [](const auto&) {},
               },
               s.node);
  }

  void call(const std::string& site, const CallExpr& c) {
    const Element* callee = tree_.function_segment(c.callee);
    if (!callee) throw InvariantError("call to unknown function '" + c.callee + "'");
    add(site, callee->id, CtSubtype::branch, c.callee_span);
  }
};

}  // namespace detail

/// Control bindings: Sequential between adjacent statements of a block, Branch
/// from `if`/`while`/`repeat` into their bodies and from call sites to callees,
/// Event from registrations, `after` statements and `emit` sites to the
/// segments the runtime dispatches. Handler registrations originate at the
/// system element, which stands for the dispatcher.
inline CausalTemporalResult extract_causal_temporal(const ElementTree& tree) {
  return detail::CausalTemporalExtractor(tree).run();
}

/// Data bindings between segments, read off the PropertySets alone.
inline std::vector<Binding> extract_communicative(const ElementTree& tree) {
  std::vector<Binding> out;
  auto segs = tree.segments();

  auto ref = [](const Element& e, const PropertyEntry& p) {
    return EntryRef{e.id, p.kind, p.subject_kind, p.subject, p.mode};
  };
  auto add = [&](const Element& from, const Element& to, CommKind kind, const PropertyEntry& fe,
                 const PropertyEntry& te, const SourceSpan& evidence) {
    Binding b;
    b.from = from.id;
    b.to = to.id;
    b.dimension = Dimension::communicative;
    b.payload = CommPayload{kind, ref(from, fe), ref(to, te)};
    b.evidence = evidence;
    out.push_back(std::move(b));
  };

  for (const Element* a : segs) {
    const PropertySet& props = a->properties;
    for (const auto& send : props.sends) {
      if (send.subject_kind != SubjectKind::message) continue;
      if (const Element* callee = tree.function_segment(send.subject)) {
        if (callee == a) continue;
        for (const auto& r : callee->properties.receives)
          if (r.subject_kind == SubjectKind::parameter)
            add(*a, *callee, CommKind::send_receive, send, r, send.span);
        continue;
      }
      for (const Element* h : tree.handlers_for(send.subject)) {
        if (h == a) continue;
        if (const auto* r = h->properties.find(PropertyKind::receive, SubjectKind::message, send.subject))
          add(*a, *h, CommKind::send_receive, send, *r, send.span);
      }
    }
    for (const auto& recv : props.receives) {
      if (recv.subject_kind != SubjectKind::message) continue;
      const Element* callee = tree.function_segment(recv.subject);
      if (!callee || callee == a) continue;
      if (const auto* ret = callee->properties.find(PropertyKind::send, SubjectKind::return_value, recv.subject))
        add(*callee, *a, CommKind::send_receive, *ret, recv, recv.span);
    }
  }

  // Shares: one binding per unordered pair of segments touching the same subject.
  std::vector<std::pair<SubjectKind, std::string>> subjects;
  for (const Element* a : segs)
    for (const auto& s : a->properties.shares) {
      std::pair key{s.subject_kind, s.subject};
      if (std::find(subjects.begin(), subjects.end(), key) == subjects.end()) subjects.push_back(key);
    }
  for (const auto& [kind, name] : subjects) {
    std::vector<std::pair<const Element*, const PropertyEntry*>> accessors;
    for (const Element* a : segs)
      if (const auto* e = a->properties.find(PropertyKind::share, kind, name)) accessors.push_back({a, e});
    for (std::size_t i = 0; i < accessors.size(); ++i)
      for (std::size_t j = i + 1; j < accessors.size(); ++j)
        add(*accessors[i].first, *accessors[j].first, CommKind::share, *accessors[i].second,
            *accessors[j].second, accessors[j].second->span);
  }
  return out;
}

/// Assigns ids `b0`, `b1`, ... in list order.
inline void number_bindings(std::vector<Binding>& bindings) {
  for (std::size_t i = 0; i < bindings.size(); ++i) bindings[i].id = "b" + std::to_string(i);
}

// ---------------------------------------------------------------- value chains

/// A value returned by `source` that a segment forwards as an argument to `sink`.
struct ValueChain {
  std::string source;  // function segment id
  std::string via;     // segment id that relays the value
  std::string sink;    // function segment id
  std::string variable;  // relaying local, empty for direct nesting
};

namespace detail {

inline void calls_in(const Expr& e, std::set<std::string>& out) {
  walk_expr(e, [&](const Expr& x) {
    if (auto* c = std::get_if<CallExpr>(&x.node)) out.insert(c->callee);
  });
}

class ValueChainFinder {
 public:
  ValueChainFinder(const ElementTree& tree, const Element& seg) : tree_(tree), seg_(seg) {}

  void run(std::vector<ValueChain>& out) {
    out_ = &out;
    for (const Stmt* s : seg_.segment->stmts) stmt(*s);
  }

 private:
  const ElementTree& tree_;
  const Element& seg_;
  std::vector<ValueChain>* out_ = nullptr;
  std::map<std::string, std::set<std::string>> origin_;  // local -> functions whose result it holds
  std::set<std::tuple<std::string, std::string, std::string>> seen_;

  void assign(const std::string& name, const Expr& value) {
    std::set<std::string> src;
    calls_in(value, src);
    walk_expr(value, [&](const Expr& x) {
      if (auto* n = std::get_if<NameRef>(&x.node))
        if (auto it = origin_.find(n->name); it != origin_.end()) src.insert(it->second.begin(), it->second.end());
    });
    if (!src.empty()) origin_[name].insert(src.begin(), src.end());
  }

  void sink_call(const CallExpr& c) {
    const Element* sink = tree_.function_segment(c.callee);
    for (const auto& arg : c.args) {
      walk_expr(arg, [&](const Expr& x) {
        if (auto* n = std::get_if<NameRef>(&x.node)) {
          if (auto it = origin_.find(n->name); it != origin_.end())
            for (const auto& src : it->second) emit(src, sink, n->name);
        } else if (auto* inner = std::get_if<CallExpr>(&x.node)) {
          emit(inner->callee, sink, "");
        }
      });
    }
  }

  void emit(const std::string& source_fn, const Element* sink, const std::string& variable) {
    const Element* source = tree_.function_segment(source_fn);
    if (!source || !sink || source == sink) return;
    if (!seen_.insert({source->id, sink->id, variable}).second) return;
    out_->push_back({source->id, seg_.id, sink->id, variable});
  }

  void exprs(const Expr& e) {
    walk_expr(e, [&](const Expr& x) {
      if (auto* c = std::get_if<CallExpr>(&x.node)) sink_call(*c);
    });
  }

  void stmt(const Stmt& s) {
    for_each_own_expr(s, [&](const Expr& e) { exprs(e); });
    if (auto* c = std::get_if<CallStmt>(&s.node)) sink_call(c->call);
    if (auto* v = std::get_if<VarDecl>(&s.node)) assign(v->name, v->value);
    if (auto* v = std::get_if<Assign>(&s.node)) assign(v->name, v->value);
    for (const Block* b : inline_blocks(s))
      for (const auto& inner : b->stmts) stmt(inner);
  }
};

}  // namespace detail

/// Transitive segment-to-segment value flow relayed through an orchestrating
/// segment (e.g. a handler that feeds one function's result into another).
inline std::vector<ValueChain> value_chains(const ElementTree& tree) {
  std::vector<ValueChain> out;
  for (const Element* seg : tree.segments()) detail::ValueChainFinder(tree, *seg).run(out);
  return out;
}

// -------------------------------------------------------------- question stems

inline std::vector<std::string> question_stems(const Binding& b) {
  if (b.dimension == Dimension::communicative)
    return {"What does this receive?", "What does it send?", "What do these share?"};
  switch (*b.subtype) {
    case CtSubtype::sequential: return {"What happens next?", "What runs after this?"};
    case CtSubtype::branch: return {"Under what conditions does this run?", "How many times?"};
    case CtSubtype::event: return {"What triggers this?", "When does this fire?"};
  }
  return {};
}

inline std::vector<std::string> question_stems(const Element&) { return element_question_stems(); }

}  // namespace flare
