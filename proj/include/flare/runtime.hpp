#pragma once

#include <cstdint>
#include <deque>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "flare/ast.hpp"
#include "flare/bindings.hpp"
#include "flare/symbols.hpp"

namespace flare {

class RuntimeError : public Error {
 public:
  using Error::Error;
  const char* category() const override { return "runtime error"; }
};

// --------------------------------------------------------------------- values

struct None {
  friend bool operator==(None, None) { return true; }
};

using Value = std::variant<None, std::int64_t, std::string, bool>;

inline std::string display(const Value& v) {
  return std::visit(overloaded{
                        [](None) -> std::string { return "none"; },
                        [](std::int64_t i) { return std::to_string(i); },
                        [](const std::string& s) { return s; },
                        [](bool b) -> std::string { return b ? "true" : "false"; },
                    },
                    v);
}

inline const char* type_name(const Value& v) {
  switch (v.index()) {
    case 0: return "none";
    case 1: return "int";
    case 2: return "string";
    default: return "bool";
  }
}

inline nlohmann::ordered_json value_to_json(const Value& v) {
  return std::visit(overloaded{
                        [](None) { return nlohmann::ordered_json(nullptr); },
                        [](std::int64_t i) { return nlohmann::ordered_json(i); },
                        [](const std::string& s) { return nlohmann::ordered_json(s); },
                        [](bool b) { return nlohmann::ordered_json(b); },
                    },
                    v);
}

inline Value value_from_json(const nlohmann::json& j) {
  if (j.is_boolean()) return j.get<bool>();
  if (j.is_number_integer()) return j.get<std::int64_t>();
  if (j.is_string()) return j.get<std::string>();
  if (j.is_null()) return None{};
  throw std::invalid_argument("unsupported event argument: " + j.dump());
}

// -------------------------------------------------------------- event script

struct ScriptEvent {
  std::int64_t t = 0;
  std::string event;
  std::vector<Value> args;
};

/// External stimuli: initial hardware registers plus timed events.
struct EventScript {
  std::map<std::string, std::int64_t> hardware;
  std::vector<ScriptEvent> events;
};

class ScriptError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Accepts `[{"hw": {...}}?, {"t": ms, "event": name, "args": [...]}, ...]`.
inline EventScript parse_event_script(const nlohmann::json& j) {
  if (!j.is_array()) throw ScriptError("event script must be a JSON array");
  EventScript script;
  std::int64_t last = 0;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto& item = j[i];
    if (!item.is_object()) throw ScriptError("event script entry " + std::to_string(i) + " is not an object");
    if (item.contains("hw")) {
      if (i != 0) throw ScriptError("the \"hw\" preamble must be the first entry");
      for (const auto& [dev, val] : item["hw"].items()) {
        if (!val.is_number_integer()) throw ScriptError("hardware register '" + dev + "' must be an integer");
        script.hardware[dev] = val.get<std::int64_t>();
      }
      continue;
    }
    if (!item.contains("t") || !item["t"].is_number_integer() || !item.contains("event") ||
        !item["event"].is_string())
      throw ScriptError("event script entry " + std::to_string(i) + " needs integer \"t\" and string \"event\"");
    ScriptEvent e;
    e.t = item["t"].get<std::int64_t>();
    e.event = item["event"].get<std::string>();
    if (e.t < 0) throw ScriptError("event times must be non-negative");
    if (e.t < last) throw ScriptError("event times must be non-decreasing");
    last = e.t;
    if (item.contains("args")) {
      if (!item["args"].is_array()) throw ScriptError("\"args\" must be an array");
      try {
        for (const auto& a : item["args"]) e.args.push_back(value_from_json(a));
      } catch (const std::invalid_argument& ex) {
        throw ScriptError(ex.what());
      }
    }
    script.events.push_back(std::move(e));
  }
  return script;
}

inline EventScript load_event_script(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScriptError("cannot open event script '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& ex) {
    throw ScriptError("malformed event script '" + path + "': " + ex.what());
  }
  return parse_event_script(j);
}

// ---------------------------------------------------------------------- trace

enum class StopReason { idle, step_limit, runtime_error };

inline const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::idle: return "idle";
    case StopReason::step_limit: return "step_limit";
    case StopReason::runtime_error: return "runtime_error";
  }
  return "?";
}

struct TraceEvent {
  std::string type;  // start exec transfer dispatch output hw_write clock_advance stop
  std::int64_t t = 0;
  std::string element;  // exec
  std::string from, to;  // transfer
  std::optional<CtSubtype> subtype;
  std::string event, handler, source;  // dispatch
  std::vector<Value> args;
  std::string text;  // output; stop message
  std::string device;  // hw_write
  Value value;
  std::int64_t old_t = 0;  // clock_advance
  std::optional<StopReason> reason;
};

struct Trace {
  std::vector<TraceEvent> events;
  StopReason reason = StopReason::idle;
  std::optional<RuntimeError> error;
  std::int64_t steps = 0;

  std::vector<const TraceEvent*> of_type(const std::string& type) const {
    std::vector<const TraceEvent*> out;
    for (const auto& e : events)
      if (e.type == type) out.push_back(&e);
    return out;
  }
};

inline nlohmann::ordered_json to_json(const TraceEvent& e, std::size_t seq) {
  nlohmann::ordered_json j;
  j["seq"] = seq;
  j["type"] = e.type;
  if (e.type == "clock_advance") {
    j["old"] = e.old_t;
    j["new"] = e.t;
    return j;
  }
  j["t"] = e.t;
  if (e.type == "exec") {
    j["element"] = e.element;
  } else if (e.type == "transfer") {
    j["from"] = e.from;
    j["to"] = e.to;
    j["subtype"] = to_string(*e.subtype);
  } else if (e.type == "dispatch") {
    j["event"] = e.event;
    j["handler"] = e.handler;
    j["source"] = e.source;
    j["args"] = nlohmann::ordered_json::array();
    for (const auto& a : e.args) j["args"].push_back(value_to_json(a));
  } else if (e.type == "output") {
    j["text"] = e.text;
  } else if (e.type == "hw_write") {
    j["device"] = e.device;
    j["value"] = value_to_json(e.value);
  } else if (e.type == "stop") {
    j["reason"] = to_string(*e.reason);
    if (!e.text.empty()) j["message"] = e.text;
  }
  return j;
}

/// One JSON object per line, LF-terminated.
inline std::string to_jsonl(const Trace& trace) {
  std::string out;
  for (std::size_t i = 0; i < trace.events.size(); ++i) {
    out += to_json(trace.events[i], i).dump();
    out += '\n';
  }
  return out;
}

struct RunLimits {
  std::int64_t max_steps = 100000;
  int max_call_depth = 1000;
};

// ---------------------------------------------------------------- interpreter

namespace detail {

class StepLimit {};

class Interpreter {
 public:
  Interpreter(const Program& program, const SymbolTable& symbols, const EventScript& script, RunLimits limits)
      : program_(program), symbols_(symbols), script_(script), limits_(limits) {
    for (const auto& [dev, val] : script.hardware) hardware_[dev] = val;
  }

  Trace run() {
    emit_event(event("start"));
    try {
      auto top = program_.top_level_statements();
      if (!top.empty()) {
        Frame frame;
        exec_list(top, frame);
      }
      loop();
      trace_.reason = StopReason::idle;
    } catch (const StepLimit&) {
      trace_.reason = StopReason::step_limit;
    } catch (const RuntimeError& e) {
      trace_.reason = StopReason::runtime_error;
      trace_.error = e;
    }
    TraceEvent stop = event("stop", clock_);
    stop.reason = trace_.reason;
    if (trace_.error) stop.text = format_diagnostic(trace_.error->span(), "runtime error", trace_.error->what());
    emit_event(std::move(stop));
    trace_.steps = steps_;
    return std::move(trace_);
  }

 private:
  struct Frame {
    std::map<std::string, Value> locals;  // parameters and `var` locals
    std::optional<Value> returned;
  };

  struct Timer {
    std::int64_t fire;
    std::int64_t seq;
    const Stmt* after;
  };

  struct Pending {
    std::string event;
    std::vector<Value> args;
    std::string from;    // element that caused the dispatch
    std::string source;  // "external" or "emit"
  };

  const Program& program_;
  const SymbolTable& symbols_;
  const EventScript& script_;
  RunLimits limits_;

  Trace trace_;
  std::int64_t clock_ = 0;
  std::int64_t steps_ = 0;
  std::int64_t timer_seq_ = 0;
  int depth_ = 0;
  std::size_t next_external_ = 0;
  std::map<std::string, Value> globals_;
  std::map<std::string, Value> hardware_;
  std::vector<Timer> timers_;
  std::deque<Pending> queue_;

  // Element ids are recomputed from spans here rather than read off the
  // element tree, so the trace stays an independent witness.
  std::string stmt_id(const Stmt& s) const {
    return "statement:" + s.span.file + ":" + std::to_string(s.span.start_line) + ":" +
           std::to_string(s.span.start_col);
  }
  static std::string segment_id(const SourceSpan& span) {
    return "segment:" + span.file + ":" + std::to_string(span.start_line) + ":" + std::to_string(span.start_col);
  }
  std::string system() const { return "system:" + program_.file + ":1:1"; }

  static TraceEvent event(const char* type, std::int64_t t = 0) {
    TraceEvent e;
    e.type = type;
    e.t = t;
    return e;
  }

  void emit_event(TraceEvent e) {
    if (e.type != "clock_advance") e.t = clock_;
    trace_.events.push_back(std::move(e));
  }

  // `steps_` counts completed steps; the one that would exceed the limit is not taken.
  void step() {
    if (steps_ >= limits_.max_steps) throw StepLimit{};
    ++steps_;
  }

  void transfer(const std::string& from, const std::string& to, CtSubtype subtype) {
    TraceEvent e = event("transfer");
    e.from = from;
    e.to = to;
    e.subtype = subtype;
    emit_event(std::move(e));
  }

  // ------------------------------------------------------------ event loop

  void loop() {
    for (;;) {
      step();
      if (auto due = next_due_timer()) {
        Timer t = timers_[*due];
        timers_.erase(timers_.begin() + static_cast<std::ptrdiff_t>(*due));
        const auto& body = std::get<After>(t.after->node).body;
        transfer(stmt_id(*t.after), segment_id(body.span), CtSubtype::event);
        Frame frame;
        exec_block(body, frame);
        continue;
      }
      if (!queue_.empty()) {
        Pending p = std::move(queue_.front());
        queue_.pop_front();
        dispatch(p);
        continue;
      }
      if (next_external_ < script_.events.size() && script_.events[next_external_].t <= clock_) {
        while (next_external_ < script_.events.size() && script_.events[next_external_].t <= clock_) {
          const auto& e = script_.events[next_external_++];
          queue_.push_back({e.event, e.args, system(), "external"});
        }
        continue;
      }
      std::optional<std::int64_t> next;
      for (const auto& t : timers_)
        if (!next || t.fire < *next) next = t.fire;
      if (next_external_ < script_.events.size()) {
        std::int64_t te = script_.events[next_external_].t;
        if (!next || te < *next) next = te;
      }
      if (!next) return;
      TraceEvent adv = event("clock_advance", *next);
      adv.old_t = clock_;
      clock_ = *next;
      emit_event(std::move(adv));
    }
  }

  std::optional<std::size_t> next_due_timer() const {
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < timers_.size(); ++i) {
      if (timers_[i].fire > clock_) continue;
      if (!best || std::pair(timers_[i].fire, timers_[i].seq) < std::pair(timers_[*best].fire, timers_[*best].seq))
        best = i;
    }
    return best;
  }

  void dispatch(const Pending& p) {
    for (const auto& item : program_.items) {
      const auto* h = std::get_if<Handler>(&item.node);
      if (!h || h->event != p.event) continue;
      const std::string hid = segment_id(item.span);
      TraceEvent d = event("dispatch");
      d.event = p.event;
      d.handler = hid;
      d.source = p.source;
      d.args = p.args;
      emit_event(std::move(d));
      if (p.args.size() != h->params.size())
        throw RuntimeError(h->event_span, "handler for '" + p.event + "' expects " +
                                              std::to_string(h->params.size()) + " argument(s), got " +
                                              std::to_string(p.args.size()));
      transfer(p.from, hid, CtSubtype::event);
      Frame frame;
      for (std::size_t i = 0; i < h->params.size(); ++i) frame.locals[h->params[i].name] = p.args[i];
      exec_block(h->body, frame);
    }
  }

  // ------------------------------------------------------------ statements

  void exec_block(const Block& b, Frame& frame) {
    std::vector<const Stmt*> stmts;
    for (const auto& s : b.stmts) stmts.push_back(&s);
    exec_list(stmts, frame);
  }

  void exec_list(const std::vector<const Stmt*>& stmts, Frame& frame) {
    for (std::size_t i = 0; i < stmts.size(); ++i) {
      exec(*stmts[i], frame);
      if (frame.returned) return;
      if (i + 1 < stmts.size()) transfer(stmt_id(*stmts[i]), stmt_id(*stmts[i + 1]), CtSubtype::sequential);
    }
  }

  void enter_body(const Stmt& s, const Block& body, Frame& frame) {
    if (body.stmts.empty()) return;
    transfer(stmt_id(s), stmt_id(body.stmts.front()), CtSubtype::branch);
    exec_block(body, frame);
  }

  bool as_bool(const Value& v, const SourceSpan& span) {
    if (auto* b = std::get_if<bool>(&v)) return *b;
    throw RuntimeError(span, std::string("expected a bool, got ") + type_name(v));
  }
  std::int64_t as_int(const Value& v, const SourceSpan& span) {
    if (auto* i = std::get_if<std::int64_t>(&v)) return *i;
    throw RuntimeError(span, std::string("expected an int, got ") + type_name(v));
  }

  void assign(const std::string& name, const SourceSpan& name_span, Value v, Frame& frame) {
    const Symbol* sym = symbols_.at(name_span.start());
    if (sym && (sym->kind == SymbolKind::local || sym->kind == SymbolKind::parameter))
      frame.locals[name] = std::move(v);
    else
      globals_[name] = std::move(v);
  }

  void exec(const Stmt& s, Frame& frame) {
    const std::string self = stmt_id(s);
    TraceEvent x = event("exec");
    x.element = self;
    emit_event(std::move(x));
    step();
    std::visit(overloaded{
                   [&](const VarDecl& v) { assign(v.name, v.name_span, eval(v.value, frame, self), frame); },
                   [&](const GlobalDecl& v) { globals_[v.name] = eval(v.value, frame, self); },
                   [&](const Assign& v) { assign(v.name, v.name_span, eval(v.value, frame, self), frame); },
                   [&](const If& v) {
                     if (as_bool(eval(v.cond, frame, self), v.cond.span))
                       enter_body(s, v.then_block, frame);
                     else if (v.else_block)
                       enter_body(s, *v.else_block, frame);
                   },
                   [&](const While& v) {
                     while (!frame.returned && as_bool(eval(v.cond, frame, self), v.cond.span)) {
                       step();
                       enter_body(s, v.body, frame);
                     }
                   },
                   [&](const Repeat& v) {
                     std::int64_t n = as_int(eval(v.count, frame, self), v.count.span);
                     for (std::int64_t i = 0; i < n && !frame.returned; ++i) {
                       step();
                       enter_body(s, v.body, frame);
                     }
                   },
                   [&](const After& v) {
                     std::int64_t delay = as_int(eval(v.delay_ms, frame, self), v.delay_ms.span);
                     if (delay < 0) throw RuntimeError(v.delay_ms.span, "negative delay " + std::to_string(delay));
                     timers_.push_back({clock_ + delay, timer_seq_++, &s});
                   },
                   [&](const Print& v) {
                     TraceEvent o = event("output");
                     o.text = display(eval(v.value, frame, self));
                     emit_event(std::move(o));
                   },
                   [&](const Emit& v) {
                     std::vector<Value> args;
                     for (const auto& a : v.args) args.push_back(eval(a, frame, self));
                     queue_.push_back({v.event, std::move(args), self, "emit"});
                   },
                   [&](const Return& v) { frame.returned = v.value ? eval(*v.value, frame, self) : Value{None{}}; },
                   [&](const CallStmt& v) { call(v.call, frame, self); },
                   [&](const HwWrite& v) {
                     if (v.args.size() != 1)
                       throw RuntimeError(s.span, "hw.write takes exactly one value");
                     Value val = eval(v.args.front(), frame, self);
                     hardware_[v.device] = val;
                     TraceEvent w = event("hw_write");
                     w.device = v.device;
                     w.value = val;
                     emit_event(std::move(w));
                   },
               },
               s.node);
  }

  // ----------------------------------------------------------- expressions

  Value call(const CallExpr& c, Frame& caller, const std::string& site) {
    const FuncDef* fn = nullptr;
    const TopItem* fn_item = nullptr;
    for (const auto& item : program_.items)
      if (auto* f = std::get_if<FuncDef>(&item.node); f && f->name == c.callee) {
        fn = f;
        fn_item = &item;
      }
    if (!fn) throw RuntimeError(c.callee_span, "call to unknown function '" + c.callee + "'");
    std::vector<Value> args;
    for (const auto& a : c.args) args.push_back(eval(a, caller, site));
    if (args.size() != fn->params.size())
      throw RuntimeError(c.callee_span, "'" + c.callee + "' expects " + std::to_string(fn->params.size()) +
                                            " argument(s), got " + std::to_string(args.size()));
    if (depth_ >= limits_.max_call_depth)
      throw RuntimeError(c.callee_span, "call depth exceeds " + std::to_string(limits_.max_call_depth));
    transfer(site, segment_id(fn_item->span), CtSubtype::branch);
    Frame frame;
    for (std::size_t i = 0; i < args.size(); ++i) frame.locals[fn->params[i].name] = args[i];
    ++depth_;
    exec_block(fn->body, frame);
    --depth_;
    return frame.returned ? *frame.returned : Value{None{}};
  }

  Value lookup(const std::string& name, const SourceSpan& span, Frame& frame) {
    const Symbol* sym = symbols_.at(span.start());
    const bool local = sym && (sym->kind == SymbolKind::local || sym->kind == SymbolKind::parameter);
    auto& scope = local ? frame.locals : globals_;
    auto it = scope.find(name);
    if (it == scope.end()) throw RuntimeError(span, "variable '" + name + "' is used before it is assigned");
    return it->second;
  }

  Value eval(const Expr& e, Frame& frame, const std::string& site) {
    return std::visit(
        overloaded{
            [&](const IntLit& v) -> Value { return v.value; },
            [&](const StrLit& v) -> Value { return v.value; },
            [&](const BoolLit& v) -> Value { return v.value; },
            [&](const NameRef& v) -> Value { return lookup(v.name, e.span, frame); },
            [&](const HwRead& v) -> Value {
              auto it = hardware_.find(v.device);
              return it == hardware_.end() ? Value{std::int64_t{0}} : it->second;
            },
            [&](const CallExpr& v) -> Value { return call(v, frame, site); },
            [&](const Unary& v) -> Value {
              Value x = eval(*v.operand, frame, site);
              if (v.op == UnaryOp::logical_not) return !as_bool(x, v.operand->span);
              return static_cast<std::int64_t>(0ULL - static_cast<std::uint64_t>(as_int(x, v.operand->span)));
            },
            [&](const Binary& v) -> Value { return binary(v, e.span, frame, site); },
        },
        e.node);
  }

  Value binary(const Binary& b, const SourceSpan& span, Frame& frame, const std::string& site) {
    if (b.op == BinaryOp::logical_and || b.op == BinaryOp::logical_or) {
      bool lhs = as_bool(eval(*b.lhs, frame, site), b.lhs->span);
      if (b.op == BinaryOp::logical_and && !lhs) return false;
      if (b.op == BinaryOp::logical_or && lhs) return true;
      return as_bool(eval(*b.rhs, frame, site), b.rhs->span);
    }
    Value l = eval(*b.lhs, frame, site);
    Value r = eval(*b.rhs, frame, site);
    if (b.op == BinaryOp::eq) return l == r;
    if (b.op == BinaryOp::ne) return l != r;
    if (b.op == BinaryOp::add && std::holds_alternative<std::string>(l) && std::holds_alternative<std::string>(r))
      return std::get<std::string>(l) + std::get<std::string>(r);
    auto lu = static_cast<std::uint64_t>(as_int(l, b.lhs->span));
    auto ru = static_cast<std::uint64_t>(as_int(r, b.rhs->span));
    auto li = static_cast<std::int64_t>(lu);
    auto ri = static_cast<std::int64_t>(ru);
    switch (b.op) {
      case BinaryOp::add: return static_cast<std::int64_t>(lu + ru);
      case BinaryOp::sub: return static_cast<std::int64_t>(lu - ru);
      case BinaryOp::mul: return static_cast<std::int64_t>(lu * ru);
      case BinaryOp::div:
        if (ri == 0) throw RuntimeError(span, "division by zero");
        if (ri == -1) return static_cast<std::int64_t>(0ULL - lu);
        return li / ri;
      case BinaryOp::lt: return li < ri;
      case BinaryOp::le: return li <= ri;
      case BinaryOp::gt: return li > ri;
      case BinaryOp::ge: return li >= ri;
      default: break;
    }
    throw RuntimeError(span, "unsupported operator");
  }
};

}  // namespace detail

/// Runs the top-level script to completion, then the event loop: due timers
/// by (fire time, registration order), then queued events FIFO, then
/// external stimuli whose time has come; otherwise the virtual clock jumps to
/// the next scheduled time. Errors and the step limit end the trace with a
/// `stop` event instead of throwing.
inline Trace run(const Program& program, const SymbolTable& symbols, const EventScript& script = {},
                 RunLimits limits = {}) {
  return detail::Interpreter(program, symbols, script, limits).run();
}

// --------------------------------------------------------------- agreement

struct AgreementReport {
  std::size_t transfers = 0;
  std::size_t matched = 0;
  std::vector<TraceEvent> unmatched;
  std::vector<std::string> never_exercised;  // static binding ids
  std::map<std::string, std::size_t> histogram;  // subtype -> transfers

  bool agrees() const { return unmatched.empty(); }
};

/// Maps every runtime transfer to a static causal-temporal binding with the
/// same endpoints and subtype.
inline AgreementReport check_agreement(const Trace& trace, const std::vector<Binding>& bindings) {
  AgreementReport r;
  std::map<std::tuple<std::string, std::string, CtSubtype>, std::string> statics;
  for (const auto& b : bindings)
    if (b.dimension == Dimension::causal_temporal) statics.emplace(std::tuple(b.from, b.to, *b.subtype), b.id);
  std::set<std::string> hit;
  for (const auto& e : trace.events) {
    if (e.type != "transfer") continue;
    ++r.transfers;
    ++r.histogram[to_string(*e.subtype)];
    auto it = statics.find({e.from, e.to, *e.subtype});
    if (it == statics.end()) {
      r.unmatched.push_back(e);
    } else {
      ++r.matched;
      hit.insert(it->second);
    }
  }
  for (const auto& b : bindings)
    if (b.dimension == Dimension::causal_temporal && !hit.count(b.id)) r.never_exercised.push_back(b.id);
  return r;
}

inline nlohmann::ordered_json to_json(const AgreementReport& r) {
  nlohmann::ordered_json j;
  j["agrees"] = r.agrees();
  j["transfers"] = r.transfers;
  j["matched"] = r.matched;
  j["unmatched"] = nlohmann::ordered_json::array();
  for (const auto& e : r.unmatched)
    j["unmatched"].push_back({{"from", e.from}, {"to", e.to}, {"subtype", to_string(*e.subtype)}, {"t", e.t}});
  j["never_exercised"] = r.never_exercised;
  j["histogram"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : r.histogram) j["histogram"][k] = v;
  return j;
}

}  // namespace flare
