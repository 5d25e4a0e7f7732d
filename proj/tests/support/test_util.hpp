#pragma once

#include <sys/wait.h>

#include <algorithm>
#include <array>
#include <cstdlib>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "flare/flare.hpp"

namespace flare::testing {

inline std::string source_dir() { return FLARE_SOURCE_DIR; }

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

/// Corpus program names (without extension), sorted.
inline std::vector<std::string> corpus_names() {
  std::vector<std::string> out;
  for (const auto& entry : std::filesystem::directory_iterator(source_dir() + "/corpus"))
    if (entry.path().extension() == ".flare") out.push_back(entry.path().stem().string());
  std::sort(out.begin(), out.end());
  return out;
}

/// Relative path used as the file name inside element ids.
inline std::string corpus_file(const std::string& name) { return "corpus/" + name + ".flare"; }
inline std::string corpus_events(const std::string& name) { return "corpus/" + name + ".events.json"; }

inline Analysis analyze_corpus(const std::string& name, ScalePolicy policy = ScalePolicy::all) {
  return analyze(read_text(source_dir() + "/" + corpus_file(name)), corpus_file(name), policy);
}

inline EventScript corpus_script(const std::string& name) {
  return load_event_script(source_dir() + "/" + corpus_events(name));
}

struct CliResult {
  int exit_code = -1;
  std::string out;
};

/// Runs the CLI from the source directory, capturing stdout. Stderr is discarded.
inline CliResult run_cli(const std::string& args) {
  std::string cmd = "cd '" + source_dir() + "' && '" + std::string(FLARE_CLI_PATH) + "' " + args + " 2>/dev/null";
  CliResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf;
  std::size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
  int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

/// A PropertySet in canonical order, for order-insensitive comparison.
inline PropertySet canonical(PropertySet p) {
  p.canonicalize();
  return p;
}

inline std::string describe(const PropertySet& p) {
  std::ostringstream out;
  for (auto k : kAllPropertyKinds)
    for (const auto& e : p.list(k))
      out << to_string(k) << " " << to_string(e.subject_kind) << " " << e.subject << " " << to_string(e.mode)
          << " @" << e.span.start_line << ":" << e.span.start_col << "\n";
  return out.str();
}

/// One line per binding, in binding order. Used for golden binding lists.
inline std::string binding_listing(const Analysis& a) {
  std::ostringstream out;
  for (const auto& b : a.bindings) {
    out << b.id << " " << to_string(b.dimension);
    if (b.subtype) out << " " << to_string(*b.subtype);
    if (b.payload) out << " " << to_string(b.payload->kind) << " " << b.payload->from_entry.subject;
    out << " " << b.from << " -> " << b.to;
    if (b.condition) out << " when " << b.condition_text;
    out << "\n";
  }
  return out.str();
}

inline std::string golden_path(const std::string& rel) { return source_dir() + "/tests/golden/" + rel; }

/// Compares `actual` with a golden file, rewriting the file instead when
/// FLARE_UPDATE_GOLDEN is set. Returns an empty string on a match.
inline std::string check_golden(const std::string& rel, const std::string& actual) {
  const std::string path = golden_path(rel);
  if (std::getenv("FLARE_UPDATE_GOLDEN")) {
    std::filesystem::create_directories(std::filesystem::path(path).parent_path());
    write_text(path, actual);
    return "";
  }
  if (!std::filesystem::exists(path)) return "missing golden file " + path;
  if (read_text(path) != actual) return "golden mismatch for " + path;
  return "";
}

namespace detail {

inline std::set<std::string> callees_of(const Stmt& s) {
  std::set<std::string> out;
  if (auto* c = std::get_if<CallStmt>(&s.node)) out.insert(c->call.callee);
  for_each_own_expr(s, [&](const Expr& e) {
    walk_expr(e, [&](const Expr& x) {
      if (auto* c = std::get_if<CallExpr>(&x.node)) out.insert(c->callee);
    });
  });
  return out;
}

}  // namespace detail

/// Checks each causal-temporal binding against the syntax that justifies it:
/// adjacent siblings give sequential edges, if/while/repeat and calls give
/// branch edges (conditions only on the former), and registrations, `after`
/// and `emit` give event edges. Returns one message per violation.
inline std::vector<std::string> placement_violations(const Analysis& a) {
  std::vector<std::string> bad;
  const auto& tree = a.tree;
  for (const auto& b : a.bindings) {
    if (b.dimension != Dimension::causal_temporal) continue;
    const Element& from = tree.at(b.from);
    const Element& to = tree.at(b.to);
    auto fail = [&](const std::string& why) { bad.push_back(b.id + " " + b.from + " -> " + b.to + ": " + why); };
    switch (*b.subtype) {
      case CtSubtype::sequential: {
        if (from.kind != ElementKind::statement || to.kind != ElementKind::statement || from.parent != to.parent) {
          fail("sequential edge between non-siblings");
          break;
        }
        const auto& sib = tree.at(*from.parent).constituents;
        auto it = std::find(sib.begin(), sib.end(), from.id);
        if (it == sib.end() || it + 1 == sib.end() || *(it + 1) != to.id) fail("siblings are not adjacent");
        if (b.condition) fail("sequential edge with a condition");
        break;
      }
      case CtSubtype::branch: {
        if (!from.stmt) {
          fail("branch from a non-statement");
          break;
        }
        bool compound = std::holds_alternative<If>(from.stmt->node) || std::holds_alternative<While>(from.stmt->node) ||
                        std::holds_alternative<Repeat>(from.stmt->node);
        if (to.kind == ElementKind::statement) {
          bool first_of_block = false;
          for (const Block* blk : inline_blocks(*from.stmt))
            if (!blk->stmts.empty() && element_id(Scale::statement(), blk->stmts.front().span) == to.id)
              first_of_block = true;
          if (!compound || !first_of_block) fail("branch into a statement that does not open a governed block");
          if (!b.condition || b.condition_text.empty()) fail("governing condition missing");
        } else if (to.kind == ElementKind::segment && to.segment && to.segment->kind == SegmentKind::function) {
          if (!detail::callees_of(*from.stmt).count(to.segment->name)) fail("branch to a function not called here");
          if (b.condition) fail("call edge with a condition");
        } else {
          fail("branch to an unexpected target");
        }
        break;
      }
      case CtSubtype::event: {
        if (b.condition) fail("event edge with a condition");
        if (to.kind != ElementKind::segment || !to.segment) {
          fail("event edge into a non-segment");
          break;
        }
        if (from.kind == ElementKind::system) {
          if (to.segment->kind != SegmentKind::handler) fail("registration of a non-handler");
        } else if (from.stmt && std::holds_alternative<After>(from.stmt->node)) {
          if (to.segment->after_stmt != from.stmt) fail("after edge to a different timer");
        } else if (from.stmt && std::holds_alternative<Emit>(from.stmt->node)) {
          const auto& ev = std::get<Emit>(from.stmt->node).event;
          if (to.segment->kind != SegmentKind::handler || to.segment->handler->event != ev)
            fail("emit edge to a handler of another event");
        } else {
          fail("event edge from a statement that is not after/emit");
        }
        break;
      }
    }
  }
  return bad;
}

/// Binding payloads that name an effect entry. Effects never take part in bindings.
inline std::vector<std::string> effect_payloads(const Analysis& a) {
  std::vector<std::string> bad;
  for (const auto& b : a.bindings) {
    if (!b.payload) continue;
    if (b.payload->from_entry.kind == PropertyKind::effect || b.payload->to_entry.kind == PropertyKind::effect)
      bad.push_back(b.id);
  }
  return bad;
}

}  // namespace flare::testing
