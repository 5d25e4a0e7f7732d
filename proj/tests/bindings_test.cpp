#include <gtest/gtest.h>

#include "flare/flare.hpp"
#include "support/program_gen.hpp"
#include "support/test_util.hpp"

namespace flare {
namespace {

std::vector<const Binding*> of(const Analysis& a, Dimension d, std::optional<CtSubtype> sub = std::nullopt) {
  std::vector<const Binding*> out;
  for (const auto& b : a.bindings)
    if (b.dimension == d && (!sub || b.subtype == sub)) out.push_back(&b);
  return out;
}

bool has(const Analysis& a, const std::string& from, const std::string& to, CtSubtype sub) {
  for (const auto& b : a.bindings)
    if (b.from == from && b.to == to && b.subtype == sub) return true;
  return false;
}

TEST(CausalTemporal, AutoDimmerHandlerChain) {
  auto a = testing::analyze_corpus("autodimmer");
  const std::string f = "corpus/autodimmer.flare:";
  EXPECT_TRUE(has(a, "statement:" + f + "24:3", "statement:" + f + "25:3", CtSubtype::sequential));
  EXPECT_TRUE(has(a, "statement:" + f + "25:3", "statement:" + f + "26:3", CtSubtype::sequential));
  EXPECT_TRUE(has(a, "statement:" + f + "24:3", "segment:" + f + "5:1", CtSubtype::branch));
  EXPECT_TRUE(has(a, "statement:" + f + "25:3", "segment:" + f + "9:1", CtSubtype::branch));
  EXPECT_TRUE(has(a, "statement:" + f + "26:3", "segment:" + f + "19:1", CtSubtype::branch));
  EXPECT_TRUE(has(a, "system:" + f + "1:1", "segment:" + f + "23:1", CtSubtype::event));
  EXPECT_EQ(of(a, Dimension::causal_temporal, CtSubtype::event).size(), 1u);
}

TEST(CausalTemporal, SingleStatementHasNoBindings) {
  EXPECT_TRUE(analyze("print(1);", "t.flare").bindings.empty());
}

TEST(CausalTemporal, EmitToHandlerIsOneEventBinding) {
  auto a = analyze("when go {\n  print(1);\n}\nemit go();", "t.flare");
  EXPECT_TRUE(has(a, "statement:t.flare:4:1", "segment:t.flare:1:1", CtSubtype::event));
  // Oracle: the runtime dispatches the handler from that emit statement.
  auto trace = run(*a.program, a.symbols);
  bool seen = false;
  for (const auto& e : trace.events)
    if (e.type == "transfer" && e.from == "statement:t.flare:4:1" && e.to == "segment:t.flare:1:1") seen = true;
  EXPECT_TRUE(seen);
}

TEST(CausalTemporal, ConditionsOnlyOnLoopsAndIfs) {
  auto a = analyze("func f() {}\nvar i = 0;\nwhile i < 2 {\n  i = i + 1;\n  f();\n}\nrepeat 2 {\n  f();\n}", "t.flare");
  for (const auto& b : a.bindings) {
    if (b.subtype != CtSubtype::branch) {
      EXPECT_FALSE(b.condition.has_value());
      continue;
    }
    const Element& to = a.tree.at(b.to);
    if (to.kind == ElementKind::segment) {
      EXPECT_FALSE(b.condition.has_value()) << "calls carry no condition";
    } else {
      ASSERT_TRUE(b.condition.has_value());
    }
  }
  EXPECT_TRUE(has(a, "statement:t.flare:3:1", "statement:t.flare:4:3", CtSubtype::branch));
  for (const auto& b : a.bindings)
    if (b.from == "statement:t.flare:3:1" && b.to == "statement:t.flare:4:3") {
      EXPECT_EQ(b.condition_text, "(i < 2)");
    }
}

TEST(CausalTemporal, UnboundEmitWarnsAndExternalHandlerNotes) {
  auto a = analyze("when tick {\n  print(1);\n}\nemit nobody();", "t.flare");
  ASSERT_EQ(a.warnings.size(), 2u);
  std::set<std::string> codes;
  for (const auto& w : a.warnings) codes.insert(w.code);
  EXPECT_TRUE(codes.count("unbound-event"));
  EXPECT_TRUE(codes.count("external-only-handler"));
}

// Oracle: adjacent statements in every block, counted straight off the AST.
std::size_t adjacent_pairs(const Program& p) {
  std::size_t n = 0;
  std::function<void(const Block&)> block;
  auto list = [&](const std::vector<const Stmt*>& stmts) {
    if (!stmts.empty()) n += stmts.size() - 1;
    for (const Stmt* s : stmts) {
      for (const Block* b : inline_blocks(*s)) block(*b);
      if (auto* a = std::get_if<After>(&s->node)) block(a->body);
    }
  };
  block = [&](const Block& b) {
    std::vector<const Stmt*> v;
    for (const auto& s : b.stmts) v.push_back(&s);
    list(v);
  };
  for (const auto& item : p.items) {
    if (auto* f = std::get_if<FuncDef>(&item.node)) block(f->body);
    if (auto* h = std::get_if<Handler>(&item.node)) block(h->body);
  }
  list(p.top_level_statements());
  return n;
}

TEST(CausalTemporal, SequentialCountMatchesAdjacentPairs) {
  for (const auto& name : testing::corpus_names()) {
    auto a = testing::analyze_corpus(name);
    EXPECT_EQ(of(a, Dimension::causal_temporal, CtSubtype::sequential).size(), adjacent_pairs(*a.program)) << name;
  }
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    auto src = testing::ProgramGenerator(seed).generate();
    auto a = analyze(src, "gen.flare");
    EXPECT_EQ(of(a, Dimension::causal_temporal, CtSubtype::sequential).size(), adjacent_pairs(*a.program)) << src;
  }
}

TEST(Communicative, ValueFlowThroughTheHandler) {
  auto a = testing::analyze_corpus("autodimmer");
  const std::string decide = "segment:corpus/autodimmer.flare:9:1";
  const std::string set_led = "segment:corpus/autodimmer.flare:19:1";
  const std::string handler = "segment:corpus/autodimmer.flare:23:1";
  bool returned = false, sent = false;
  for (const auto* b : of(a, Dimension::communicative)) {
    if (b->from == decide && b->to == handler && b->payload->from_entry.subject_kind == SubjectKind::return_value)
      returned = true;
    if (b->from == handler && b->to == set_led && b->payload->to_entry.subject_kind == SubjectKind::parameter)
      sent = true;
  }
  EXPECT_TRUE(returned);
  EXPECT_TRUE(sent);
  bool chain = false;
  for (const auto& c : a.chains)
    if (c.source == decide && c.via == handler && c.sink == set_led && c.variable == "b") chain = true;
  EXPECT_TRUE(chain);
}

TEST(Communicative, SingleAccessorMeansNoShareBinding) {
  auto a = analyze("func f() { global t = 1; }\nf();", "t.flare");
  for (const auto* b : of(a, Dimension::communicative)) EXPECT_NE(b->payload->kind, CommKind::share);
}

TEST(Communicative, TwoHandlersWritingScoreShareOnce) {
  auto a = analyze("global score = 0;\nwhen a { score = 1; }\nwhen b { score = 2; }", "t.flare");
  std::vector<const Binding*> between;
  for (const auto* b : of(a, Dimension::communicative))
    if (b->payload->kind == CommKind::share && b->from != "segment:t.flare:1:1" && b->to != "segment:t.flare:1:1")
      between.push_back(b);
  ASSERT_EQ(between.size(), 1u);
  EXPECT_EQ(between[0]->payload->from_entry.mode, AccessMode::write);
  EXPECT_EQ(between[0]->payload->to_entry.mode, AccessMode::write);
}

// Oracle: group all segment share entries by subject, pair them by brute force.
TEST(Communicative, SharePairsMatchBruteForce) {
  auto check = [](const Analysis& a, const std::string& label) {
    std::set<std::tuple<std::string, std::string, std::string>> expected, got;
    auto segs = a.tree.segments();
    for (std::size_t i = 0; i < segs.size(); ++i)
      for (std::size_t j = 0; j < segs.size(); ++j) {
        if (i >= j) continue;
        for (const auto& x : segs[i]->properties.shares)
          for (const auto& y : segs[j]->properties.shares)
            if (x.subject_kind == y.subject_kind && x.subject == y.subject)
              expected.insert({segs[i]->id, segs[j]->id, x.subject});
      }
    for (const auto& b : a.bindings)
      if (b.payload && b.payload->kind == CommKind::share) got.insert({b.from, b.to, b.payload->from_entry.subject});
    EXPECT_EQ(got, expected) << label;
  };
  for (const auto& name : testing::corpus_names()) check(testing::analyze_corpus(name), name);
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    auto src = testing::ProgramGenerator(seed).generate();
    check(analyze(src, "gen.flare"), src);
  }
}

TEST(Stems, PerSubtype) {
  Binding b;
  b.dimension = Dimension::causal_temporal;
  b.subtype = CtSubtype::event;
  EXPECT_EQ(question_stems(b), (std::vector<std::string>{"What triggers this?", "When does this fire?"}));
  b.subtype = CtSubtype::branch;
  EXPECT_EQ(question_stems(b), (std::vector<std::string>{"Under what conditions does this run?", "How many times?"}));
  b.subtype = CtSubtype::sequential;
  EXPECT_EQ(question_stems(b), (std::vector<std::string>{"What happens next?", "What runs after this?"}));
  b.dimension = Dimension::communicative;
  b.subtype.reset();
  EXPECT_EQ(question_stems(b),
            (std::vector<std::string>{"What does this receive?", "What does it send?", "What do these share?"}));
}

// Shape invariants shared by every binding list.
void expect_binding_invariants(const Analysis& a, const std::string& label) {
  std::set<std::tuple<std::string, std::string, int>> ct;
  for (const auto& b : a.bindings) {
    ASSERT_NE(a.tree.find(b.from), nullptr) << label;
    ASSERT_NE(a.tree.find(b.to), nullptr) << label;
    EXPECT_EQ(b.subtype.has_value(), b.dimension == Dimension::causal_temporal) << label;
    EXPECT_EQ(b.payload.has_value(), b.dimension == Dimension::communicative) << label;
    if (b.condition) {
      EXPECT_EQ(b.subtype, CtSubtype::branch) << label;
    }
    if (b.payload) {
      EXPECT_NE(b.payload->from_entry.kind, PropertyKind::effect) << label;
      EXPECT_NE(b.payload->to_entry.kind, PropertyKind::effect) << label;
    }
    if (b.subtype) {
      // No edge carries two subtypes.
      for (int other = 0; other < 3; ++other)
        if (other != static_cast<int>(*b.subtype)) {
          EXPECT_FALSE(ct.count({b.from, b.to, other})) << label;
        }
      ct.insert({b.from, b.to, static_cast<int>(*b.subtype)});
    }
  }
}

TEST(Bindings, InvariantsOnCorpusAndRandomPrograms) {
  for (const auto& name : testing::corpus_names()) expect_binding_invariants(testing::analyze_corpus(name), name);
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    auto src = testing::ProgramGenerator(seed).generate();
    expect_binding_invariants(analyze(src, "gen.flare"), src);
  }
}

}  // namespace
}  // namespace flare
