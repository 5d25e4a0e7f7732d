#include <gtest/gtest.h>

#include "flare/flare.hpp"
#include "support/program_gen.hpp"
#include "support/test_util.hpp"

namespace flare {
namespace {

using Row = std::vector<std::tuple<SubjectKind, std::string, AccessMode>>;

Row row(const std::vector<PropertyEntry>& l) {
  Row out;
  for (const auto& e : l) out.emplace_back(e.subject_kind, e.subject, e.mode);
  return out;
}

const Element& segment(const Analysis& a, const std::string& name) {
  const Element* e = a.tree.segment_named(name);
  EXPECT_NE(e, nullptr) << name;
  return *e;
}

// The three AutoDimmer function rows of the four-property table.
TEST(AutoDimmerRows, ReadSensor) {
  auto a = testing::analyze_corpus("autodimmer");
  const auto& p = segment(a, "read_sensor_seg").properties;
  EXPECT_EQ(row(p.receives), (Row{{SubjectKind::call_trigger, "read_sensor_seg", AccessMode::none}}));
  EXPECT_EQ(row(p.sends), (Row{{SubjectKind::return_value, "read_sensor_seg", AccessMode::none}}));
  EXPECT_TRUE(p.effects.empty());
  EXPECT_EQ(row(p.shares), (Row{{SubjectKind::hardware_state, "light", AccessMode::read}}));
}

TEST(AutoDimmerRows, DecideBrightness) {
  auto a = testing::analyze_corpus("autodimmer");
  const auto& p = segment(a, "decide_brightness").properties;
  EXPECT_EQ(row(p.receives), (Row{{SubjectKind::parameter, "level", AccessMode::none}}));
  EXPECT_EQ(row(p.sends), (Row{{SubjectKind::return_value, "decide_brightness", AccessMode::none}}));
  EXPECT_EQ(row(p.effects), (Row{{SubjectKind::local_state, "b", AccessMode::read_write}}));
  EXPECT_EQ(row(p.shares), (Row{{SubjectKind::global_state, "threshold", AccessMode::read}}));
}

TEST(AutoDimmerRows, SetLed) {
  auto a = testing::analyze_corpus("autodimmer");
  const auto& p = segment(a, "set_led_seg").properties;
  EXPECT_EQ(row(p.receives), (Row{{SubjectKind::parameter, "b", AccessMode::none}}));
  EXPECT_EQ(row(p.sends), (Row{{SubjectKind::hardware_command, "led", AccessMode::none}}));
  EXPECT_TRUE(p.effects.empty());
  EXPECT_EQ(row(p.shares), (Row{{SubjectKind::hardware_state, "led", AccessMode::write}}));
}

TEST(ClassifyAccess, Examples) {
  auto a = testing::analyze_corpus("autodimmer");
  const Element& decide = segment(a, "decide_brightness");
  // `b = 100;` at 12:5 and `threshold` read at 11:14.
  auto write_b = classify_access({"b", {"corpus/autodimmer.flare", 12, 5, 12, 5}, Access::write}, decide, a.symbols);
  EXPECT_EQ(write_b.kind, PropertyKind::effect);
  EXPECT_EQ(write_b.subject_kind, SubjectKind::local_state);
  EXPECT_EQ(write_b.mode, AccessMode::write);
  auto read_t =
      classify_access({"threshold", {"corpus/autodimmer.flare", 11, 14, 11, 22}, Access::read}, decide, a.symbols);
  EXPECT_EQ(read_t.kind, PropertyKind::share);
  EXPECT_EQ(read_t.subject_kind, SubjectKind::global_state);
  EXPECT_EQ(read_t.mode, AccessMode::read);
}

TEST(ClassifyAccess, CallArgumentIsSendAndReceiveNeverShare) {
  auto p = parse("func f(x) { print(x); }\nf(1);", "t.flare");
  const auto& call = std::get<CallStmt>(std::get<Stmt>(p.items[1].node).node).call;
  auto crossing = classify_call_argument(call, *p.find_function("f"));
  EXPECT_EQ(crossing.caller_send.kind, PropertyKind::send);
  EXPECT_EQ(crossing.callee_receive.kind, PropertyKind::receive);
  EXPECT_EQ(crossing.callee_receive.subject_kind, SubjectKind::parameter);
}

TEST(Properties, HandlerAndTimerHeaders) {
  auto a = analyze("when go(n) { after n { print(1); } }\nemit go(5);", "t.flare");
  const Element& h = segment(a, "handler:go");
  EXPECT_EQ(row(h.properties.receives), (Row{{SubjectKind::event_trigger, "go", AccessMode::none},
                                             {SubjectKind::parameter, "n", AccessMode::none},
                                             {SubjectKind::message, "go", AccessMode::none}}));
  const Element& timer = segment(a, "after@1:14");
  EXPECT_EQ(row(timer.properties.receives), (Row{{SubjectKind::timer_trigger, "after@1:14", AccessMode::none}}));
  const Element& script = segment(a, "script");
  EXPECT_EQ(row(script.properties.sends), (Row{{SubjectKind::message, "go", AccessMode::none}}));
}

TEST(Properties, ParameterWriteIsLocalEffect) {
  auto a = testing::analyze_corpus("param_write");
  const auto& p = segment(a, "clamp").properties;
  EXPECT_EQ(row(p.receives), (Row{{SubjectKind::parameter, "v", AccessMode::none}}));
  EXPECT_EQ(row(p.effects), (Row{{SubjectKind::local_state, "v", AccessMode::write}}));
}

TEST(Properties, WriteOnlyLocalListedWithWriteMode) {
  auto a = analyze("func f() { var unused = 1; }\nf();", "t.flare");
  EXPECT_EQ(row(segment(a, "f").properties.effects), (Row{{SubjectKind::local_state, "unused", AccessMode::write}}));
}

TEST(PropertySet, MergesModesAndKeepsEarliestSpan) {
  PropertySet s;
  s.add({PropertyKind::share, SubjectKind::global_state, "g", AccessMode::read, {"f", 3, 1, 3, 1}});
  s.add({PropertyKind::share, SubjectKind::global_state, "g", AccessMode::write, {"f", 2, 1, 2, 1}});
  ASSERT_EQ(s.shares.size(), 1u);
  EXPECT_EQ(s.shares[0].mode, AccessMode::read_write);
  EXPECT_EQ(s.shares[0].span.start_line, 2);
  EXPECT_THROW(s.add({PropertyKind::effect, SubjectKind::global_state, "g", AccessMode::read, {}}), InvariantError);
}

// Independent oracle: the flattening walk with a one-element region
// recomputes exactly the element's own properties.
void expect_matches_oracle(const Analysis& a, const std::string& label) {
  for (const auto& e : a.tree.elements()) {
    if (!e.source_derived()) continue;
    auto oracle = flatten_oracle(*a.program, {e.id});
    auto got = testing::canonical(e.properties);
    EXPECT_EQ(got, oracle) << label << " " << e.id << "\ngot:\n"
                           << testing::describe(got) << "oracle:\n"
                           << testing::describe(oracle);
  }
}

void expect_well_formed(const Analysis& a, const std::string& label) {
  for (const auto& e : a.tree.elements()) {
    for (auto k : kAllPropertyKinds) {
      std::set<std::pair<SubjectKind, std::string>> keys;
      for (const auto& entry : e.properties.list(k)) {
        EXPECT_EQ(entry.kind, k);
        EXPECT_TRUE(well_formed(entry.kind, entry.subject_kind)) << label;
        EXPECT_TRUE(keys.insert({entry.subject_kind, entry.subject}).second) << label << " duplicate key";
      }
    }
    if (!e.source_derived()) continue;
    // Effects never name globals or devices.
    for (const auto& entry : e.properties.effects) {
      const Symbol* sym = a.symbols.at(entry.span.start());
      ASSERT_NE(sym, nullptr) << label;
      EXPECT_TRUE(sym->kind == SymbolKind::local || sym->kind == SymbolKind::parameter) << label;
    }
  }
}

// Mode soundness: write mode only when the element's own syntax writes the name.
void expect_mode_sound(const Analysis& a, const std::string& label) {
  for (const auto& e : a.tree.elements()) {
    if (!e.source_derived()) continue;
    const std::set<std::string> self{e.id};
    for (auto k : {PropertyKind::effect, PropertyKind::share}) {
      for (const auto& entry : e.properties.list(k)) {
        if (entry.mode != AccessMode::write && entry.mode != AccessMode::read_write) continue;
        bool written = false;
        for (const auto& sym : a.symbols.symbols()) {
          if (sym.name != entry.subject) continue;
          for (const auto& r : sym.refs)
            if (r.access == Access::write && a.tree.inside(a.tree.element_at(r.span.start()), self)) written = true;
        }
        EXPECT_TRUE(written) << label << " " << e.id << " " << entry.subject;
      }
    }
  }
}

TEST(Properties, OracleAgreementOnCorpus) {
  for (const auto& name : testing::corpus_names()) {
    auto a = testing::analyze_corpus(name);
    expect_matches_oracle(a, name);
    expect_well_formed(a, name);
    expect_mode_sound(a, name);
  }
}

TEST(Properties, OracleAgreementOnRandomPrograms) {
  for (std::uint64_t seed = 0; seed < 400; ++seed) {
    auto src = testing::ProgramGenerator(seed).generate();
    auto a = analyze(src, "gen.flare");
    expect_matches_oracle(a, src);
    expect_well_formed(a, src);
    expect_mode_sound(a, src);
  }
}

TEST(Properties, ComposedElementIsRejected) {
  auto a = testing::analyze_corpus("autodimmer");
  EXPECT_THROW(compute_properties(a.tree.root(), a.tree, a.symbols), InvariantError);
}

TEST(Properties, ElementStems) {
  EXPECT_EQ(element_question_stems(),
            (std::vector<std::string>{"What does this element receive?", "What does it send?",
                                      "What does it change inside itself?", "What does it share?"}));
}

}  // namespace
}  // namespace flare
