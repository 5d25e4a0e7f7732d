#include <gtest/gtest.h>

#include "flare/flare.hpp"
#include "support/test_util.hpp"

namespace flare {
namespace {

using testing::run_cli;

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run_cli("parse corpus/autodimmer.flare").exit_code, 0);
  EXPECT_EQ(run_cli("parse corpus/nosuchfile.flare").exit_code, 4);
  EXPECT_EQ(run_cli("bogus").exit_code, 4);
  EXPECT_EQ(run_cli("analyze corpus/autodimmer.flare --scale galaxy").exit_code, 4);
  EXPECT_EQ(run_cli("analyze corpus/autodimmer.flare --format svg").exit_code, 4);
  EXPECT_EQ(run_cli("analyze corpus/autodimmer.flare --compose segment:nope:1:1").exit_code, 4);
  EXPECT_EQ(run_cli("check corpus/autodimmer.flare --events corpus/autodimmer.events.json").exit_code, 0);
  EXPECT_EQ(run_cli("trace corpus/forever.flare --max-steps 100").exit_code, 0);
  EXPECT_EQ(run_cli("trace corpus/autodimmer.flare --events corpus/nosuchfile.json").exit_code, 4);
}

TEST(Cli, InputErrorsExitOne) {
  auto dir = std::filesystem::temp_directory_path() / "flare_cli_test";
  std::filesystem::create_directories(dir);
  auto write = [&](const std::string& name, const std::string& text) {
    testing::write_text((dir / name).string(), text);
    return (dir / name).string();
  };
  EXPECT_EQ(run_cli("parse '" + write("lex.flare", "var x = @;") + "'").exit_code, 1);
  EXPECT_EQ(run_cli("parse '" + write("parse.flare", "func f( {") + "'").exit_code, 1);
  EXPECT_EQ(run_cli("analyze '" + write("resolve.flare", "func f() { print(y); }") + "'").exit_code, 1);
  EXPECT_EQ(run_cli("trace '" + write("div.flare", "var a = 0;\nprint(1 / a);") + "'").exit_code, 1);
  EXPECT_EQ(run_cli("trace '" + write("div2.flare", "print(1);") + "' --events '" +
                    write("bad.json", "[{\"t\": 5, \"event\": \"x\"}, {\"t\": 1, \"event\": \"x\"}]") + "'")
                .exit_code,
            4);
}

TEST(Cli, OutputsMatchTheLibrary) {
  auto a = testing::analyze_corpus("autodimmer");
  EXPECT_EQ(run_cli("analyze corpus/autodimmer.flare").out, to_json(make_document(a)));
  EXPECT_EQ(run_cli("analyze corpus/autodimmer.flare --format dot").out, to_dot(make_document(a)));
  EXPECT_EQ(run_cli("analyze corpus/autodimmer.flare --format md").out, to_markdown(make_document(a)));
  EXPECT_EQ(run_cli("parse corpus/autodimmer.flare").out, unparse(*a.program));
  auto trace = run(*a.program, a.symbols, testing::corpus_script("autodimmer"));
  EXPECT_EQ(run_cli("trace corpus/autodimmer.flare --events corpus/autodimmer.events.json").out, to_jsonl(trace));
}

TEST(Cli, GoodMorningTrace) {
  auto r = run_cli("trace corpus/goodmorning.flare");
  ASSERT_EQ(r.exit_code, 0);
  std::vector<std::string> outputs;
  std::istringstream in(r.out);
  for (std::string line; std::getline(in, line);) {
    auto j = nlohmann::json::parse(line);
    if (j["type"] == "output") outputs.push_back(std::string(j["text"]) + "@" + std::to_string(j["t"].get<int>()));
  }
  EXPECT_EQ(outputs, (std::vector<std::string>{"Good@0", "morning@1000"}));
}

TEST(Cli, ComposeIsRepeatable) {
  auto a = testing::analyze_corpus("autodimmer");
  auto segs = a.tree.segments();
  auto r = run_cli("analyze corpus/autodimmer.flare --compose " + segs[1]->id + "," + segs[2]->id + " --compose " +
                   segs[3]->id + "," + segs[4]->id);
  ASSERT_EQ(r.exit_code, 0);
  auto j = nlohmann::json::parse(r.out);
  ASSERT_EQ(j["compositions"].size(), 2u);
  EXPECT_EQ(j["compositions"][0]["name"], "composite1");
  EXPECT_EQ(j["compositions"][1]["name"], "composite2");
}

TEST(Cli, AstJson) {
  auto r = run_cli("parse corpus/goodmorning.flare --ast-json");
  ASSERT_EQ(r.exit_code, 0);
  auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["kind"], "Program");
  EXPECT_EQ(j["children"].size(), 2u);
}

TEST(Cli, CheckReport) {
  auto r = run_cli("check corpus/autodimmer.flare --events corpus/autodimmer.events.json");
  auto j = nlohmann::json::parse(r.out);
  EXPECT_TRUE(j["agrees"].get<bool>());
  EXPECT_EQ(j["unmatched"].size(), 0u);
  EXPECT_EQ(j["stop"], "idle");
}

std::vector<std::string> commands_for(const std::string& name) {
  const std::string f = testing::corpus_file(name);
  const std::string ev = testing::corpus_events(name);
  return {"parse " + f,
          "parse " + f + " --ast-json",
          "analyze " + f,
          "analyze " + f + " --scale statement",
          "analyze " + f + " --scale segment",
          "analyze " + f + " --scale system",
          "analyze " + f + " --format dot",
          "analyze " + f + " --format md",
          "trace " + f + " --events " + ev,
          "check " + f + " --events " + ev,
          "stems " + f};
}

TEST(Cli, DeterministicAcrossRuns) {
  for (const auto& name : testing::corpus_names()) {
    for (const auto& cmd : commands_for(name)) {
      auto first = run_cli(cmd);
      auto second = run_cli(cmd);
      EXPECT_EQ(first.exit_code, second.exit_code) << cmd;
      EXPECT_EQ(first.out, second.out) << cmd;
      EXPECT_EQ(first.exit_code, 0) << cmd;
    }
  }
}

}  // namespace
}  // namespace flare
