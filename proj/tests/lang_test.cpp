#include <gtest/gtest.h>

#include "flare/flare.hpp"
#include "support/program_gen.hpp"
#include "support/test_util.hpp"

namespace flare {
namespace {

std::vector<TokenKind> kinds(const std::vector<Token>& tokens) {
  std::vector<TokenKind> out;
  for (const auto& t : tokens) out.push_back(t.kind);
  return out;
}

TEST(Tokenize, PrintCall) {
  auto tokens = tokenize("print(1);");
  EXPECT_EQ(kinds(tokens), (std::vector<TokenKind>{TokenKind::kw_print, TokenKind::lparen,
                                                   TokenKind::int_literal, TokenKind::rparen,
                                                   TokenKind::semicolon}));
  EXPECT_EQ(tokens[2].int_value, 1);
  EXPECT_EQ(tokens[2].span.start_col, 7);
}

TEST(Tokenize, EmptyInputHasNoTokens) { EXPECT_TRUE(tokenize("").empty()); }

TEST(Tokenize, RejectsCharacterOutsideAlphabet) {
  try {
    tokenize("var x = @;", "t.flare");
    FAIL() << "expected LexError";
  } catch (const LexError& e) {
    EXPECT_EQ(e.span().start_line, 1);
    EXPECT_EQ(e.span().start_col, 9);
  }
}

TEST(Tokenize, CommentsAndWhitespaceProduceNothing) {
  auto tokens = tokenize("# heading\n  x = 1; # trailing\n");
  ASSERT_EQ(tokens.size(), 4u);
  EXPECT_EQ(tokens[0].text, "x");
  EXPECT_EQ(tokens[0].span.start_line, 2);
  EXPECT_EQ(tokens[0].span.start_col, 3);
}

TEST(Tokenize, TwoCharacterOperators) {
  EXPECT_EQ(kinds(tokenize("== != <= >= < > =")),
            (std::vector<TokenKind>{TokenKind::eq, TokenKind::ne, TokenKind::le, TokenKind::ge, TokenKind::lt,
                                    TokenKind::gt, TokenKind::assign}));
}

TEST(Tokenize, KeywordsAreNotIdentifiers) {
  auto tokens = tokenize("when whenever hw hwx");
  EXPECT_EQ(kinds(tokens), (std::vector<TokenKind>{TokenKind::kw_when, TokenKind::identifier, TokenKind::kw_hw,
                                                   TokenKind::identifier}));
}

TEST(Tokenize, StringEscapes) {
  auto tokens = tokenize(R"("a\"b\\c\n")");
  ASSERT_EQ(tokens.size(), 1u);
  EXPECT_EQ(tokens[0].text, "a\"b\\c\n");
}

TEST(Tokenize, Errors) {
  EXPECT_THROW(tokenize("\"open"), LexError);
  EXPECT_THROW(tokenize(R"("bad\q")"), LexError);
  EXPECT_THROW(tokenize("99999999999999999999"), LexError);
  EXPECT_THROW(tokenize("x = 1 ! 2;"), LexError);
  EXPECT_THROW(tokenize("var caf\xc3\xa9 = 1;"), LexError);
  EXPECT_NO_THROW(tokenize("print(\"caf\xc3\xa9\"); # \xc3\xa9"));
}

TEST(Tokenize, SpansCoverLexemes) {
  auto tokens = tokenize("global threshold = 50;");
  ASSERT_EQ(tokens.size(), 5u);
  EXPECT_EQ(tokens[1].span.start_col, 8);
  EXPECT_EQ(tokens[1].span.end_col, 16);
  EXPECT_EQ(tokens[3].int_value, 50);
}

TEST(Parse, TimerProgramKeepsSourceOrder) {
  auto p = parse("after 1000 { print(\"morning\"); } print(\"Good\");");
  ASSERT_EQ(p.items.size(), 2u);
  auto* first = std::get_if<Stmt>(&p.items[0].node);
  auto* second = std::get_if<Stmt>(&p.items[1].node);
  ASSERT_TRUE(first && second);
  ASSERT_TRUE(std::holds_alternative<After>(first->node));
  EXPECT_EQ(std::get<IntLit>(std::get<After>(first->node).delay_ms.node).value, 1000);
  ASSERT_TRUE(std::holds_alternative<Print>(second->node));
}

TEST(Parse, EmptyProgram) { EXPECT_TRUE(parse("").items.empty()); }

TEST(Parse, UnclosedParameterListExpectsNameOrParen) {
  try {
    parse("func f( {");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(e.expected().find("parameter name or ')'"), std::string::npos) << e.what();
    EXPECT_EQ(e.span().start_col, 9);
  }
}

TEST(Parse, ReturnOnlyInsideFunctions) {
  EXPECT_THROW(parse("return 1;"), ParseError);
  EXPECT_THROW(parse("when go { return; }"), ParseError);
  EXPECT_THROW(parse("func f() { after 1 { return; } }"), ParseError);
  EXPECT_NO_THROW(parse("func f() { if true { return 1; } return 2; }"));
}

TEST(Parse, PrecedenceOrLoosestThenAnd) {
  auto p = parse("x = 1 + 2 * 3 < 4 or not true and false;");
  EXPECT_EQ(unparse(p), "x = (((1 + (2 * 3)) < 4) or ((not true) and false));\n");
}

TEST(Parse, ElseIfIsNestedIf) {
  auto p = parse("if a { print(1); } else if b { print(2); } else { print(3); }");
  const auto& outer = std::get<If>(std::get<Stmt>(p.items[0].node).node);
  ASSERT_TRUE(outer.else_block.has_value());
  ASSERT_EQ(outer.else_block->stmts.size(), 1u);
  EXPECT_TRUE(std::holds_alternative<If>(outer.else_block->stmts[0].node));
}

TEST(Parse, HardwareWriteNeedsOneValue) {
  EXPECT_THROW(parse("hw.write(\"led\");"), ParseError);
  EXPECT_THROW(parse("hw.write(\"led\", 1, 2);"), ParseError);
  EXPECT_NO_THROW(parse("hw.write(\"led\", hw.read(\"light\"));"));
}

TEST(Parse, SyntaxErrorsCarrySpans) {
  for (const char* bad : {"var = 1;", "print(1)", "if { }", "func () {}", "when { }", "x = ;", "emit;"}) {
    EXPECT_THROW(parse(bad), ParseError) << bad;
  }
}

TEST(Parse, StatementSpansNestInsideBlocks) {
  for (const auto& name : testing::corpus_names()) {
    auto p = parse(testing::read_text(testing::source_dir() + "/" + testing::corpus_file(name)), name);
    std::function<void(const Block&)> check = [&](const Block& b) {
      for (const auto& s : b.stmts) {
        EXPECT_TRUE(b.span.contains(s.span)) << name << " " << to_string(s.span);
        for (const Block* inner : inline_blocks(s)) check(*inner);
        if (auto* a = std::get_if<After>(&s.node)) check(a->body);
      }
    };
    for (const auto& item : p.items) {
      if (auto* f = std::get_if<FuncDef>(&item.node)) check(f->body);
      if (auto* h = std::get_if<Handler>(&item.node)) check(h->body);
    }
  }
}

TEST(RoundTrip, CorpusPrograms) {
  for (const auto& name : testing::corpus_names()) {
    auto src = testing::read_text(testing::source_dir() + "/" + testing::corpus_file(name));
    auto p = parse(src, name);
    auto again = parse(unparse(p), name);
    EXPECT_TRUE(structurally_equal(p, again)) << name;
    EXPECT_EQ(unparse(again), unparse(p)) << name;
  }
}

TEST(RoundTrip, RandomPrograms) {
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    auto src = testing::ProgramGenerator(seed).generate();
    auto p = parse(src, "gen.flare");
    EXPECT_TRUE(structurally_equal(p, parse(unparse(p), "gen.flare"))) << src;
  }
}

TEST(AstJson, NodesCarryKindChildrenAndSpan) {
  auto j = ast_to_json(parse("print(1);", "p.flare"));
  EXPECT_EQ(j["kind"], "Program");
  const auto& stmt = j["children"][0];
  EXPECT_EQ(stmt["kind"], "Print");
  EXPECT_EQ(stmt["span"]["file"], "p.flare");
  EXPECT_EQ(stmt["span"]["line"], 1);
  EXPECT_EQ(stmt["span"]["col"], 1);
  EXPECT_EQ(stmt["span"]["end_col"], 9);
  EXPECT_EQ(stmt["children"][0]["kind"], "IntLiteral");
}

}  // namespace
}  // namespace flare
