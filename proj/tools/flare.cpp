// Command-line front end: parse, analyze, trace, check, stems.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "flare/flare.hpp"

namespace {

enum Exit { kOk = 0, kInputError = 1, kInvariant = 2, kDisagreement = 3, kUsage = 4 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError(path + ":1:1: error: cannot read file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_output(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw UsageError(out_path + ":1:1: error: cannot write file");
  out << text;
}

std::vector<std::string> split_ids(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

void report_error(const flare::Error& e) {
  std::cerr << flare::format_diagnostic(e.span(), e.category(), e.what()) << "\n";
}

flare::EventScript script_from(const std::string& path) {
  if (path.empty()) return {};
  try {
    return flare::load_event_script(path);
  } catch (const flare::ScriptError& e) {
    throw UsageError(path + ":1:1: error: " + e.what());
  }
}

int cmd_parse(const std::string& file, bool ast_json) {
  auto program = flare::parse(read_file(file), file);
  if (ast_json)
    std::cout << flare::ast_to_json(program).dump(2) << "\n";
  else
    std::cout << flare::unparse(program);
  return kOk;
}

int cmd_analyze(const std::string& file, const std::string& scale, const std::string& format,
                const std::vector<std::string>& compose_sets) {
  auto policy = flare::parse_scale_policy(scale);
  if (!policy) throw UsageError("error: unknown scale '" + scale + "'");
  auto a = flare::analyze(read_file(file), file, *policy);
  for (std::size_t i = 0; i < compose_sets.size(); ++i) {
    try {
      a.compose(split_ids(compose_sets[i]), "composite" + std::to_string(i + 1));
    } catch (const flare::CompositionError& e) {
      report_error(e);
      return kUsage;
    }
  }
  auto doc = flare::make_document(a);
  if (format == "json") std::cout << flare::to_json(doc);
  else if (format == "dot") std::cout << flare::to_dot(doc);
  else if (format == "md") std::cout << flare::to_markdown(doc);
  else throw UsageError("error: unknown format '" + format + "'");
  return kOk;
}

int cmd_trace(const std::string& file, const std::string& events, std::int64_t max_steps, const std::string& out) {
  if (max_steps <= 0) throw UsageError("error: --max-steps must be positive");
  auto source = read_file(file);
  auto program = flare::parse(source, file);
  auto symbols = flare::resolve_names(program);
  auto trace = flare::run(program, symbols, script_from(events), {.max_steps = max_steps});
  write_output(flare::to_jsonl(trace), out);
  if (trace.error) {
    report_error(*trace.error);
    return kInputError;
  }
  if (trace.reason == flare::StopReason::step_limit)
    std::cerr << file << ":1:1: note: step limit of " << max_steps << " reached; trace is partial\n";
  return kOk;
}

int cmd_check(const std::string& file, const std::string& events) {
  auto a = flare::analyze(read_file(file), file);
  auto trace = flare::run(*a.program, a.symbols, script_from(events));
  auto report = flare::check_agreement(trace, a.causal_temporal());
  auto j = flare::to_json(report);
  j["stop"] = flare::to_string(trace.reason);
  std::cout << j.dump(2) << "\n";
  for (const auto& u : report.unmatched)
    std::cerr << file << ":1:1: error: runtime transfer " << u.from << " -> " << u.to << " ("
              << flare::to_string(*u.subtype) << ") has no static binding\n";
  if (!report.agrees()) return kDisagreement;
  if (trace.error) {
    report_error(*trace.error);
    return kInputError;
  }
  return kOk;
}

int cmd_stems(const std::string& file) {
  auto a = flare::analyze(read_file(file), file);
  std::ostringstream out;
  for (const flare::Element* s : a.tree.segments()) {
    out << s->id << " (" << s->name << ")\n";
    for (const auto& q : flare::question_stems(*s)) out << "  " << q << "\n";
  }
  for (const auto& b : a.bindings) {
    out << b.id << " " << flare::to_string(b.dimension);
    if (b.subtype) out << " " << flare::to_string(*b.subtype);
    out << " " << b.from << " -> " << b.to << "\n";
    for (const auto& q : flare::question_stems(b)) out << "  " << q << "\n";
  }
  std::cout << out.str();
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"FLARE static analysis for FlareLang programs"};
  app.require_subcommand(1);

  std::string file, scale = "all", format = "json", events, out;
  std::vector<std::string> compose_sets;
  bool ast_json = false;
  std::int64_t max_steps = 100000;

  auto* parse = app.add_subcommand("parse", "Parse a program and print its canonical form");
  parse->add_option("FILE", file, "FlareLang source")->required();
  parse->add_flag("--ast-json", ast_json, "Print the syntax tree as JSON");

  auto* analyze = app.add_subcommand("analyze", "Elements, properties and bindings");
  analyze->add_option("FILE", file, "FlareLang source")->required();
  analyze->add_option("--scale", scale, "statement|segment|system|all");
  analyze->add_option("--format", format, "json|dot|md");
  analyze->add_option("--compose", compose_sets, "Comma-separated member ids (repeatable)");

  auto* trace = app.add_subcommand("trace", "Run the program and print its trace as JSON Lines");
  trace->add_option("FILE", file, "FlareLang source")->required();
  trace->add_option("--events", events, "Event script (JSON)");
  trace->add_option("--max-steps", max_steps, "Step limit");
  trace->add_option("--out", out, "Write the trace here instead of stdout");

  auto* check = app.add_subcommand("check", "Compare runtime transfers with static bindings");
  check->add_option("FILE", file, "FlareLang source")->required();
  check->add_option("--events", events, "Event script (JSON)");

  auto* stems = app.add_subcommand("stems", "Question stems per segment and binding");
  stems->add_option("FILE", file, "FlareLang source")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*parse) return cmd_parse(file, ast_json);
    if (*analyze) return cmd_analyze(file, scale, format, compose_sets);
    if (*trace) return cmd_trace(file, events, max_steps, out);
    if (*check) return cmd_check(file, events);
    if (*stems) return cmd_stems(file);
  } catch (const UsageError& e) {
    std::cerr << e.what() << "\n";
    return kUsage;
  } catch (const flare::Error& e) {
    report_error(e);
    return kInputError;
  } catch (const flare::InvariantError& e) {
    std::cerr << file << ":1:1: internal error: " << e.what() << "\n";
    return kInvariant;
  } catch (const flare::NotFound& e) {
    std::cerr << file << ":1:1: internal error: " << e.what() << "\n";
    return kInvariant;
  }
  return kUsage;
}
