#pragma once

#include <memory>
#include <string>
#include <vector>

#include "flare/bindings.hpp"
#include "flare/compose.hpp"
#include "flare/elements.hpp"
#include "flare/parser.hpp"
#include "flare/properties.hpp"
#include "flare/symbols.hpp"

namespace flare {

/// Everything the static pipeline derives from one source file. The element
/// tree points into the program, so the program is held by pointer and the
/// analysis is move-only.
struct Analysis {
  std::string source;
  std::unique_ptr<Program> program;
  SymbolTable symbols;
  ElementTree tree;
  std::vector<Binding> bindings;
  std::vector<Warning> warnings;
  std::vector<ValueChain> chains;
  std::vector<CompositionResult> compositions;
  CompositeRegistry composites;

  Analysis() = default;
  Analysis(Analysis&&) = default;
  Analysis& operator=(Analysis&&) = default;
  Analysis(const Analysis&) = delete;
  Analysis& operator=(const Analysis&) = delete;

  std::vector<Binding> causal_temporal() const {
    std::vector<Binding> out;
    for (const auto& b : bindings)
      if (b.dimension == Dimension::causal_temporal) out.push_back(b);
    return out;
  }

  /// Composes `member_ids` and records the result.
  const CompositionResult& compose(const std::vector<std::string>& member_ids, const std::string& name) {
    compositions.push_back(flare::compose(tree, bindings, symbols, member_ids, name, &composites));
    composites.add(compositions.back());
    return compositions.back();
  }
};

/// parse -> resolve -> identify -> properties -> bindings. The system
/// element's properties are the composition of all its segments.
inline Analysis analyze(std::string source, const std::string& file, ScalePolicy policy = ScalePolicy::all) {
  Analysis a;
  a.source = std::move(source);
  a.program = std::make_unique<Program>(parse(a.source, file));
  a.symbols = resolve_names(*a.program);
  a.tree = identify_elements(*a.program, a.symbols, policy);
  compute_all_properties(a.tree, a.symbols);

  auto ct = extract_causal_temporal(a.tree);
  a.bindings = std::move(ct.bindings);
  a.warnings = std::move(ct.warnings);
  auto comm = extract_communicative(a.tree);
  a.bindings.insert(a.bindings.end(), comm.begin(), comm.end());
  number_bindings(a.bindings);
  a.chains = value_chains(a.tree);

  std::vector<std::string> segment_ids;
  for (const Element* s : a.tree.segments()) segment_ids.push_back(s->id);
  if (!segment_ids.empty()) {
    auto system = flare::compose(a.tree, a.bindings, a.symbols, segment_ids, "system");
    a.tree.mutable_at(a.tree.root().id).properties = system.retained;
  }
  return a;
}

}  // namespace flare
