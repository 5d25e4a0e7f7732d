#pragma once

#include <openssl/evp.h>

#include <cstdio>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "flare/analysis.hpp"
#include "flare/unparse.hpp"

namespace flare {

inline constexpr const char* kSchemaVersion = "flare-v2.0";

inline std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw InvariantError("sha256 digest failed");
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

/// Blocks, Segments and Macro for elements by scale; Relationships for bindings.
inline std::string v1_tier_label(const Element& e) {
  if (e.scale.level <= 0) return "Blocks";
  if (e.scale.level == 1) return "Segments";
  return "Macro";
}
inline std::string v1_tier_label(const Binding&) { return "Relationships"; }

/// The slice of an analysis that gets serialized: elements in view (the
/// system element is always present) and the bindings among them.
struct AnalysisDocument {
  const Analysis* analysis = nullptr;
  std::string file;
  std::string digest;
  ScalePolicy scale = ScalePolicy::all;
  std::vector<const Element*> elements;
  std::vector<const Binding*> bindings;
  std::vector<const Warning*> warnings;
  std::vector<const ValueChain*> chains;
  std::vector<const CompositionResult*> compositions;
};

inline AnalysisDocument make_document(const Analysis& a) {
  AnalysisDocument d;
  d.analysis = &a;
  d.file = a.tree.file();
  d.digest = sha256_hex(a.source);
  d.scale = a.tree.policy();
  std::set<std::string> ids;
  for (const auto& e : a.tree.elements()) {
    if (e.kind == ElementKind::system || a.tree.in_view(e)) {
      d.elements.push_back(&e);
      ids.insert(e.id);
    }
  }
  for (const auto& b : a.bindings)
    if (ids.count(b.from) && ids.count(b.to)) d.bindings.push_back(&b);
  for (const auto& w : a.warnings)
    if (ids.count(w.element)) d.warnings.push_back(&w);
  for (const auto& c : a.chains)
    if (ids.count(c.source) && ids.count(c.via) && ids.count(c.sink)) d.chains.push_back(&c);
  for (const auto& c : a.compositions) d.compositions.push_back(&c);
  return d;
}

namespace detail {

inline nlohmann::json entry_json(const PropertyEntry& e) {
  return {{"subject_kind", to_string(e.subject_kind)},
          {"subject", e.subject},
          {"mode", to_string(e.mode)},
          {"span", span_json(e.span)}};
}

inline nlohmann::json properties_json(const PropertySet& p) {
  nlohmann::json j;
  auto list = [](const std::vector<PropertyEntry>& l) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& e : l) arr.push_back(entry_json(e));
    return arr;
  };
  j["receives"] = list(p.receives);
  j["sends"] = list(p.sends);
  j["effects"] = list(p.effects);
  j["shares"] = list(p.shares);
  return j;
}

inline nlohmann::json entry_ref_json(const EntryRef& r) {
  return {{"element", r.element},
          {"property", to_string(r.kind)},
          {"subject_kind", to_string(r.subject_kind)},
          {"subject", r.subject},
          {"mode", to_string(r.mode)}};
}

inline nlohmann::json element_json(const Element& e) {
  nlohmann::json j;
  j["id"] = e.id;
  j["name"] = e.name;
  j["scale"] = e.scale.level;
  j["scale_name"] = e.scale.name();
  j["span"] = span_json(e.span);
  j["parent"] = e.parent ? nlohmann::json(*e.parent) : nlohmann::json(nullptr);
  j["constituents"] = e.constituents;
  j["properties"] = properties_json(e.properties);
  j["v1_tier"] = v1_tier_label(e);
  return j;
}

inline nlohmann::json binding_json(const Binding& b) {
  nlohmann::json j;
  j["id"] = b.id;
  j["from"] = b.from;
  j["to"] = b.to;
  j["dimension"] = to_string(b.dimension);
  j["subtype"] = b.subtype ? nlohmann::json(to_string(*b.subtype)) : nlohmann::json(nullptr);
  if (b.payload)
    j["payload"] = {{"kind", to_string(b.payload->kind)},
                    {"from", entry_ref_json(b.payload->from_entry)},
                    {"to", entry_ref_json(b.payload->to_entry)}};
  else
    j["payload"] = nullptr;
  j["condition_span"] = b.condition ? span_json(*b.condition) : nlohmann::json(nullptr);
  j["condition_text"] = b.condition_text;
  j["evidence"] = span_json(b.evidence);
  j["stems"] = question_stems(b);
  j["v1_tier"] = v1_tier_label(b);
  return j;
}

inline nlohmann::json composition_json(const CompositionResult& c) {
  nlohmann::json j;
  j["id"] = c.composite.id;
  j["name"] = c.composite.name;
  j["scale"] = c.composite.scale.level;
  j["scale_name"] = c.composite.scale.name();
  j["members"] = c.composite.constituents;
  j["parent"] = c.composite.parent ? nlohmann::json(*c.composite.parent) : nlohmann::json(nullptr);
  j["span"] = span_json(c.composite.span);
  j["absorbed_bindings"] = c.absorbed;
  j["external_bindings"] = c.external_bindings;
  j["promoted"] = c.promoted;
  j["properties"] = properties_json(c.retained);
  j["counts"] = {{"member_entries", c.member_entries},
                 {"absorbed", c.absorbed_entries},
                 {"promoted", c.promoted_entries},
                 {"retained", c.retained_entries}};
  j["v1_tier"] = v1_tier_label(c.composite);
  return j;
}

}  // namespace detail

/// Canonical JSON: sorted keys, lists in source order, 2-space indent, LF.
/// Throws InvariantError when a binding names an element not in the document.
inline std::string to_json(const AnalysisDocument& d) {
  std::set<std::string> ids;
  for (const Element* e : d.elements) ids.insert(e->id);
  for (const Binding* b : d.bindings)
    if (!ids.count(b->from) || !ids.count(b->to))
      throw InvariantError("binding " + b->id + " references an element outside the document");

  nlohmann::json j;
  j["schema_version"] = kSchemaVersion;
  j["source"] = {{"file", d.file}, {"sha256", d.digest}};
  j["scale"] = to_string(d.scale);
  j["elements"] = nlohmann::json::array();
  for (const Element* e : d.elements) j["elements"].push_back(detail::element_json(*e));
  j["bindings"] = nlohmann::json::array();
  for (const Binding* b : d.bindings) j["bindings"].push_back(detail::binding_json(*b));
  j["warnings"] = nlohmann::json::array();
  for (const Warning* w : d.warnings)
    j["warnings"].push_back({{"severity", w->severity},
                             {"code", w->code},
                             {"message", w->message},
                             {"span", span_json(w->span)},
                             {"element", w->element}});
  j["value_chains"] = nlohmann::json::array();
  for (const ValueChain* c : d.chains)
    j["value_chains"].push_back({{"source", c->source}, {"via", c->via}, {"sink", c->sink}, {"variable", c->variable}});
  j["compositions"] = nlohmann::json::array();
  for (const CompositionResult* c : d.compositions) j["compositions"].push_back(detail::composition_json(*c));
  return j.dump(2) + "\n";
}

// ------------------------------------------------------------------------ DOT

namespace detail {

inline std::string dot_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out += c;
  }
  return out;
}

inline std::string payload_label(const CommPayload& p) {
  if (p.kind == CommKind::share) return "share " + p.from_entry.subject;
  return std::string(to_string(p.from_entry.subject_kind)) + " " + p.from_entry.subject;
}

}  // namespace detail

/// Elements as nodes, bindings as edges. Sequential edges are plain, branch
/// edges carry their condition, event edges are dashed and communicative
/// edges are dotted with a payload label.
inline std::string to_dot(const AnalysisDocument& d) {
  std::set<std::string> warned;
  for (const Warning* w : d.warnings) warned.insert(w->element);

  std::ostringstream out;
  out << "digraph flare {\n";
  out << "  rankdir=TB;\n";
  out << "  node [shape=box, fontname=\"Helvetica\"];\n";
  for (const Element* e : d.elements) {
    std::string label = e->name + "\n(" + e->scale.name() + ")";
    out << "  \"" << detail::dot_escape(e->id) << "\" [label=\"" << detail::dot_escape(label);
    if (warned.count(e->id)) out << "\\n[!] warning\", color=red";
    else out << "\"";
    out << "];\n";
  }
  for (const Binding* b : d.bindings) {
    out << "  \"" << detail::dot_escape(b->from) << "\" -> \"" << detail::dot_escape(b->to) << "\" [";
    if (b->dimension == Dimension::communicative) {
      out << "style=dotted, label=\"" << detail::dot_escape(detail::payload_label(*b->payload)) << "\"";
    } else {
      switch (*b->subtype) {
        case CtSubtype::sequential: out << "style=solid"; break;
        case CtSubtype::branch:
          out << "style=solid, label=\"" << detail::dot_escape(b->condition ? b->condition_text : "call") << "\"";
          break;
        case CtSubtype::event: out << "style=dashed"; break;
      }
    }
    out << "];\n";
  }
  out << "}\n";
  return out.str();
}

// ------------------------------------------------------------------- Markdown

namespace detail {

inline std::string entry_text(const PropertyEntry& e) {
  std::string s = std::string(to_string(e.subject_kind)) + " " + e.subject;
  if (e.mode != AccessMode::none) s += " (" + std::string(to_string(e.mode)) + ")";
  return s;
}

inline std::string cell(const std::vector<PropertyEntry>& l) {
  if (l.empty()) return "none";
  std::string s;
  for (std::size_t i = 0; i < l.size(); ++i) {
    if (i) s += "; ";
    s += entry_text(l[i]);
  }
  return s;
}

inline std::string binding_text(const Binding& b) {
  std::string kind = b.dimension == Dimension::communicative
                         ? "communicative (" + std::string(to_string(b.payload->kind)) + ", " +
                               payload_label(*b.payload) + ")"
                         : std::string(to_string(*b.subtype));
  std::string s = "`" + b.id + "` " + kind + ": `" + b.from + "` -> `" + b.to + "`";
  if (b.condition) s += " when `" + b.condition_text + "`";
  return s;
}

}  // namespace detail

/// A question-stem sheet: the four-property table for every segment, then a
/// section per segment listing the bindings that touch it with their stems.
inline std::string to_markdown(const AnalysisDocument& d) {
  std::ostringstream out;
  out << "# FLARE analysis: " << d.file << "\n\n";
  std::vector<const Element*> segments;
  for (const Element* e : d.elements)
    if (e->kind == ElementKind::segment) segments.push_back(e);
  if (segments.empty()) {
    out << "No segments in view.\n";
    return out.str();
  }

  // Functions get their own table so it lines up with the per-segment
  // property table used in class; handlers, timers and the script follow.
  auto table = [&](const std::string& title, bool functions) {
    std::vector<const Element*> rows;
    for (const Element* s : segments)
      if ((s->segment->kind == SegmentKind::function) == functions) rows.push_back(s);
    if (rows.empty()) return;
    out << "## " << title << "\n\n";
    out << "| Segment | Receives | Sends | Effects | Shares |\n";
    out << "|---|---|---|---|---|\n";
    for (const Element* s : rows) {
      const auto& p = s->properties;
      out << "| " << s->name << " | " << detail::cell(p.receives) << " | " << detail::cell(p.sends) << " | "
          << detail::cell(p.effects) << " | " << detail::cell(p.shares) << " |\n";
    }
    out << "\n";
  };
  table("Function properties", true);
  table("Handler, timer and script properties", false);

  const auto& tree = d.analysis->tree;
  for (const Element* s : segments) {
    out << "## Segment " << s->name << "\n\n";
    out << "`" << s->id << "`\n\n";
    for (const auto& q : question_stems(*s)) out << "- " << q << "\n";
    std::vector<const Binding*> touching;
    for (const Binding* b : d.bindings) {
      const Element* from = tree.find(b->from);
      const Element* to = tree.find(b->to);
      bool in_from = from && tree.enclosing_segment(*from) == s;
      bool in_to = to && tree.enclosing_segment(*to) == s;
      if (in_from || in_to) touching.push_back(b);
    }
    out << "\n### Bindings\n\n";
    if (touching.empty()) out << "None.\n";
    for (const Binding* b : touching) {
      out << "- " << detail::binding_text(*b) << "\n";
      for (const auto& q : question_stems(*b)) out << "  - " << q << "\n";
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace flare
