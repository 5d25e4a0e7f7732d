#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "flare/ast.hpp"
#include "flare/property_set.hpp"
#include "flare/symbols.hpp"

namespace flare {

/// Element granularity. 0 = statement, 1 = segment, 2 = system; composition
/// may create higher levels.
struct Scale {
  int level = 0;

  static constexpr Scale statement() { return {0}; }
  static constexpr Scale segment() { return {1}; }
  static constexpr Scale system() { return {2}; }

  std::string name() const {
    switch (level) {
      case 0: return "statement";
      case 1: return "segment";
      case 2: return "system";
      default: return "level" + std::to_string(level);
    }
  }

  friend auto operator<=>(const Scale&, const Scale&) = default;
};

enum class ScalePolicy { statement, segment, system, all };

inline std::optional<ScalePolicy> parse_scale_policy(const std::string& s) {
  if (s == "statement") return ScalePolicy::statement;
  if (s == "segment") return ScalePolicy::segment;
  if (s == "system") return ScalePolicy::system;
  if (s == "all") return ScalePolicy::all;
  return std::nullopt;
}

inline const char* to_string(ScalePolicy p) {
  switch (p) {
    case ScalePolicy::statement: return "statement";
    case ScalePolicy::segment: return "segment";
    case ScalePolicy::system: return "system";
    case ScalePolicy::all: return "all";
  }
  return "?";
}

/// `"{scale-name}:{file}:{start_line}:{start_col}"`
inline std::string element_id(Scale scale, const SourceSpan& span) {
  return scale.name() + ":" + span.file + ":" + std::to_string(span.start_line) + ":" +
         std::to_string(span.start_col);
}

inline std::string system_id(const std::string& file) { return "system:" + file + ":1:1"; }

enum class ElementKind { statement, segment, system, composite };

struct Element {
  std::string id;
  std::string name;
  Scale scale;
  SourceSpan span;
  ElementKind kind = ElementKind::statement;
  std::optional<std::string> parent;
  std::vector<std::string> constituents;
  PropertySet properties;

  // Source provenance (null for the system element and composites).
  const Stmt* stmt = nullptr;
  std::optional<SegmentRef> segment;

  // Positions owned by this element. The top-level script is not contiguous in
  // the file (definitions may sit between its statements), so containment is
  // tested against these regions rather than `span`.
  std::vector<SourceSpan> regions;

  bool contains(SourcePos p) const {
    return std::any_of(regions.begin(), regions.end(), [&](const SourceSpan& r) { return r.contains(p); });
  }
  bool source_derived() const { return kind == ElementKind::statement || kind == ElementKind::segment; }
};

class NotFound : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Containment tree: system -> segments -> statements -> nested statements.
/// Elements are stored in pre-order.
class ElementTree {
 public:
  const Element& root() const { return elements_.front(); }
  const std::vector<Element>& elements() const { return elements_; }
  ScalePolicy policy() const { return policy_; }
  const std::string& file() const { return file_; }

  const Element* find(const std::string& id) const {
    auto it = index_.find(id);
    return it == index_.end() ? nullptr : &elements_[it->second];
  }
  const Element& at(const std::string& id) const {
    const Element* e = find(id);
    if (!e) throw NotFound("no element with id '" + id + "'");
    return *e;
  }
  Element& mutable_at(const std::string& id) { return elements_[index_.at(id)]; }

  const Element* parent(const Element& e) const { return e.parent ? find(*e.parent) : nullptr; }

  std::vector<const Element*> children(const Element& e) const {
    std::vector<const Element*> out;
    for (const auto& c : e.constituents) out.push_back(&at(c));
    return out;
  }

  std::vector<const Element*> at_scale(Scale s) const {
    std::vector<const Element*> out;
    for (const auto& e : elements_)
      if (e.scale == s && e.source_derived()) out.push_back(&e);
    return out;
  }
  std::vector<const Element*> segments() const { return at_scale(Scale::segment()); }
  std::vector<const Element*> statements() const { return at_scale(Scale::statement()); }

  const Element* segment_named(const std::string& name) const {
    for (const auto& e : elements_)
      if (e.kind == ElementKind::segment && e.name == name) return &e;
    return nullptr;
  }
  const Element* function_segment(const std::string& fn) const {
    for (const auto& e : elements_)
      if (e.kind == ElementKind::segment && e.segment->kind == SegmentKind::function && e.name == fn)
        return &e;
    return nullptr;
  }
  std::vector<const Element*> handlers_for(const std::string& event) const {
    std::vector<const Element*> out;
    for (const auto& e : elements_)
      if (e.kind == ElementKind::segment && e.segment->kind == SegmentKind::handler &&
          e.segment->handler->event == event)
        out.push_back(&e);
    return out;
  }

  /// The statement element for an AST statement.
  const Element& element_of(const Stmt& s) const { return at(element_id(Scale::statement(), s.span)); }

  /// The segment that (transitively) owns an element; the element itself for segments.
  const Element* enclosing_segment(const Element& e) const {
    const Element* cur = &e;
    while (cur && cur->kind != ElementKind::segment) cur = parent(*cur);
    return cur;
  }

  /// True when `e` or one of its ancestors is in `members`.
  bool inside(const Element& e, const std::set<std::string>& members) const {
    for (const Element* cur = &e; cur; cur = parent(*cur))
      if (members.count(cur->id)) return true;
    return false;
  }

  /// Smallest element owning the position. Descends from the root, at each
  /// level picking the tightest child that contains the position.
  const Element& element_at(SourcePos pos) const {
    const Element* best = nullptr;
    const Element* cur = &root();
    for (;;) {
      const Element* next = nullptr;
      for (const auto& cid : cur->constituents) {
        const Element& c = at(cid);
        if (!c.contains(pos)) continue;
        if (!next || next->span.contains(c.span)) next = &c;
      }
      if (!next) break;
      best = next;
      cur = next;
    }
    if (!best)
      throw NotFound("no element at " + file_ + ":" + std::to_string(pos.line) + ":" +
                     std::to_string(pos.col));
    return *best;
  }

  /// Elements in view under the tree's scale-selection policy.
  bool in_view(const Element& e) const {
    switch (policy_) {
      case ScalePolicy::statement: return e.scale == Scale::statement();
      case ScalePolicy::segment: return e.scale == Scale::segment();
      case ScalePolicy::system: return e.kind == ElementKind::system;
      case ScalePolicy::all: return true;
    }
    return true;
  }

 private:
  friend class ElementBuilder;

  std::string file_;
  ScalePolicy policy_ = ScalePolicy::all;
  std::vector<Element> elements_;
  std::map<std::string, std::size_t> index_;
};

class ElementBuilder {
 public:
  ElementBuilder(const Program& program, ScalePolicy policy) : program_(program) {
    tree_.file_ = program.file;
    tree_.policy_ = policy;
  }

  ElementTree build() {
    auto segs = enumerate_segments(program_);

    Element root;
    root.id = system_id(program_.file);
    root.name = "system";
    root.scale = Scale::system();
    root.kind = ElementKind::system;
    root.span = SourceSpan{program_.file, 1, 1, 1, 1};
    if (!program_.items.empty()) root.span = merge(root.span, program_.items.back().span);
    add(std::move(root));

    for (const auto& seg : segs) {
      Element e;
      e.id = element_id(Scale::segment(), seg.span);
      e.name = seg.name;
      e.scale = Scale::segment();
      e.kind = ElementKind::segment;
      e.span = seg.span;
      e.parent = tree_.elements_.front().id;
      e.segment = seg;
      if (seg.kind == SegmentKind::script) {
        for (const Stmt* s : seg.stmts) e.regions.push_back(s->span);
      } else {
        e.regions.push_back(seg.span);
      }
      tree_.elements_.front().constituents.push_back(e.id);
      for (const auto& r : e.regions) tree_.elements_.front().regions.push_back(r);
      std::string id = e.id;
      add(std::move(e));
      for (const Stmt* s : seg.stmts) add_statement(*s, id);
    }
    return std::move(tree_);
  }

 private:
  const Program& program_;
  ElementTree tree_;

  void add(Element e) {
    if (tree_.index_.count(e.id)) throw InvariantError("duplicate element id " + e.id);
    tree_.index_[e.id] = tree_.elements_.size();
    tree_.elements_.push_back(std::move(e));
  }

  void add_statement(const Stmt& s, const std::string& parent_id) {
    Element e;
    e.id = element_id(Scale::statement(), s.span);
    e.name = "stmt@" + std::to_string(s.span.start_line);
    e.scale = Scale::statement();
    e.kind = ElementKind::statement;
    e.span = s.span;
    e.parent = parent_id;
    e.stmt = &s;
    e.regions.push_back(s.span);
    tree_.mutable_at(parent_id).constituents.push_back(e.id);
    std::string id = e.id;
    add(std::move(e));
    for (const Block* b : inline_blocks(s))
      for (const auto& inner : b->stmts) add_statement(inner, id);
  }
};

/// Builds the containment tree. All scales are always materialised; `policy`
/// selects which elements are in view for reports.
inline ElementTree identify_elements(const Program& program, const SymbolTable& /*symbols*/,
                                     ScalePolicy policy = ScalePolicy::all) {
  return ElementBuilder(program, policy).build();
}

inline const Element& element_at(const ElementTree& tree, SourcePos pos) { return tree.element_at(pos); }

}  // namespace flare
