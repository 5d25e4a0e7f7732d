#pragma once

#include <algorithm>
#include <string>
#include <tuple>
#include <vector>

#include "flare/source.hpp"

namespace flare {

enum class PropertyKind { receive, send, effect, share };

enum class SubjectKind {
  parameter,
  event_trigger,
  timer_trigger,
  call_trigger,
  return_value,
  message,
  hardware_command,
  local_state,
  global_state,
  hardware_state,
};

enum class AccessMode { read, write, read_write, none };

inline const char* to_string(PropertyKind k) {
  switch (k) {
    case PropertyKind::receive: return "receive";
    case PropertyKind::send: return "send";
    case PropertyKind::effect: return "effect";
    case PropertyKind::share: return "share";
  }
  return "?";
}

inline const char* to_string(SubjectKind k) {
  switch (k) {
    case SubjectKind::parameter: return "parameter";
    case SubjectKind::event_trigger: return "event-trigger";
    case SubjectKind::timer_trigger: return "timer-trigger";
    case SubjectKind::call_trigger: return "call-trigger";
    case SubjectKind::return_value: return "return-value";
    case SubjectKind::message: return "message";
    case SubjectKind::hardware_command: return "hardware-command";
    case SubjectKind::local_state: return "local-state";
    case SubjectKind::global_state: return "global-state";
    case SubjectKind::hardware_state: return "hardware-state";
  }
  return "?";
}

inline const char* to_string(AccessMode m) {
  switch (m) {
    case AccessMode::read: return "read";
    case AccessMode::write: return "write";
    case AccessMode::read_write: return "read-write";
    case AccessMode::none: return "n/a";
  }
  return "?";
}

inline AccessMode merge_modes(AccessMode a, AccessMode b) {
  if (a == b) return a;
  if (a == AccessMode::none) return b;
  if (b == AccessMode::none) return a;
  return AccessMode::read_write;
}

/// True when the (kind, subject-kind) combination is allowed.
inline bool well_formed(PropertyKind kind, SubjectKind subject) {
  switch (kind) {
    case PropertyKind::effect: return subject == SubjectKind::local_state;
    case PropertyKind::share:
      return subject == SubjectKind::global_state || subject == SubjectKind::hardware_state;
    case PropertyKind::receive:
      return subject == SubjectKind::parameter || subject == SubjectKind::event_trigger ||
             subject == SubjectKind::timer_trigger || subject == SubjectKind::call_trigger ||
             subject == SubjectKind::message;
    case PropertyKind::send:
      return subject == SubjectKind::return_value || subject == SubjectKind::message ||
             subject == SubjectKind::hardware_command;
  }
  return false;
}

struct PropertyEntry {
  PropertyKind kind;
  SubjectKind subject_kind;
  std::string subject;
  AccessMode mode = AccessMode::none;
  SourceSpan span;  // evidencing syntax (first occurrence)

  auto key() const { return std::tie(subject_kind, subject); }
  friend bool operator==(const PropertyEntry&, const PropertyEntry&) = default;
};

/// The four property lists. Each list is de-duplicated on (subject-kind,
/// subject-name); repeated accesses merge their modes and keep the earliest span.
class PropertySet {
 public:
  std::vector<PropertyEntry> receives;
  std::vector<PropertyEntry> sends;
  std::vector<PropertyEntry> effects;
  std::vector<PropertyEntry> shares;

  std::vector<PropertyEntry>& list(PropertyKind k) {
    switch (k) {
      case PropertyKind::receive: return receives;
      case PropertyKind::send: return sends;
      case PropertyKind::effect: return effects;
      case PropertyKind::share: break;
    }
    return shares;
  }
  const std::vector<PropertyEntry>& list(PropertyKind k) const {
    return const_cast<PropertySet*>(this)->list(k);
  }

  /// Adds an entry, merging with an existing one of the same key.
  void add(PropertyEntry e) {
    if (!well_formed(e.kind, e.subject_kind))
      throw InvariantError(std::string("ill-formed property entry: ") + to_string(e.kind) + " of " +
                           to_string(e.subject_kind));
    auto& l = list(e.kind);
    for (auto& existing : l) {
      if (existing.key() == e.key()) {
        existing.mode = merge_modes(existing.mode, e.mode);
        if (e.span.start() < existing.span.start()) existing.span = e.span;
        return;
      }
    }
    l.push_back(std::move(e));
  }

  void add_all(const PropertySet& other) {
    for (auto k : {PropertyKind::receive, PropertyKind::send, PropertyKind::effect, PropertyKind::share})
      for (const auto& e : other.list(k)) add(e);
  }

  const PropertyEntry* find(PropertyKind k, SubjectKind sk, const std::string& subject) const {
    for (const auto& e : list(k))
      if (e.subject_kind == sk && e.subject == subject) return &e;
    return nullptr;
  }

  std::size_t size() const { return receives.size() + sends.size() + effects.size() + shares.size(); }
  bool empty() const { return size() == 0; }

  /// Orders every list by (span start, subject-kind, subject).
  void canonicalize() {
    for (auto k : {PropertyKind::receive, PropertyKind::send, PropertyKind::effect, PropertyKind::share}) {
      auto& l = list(k);
      std::stable_sort(l.begin(), l.end(), [](const PropertyEntry& a, const PropertyEntry& b) {
        return std::tuple(a.span.start(), a.subject_kind, a.subject) <
               std::tuple(b.span.start(), b.subject_kind, b.subject);
      });
    }
  }

  friend bool operator==(const PropertySet&, const PropertySet&) = default;
};

inline constexpr PropertyKind kAllPropertyKinds[] = {PropertyKind::receive, PropertyKind::send,
                                                     PropertyKind::effect, PropertyKind::share};

}  // namespace flare
