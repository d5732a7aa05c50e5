#pragma once

// Canonical dialogue data model: slot references, cumulative belief states,
// turns with provenance, dialogues, ontologies and datasets.

#include <algorithm>
#include <cctype>
#include <compare>
#include <cstddef>
#include <initializer_list>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "turnback/errors.hpp"

namespace turnback {

// Lowercase, trim, and collapse internal whitespace runs to one space.
inline std::string normalize_value(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  bool pending_space = false;
  for (char c : raw) {
    auto uc = static_cast<unsigned char>(c);
    if (std::isspace(uc)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(static_cast<char>(std::tolower(uc)));
  }
  return out;
}

// Values that annotate "no value" and must never enter a belief state.
inline bool is_absent_marker(std::string_view normalized) {
  return normalized.empty() || normalized == "none" || normalized == "not mentioned";
}

// "leave at" / "leaveAt" / "leave_at" -> "leaveat"
inline std::string compact_slot_name(std::string_view raw) {
  std::string out;
  for (char c : raw) {
    auto uc = static_cast<unsigned char>(c);
    if (std::isspace(uc) || c == '_') continue;
    out.push_back(static_cast<char>(std::tolower(uc)));
  }
  return out;
}

enum class Phase { kTrain, kValidation, kTest };

inline constexpr std::string_view to_string(Phase p) {
  switch (p) {
    case Phase::kTrain: return "train";
    case Phase::kValidation: return "validation";
    case Phase::kTest: return "test";
  }
  return "";
}

inline std::optional<Phase> parse_phase(std::string_view s) {
  if (s == "train") return Phase::kTrain;
  if (s == "validation") return Phase::kValidation;
  if (s == "test") return Phase::kTest;
  return std::nullopt;
}

enum class Scenario { kSingle, kReturn, kDualValue, kDualSlot };

inline constexpr std::string_view to_string(Scenario s) {
  switch (s) {
    case Scenario::kSingle: return "single";
    case Scenario::kReturn: return "return";
    case Scenario::kDualValue: return "dual-value";
    case Scenario::kDualSlot: return "dual-slot";
  }
  return "";
}

inline std::optional<Scenario> parse_scenario(std::string_view s) {
  if (s == "single") return Scenario::kSingle;
  if (s == "return") return Scenario::kReturn;
  if (s == "dual-value") return Scenario::kDualValue;
  if (s == "dual-slot") return Scenario::kDualSlot;
  return std::nullopt;
}

// Single turnback extends a dialogue by one turn, every other scenario by two.
inline constexpr int appended_turns(Scenario s) { return s == Scenario::kSingle ? 1 : 2; }

inline constexpr Scenario kAllScenarios[] = {Scenario::kSingle, Scenario::kReturn,
                                             Scenario::kDualValue, Scenario::kDualSlot};

struct SlotRef {
  std::string domain;
  std::string slot;

  std::string key() const { return domain + "-" + slot; }

  friend auto operator<=>(const SlotRef&, const SlotRef&) = default;
  friend bool operator==(const SlotRef&, const SlotRef&) = default;
};

// Parses "taxi-leaveat", "taxi-leave at", "hotel-semi-area", "hotel-book people".
inline SlotRef parse_slot_key(std::string_view key) {
  auto dash = key.find('-');
  if (dash == std::string_view::npos) {
    throw SchemaError("slot key '" + std::string(key) + "' is not of the form domain-slot");
  }
  std::string domain = compact_slot_name(key.substr(0, dash));
  std::string_view rest = key.substr(dash + 1);
  std::string slot;
  if (rest.starts_with("semi-")) {
    slot = compact_slot_name(rest.substr(5));
  } else if (rest.starts_with("book-")) {
    slot = "book" + compact_slot_name(rest.substr(5));
  } else {
    slot = compact_slot_name(rest);
  }
  if (domain.empty() || slot.empty()) {
    throw SchemaError("slot key '" + std::string(key) + "' has an empty domain or slot");
  }
  return SlotRef{std::move(domain), std::move(slot)};
}

struct BeliefTriple {
  SlotRef slot_ref;
  std::string value;

  friend bool operator==(const BeliefTriple&, const BeliefTriple&) = default;
};

// Set of (domain, slot, value) triples with at most one value per slot.
class BeliefState {
 public:
  using Map = std::map<SlotRef, std::string>;
  using const_iterator = Map::const_iterator;

  BeliefState() = default;

  // Normalizes every value; absent markers are dropped. Throws StateError on a
  // repeated slot.
  BeliefState(std::initializer_list<BeliefTriple> triples) {
    for (const auto& t : triples) insert(t.slot_ref, t.value);
  }

  // Adds a new slot. Returns false when the value is an absent marker.
  bool insert(const SlotRef& ref, std::string_view raw_value) {
    std::string value = normalize_value(raw_value);
    if (is_absent_marker(value)) return false;
    if (values_.contains(ref)) {
      throw StateError("slot " + ref.key() + " appears twice in one belief state");
    }
    values_.emplace(ref, std::move(value));
    return true;
  }

  // Sets or replaces the value of a slot.
  void assign(const SlotRef& ref, std::string_view raw_value) {
    std::string value = normalize_value(raw_value);
    if (is_absent_marker(value)) {
      throw StateError("cannot assign absent marker to " + ref.key());
    }
    values_[ref] = std::move(value);
  }

  void erase(const SlotRef& ref) { values_.erase(ref); }

  const std::string* find(const SlotRef& ref) const {
    auto it = values_.find(ref);
    return it == values_.end() ? nullptr : &it->second;
  }
  bool contains(const SlotRef& ref) const { return values_.contains(ref); }

  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }
  const_iterator begin() const { return values_.begin(); }
  const_iterator end() const { return values_.end(); }

  std::vector<SlotRef> slots() const {
    std::vector<SlotRef> out;
    out.reserve(values_.size());
    for (const auto& [ref, _] : values_) out.push_back(ref);
    return out;
  }

  std::vector<BeliefTriple> triples() const {
    std::vector<BeliefTriple> out;
    out.reserve(values_.size());
    for (const auto& [ref, value] : values_) out.push_back({ref, value});
    return out;
  }

  friend bool operator==(const BeliefState&, const BeliefState&) = default;

 private:
  Map values_;
};

// Number of slots that are set in only one state or carry different values.
inline std::size_t triple_difference(const BeliefState& a, const BeliefState& b) {
  std::size_t n = 0;
  for (const auto& [ref, value] : a) {
    const auto* other = b.find(ref);
    if (other == nullptr || *other != value) ++n;
  }
  for (const auto& [ref, _] : b) {
    if (!a.contains(ref)) ++n;
  }
  return n;
}

struct InjectedAt {
  Scenario scenario = Scenario::kSingle;
  int position = 0;  // 0-based among the appended turns

  friend bool operator==(const InjectedAt&, const InjectedAt&) = default;
};

// Empty optional means an original (source) turn.
using Provenance = std::optional<InjectedAt>;

struct Turn {
  int index = 0;
  std::string system_utterance;
  std::string user_utterance;
  BeliefState gold_state;  // cumulative up to and including this turn
  Provenance provenance;

  bool injected() const { return provenance.has_value(); }

  friend bool operator==(const Turn&, const Turn&) = default;
};

struct Dialogue {
  std::string id;
  std::vector<Turn> turns;

  const BeliefState& final_state() const {
    static const BeliefState kEmpty;
    return turns.empty() ? kEmpty : turns.back().gold_state;
  }

  std::size_t injected_turn_count() const {
    return static_cast<std::size_t>(
        std::count_if(turns.begin(), turns.end(), [](const Turn& t) { return t.injected(); }));
  }
  std::size_t original_turn_count() const { return turns.size() - injected_turn_count(); }
  bool has_injection() const { return injected_turn_count() > 0; }

  friend bool operator==(const Dialogue&, const Dialogue&) = default;
};

inline const BeliefState& accumulated_state(const Dialogue& dialogue, int turn_index) {
  if (turn_index < 0 || static_cast<std::size_t>(turn_index) >= dialogue.turns.size()) {
    throw IndexError("turn " + std::to_string(turn_index) + " out of range for dialogue " +
                     dialogue.id + " with " + std::to_string(dialogue.turns.size()) + " turns");
  }
  return dialogue.turns[static_cast<std::size_t>(turn_index)].gold_state;
}

// Legal values per slot; each list normalized, deduplicated and sorted.
class Ontology {
 public:
  using Map = std::map<SlotRef, std::vector<std::string>>;

  // Absent markers are discarded; an empty resulting list is a SchemaError.
  void add(const SlotRef& ref, std::span<const std::string> raw_values) {
    std::vector<std::string> values;
    values.reserve(raw_values.size() + 4);
    if (auto it = entries_.find(ref); it != entries_.end()) values = it->second;
    for (const auto& raw : raw_values) {
      std::string v = normalize_value(raw);
      if (!is_absent_marker(v)) values.push_back(std::move(v));
    }
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    if (values.empty()) throw SchemaError("ontology slot " + ref.key() + " has no values");
    entries_[ref] = std::move(values);
  }

  void add(const SlotRef& ref, std::initializer_list<std::string> raw_values) {
    std::vector<std::string> v(raw_values);
    add(ref, std::span<const std::string>(v));
  }

  // Empty span when the slot is unknown.
  std::span<const std::string> values(const SlotRef& ref) const {
    auto it = entries_.find(ref);
    if (it == entries_.end()) return {};
    return it->second;
  }

  bool contains(const SlotRef& ref) const { return entries_.contains(ref); }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const Map& entries() const { return entries_; }

  friend bool operator==(const Ontology&, const Ontology&) = default;

 private:
  Map entries_;
};

struct Dataset {
  Phase phase = Phase::kTest;
  std::vector<Dialogue> dialogues;

  std::size_t turn_count() const {
    std::size_t n = 0;
    for (const auto& d : dialogues) n += d.turns.size();
    return n;
  }

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

}  // namespace turnback
