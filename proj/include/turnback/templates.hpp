#pragma once

// Phase-separated utterance templates.
//
// User-side patterns carry {domain}, {slot} and {value} exactly once each and
// announce a value change. System-side patterns are fixed acknowledgements;
// an optional "position" ("first" or "followup") restricts a system pattern to
// the first appended turn or to later ones.

#include <algorithm>
#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "turnback/corpus.hpp"
#include "turnback/errors.hpp"
#include "turnback/json_io.hpp"
#include "turnback/random.hpp"

namespace turnback {

enum class Side { kUser, kSystem };

inline constexpr std::string_view to_string(Side s) {
  return s == Side::kUser ? "user" : "system";
}

inline std::optional<Side> parse_side(std::string_view s) {
  if (s == "user") return Side::kUser;
  if (s == "system") return Side::kSystem;
  return std::nullopt;
}

enum class AckPosition { kAny, kFirst, kFollowup };

inline constexpr std::string_view to_string(AckPosition p) {
  switch (p) {
    case AckPosition::kAny: return "any";
    case AckPosition::kFirst: return "first";
    case AckPosition::kFollowup: return "followup";
  }
  return "";
}

struct Template {
  std::string id;
  Phase phase = Phase::kTrain;
  Side side = Side::kUser;
  std::string pattern;
  AckPosition position = AckPosition::kAny;

  friend bool operator==(const Template&, const Template&) = default;
};

inline constexpr std::array<std::string_view, 3> kPlaceholders = {"domain", "slot", "value"};

// Names of every {name} occurrence in a pattern, in order.
inline std::vector<std::string> placeholders(std::string_view pattern) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while ((pos = pattern.find('{', pos)) != std::string_view::npos) {
    auto close = pattern.find('}', pos + 1);
    if (close == std::string_view::npos) break;
    out.emplace_back(pattern.substr(pos + 1, close - pos - 1));
    pos = close + 1;
  }
  return out;
}

// Problems with a single template, empty when well-formed.
inline std::vector<std::string> template_defects(const Template& t) {
  std::vector<std::string> defects;
  if (t.pattern.empty()) defects.push_back("empty pattern");
  auto names = placeholders(t.pattern);
  if (t.side == Side::kUser) {
    for (auto want : kPlaceholders) {
      auto n = std::count(names.begin(), names.end(), want);
      if (n != 1) {
        defects.push_back("placeholder {" + std::string(want) + "} appears " + std::to_string(n) +
                          " times, expected once");
      }
    }
    for (const auto& name : names) {
      if (std::find(kPlaceholders.begin(), kPlaceholders.end(), name) == kPlaceholders.end()) {
        defects.push_back("unknown placeholder {" + name + "}");
      }
    }
    if (t.position != AckPosition::kAny) defects.push_back("position is only valid on system side");
  } else {
    for (const auto& name : names) {
      defects.push_back("system pattern contains placeholder {" + name + "}");
    }
  }
  return defects;
}

using SlotDisplayNames = std::map<std::string, std::string>;

inline const SlotDisplayNames& default_display_names() {
  static const SlotDisplayNames kNames = {
      {"area", "area"},
      {"arriveby", "arrive by"},
      {"bookday", "book day"},
      {"bookpeople", "book people"},
      {"bookstay", "book stay"},
      {"booktime", "book time"},
      {"day", "day"},
      {"department", "department"},
      {"departure", "departure"},
      {"destination", "destination"},
      {"food", "food"},
      {"internet", "internet"},
      {"leaveat", "leave at"},
      {"name", "name"},
      {"parking", "parking"},
      {"pricerange", "price range"},
      {"stars", "stars"},
      {"type", "type"},
  };
  return kNames;
}

// Substitutes {domain}, {slot} (display form) and {value}. System-side
// patterns are returned unchanged.
inline std::string render(const Template& t, const SlotRef& slot_ref, std::string_view value,
                          const SlotDisplayNames& display_names = default_display_names()) {
  if (t.side == Side::kSystem) return t.pattern;
  if (auto defects = template_defects(t); !defects.empty()) {
    throw MissingPlaceholderError("template " + t.id + ": " + defects.front());
  }
  auto name = display_names.find(slot_ref.slot);
  if (name == display_names.end()) {
    throw MissingDisplayNameError("no display name for slot '" + slot_ref.slot + "'");
  }
  std::string out;
  out.reserve(t.pattern.size() + value.size() + 32);
  std::string_view pattern = t.pattern;
  std::size_t pos = 0;
  while (pos < pattern.size()) {
    auto open = pattern.find('{', pos);
    if (open == std::string_view::npos) {
      out.append(pattern.substr(pos));
      break;
    }
    auto close = pattern.find('}', open);
    if (close == std::string_view::npos) {
      out.append(pattern.substr(pos));
      break;
    }
    out.append(pattern.substr(pos, open - pos));
    std::string_view key = pattern.substr(open + 1, close - open - 1);
    if (key == "domain") {
      out.append(slot_ref.domain);
    } else if (key == "slot") {
      out.append(name->second);
    } else {
      out.append(value);
    }
    pos = close + 1;
  }
  return out;
}

class TemplateRegistry {
 public:
  TemplateRegistry() = default;
  explicit TemplateRegistry(std::vector<Template> templates) : templates_(std::move(templates)) {}

  const std::vector<Template>& templates() const { return templates_; }

  // Templates of one (phase, side) group in declaration order. For system
  // side with a specific position, templates marked for that position or for
  // any position; if none match, the whole group.
  std::vector<const Template*> group(Phase phase, Side side,
                                     AckPosition position = AckPosition::kAny) const {
    std::vector<const Template*> all;
    for (const auto& t : templates_) {
      if (t.phase == phase && t.side == side) all.push_back(&t);
    }
    if (side == Side::kUser || position == AckPosition::kAny) return all;
    std::vector<const Template*> matching;
    for (const auto* t : all) {
      if (t->position == position || t->position == AckPosition::kAny) matching.push_back(t);
    }
    return matching.empty() ? all : matching;
  }

  friend bool operator==(const TemplateRegistry&, const TemplateRegistry&) = default;

 private:
  std::vector<Template> templates_;
};

// Uniform choice within the group, driven only by `rng`.
inline const Template& pick_template(const TemplateRegistry& registry, Phase phase, Side side,
                                     RandomStream& rng,
                                     AckPosition position = AckPosition::kAny) {
  auto group = registry.group(phase, side, position);
  if (group.empty()) {
    throw EmptyGroupError("no " + std::string(to_string(side)) + " templates for phase " +
                          std::string(to_string(phase)));
  }
  return *group[rng.uniform_index(group.size())];
}

struct RegistryReport {
  std::vector<std::string> violations;

  bool ok() const { return violations.empty(); }
};

inline RegistryReport validate_registry(const TemplateRegistry& registry) {
  RegistryReport report;
  for (auto phase : {Phase::kTrain, Phase::kValidation, Phase::kTest}) {
    for (auto side : {Side::kUser, Side::kSystem}) {
      if (registry.group(phase, side).empty()) {
        report.violations.push_back("empty group: phase " + std::string(to_string(phase)) +
                                    ", side " + std::string(to_string(side)));
      }
    }
  }
  std::set<std::string> ids;
  std::map<std::string, const Template*> user_patterns;
  for (const auto& t : registry.templates()) {
    if (!ids.insert(t.id).second) report.violations.push_back("duplicate template id " + t.id);
    for (const auto& defect : template_defects(t)) {
      report.violations.push_back("template " + t.id + ": " + defect);
    }
    if (t.side != Side::kUser) continue;
    auto key = normalize_value(t.pattern);
    auto [it, inserted] = user_patterns.emplace(key, &t);
    if (!inserted && it->second->phase != t.phase) {
      report.violations.push_back("user pattern shared across phases " +
                                  std::string(to_string(it->second->phase)) + " (" +
                                  it->second->id + ") and " + std::string(to_string(t.phase)) +
                                  " (" + t.id + "): \"" + t.pattern + "\"");
    }
  }
  return report;
}

// Registry file: JSON list of {"id", "phase", "side", "pattern"} with an
// optional "position" on system entries. Structural problems (missing fields,
// bad enums) throw; content problems are left to validate_registry.
inline TemplateRegistry registry_from_json(const Json& j, const std::string& where) {
  if (!j.is_array()) throw SchemaError(where + ": template registry must be a list");
  std::vector<Template> templates;
  for (const auto& e : j) {
    Template t;
    t.id = detail::require_string(e, "id", where);
    const std::string here = where + " (" + t.id + ")";
    auto phase = parse_phase(detail::require_string(e, "phase", here));
    if (!phase) throw SchemaError(here + ": bad phase");
    auto side = parse_side(detail::require_string(e, "side", here));
    if (!side) throw SchemaError(here + ": side must be user or system");
    t.phase = *phase;
    t.side = *side;
    t.pattern = detail::require_string(e, "pattern", here);
    if (e.contains("position")) {
      auto pos = detail::require_string(e, "position", here);
      if (pos == "first") {
        t.position = AckPosition::kFirst;
      } else if (pos == "followup") {
        t.position = AckPosition::kFollowup;
      } else if (pos != "any") {
        throw SchemaError(here + ": position must be first, followup or any");
      }
    }
    templates.push_back(std::move(t));
  }
  return TemplateRegistry(std::move(templates));
}

inline TemplateRegistry load_registry(const std::filesystem::path& path) {
  return registry_from_json(read_json_file(path), path.string());
}

inline OrderedJson registry_to_json(const TemplateRegistry& registry) {
  OrderedJson arr = OrderedJson::array();
  for (const auto& t : registry.templates()) {
    OrderedJson e = {{"id", t.id},
                     {"phase", to_string(t.phase)},
                     {"side", to_string(t.side)},
                     {"pattern", t.pattern}};
    if (t.position != AckPosition::kAny) e["position"] = to_string(t.position);
    arr.push_back(std::move(e));
  }
  return arr;
}

}  // namespace turnback
