#pragma once

// Canonical JSON format for datasets and the "domain-slot" -> [values] ontology
// format.
//
// Dataset:
//   {"phase": "train"|"validation"|"test",
//    "dialogues": [{"id": str,
//                   "turns": [{"index": int, "system": str, "user": str,
//                              "state": [{"domain": str, "slot": str, "value": str}],
//                              "provenance": "original" |
//                                  {"injected": {"scenario": str, "position": int}}}]}]}

#include <filesystem>
#include <set>
#include <string>

#include "turnback/corpus.hpp"
#include "turnback/json_io.hpp"

namespace turnback {

inline OrderedJson state_to_json(const BeliefState& state) {
  OrderedJson arr = OrderedJson::array();
  for (const auto& [ref, value] : state) {
    arr.push_back({{"domain", ref.domain}, {"slot", ref.slot}, {"value", value}});
  }
  return arr;
}

// Parses a list of {"domain","slot","value"} objects. Slot names are compacted,
// values normalized, absent markers dropped.
inline BeliefState state_from_json(const Json& arr, const std::string& where) {
  if (!arr.is_array()) throw SchemaError(where + ": state must be a list");
  BeliefState state;
  for (const auto& t : arr) {
    std::string domain = compact_slot_name(detail::require_string(t, "domain", where));
    std::string slot = compact_slot_name(detail::require_string(t, "slot", where));
    if (domain.empty() || slot.empty()) throw SchemaError(where + ": empty domain or slot");
    state.insert(SlotRef{domain, slot}, detail::require_string(t, "value", where));
  }
  return state;
}

inline OrderedJson provenance_to_json(const Provenance& p) {
  if (!p) return "original";
  return {{"injected", {{"scenario", to_string(p->scenario)}, {"position", p->position}}}};
}

inline Provenance provenance_from_json(const Json& j, const std::string& where) {
  if (j.is_string() && j.get<std::string>() == "original") return std::nullopt;
  if (j.is_object() && j.contains("injected")) {
    const Json& inj = j["injected"];
    auto scenario = parse_scenario(detail::require_string(inj, "scenario", where));
    if (!scenario) throw SchemaError(where + ": unknown scenario in provenance");
    auto position = detail::require_integer(inj, "position", where);
    if (position < 0 || position >= appended_turns(*scenario)) {
      throw SchemaError(where + ": provenance position out of range");
    }
    return InjectedAt{*scenario, static_cast<int>(position)};
  }
  throw SchemaError(where + ": provenance must be \"original\" or {\"injected\": ...}");
}

inline OrderedJson dialogue_to_json(const Dialogue& d) {
  OrderedJson turns = OrderedJson::array();
  for (const auto& t : d.turns) {
    turns.push_back({{"index", t.index},
                     {"system", t.system_utterance},
                     {"user", t.user_utterance},
                     {"state", state_to_json(t.gold_state)},
                     {"provenance", provenance_to_json(t.provenance)}});
  }
  return {{"id", d.id}, {"turns", std::move(turns)}};
}

inline OrderedJson dataset_to_json(const Dataset& ds) {
  OrderedJson dialogues = OrderedJson::array();
  for (const auto& d : ds.dialogues) dialogues.push_back(dialogue_to_json(d));
  return {{"phase", to_string(ds.phase)}, {"dialogues", std::move(dialogues)}};
}

inline Dialogue dialogue_from_json(const Json& j, const std::string& where) {
  Dialogue d;
  d.id = detail::require_string(j, "id", where);
  if (d.id.empty()) throw SchemaError(where + ": empty dialogue id");
  const std::string here = where + " (" + d.id + ")";
  bool seen_injected = false;
  for (const auto& tj : detail::require_array(j, "turns", here)) {
    Turn t;
    auto index = detail::require_integer(tj, "index", here);
    if (index != static_cast<long long>(d.turns.size())) {
      throw SchemaError(here + ": turn indices must be contiguous from 0, got " +
                        std::to_string(index) + " at position " +
                        std::to_string(d.turns.size()));
    }
    t.index = static_cast<int>(index);
    const std::string turn_where = here + " turn " + std::to_string(index);
    t.system_utterance = detail::require_string(tj, "system", turn_where);
    t.user_utterance = detail::require_string(tj, "user", turn_where);
    t.gold_state = state_from_json(detail::require_field(tj, "state", turn_where), turn_where);
    t.provenance = provenance_from_json(detail::require_field(tj, "provenance", turn_where),
                                        turn_where);
    if (t.injected()) {
      seen_injected = true;
    } else if (seen_injected) {
      throw SchemaError(turn_where + ": original turn follows an injected turn");
    }
    d.turns.push_back(std::move(t));
  }
  return d;
}

inline Dataset dataset_from_json(const Json& j, const std::string& where) {
  Dataset ds;
  auto phase = parse_phase(detail::require_string(j, "phase", where));
  if (!phase) throw SchemaError(where + ": phase must be train, validation or test");
  ds.phase = *phase;
  std::set<std::string> ids;
  for (const auto& dj : detail::require_array(j, "dialogues", where)) {
    Dialogue d = dialogue_from_json(dj, where);
    if (!ids.insert(d.id).second) throw SchemaError(where + ": duplicate dialogue id " + d.id);
    ds.dialogues.push_back(std::move(d));
  }
  return ds;
}

inline Dataset load_canonical(const std::filesystem::path& path) {
  return dataset_from_json(read_json_file(path), path.string());
}

inline std::string serialize_to_string(const Dataset& ds) {
  return dataset_to_json(ds).dump(1) + "\n";
}

inline void serialize(const Dataset& ds, const std::filesystem::path& path) {
  write_text_file(path, serialize_to_string(ds));
}

inline Ontology ontology_from_json(const Json& j, const std::string& where) {
  if (!j.is_object()) throw SchemaError(where + ": ontology must map \"domain-slot\" to lists");
  Ontology onto;
  for (const auto& [key, values] : j.items()) {
    if (!values.is_array()) throw SchemaError(where + ": values of " + key + " must be a list");
    std::vector<std::string> raw;
    for (const auto& v : values) {
      if (!v.is_string()) throw SchemaError(where + ": non-string value under " + key);
      raw.push_back(v.get<std::string>());
    }
    onto.add(parse_slot_key(key), raw);
  }
  return onto;
}

inline Ontology load_ontology(const std::filesystem::path& path) {
  return ontology_from_json(read_json_file(path), path.string());
}

inline OrderedJson ontology_to_json(const Ontology& onto) {
  OrderedJson j = OrderedJson::object();
  for (const auto& [ref, values] : onto.entries()) j[ref.key()] = values;
  return j;
}

}  // namespace turnback
