#pragma once

// Adapter for the MultiWOZ 2.1 annotation layout (data.json).
//
// Field mapping:
//   data[<id>]["log"] alternates user (even positions) and system (odd
//   positions) entries. Canonical turn i takes
//     user   = log[2i]["text"]
//     system = log[2i-1]["text"]      ("" for i == 0)
//     state  = log[2i+1]["metadata"]  (belief state after the user spoke)
//   metadata[<domain>]["semi"][<slot>]  -> <domain>-<compact slot>
//   metadata[<domain>]["book"][<slot>]  -> <domain>-book<compact slot>
//   metadata[<domain>]["book"]["booked"] is ignored.
// Values "", "none" and "not mentioned" are absent. A trailing user entry
// without a system reply carries no state and is dropped.

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "turnback/corpus.hpp"
#include "turnback/json_io.hpp"

namespace turnback {

// Slots the adapter can map; anything else raises UnknownSlotError.
inline const std::map<std::string, std::set<std::string>>& multiwoz_schema() {
  static const std::map<std::string, std::set<std::string>> kSchema = {
      {"attraction", {"area", "name", "type"}},
      {"hotel",
       {"area", "internet", "name", "parking", "pricerange", "stars", "type", "bookday",
        "bookpeople", "bookstay"}},
      {"restaurant", {"area", "food", "name", "pricerange", "bookday", "bookpeople", "booktime"}},
      {"taxi", {"arriveby", "departure", "destination", "leaveat"}},
      {"train", {"arriveby", "day", "departure", "destination", "leaveat", "bookpeople"}},
      {"hospital", {"department"}},
      {"police", {}},
      {"bus", {"day", "departure", "destination", "leaveat"}},
  };
  return kSchema;
}

struct MultiwozSkip {
  std::string dialogue_id;
  std::string reason;
};

struct MultiwozLoad {
  Dataset dataset;
  std::vector<MultiwozSkip> skipped;    // dialogues dropped for unknown slots
  std::size_t dropped_trailing_user = 0;  // unpaired final user entries
  std::size_t missing_from_split = 0;     // ids in the split list absent from data
};

namespace detail {

inline BeliefState multiwoz_state(const Json& metadata, const std::string& where) {
  BeliefState state;
  if (metadata.is_null()) return state;
  if (!metadata.is_object()) throw SchemaError(where + ": metadata must be an object");
  const auto& schema = multiwoz_schema();
  for (const auto& [domain_raw, sections] : metadata.items()) {
    std::string domain = compact_slot_name(domain_raw);
    auto known = schema.find(domain);
    if (known == schema.end()) throw UnknownSlotError(where + ": unknown domain " + domain_raw);
    if (!sections.is_object()) throw SchemaError(where + ": domain " + domain_raw + " malformed");
    for (const auto& [section, slots] : sections.items()) {
      if (section != "semi" && section != "book") {
        throw UnknownSlotError(where + ": unknown section " + domain_raw + "." + section);
      }
      if (!slots.is_object()) throw SchemaError(where + ": " + section + " must be an object");
      for (const auto& [slot_raw, value] : slots.items()) {
        if (section == "book" && slot_raw == "booked") continue;
        std::string slot = compact_slot_name(slot_raw);
        if (section == "book") slot = "book" + slot;
        if (!known->second.contains(slot)) {
          throw UnknownSlotError(where + ": cannot map slot " + domain_raw + "." + section + "." +
                                 slot_raw);
        }
        if (!value.is_string()) {
          throw UnknownSlotError(where + ": non-string value for " + domain + "-" + slot);
        }
        state.insert(SlotRef{domain, slot}, value.get<std::string>());
      }
    }
  }
  return state;
}

inline std::string entry_text(const Json& entry, const std::string& where) {
  return require_string(entry, "text", where);
}

}  // namespace detail

// Split list files are either a JSON list of ids or one id per line.
inline std::vector<std::string> load_id_list(const std::filesystem::path& path) {
  std::string text = read_text_file(path);
  std::vector<std::string> ids;
  Json j = Json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (j.is_array()) {
    for (const auto& v : j) {
      if (!v.is_string()) throw SchemaError(path.string() + ": id list must contain strings");
      ids.push_back(v.get<std::string>());
    }
    return ids;
  }
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    auto e = line.find_last_not_of(" \t\r");
    ids.push_back(line.substr(b, e - b + 1));
  }
  return ids;
}

// Converts the in-memory MultiWOZ object. When `only_ids` is set, dialogues not
// listed are ignored.
inline MultiwozLoad multiwoz_from_json(const Json& data, Phase phase, const std::string& where,
                                       const std::optional<std::vector<std::string>>& only_ids = {}) {
  if (!data.is_object()) throw SchemaError(where + ": expected an object keyed by dialogue id");
  MultiwozLoad out;
  out.dataset.phase = phase;

  std::optional<std::set<std::string>> wanted;
  if (only_ids) {
    wanted.emplace(only_ids->begin(), only_ids->end());
    for (const auto& id : *wanted) {
      if (!data.contains(id)) ++out.missing_from_split;
    }
  }

  for (const auto& [id, body] : data.items()) {
    if (wanted && !wanted->contains(id)) continue;
    const std::string here = where + " (" + id + ")";
    const Json& log = detail::require_array(body, "log", here);
    try {
      Dialogue d;
      d.id = id;
      const std::size_t pairs = log.size() / 2;
      if (log.size() % 2 == 1) ++out.dropped_trailing_user;
      for (std::size_t i = 0; i < pairs; ++i) {
        const std::string turn_where = here + " turn " + std::to_string(i);
        Turn t;
        t.index = static_cast<int>(i);
        t.user_utterance = detail::entry_text(log[2 * i], turn_where);
        t.system_utterance = i == 0 ? "" : detail::entry_text(log[2 * i - 1], turn_where);
        const Json& sys = log[2 * i + 1];
        t.gold_state = detail::multiwoz_state(sys.is_object() && sys.contains("metadata")
                                                  ? sys["metadata"]
                                                  : Json(nullptr),
                                              turn_where);
        d.turns.push_back(std::move(t));
      }
      out.dataset.dialogues.push_back(std::move(d));
    } catch (const UnknownSlotError& e) {
      out.skipped.push_back({id, e.what()});
    }
  }
  return out;
}

inline MultiwozLoad load_multiwoz(const std::filesystem::path& path, Phase phase,
                                  const std::optional<std::filesystem::path>& split_list = {}) {
  std::optional<std::vector<std::string>> ids;
  if (split_list) ids = load_id_list(*split_list);
  return multiwoz_from_json(read_json_file(path), phase, path.string(), ids);
}

}  // namespace turnback
