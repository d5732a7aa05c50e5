#pragma once

// Whole-dataset invariant checks. Loading enforces structure; this reports the
// semantic invariants a loaded dataset may still violate.

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "turnback/corpus.hpp"

namespace turnback {

struct DatasetReport {
  std::vector<std::string> violations;

  bool ok() const { return violations.empty(); }
};

inline void validate_dialogue(const Dialogue& d, const Ontology* ontology,
                              std::vector<std::string>& out) {
  const std::string where = "dialogue " + d.id;
  bool seen_injected = false;
  std::optional<Scenario> scenario;
  int expected_position = 0;
  for (std::size_t i = 0; i < d.turns.size(); ++i) {
    const Turn& t = d.turns[i];
    const std::string turn_where = where + " turn " + std::to_string(i);
    if (t.index != static_cast<int>(i)) out.push_back(turn_where + ": index " + std::to_string(t.index));
    if (t.user_utterance.empty()) out.push_back(turn_where + ": empty user utterance");
    if (t.injected()) {
      if (!seen_injected) scenario = t.provenance->scenario;
      seen_injected = true;
      if (t.provenance->scenario != scenario) {
        out.push_back(turn_where + ": injected turns mix scenarios");
      }
      if (t.provenance->position != expected_position) {
        out.push_back(turn_where + ": injected position " + std::to_string(t.provenance->position) +
                      ", expected " + std::to_string(expected_position));
      }
      ++expected_position;
    } else if (seen_injected) {
      out.push_back(turn_where + ": original turn after injected turns");
    }
    if (i > 0) {
      for (const auto& [ref, _] : d.turns[i - 1].gold_state) {
        if (!t.gold_state.contains(ref)) {
          out.push_back(turn_where + ": non-cumulative state, slot " + ref.key() + " dropped");
        }
      }
    }
    if (ontology != nullptr) {
      for (const auto& [ref, _] : t.gold_state) {
        if (!ontology->contains(ref)) out.push_back(turn_where + ": slot " + ref.key() + " not in ontology");
      }
    }
  }
  if (scenario && expected_position != appended_turns(*scenario)) {
    out.push_back(where + ": " + std::to_string(expected_position) + " injected turns for scenario " +
                  std::string(to_string(*scenario)));
  }
}

// Pass an ontology to also require every state slot to exist in it.
inline DatasetReport validate_dataset(const Dataset& ds, const Ontology* ontology = nullptr) {
  DatasetReport report;
  std::set<std::string> ids;
  for (const auto& d : ds.dialogues) {
    if (d.id.empty()) report.violations.push_back("dialogue with empty id");
    if (!ids.insert(d.id).second) report.violations.push_back("duplicate dialogue id " + d.id);
    validate_dialogue(d, ontology, report.violations);
  }
  return report;
}

}  // namespace turnback
