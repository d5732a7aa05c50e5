#pragma once

// Scoring of prediction files against a (possibly injected) gold dataset.
//
// A turn is correct iff the predicted belief state equals the gold state as a
// set of normalized triples; turns with empty gold and empty prediction are
// correct. Joint goal accuracy is the mean over all turns. The lower bound is
// the accuracy obtained when every injected turn is scored wrong and the
// model's own outcomes on original turns are kept.
//
// Prediction file (JSONL), one line per turn:
//   {"dialogue_id": str, "turn_index": int, "state": [{"domain","slot","value"}]}

#include <cstddef>
#include <filesystem>
#include <iomanip>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "turnback/corpus.hpp"
#include "turnback/corpus_io.hpp"
#include "turnback/errors.hpp"
#include "turnback/json_io.hpp"

namespace turnback {

struct Prediction {
  std::string dialogue_id;
  int turn_index = 0;
  BeliefState state;

  friend bool operator==(const Prediction&, const Prediction&) = default;
};

inline OrderedJson prediction_to_json(const Prediction& p) {
  return {{"dialogue_id", p.dialogue_id},
          {"turn_index", p.turn_index},
          {"state", state_to_json(p.state)}};
}

inline std::vector<Prediction> predictions_from_jsonl(std::string_view text,
                                                      const std::string& origin) {
  std::vector<Prediction> out;
  std::set<std::pair<std::string, int>> seen;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto eol = text.find('\n', pos);
    std::string_view line = text.substr(pos, eol == std::string_view::npos ? text.npos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    const std::string where = origin + ":" + std::to_string(line_no);
    Json j = parse_json_text(line, where);
    Prediction p;
    p.dialogue_id = detail::require_string(j, "dialogue_id", where);
    p.turn_index = static_cast<int>(detail::require_integer(j, "turn_index", where));
    p.state = state_from_json(detail::require_field(j, "state", where), where);
    if (!seen.emplace(p.dialogue_id, p.turn_index).second) {
      throw DuplicateError(where + ": duplicate prediction for " + p.dialogue_id + " turn " +
                           std::to_string(p.turn_index));
    }
    out.push_back(std::move(p));
  }
  return out;
}

inline std::vector<Prediction> load_predictions(const std::filesystem::path& path) {
  return predictions_from_jsonl(read_text_file(path), path.string());
}

inline std::string predictions_to_jsonl(const std::vector<Prediction>& predictions) {
  std::string out;
  for (const auto& p : predictions) out += prediction_to_json(p).dump() + "\n";
  return out;
}

// Set equality of normalized triples.
inline bool turn_correct(const BeliefState& gold, const BeliefState& pred) { return gold == pred; }

struct TurnOutcome {
  std::string dialogue_id;
  int turn_index = 0;
  bool correct = false;
  Provenance provenance;
  bool predicted = true;  // false when the prediction file had no entry

  friend bool operator==(const TurnOutcome&, const TurnOutcome&) = default;
};

struct Tally {
  std::size_t turns = 0;
  std::size_t correct = 0;

  std::optional<double> accuracy() const {
    if (turns == 0) return std::nullopt;
    return static_cast<double>(correct) / static_cast<double>(turns);
  }

  friend bool operator==(const Tally&, const Tally&) = default;
};

struct EvaluationReport {
  double jga = 0.0;
  std::optional<double> jga_original_turns;
  std::optional<double> jga_injected_turns;
  double lower_bound = 0.0;
  std::size_t turn_count = 0;
  Tally all;
  Tally original;
  Tally injected;
  std::map<std::string, Tally> per_scenario;  // injected turns only
  std::size_t dialogue_count = 0;
  std::size_t injected_dialogues = 0;
  std::size_t uninjected_dialogues = 0;  // includes dialogues skipped at injection
  std::size_t missing_predictions = 0;
  std::vector<TurnOutcome> outcomes;  // dialogue order, then turn order

  friend bool operator==(const EvaluationReport&, const EvaluationReport&) = default;
};

// outcomes_on_original_turns must cover exactly the original turns of the
// dataset. Returns (# correct original turns) / (# all turns).
inline double lower_bound(const Dataset& dataset_injected,
                          const std::vector<TurnOutcome>& outcomes_on_original_turns) {
  std::set<std::pair<std::string, int>> expected;
  std::size_t total = 0;
  for (const auto& d : dataset_injected.dialogues) {
    for (const auto& t : d.turns) {
      ++total;
      if (!t.injected()) expected.emplace(d.id, t.index);
    }
  }
  std::set<std::pair<std::string, int>> covered;
  std::size_t correct = 0;
  for (const auto& o : outcomes_on_original_turns) {
    std::pair<std::string, int> key{o.dialogue_id, o.turn_index};
    if (!expected.contains(key)) {
      throw CoverageError("outcome for " + o.dialogue_id + " turn " +
                          std::to_string(o.turn_index) + " is not an original turn");
    }
    if (!covered.insert(key).second) {
      throw CoverageError("two outcomes for " + o.dialogue_id + " turn " +
                          std::to_string(o.turn_index));
    }
    if (o.correct) ++correct;
  }
  if (covered.size() != expected.size()) {
    throw CoverageError(std::to_string(expected.size() - covered.size()) +
                        " original turns have no outcome");
  }
  if (total == 0) return 0.0;
  return static_cast<double>(correct) / static_cast<double>(total);
}

// Missing predictions count as incorrect (see missing_predictions). A
// prediction for an unknown dialogue or turn throws UnknownDialogueError.
inline EvaluationReport joint_goal_accuracy(const Dataset& dataset,
                                            const std::vector<Prediction>& predictions) {
  std::map<std::string, const Dialogue*> by_id;
  for (const auto& d : dataset.dialogues) by_id.emplace(d.id, &d);

  std::map<std::pair<std::string, int>, const BeliefState*> predicted;
  for (const auto& p : predictions) {
    auto it = by_id.find(p.dialogue_id);
    if (it == by_id.end()) {
      throw UnknownDialogueError("prediction for unknown dialogue " + p.dialogue_id);
    }
    if (p.turn_index < 0 || static_cast<std::size_t>(p.turn_index) >= it->second->turns.size()) {
      throw UnknownDialogueError("prediction for unknown turn " + std::to_string(p.turn_index) +
                                 " of dialogue " + p.dialogue_id);
    }
    if (!predicted.emplace(std::pair{p.dialogue_id, p.turn_index}, &p.state).second) {
      throw DuplicateError("duplicate prediction for " + p.dialogue_id + " turn " +
                           std::to_string(p.turn_index));
    }
  }

  EvaluationReport r;
  r.dialogue_count = dataset.dialogues.size();
  std::vector<TurnOutcome> original_outcomes;
  for (const auto& d : dataset.dialogues) {
    if (d.has_injection()) {
      ++r.injected_dialogues;
    } else {
      ++r.uninjected_dialogues;
    }
    for (const auto& t : d.turns) {
      TurnOutcome o{d.id, t.index, false, t.provenance, true};
      auto it = predicted.find({d.id, t.index});
      if (it == predicted.end()) {
        o.predicted = false;
        ++r.missing_predictions;
      } else {
        o.correct = turn_correct(t.gold_state, *it->second);
      }
      auto bump = [&](Tally& tally) {
        ++tally.turns;
        if (o.correct) ++tally.correct;
      };
      bump(r.all);
      if (t.injected()) {
        bump(r.injected);
        bump(r.per_scenario[std::string(to_string(t.provenance->scenario))]);
      } else {
        bump(r.original);
        original_outcomes.push_back(o);
      }
      r.outcomes.push_back(std::move(o));
    }
  }
  r.turn_count = r.all.turns;
  r.jga = r.all.accuracy().value_or(0.0);
  r.jga_original_turns = r.original.accuracy();
  r.jga_injected_turns = r.injected.accuracy();
  r.lower_bound = lower_bound(dataset, original_outcomes);
  return r;
}

namespace detail {

inline OrderedJson optional_number(const std::optional<double>& v) {
  return v ? OrderedJson(*v) : OrderedJson(nullptr);
}

inline std::optional<double> read_optional_number(const Json& j, std::string_view key,
                                                  const std::string& where) {
  const Json& v = require_field(j, key, where);
  if (v.is_null()) return std::nullopt;
  if (!v.is_number()) throw SchemaError(where + ": " + std::string(key) + " must be a number");
  return v.get<double>();
}

inline OrderedJson tally_to_json(const Tally& t) {
  return {{"turns", t.turns}, {"correct", t.correct}, {"jga", optional_number(t.accuracy())}};
}

inline Tally tally_from_json(const Json& j, const std::string& where) {
  return Tally{static_cast<std::size_t>(require_integer(j, "turns", where)),
               static_cast<std::size_t>(require_integer(j, "correct", where))};
}

}  // namespace detail

inline OrderedJson report_to_json(const EvaluationReport& r) {
  OrderedJson scenarios = OrderedJson::object();
  for (const auto& [name, tally] : r.per_scenario) scenarios[name] = detail::tally_to_json(tally);

  OrderedJson per_dialogue = OrderedJson::array();
  for (std::size_t i = 0; i < r.outcomes.size();) {
    const std::string& id = r.outcomes[i].dialogue_id;
    OrderedJson turns = OrderedJson::array();
    for (; i < r.outcomes.size() && r.outcomes[i].dialogue_id == id; ++i) {
      const auto& o = r.outcomes[i];
      turns.push_back({{"turn_index", o.turn_index},
                       {"correct", o.correct},
                       {"predicted", o.predicted},
                       {"provenance", provenance_to_json(o.provenance)}});
    }
    per_dialogue.push_back({{"dialogue_id", id}, {"turns", std::move(turns)}});
  }

  return {{"jga", r.jga},
          {"jga_original_turns", detail::optional_number(r.jga_original_turns)},
          {"jga_injected_turns", detail::optional_number(r.jga_injected_turns)},
          {"lower_bound", r.lower_bound},
          {"turn_count", r.turn_count},
          {"turns", {{"all", detail::tally_to_json(r.all)},
                     {"original", detail::tally_to_json(r.original)},
                     {"injected", detail::tally_to_json(r.injected)}}},
          {"per_scenario", std::move(scenarios)},
          {"dialogues", {{"total", r.dialogue_count},
                         {"injected", r.injected_dialogues},
                         {"uninjected", r.uninjected_dialogues}}},
          {"missing_predictions", r.missing_predictions},
          {"per_dialogue", std::move(per_dialogue)}};
}

inline EvaluationReport report_from_json(const Json& j, const std::string& where) {
  EvaluationReport r;
  const Json& jga = detail::require_field(j, "jga", where);
  const Json& lb = detail::require_field(j, "lower_bound", where);
  if (!jga.is_number() || !lb.is_number()) throw SchemaError(where + ": jga/lower_bound must be numbers");
  r.jga = jga.get<double>();
  r.lower_bound = lb.get<double>();
  r.jga_original_turns = detail::read_optional_number(j, "jga_original_turns", where);
  r.jga_injected_turns = detail::read_optional_number(j, "jga_injected_turns", where);
  r.turn_count = static_cast<std::size_t>(detail::require_integer(j, "turn_count", where));
  const Json& turns = detail::require_field(j, "turns", where);
  r.all = detail::tally_from_json(detail::require_field(turns, "all", where), where);
  r.original = detail::tally_from_json(detail::require_field(turns, "original", where), where);
  r.injected = detail::tally_from_json(detail::require_field(turns, "injected", where), where);
  for (const auto& [name, t] : detail::require_field(j, "per_scenario", where).items()) {
    r.per_scenario[name] = detail::tally_from_json(t, where);
  }
  const Json& dialogues = detail::require_field(j, "dialogues", where);
  r.dialogue_count = static_cast<std::size_t>(detail::require_integer(dialogues, "total", where));
  r.injected_dialogues =
      static_cast<std::size_t>(detail::require_integer(dialogues, "injected", where));
  r.uninjected_dialogues =
      static_cast<std::size_t>(detail::require_integer(dialogues, "uninjected", where));
  r.missing_predictions =
      static_cast<std::size_t>(detail::require_integer(j, "missing_predictions", where));
  for (const auto& dj : detail::require_array(j, "per_dialogue", where)) {
    std::string id = detail::require_string(dj, "dialogue_id", where);
    for (const auto& tj : detail::require_array(dj, "turns", where)) {
      TurnOutcome o;
      o.dialogue_id = id;
      o.turn_index = static_cast<int>(detail::require_integer(tj, "turn_index", where));
      o.correct = detail::require_field(tj, "correct", where).get<bool>();
      o.predicted = detail::require_field(tj, "predicted", where).get<bool>();
      o.provenance = provenance_from_json(detail::require_field(tj, "provenance", where), where);
      r.outcomes.push_back(std::move(o));
    }
  }
  return r;
}

inline std::string format_report_table(const EvaluationReport& r) {
  auto pct = [](std::optional<double> v) {
    if (!v) return std::string("-");
    std::ostringstream s;
    s << std::fixed << std::setprecision(2) << *v * 100.0 << "%";
    return s.str();
  };
  auto row = [](std::ostringstream& s, const std::string& label, const std::string& value) {
    s << std::left << std::setw(28) << label << value << "\n";
  };
  std::ostringstream s;
  row(s, "joint goal accuracy", pct(r.jga));
  row(s, "  original turns", pct(r.jga_original_turns) + " (" + std::to_string(r.original.correct) +
                                 "/" + std::to_string(r.original.turns) + ")");
  row(s, "  injected turns", pct(r.jga_injected_turns) + " (" + std::to_string(r.injected.correct) +
                                 "/" + std::to_string(r.injected.turns) + ")");
  row(s, "lower bound", pct(r.lower_bound));
  for (const auto& [name, tally] : r.per_scenario) {
    row(s, "  scenario " + name, pct(tally.accuracy()) + " (" + std::to_string(tally.correct) +
                                     "/" + std::to_string(tally.turns) + ")");
  }
  row(s, "turns", std::to_string(r.turn_count));
  row(s, "dialogues", std::to_string(r.dialogue_count));
  row(s, "  with turnback", std::to_string(r.injected_dialogues));
  row(s, "  without turnback", std::to_string(r.uninjected_dialogues));
  row(s, "missing predictions", std::to_string(r.missing_predictions));
  return s.str();
}

inline std::filesystem::path report_table_path(const std::filesystem::path& json_path) {
  return std::filesystem::path(json_path.string() + ".txt");
}

// Writes the JSON report to `path` and the plain-text table next to it.
inline void report(const EvaluationReport& r, const std::filesystem::path& path) {
  if (r.turn_count == 0) throw EmptyReportError("nothing to report: the gold corpus has no turns");
  write_text_file(path, report_to_json(r).dump(2) + "\n");
  write_text_file(report_table_path(path), format_report_table(r));
}

}  // namespace turnback
