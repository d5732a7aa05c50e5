#pragma once

// Train-N% / Test-N% datasets: inject a seeded subset of dialogues.
//
// Selection ranks dialogues by a per-dialogue 64-bit draw from
// derive_rng(selection_seed(seed), id) (ties broken by id, then position) and
// selects the first round(p * N / 100) of them, rounding half away from zero.
// Because ranks do not depend on p, the selection at a lower proportion is a
// subset of the selection at a higher one. Injection itself uses
// derive_rng(seed, id), so mix at p = 100 equals inject on the whole set.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "turnback/corpus.hpp"
#include "turnback/errors.hpp"
#include "turnback/random.hpp"
#include "turnback/scenarios.hpp"
#include "turnback/templates.hpp"

namespace turnback {

struct MixSpec {
  int proportion = 0;  // percent, 0..100
  Scenario scenario = Scenario::kSingle;
  std::uint64_t seed = 0;
  std::optional<Phase> phase;  // template phase; defaults to the dataset phase
};

inline void check_proportion(int proportion) {
  if (proportion < 0 || proportion > 100) {
    throw ArgumentError("proportion must be within 0..100, got " + std::to_string(proportion));
  }
}

// round(p * n / 100), halves rounded away from zero.
inline std::size_t selection_count(int proportion, std::size_t n) {
  check_proportion(proportion);
  return (2 * static_cast<std::size_t>(proportion) * n + 100) / 200;
}

inline constexpr std::uint64_t selection_seed(std::uint64_t seed) {
  return seed ^ 0x6d69782d73656c65ULL;  // "mix-sele"
}

// Flags, in input order, which dialogues a mix at `proportion` injects.
inline std::vector<bool> select_dialogues(const Dataset& ds, int proportion, std::uint64_t seed) {
  const std::size_t n = ds.dialogues.size();
  const std::size_t k = selection_count(proportion, n);
  std::vector<std::uint64_t> keys(n);
  for (std::size_t i = 0; i < n; ++i) {
    keys[i] = derive_rng(selection_seed(seed), ds.dialogues[i].id).next();
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (keys[a] != keys[b]) return keys[a] < keys[b];
    if (ds.dialogues[a].id != ds.dialogues[b].id) return ds.dialogues[a].id < ds.dialogues[b].id;
    return a < b;
  });
  std::vector<bool> selected(n, false);
  for (std::size_t i = 0; i < k; ++i) selected[order[i]] = true;
  return selected;
}

struct MixResult {
  Dataset dataset;
  std::vector<InjectionRecord> records;  // one per selected dialogue
  std::size_t selected = 0;
  std::size_t applied = 0;

  // Fraction of all dialogues that actually received turnback turns.
  double realized_proportion() const {
    return dataset.dialogues.empty()
               ? 0.0
               : static_cast<double>(applied) / static_cast<double>(dataset.dialogues.size());
  }
};

inline MixResult mix(const Dataset& dataset, const MixSpec& spec, const Ontology& ontology,
                     const TemplateRegistry& registry) {
  check_proportion(spec.proportion);
  InjectionContext ctx{ontology, registry, spec.phase.value_or(dataset.phase)};
  auto selected = select_dialogues(dataset, spec.proportion, spec.seed);
  MixResult out;
  out.dataset.phase = dataset.phase;
  out.dataset.dialogues.reserve(dataset.dialogues.size());
  for (std::size_t i = 0; i < dataset.dialogues.size(); ++i) {
    const Dialogue& d = dataset.dialogues[i];
    if (!selected[i]) {
      out.dataset.dialogues.push_back(d);
      continue;
    }
    ++out.selected;
    auto result = inject_seeded(d, spec.scenario, ctx, spec.seed);
    if (result.record.applied()) ++out.applied;
    out.dataset.dialogues.push_back(std::move(result.dialogue));
    out.records.push_back(std::move(result.record));
  }
  return out;
}

// "<stem>.<scenario>.p<P>.s<seed>.json"
inline std::string mix_output_name(const std::string& stem, Scenario scenario, int proportion,
                                   std::uint64_t seed) {
  return stem + "." + std::string(to_string(scenario)) + ".p" + std::to_string(proportion) +
         ".s" + std::to_string(seed) + ".json";
}

}  // namespace turnback
