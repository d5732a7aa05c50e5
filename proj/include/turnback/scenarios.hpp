#pragma once

// Turnback injectors. Each appends one (Single) or two (Return, DualValue,
// DualSlot) template-generated turns to the end of a dialogue and relabels the
// gold state of every appended turn.
//
// All choices go through a sampler (see TurnbackSampler). RandomSampler draws
// from a RandomStream in this fixed order:
//   Single:    slot, new value, user template, system template
//   Return:    slot, new value, user template, system template x2
//   DualValue: slot, value 1, value 2, user template, system template x2
//   DualSlot:  slot A, value A, user template, system template,
//              slot B, value B, user template, system template
// Return and DualValue render both appended user turns from one template; only
// the value differs. DualSlot is two Single turnbacks on different slots, so it
// picks a template per turn.

#include <algorithm>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "turnback/corpus.hpp"
#include "turnback/errors.hpp"
#include "turnback/json_io.hpp"
#include "turnback/random.hpp"
#include "turnback/templates.hpp"

namespace turnback {

// Each method returns an index into its (non-empty) candidate list.
template <typename S>
concept TurnbackSampler = requires(S s, std::span<const SlotRef> slots, const SlotRef& ref,
                                   std::span<const std::string> values,
                                   std::span<const Template* const> templates) {
  { s.choose_slot(slots) } -> std::convertible_to<std::size_t>;
  { s.choose_value(ref, values) } -> std::convertible_to<std::size_t>;
  { s.choose_template(templates) } -> std::convertible_to<std::size_t>;
};

// Uniform choices from a random stream.
class RandomSampler {
 public:
  explicit RandomSampler(RandomStream& rng) : rng_(&rng) {}

  std::size_t choose_slot(std::span<const SlotRef> slots) { return rng_->uniform_index(slots.size()); }
  std::size_t choose_value(const SlotRef&, std::span<const std::string> values) {
    return rng_->uniform_index(values.size());
  }
  std::size_t choose_template(std::span<const Template* const> templates) {
    return rng_->uniform_index(templates.size());
  }

 private:
  RandomStream* rng_;
};

static_assert(TurnbackSampler<RandomSampler>);

inline constexpr std::size_t kMinValuesToChange = 2;
inline constexpr std::size_t kMinValuesForDualValue = 3;

// Slots of `state` not in `exclude` whose ontology list has at least
// `min_values` entries, in slot order.
inline std::vector<SlotRef> eligible_slots(const BeliefState& state, const Ontology& ontology,
                                           const std::set<SlotRef>& exclude = {},
                                           std::size_t min_values = kMinValuesToChange) {
  std::vector<SlotRef> out;
  for (const auto& [ref, _] : state) {
    if (exclude.contains(ref)) continue;
    if (ontology.values(ref).size() >= min_values) out.push_back(ref);
  }
  return out;
}

template <TurnbackSampler Sampler>
SlotRef select_target_slot(const BeliefState& state, const Ontology& ontology,
                           const std::set<SlotRef>& exclude, Sampler& sampler,
                           std::size_t min_values = kMinValuesToChange) {
  auto slots = eligible_slots(state, ontology, exclude, min_values);
  if (slots.empty()) throw NoEligibleSlotError("no eligible slot to change");
  return slots[sampler.choose_slot(std::span<const SlotRef>(slots))];
}

inline SlotRef select_target_slot(const BeliefState& state, const Ontology& ontology,
                                  const std::set<SlotRef>& exclude, RandomStream& rng) {
  RandomSampler sampler(rng);
  return select_target_slot(state, ontology, exclude, sampler);
}

// Uniform over the slot's ontology values minus `exclude`.
template <TurnbackSampler Sampler>
std::string sample_alternative_value(const Ontology& ontology, const SlotRef& slot_ref,
                                     const std::set<std::string>& exclude, Sampler& sampler) {
  std::vector<std::string> candidates;
  for (const auto& v : ontology.values(slot_ref)) {
    if (!exclude.contains(v) && !is_absent_marker(v)) candidates.push_back(v);
  }
  if (candidates.empty()) {
    throw ExhaustedValuesError("no alternative value left for " + slot_ref.key());
  }
  return candidates[sampler.choose_value(slot_ref, std::span<const std::string>(candidates))];
}

inline std::string sample_alternative_value(const Ontology& ontology, const SlotRef& slot_ref,
                                            const std::set<std::string>& exclude,
                                            RandomStream& rng) {
  RandomSampler sampler(rng);
  return sample_alternative_value(ontology, slot_ref, exclude, sampler);
}

struct Applicability {
  bool ok = false;
  std::string reason;  // empty when ok

  explicit operator bool() const { return ok; }
};

inline Applicability applicable(const Dialogue& dialogue, Scenario scenario,
                                const Ontology& ontology) {
  if (dialogue.has_injection()) return {false, "already injected"};
  const BeliefState& state = dialogue.final_state();
  if (state.empty()) return {false, "no belief state"};
  switch (scenario) {
    case Scenario::kSingle:
    case Scenario::kReturn:
      if (eligible_slots(state, ontology).empty()) {
        return {false, "no slot with >=2 ontology values"};
      }
      break;
    case Scenario::kDualValue:
      if (eligible_slots(state, ontology, {}, kMinValuesForDualValue).empty()) {
        return {false, "needs >=3 values"};
      }
      break;
    case Scenario::kDualSlot:
      if (state.size() < 2) return {false, "needs >=2 belief slots"};
      if (eligible_slots(state, ontology).size() < 2) {
        return {false, "needs >=2 slots with >=2 ontology values"};
      }
      break;
  }
  return {true, {}};
}

// One entry per appended turn: the slot changed by that turn, its value before
// and after. Skipped records have empty lists.
struct InjectionRecord {
  std::string dialogue_id;
  Scenario scenario = Scenario::kSingle;
  std::vector<SlotRef> target_slots;
  std::vector<std::string> old_values;
  std::vector<std::string> new_values;
  std::optional<std::string> skipped;

  bool applied() const { return !skipped.has_value(); }

  friend bool operator==(const InjectionRecord&, const InjectionRecord&) = default;
};

struct InjectionResult {
  Dialogue dialogue;
  InjectionRecord record;
};

namespace detail {

template <TurnbackSampler Sampler>
const Template& choose_template(const TemplateRegistry& registry, Phase phase, Side side,
                                AckPosition position, Sampler& sampler) {
  auto group = registry.group(phase, side, position);
  if (group.empty()) {
    throw EmptyGroupError("no " + std::string(to_string(side)) + " templates for phase " +
                          std::string(to_string(phase)));
  }
  return *group[sampler.choose_template(std::span<const Template* const>(group))];
}

inline void append_turn(Dialogue& d, std::string system, std::string user, BeliefState state,
                        Scenario scenario, int position) {
  Turn t;
  t.index = static_cast<int>(d.turns.size());
  t.system_utterance = std::move(system);
  t.user_utterance = std::move(user);
  t.gold_state = std::move(state);
  t.provenance = InjectedAt{scenario, position};
  d.turns.push_back(std::move(t));
}

inline InjectionResult skipped(const Dialogue& dialogue, Scenario scenario, std::string reason) {
  InjectionRecord rec;
  rec.dialogue_id = dialogue.id;
  rec.scenario = scenario;
  rec.skipped = std::move(reason);
  return {dialogue, std::move(rec)};
}

inline void note_change(InjectionRecord& rec, const SlotRef& ref, std::string old_value,
                        std::string new_value) {
  rec.target_slots.push_back(ref);
  rec.old_values.push_back(std::move(old_value));
  rec.new_values.push_back(std::move(new_value));
}

}  // namespace detail

struct InjectionContext {
  const Ontology& ontology;
  const TemplateRegistry& registry;
  Phase phase;
  const SlotDisplayNames& display_names = default_display_names();
};

template <TurnbackSampler Sampler>
InjectionResult inject_single(const Dialogue& dialogue, const InjectionContext& ctx,
                              Sampler& sampler) {
  constexpr auto kScenario = Scenario::kSingle;
  if (auto app = applicable(dialogue, kScenario, ctx.ontology); !app) {
    return detail::skipped(dialogue, kScenario, app.reason);
  }
  InjectionResult out{dialogue, {dialogue.id, kScenario, {}, {}, {}, std::nullopt}};
  try {
    BeliefState state = dialogue.final_state();
    SlotRef slot = select_target_slot(state, ctx.ontology, {}, sampler);
    std::string old_value = *state.find(slot);
    std::string new_value = sample_alternative_value(ctx.ontology, slot, {old_value}, sampler);
    const auto& user = detail::choose_template(ctx.registry, ctx.phase, Side::kUser,
                                               AckPosition::kAny, sampler);
    const auto& system = detail::choose_template(ctx.registry, ctx.phase, Side::kSystem,
                                                 AckPosition::kFirst, sampler);
    state.assign(slot, new_value);
    detail::append_turn(out.dialogue, render(system, slot, new_value, ctx.display_names),
                        render(user, slot, new_value, ctx.display_names), std::move(state),
                        kScenario, 0);
    detail::note_change(out.record, slot, std::move(old_value), std::move(new_value));
  } catch (const NoEligibleSlotError& e) {
    return detail::skipped(dialogue, kScenario, e.what());
  } catch (const ExhaustedValuesError& e) {
    return detail::skipped(dialogue, kScenario, e.what());
  }
  return out;
}

// Changes one slot, then changes it back: the final state equals the original.
template <TurnbackSampler Sampler>
InjectionResult inject_return(const Dialogue& dialogue, const InjectionContext& ctx,
                              Sampler& sampler) {
  constexpr auto kScenario = Scenario::kReturn;
  if (auto app = applicable(dialogue, kScenario, ctx.ontology); !app) {
    return detail::skipped(dialogue, kScenario, app.reason);
  }
  InjectionResult out{dialogue, {dialogue.id, kScenario, {}, {}, {}, std::nullopt}};
  try {
    const BeliefState& original = dialogue.final_state();
    SlotRef slot = select_target_slot(original, ctx.ontology, {}, sampler);
    std::string v0 = *original.find(slot);
    std::string v1 = sample_alternative_value(ctx.ontology, slot, {v0}, sampler);
    const auto& user = detail::choose_template(ctx.registry, ctx.phase, Side::kUser,
                                               AckPosition::kAny, sampler);
    const auto& first = detail::choose_template(ctx.registry, ctx.phase, Side::kSystem,
                                                AckPosition::kFirst, sampler);
    const auto& followup = detail::choose_template(ctx.registry, ctx.phase, Side::kSystem,
                                                   AckPosition::kFollowup, sampler);
    BeliefState changed = original;
    changed.assign(slot, v1);
    detail::append_turn(out.dialogue, render(first, slot, v1, ctx.display_names),
                        render(user, slot, v1, ctx.display_names), std::move(changed), kScenario,
                        0);
    detail::append_turn(out.dialogue, render(followup, slot, v0, ctx.display_names),
                        render(user, slot, v0, ctx.display_names), original, kScenario, 1);
    detail::note_change(out.record, slot, v0, v1);
    detail::note_change(out.record, slot, v1, v0);
  } catch (const NoEligibleSlotError& e) {
    return detail::skipped(dialogue, kScenario, e.what());
  } catch (const ExhaustedValuesError& e) {
    return detail::skipped(dialogue, kScenario, e.what());
  }
  return out;
}

// Changes one slot twice: v0 -> v1 -> v2, all pairwise distinct.
template <TurnbackSampler Sampler>
InjectionResult inject_dual_value(const Dialogue& dialogue, const InjectionContext& ctx,
                                  Sampler& sampler) {
  constexpr auto kScenario = Scenario::kDualValue;
  if (auto app = applicable(dialogue, kScenario, ctx.ontology); !app) {
    return detail::skipped(dialogue, kScenario, app.reason);
  }
  InjectionResult out{dialogue, {dialogue.id, kScenario, {}, {}, {}, std::nullopt}};
  try {
    BeliefState state = dialogue.final_state();
    SlotRef slot =
        select_target_slot(state, ctx.ontology, {}, sampler, kMinValuesForDualValue);
    std::string v0 = *state.find(slot);
    std::string v1 = sample_alternative_value(ctx.ontology, slot, {v0}, sampler);
    std::string v2 = sample_alternative_value(ctx.ontology, slot, {v0, v1}, sampler);
    const auto& user = detail::choose_template(ctx.registry, ctx.phase, Side::kUser,
                                               AckPosition::kAny, sampler);
    const auto& first = detail::choose_template(ctx.registry, ctx.phase, Side::kSystem,
                                                AckPosition::kFirst, sampler);
    const auto& followup = detail::choose_template(ctx.registry, ctx.phase, Side::kSystem,
                                                   AckPosition::kFollowup, sampler);
    state.assign(slot, v1);
    detail::append_turn(out.dialogue, render(first, slot, v1, ctx.display_names),
                        render(user, slot, v1, ctx.display_names), state, kScenario, 0);
    state.assign(slot, v2);
    detail::append_turn(out.dialogue, render(followup, slot, v2, ctx.display_names),
                        render(user, slot, v2, ctx.display_names), std::move(state), kScenario,
                        1);
    detail::note_change(out.record, slot, v0, v1);
    detail::note_change(out.record, slot, v1, v2);
  } catch (const NoEligibleSlotError& e) {
    return detail::skipped(dialogue, kScenario, e.what());
  } catch (const ExhaustedValuesError& e) {
    return detail::skipped(dialogue, kScenario, e.what());
  }
  return out;
}

// Changes slot A, then a different slot B.
template <TurnbackSampler Sampler>
InjectionResult inject_dual_slot(const Dialogue& dialogue, const InjectionContext& ctx,
                                 Sampler& sampler) {
  constexpr auto kScenario = Scenario::kDualSlot;
  if (auto app = applicable(dialogue, kScenario, ctx.ontology); !app) {
    return detail::skipped(dialogue, kScenario, app.reason);
  }
  InjectionResult out{dialogue, {dialogue.id, kScenario, {}, {}, {}, std::nullopt}};
  try {
    BeliefState state = dialogue.final_state();
    std::set<SlotRef> used;
    for (int position = 0; position < 2; ++position) {
      SlotRef slot = select_target_slot(state, ctx.ontology, used, sampler);
      std::string old_value = *state.find(slot);
      std::string new_value = sample_alternative_value(ctx.ontology, slot, {old_value}, sampler);
      const auto& user = detail::choose_template(ctx.registry, ctx.phase, Side::kUser,
                                                 AckPosition::kAny, sampler);
      const auto& system = detail::choose_template(
          ctx.registry, ctx.phase, Side::kSystem,
          position == 0 ? AckPosition::kFirst : AckPosition::kFollowup, sampler);
      state.assign(slot, new_value);
      detail::append_turn(out.dialogue, render(system, slot, new_value, ctx.display_names),
                          render(user, slot, new_value, ctx.display_names), state, kScenario,
                          position);
      detail::note_change(out.record, slot, std::move(old_value), std::move(new_value));
      used.insert(slot);
    }
  } catch (const NoEligibleSlotError& e) {
    return detail::skipped(dialogue, kScenario, e.what());
  } catch (const ExhaustedValuesError& e) {
    return detail::skipped(dialogue, kScenario, e.what());
  }
  return out;
}

template <TurnbackSampler Sampler>
InjectionResult inject_dialogue(const Dialogue& dialogue, Scenario scenario,
                                const InjectionContext& ctx, Sampler& sampler) {
  switch (scenario) {
    case Scenario::kSingle: return inject_single(dialogue, ctx, sampler);
    case Scenario::kReturn: return inject_return(dialogue, ctx, sampler);
    case Scenario::kDualValue: return inject_dual_value(dialogue, ctx, sampler);
    case Scenario::kDualSlot: return inject_dual_slot(dialogue, ctx, sampler);
  }
  return detail::skipped(dialogue, scenario, "unknown scenario");
}

// Seeded injection of one dialogue with rng derived from (seed, dialogue id).
// Registry or display-name problems become skip records.
inline InjectionResult inject_seeded(const Dialogue& dialogue, Scenario scenario,
                                     const InjectionContext& ctx, std::uint64_t seed) {
  RandomStream rng = derive_rng(seed, dialogue.id);
  RandomSampler sampler(rng);
  try {
    return inject_dialogue(dialogue, scenario, ctx, sampler);
  } catch (const Error& e) {
    return detail::skipped(dialogue, scenario, std::string("error: ") + e.what());
  }
}

struct InjectionBatch {
  Dataset dataset;
  std::vector<InjectionRecord> records;

  std::size_t applied_count() const {
    return static_cast<std::size_t>(std::count_if(
        records.begin(), records.end(), [](const InjectionRecord& r) { return r.applied(); }));
  }
};

// Applies the scenario to every dialogue. Output order follows input order;
// each dialogue's result depends only on (seed, its id, its content).
inline InjectionBatch inject(const Dataset& dataset, Scenario scenario, const Ontology& ontology,
                             const TemplateRegistry& registry, std::uint64_t seed,
                             std::optional<Phase> phase = std::nullopt) {
  InjectionContext ctx{ontology, registry, phase.value_or(dataset.phase)};
  InjectionBatch batch;
  batch.dataset.phase = dataset.phase;
  batch.dataset.dialogues.reserve(dataset.dialogues.size());
  batch.records.reserve(dataset.dialogues.size());
  for (const auto& d : dataset.dialogues) {
    auto result = inject_seeded(d, scenario, ctx, seed);
    batch.dataset.dialogues.push_back(std::move(result.dialogue));
    batch.records.push_back(std::move(result.record));
  }
  return batch;
}

inline OrderedJson record_to_json(const InjectionRecord& r) {
  OrderedJson slots = OrderedJson::array();
  for (const auto& s : r.target_slots) slots.push_back(s.key());
  OrderedJson j = {{"dialogue_id", r.dialogue_id},
                   {"scenario", to_string(r.scenario)},
                   {"target_slots", std::move(slots)},
                   {"old_values", r.old_values},
                   {"new_values", r.new_values}};
  j["skipped"] = r.skipped ? OrderedJson(*r.skipped) : OrderedJson(nullptr);
  return j;
}

inline InjectionRecord record_from_json(const Json& j, const std::string& where) {
  InjectionRecord r;
  r.dialogue_id = detail::require_string(j, "dialogue_id", where);
  auto scenario = parse_scenario(detail::require_string(j, "scenario", where));
  if (!scenario) throw SchemaError(where + ": unknown scenario");
  r.scenario = *scenario;
  for (const auto& s : detail::require_array(j, "target_slots", where)) {
    r.target_slots.push_back(parse_slot_key(s.get<std::string>()));
  }
  r.old_values = detail::require_array(j, "old_values", where).get<std::vector<std::string>>();
  r.new_values = detail::require_array(j, "new_values", where).get<std::vector<std::string>>();
  const Json& skipped = detail::require_field(j, "skipped", where);
  if (!skipped.is_null()) r.skipped = skipped.get<std::string>();
  return r;
}

inline std::string records_to_jsonl(std::span<const InjectionRecord> records) {
  std::string out;
  for (const auto& r : records) {
    out += record_to_json(r).dump();
    out += '\n';
  }
  return out;
}

}  // namespace turnback
