#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "test_support.hpp"

namespace turnback {
namespace {

using testing::PinnedSampler;
using testing::SyntheticOptions;
using testing::fixture;
using testing::ref;
using testing::synthetic_corpus;
using testing::synthetic_ontology;

const std::string kWait = "Wait , it might be better to change ";
const std::string kHoldOn = "Hold on , I've been thinking about it and I think changing ";

class Sng01367 : public ::testing::Test {
 protected:
  Dataset original = load_canonical(fixture("sng01367.json"));
  const Dialogue& dialogue = original.dialogues[0];
  Ontology ontology = load_ontology(fixture("ontology.json"));
  TemplateRegistry registry = default_registry();
  InjectionContext ctx{ontology, registry, Phase::kTest};

  BeliefState final_with(const std::string& key, const std::string& value) const {
    BeliefState s = dialogue.final_state();
    s.assign(ref(key), value);
    return s;
  }

  // Expected appended turn, written out independently of the injectors.
  static Turn turn(int index, std::string system, std::string user, BeliefState state,
                   Scenario scenario, int position) {
    return Turn{index, std::move(system), std::move(user), std::move(state),
                InjectedAt{scenario, position}};
  }

  void expect_prefix_kept(const Dialogue& out) const {
    ASSERT_GE(out.turns.size(), dialogue.turns.size());
    for (std::size_t i = 0; i < dialogue.turns.size(); ++i) {
      EXPECT_EQ(out.turns[i], dialogue.turns[i]) << "turn " << i;
    }
  }
};

TEST_F(Sng01367, SingleChangesDepartureToLondonLiverpoolStreet) {
  PinnedSampler pins;
  pins.slots = {"taxi-departure"};
  pins.values = {"london liverpool street"};
  pins.templates = {"test-user-1"};
  auto result = inject_single(dialogue, ctx, pins);

  ASSERT_TRUE(result.record.applied());
  ASSERT_EQ(result.dialogue.turns.size(), 5u);
  expect_prefix_kept(result.dialogue);
  EXPECT_EQ(result.dialogue.turns[4],
            turn(4, "Completed.", kWait + "taxi departure to london liverpool street.",
                 final_with("taxi-departure", "london liverpool street"), Scenario::kSingle, 0));
  EXPECT_EQ(result.record.target_slots, std::vector<SlotRef>{ref("taxi-departure")});
  EXPECT_EQ(result.record.old_values, std::vector<std::string>{"la raza"});
  EXPECT_EQ(result.record.new_values, std::vector<std::string>{"london liverpool street"});
}

TEST_F(Sng01367, ReturnGoesToTheCopperKettleAndBack) {
  PinnedSampler pins;
  pins.slots = {"taxi-departure"};
  pins.values = {"the copper kettle"};
  pins.templates = {"test-user-2"};
  auto result = inject_return(dialogue, ctx, pins);

  ASSERT_TRUE(result.record.applied());
  ASSERT_EQ(result.dialogue.turns.size(), 6u);
  expect_prefix_kept(result.dialogue);
  EXPECT_EQ(result.dialogue.turns[4],
            turn(4, "Completed.", kHoldOn + "taxi departure to the copper kettle will be better.",
                 final_with("taxi-departure", "the copper kettle"), Scenario::kReturn, 0));
  EXPECT_EQ(result.dialogue.turns[5],
            turn(5, "Sure. Anything else?", kHoldOn + "taxi departure to la raza will be better.",
                 dialogue.final_state(), Scenario::kReturn, 1));
  EXPECT_EQ(result.dialogue.final_state(), dialogue.final_state());
  EXPECT_EQ(result.record.old_values, (std::vector<std::string>{"la raza", "the copper kettle"}));
  EXPECT_EQ(result.record.new_values, (std::vector<std::string>{"the copper kettle", "la raza"}));
}

TEST_F(Sng01367, DualValueLeavesAt1015Then1200) {
  PinnedSampler pins;
  pins.slots = {"taxi-leaveat"};
  pins.values = {"10:15", "12:00"};
  pins.templates = {"test-user-1"};
  auto result = inject_dual_value(dialogue, ctx, pins);

  ASSERT_TRUE(result.record.applied());
  ASSERT_EQ(result.dialogue.turns.size(), 6u);
  expect_prefix_kept(result.dialogue);
  EXPECT_EQ(result.dialogue.turns[4],
            turn(4, "Completed.", kWait + "taxi leave at to 10:15.",
                 final_with("taxi-leaveat", "10:15"), Scenario::kDualValue, 0));
  EXPECT_EQ(result.dialogue.turns[5],
            turn(5, "Sure. Anything else?", kWait + "taxi leave at to 12:00.",
                 final_with("taxi-leaveat", "12:00"), Scenario::kDualValue, 1));
}

// The two-turn example printed for SNG01367, byte for byte.
TEST_F(Sng01367, DualSlotReproducesWorkedExample) {
  PinnedSampler pins;
  pins.slots = {"taxi-leaveat", "taxi-destination"};
  pins.values = {"15:00", "finches bed and breakfast"};
  pins.templates = {"test-user-1", "test-user-2"};
  auto result = inject_dual_slot(dialogue, ctx, pins);

  Dataset expected = load_canonical(fixture("sng01367_dual_slot.json"));
  ASSERT_TRUE(result.record.applied());
  EXPECT_EQ(result.dialogue, expected.dialogues[0]);
  EXPECT_EQ(serialize_to_string(Dataset{Phase::kTest, {result.dialogue}}),
            read_text_file(fixture("sng01367_dual_slot.json")));
}

TEST_F(Sng01367, SeededDualSlotWithTableOntologyReproducesExample) {
  Ontology table = load_ontology(fixture("ontology_table2.json"));
  auto batch = inject(original, Scenario::kDualSlot, table, registry, 1, Phase::kTest);
  EXPECT_EQ(batch.dataset, load_canonical(fixture("sng01367_dual_slot.json")));
}

TEST_F(Sng01367, SeededInjectionIsDeterministic) {
  for (auto scenario : kAllScenarios) {
    auto a = inject(original, scenario, ontology, registry, 42);
    auto b = inject(original, scenario, ontology, registry, 42);
    EXPECT_EQ(serialize_to_string(a.dataset), serialize_to_string(b.dataset));
    EXPECT_EQ(records_to_jsonl(a.records), records_to_jsonl(b.records));
  }
}

TEST(Applicable, ReasonsForEachRule) {
  Ontology onto = synthetic_ontology();
  auto dlg = [](BeliefState s) {
    Dialogue d;
    d.id = "D";
    d.turns.push_back(Turn{0, "", "hi", std::move(s), std::nullopt});
    return d;
  };
  Dialogue empty = dlg({});
  EXPECT_EQ(applicable(empty, Scenario::kSingle, onto).reason, "no belief state");

  // hotel-internet and hospital-department have one value each.
  Dialogue fixed = dlg({{ref("hotel-internet"), "yes"}, {ref("hospital-department"), "paediatrics"}});
  EXPECT_EQ(applicable(fixed, Scenario::kSingle, onto).reason, "no slot with >=2 ontology values");
  EXPECT_EQ(applicable(fixed, Scenario::kDualSlot, onto).reason,
            "needs >=2 slots with >=2 ontology values");

  // hotel-parking has exactly two values.
  Dialogue two = dlg({{ref("hotel-parking"), "yes"}});
  EXPECT_TRUE(applicable(two, Scenario::kSingle, onto));
  EXPECT_TRUE(applicable(two, Scenario::kReturn, onto));
  EXPECT_EQ(applicable(two, Scenario::kDualValue, onto).reason, "needs >=3 values");
  EXPECT_EQ(applicable(two, Scenario::kDualSlot, onto).reason, "needs >=2 belief slots");

  Dialogue injected = dlg({{ref("hotel-parking"), "yes"}});
  injected.turns[0].provenance = InjectedAt{Scenario::kSingle, 0};
  EXPECT_EQ(applicable(injected, Scenario::kSingle, onto).reason, "already injected");
}

TEST(Applicable, SkippedDialoguesPassThroughUnchanged) {
  Ontology onto = synthetic_ontology();
  auto registry = default_registry();
  Dialogue d;
  d.id = "EMPTY.json";
  d.turns.push_back(Turn{0, "", "hello", {}, std::nullopt});
  InjectionContext ctx{onto, registry, Phase::kTest};
  for (auto scenario : kAllScenarios) {
    auto r = inject_seeded(d, scenario, ctx, 3);
    EXPECT_EQ(r.dialogue, d);
    ASSERT_FALSE(r.record.applied());
    EXPECT_EQ(*r.record.skipped, "no belief state");
  }
}

TEST(Applicable, RegistryProblemsBecomeSkips) {
  Ontology onto = synthetic_ontology();
  TemplateRegistry no_test({Template{"u", Phase::kTrain, Side::kUser, "{domain} {slot} {value}",
                                     AckPosition::kAny}});
  Dialogue d;
  d.id = "X.json";
  d.turns.push_back(Turn{0, "", "hello", {{ref("hotel-area"), "north"}}, std::nullopt});
  auto r = inject_seeded(d, Scenario::kSingle, InjectionContext{onto, no_test, Phase::kTest}, 3);
  ASSERT_FALSE(r.record.applied());
  EXPECT_TRUE(r.record.skipped->starts_with("error: "));
  EXPECT_EQ(r.dialogue, d);
}

TEST(SelectTargetSlot, ExcludesAndThrows) {
  Ontology onto = synthetic_ontology();
  BeliefState s{{ref("hotel-area"), "north"}, {ref("hotel-internet"), "yes"}};
  RandomStream rng(4);
  for (int i = 0; i < 20; ++i) EXPECT_EQ(select_target_slot(s, onto, {}, rng), ref("hotel-area"));
  EXPECT_THROW(select_target_slot(s, onto, {ref("hotel-area")}, rng), NoEligibleSlotError);
}

// Three eligible slots, 9,000 seeded draws: each within 1/3 +/- 3 points.
TEST(SelectTargetSlot, UniformOverEligibleSlots) {
  Ontology onto = synthetic_ontology();
  BeliefState s{{ref("hotel-area"), "north"},
                {ref("hotel-internet"), "yes"},
                {ref("taxi-leaveat"), "11:45"},
                {ref("restaurant-food"), "italian"}};
  std::map<std::string, int> counts;
  constexpr int kDraws = 9000;
  for (int i = 0; i < kDraws; ++i) {
    RandomStream rng = derive_rng(5, "d" + std::to_string(i));
    ++counts[select_target_slot(s, onto, {}, rng).key()];
  }
  ASSERT_EQ(counts.size(), 3u);
  EXPECT_FALSE(counts.contains("hotel-internet"));
  for (const auto& [key, n] : counts) {
    EXPECT_NEAR(static_cast<double>(n) / kDraws, 1.0 / 3, 0.03) << key;
  }
}

TEST(SampleAlternativeValue, NeverReturnsExcluded) {
  Ontology onto = synthetic_ontology();
  RandomStream rng(8);
  for (int i = 0; i < 200; ++i) {
    auto v = sample_alternative_value(onto, ref("hotel-parking"), {"yes"}, rng);
    EXPECT_EQ(v, "no");
    auto w = sample_alternative_value(onto, ref("hotel-area"), {"north", "south"}, rng);
    EXPECT_TRUE(w == "east" || w == "west" || w == "centre") << w;
  }
  EXPECT_THROW(sample_alternative_value(onto, ref("hotel-parking"), {"yes", "no"}, rng),
               ExhaustedValuesError);
  EXPECT_THROW(sample_alternative_value(onto, ref("taxi-arriveby"), {}, rng),
               ExhaustedValuesError);
}

TEST(DualValue, ThirdValueDiffersFromBothEarlier) {
  Ontology onto = synthetic_ontology();
  auto registry = default_registry();
  InjectionContext ctx{onto, registry, Phase::kTest};
  int checked = 0;
  for (std::uint64_t seed = 0; checked < 100; ++seed) {
    Dataset ds = synthetic_corpus(seed, {10, 6, 0.0, Phase::kTest});
    for (const auto& d : ds.dialogues) {
      auto r = inject_seeded(d, Scenario::kDualValue, ctx, seed);
      if (!r.record.applied()) continue;
      const auto& v = r.record;
      ASSERT_EQ(v.new_values.size(), 2u);
      std::set<std::string> distinct{v.old_values[0], v.new_values[0], v.new_values[1]};
      EXPECT_EQ(distinct.size(), 3u) << d.id;
      EXPECT_EQ(v.old_values[1], v.new_values[0]);
      if (++checked == 100) break;
    }
  }
}

// Laws checked over random corpora for every scenario.
class InjectionLaws : public ::testing::TestWithParam<Scenario> {};

TEST_P(InjectionLaws, HoldOnRandomCorpora) {
  const Scenario scenario = GetParam();
  Ontology onto = synthetic_ontology();
  auto registry = default_registry();
  for (std::uint64_t seed = 100; seed < 120; ++seed) {
    Dataset ds = synthetic_corpus(seed, {30, 7, 0.1, Phase::kTest});
    auto batch = inject(ds, scenario, onto, registry, seed);
    ASSERT_EQ(batch.dataset.dialogues.size(), ds.dialogues.size());
    ASSERT_EQ(batch.records.size(), ds.dialogues.size());
    EXPECT_TRUE(validate_dataset(batch.dataset, &onto).ok());

    for (std::size_t i = 0; i < ds.dialogues.size(); ++i) {
      const Dialogue& in = ds.dialogues[i];
      const Dialogue& out = batch.dataset.dialogues[i];
      const InjectionRecord& rec = batch.records[i];
      ASSERT_EQ(out.id, in.id);
      ASSERT_EQ(rec.dialogue_id, in.id);
      EXPECT_EQ(rec.applied(), static_cast<bool>(applicable(in, scenario, onto))) << in.id;

      // Prefix preservation.
      for (std::size_t t = 0; t < in.turns.size(); ++t) ASSERT_EQ(out.turns[t], in.turns[t]);

      // Turn-count law.
      const std::size_t added = rec.applied() ? static_cast<std::size_t>(appended_turns(scenario)) : 0;
      ASSERT_EQ(out.turns.size(), in.turns.size() + added) << in.id;
      if (!rec.applied()) continue;
      ASSERT_EQ(rec.target_slots.size(), added);

      // State-delta law: each appended turn changes exactly the recorded slot.
      BeliefState prev = in.final_state();
      for (std::size_t k = 0; k < added; ++k) {
        const Turn& t = out.turns[in.turns.size() + k];
        const SlotRef& slot = rec.target_slots[k];
        EXPECT_EQ(t.provenance, (InjectedAt{scenario, static_cast<int>(k)}));
        ASSERT_NE(prev.find(slot), nullptr);
        EXPECT_EQ(*prev.find(slot), rec.old_values[k]);
        EXPECT_NE(rec.old_values[k], rec.new_values[k]);
        EXPECT_EQ(triple_difference(prev, t.gold_state), 1u);
        ASSERT_NE(t.gold_state.find(slot), nullptr);
        EXPECT_EQ(*t.gold_state.find(slot), rec.new_values[k]);

        // The utterance names the value the state now holds.
        EXPECT_NE(t.user_utterance.find(rec.new_values[k]), std::string::npos) << t.user_utterance;
        auto values = onto.values(slot);
        EXPECT_NE(std::find(values.begin(), values.end(), rec.new_values[k]), values.end());
        prev = t.gold_state;
      }

      if (scenario == Scenario::kReturn) {
        EXPECT_EQ(out.final_state(), in.final_state());
      }
      if (scenario == Scenario::kDualSlot) {
        EXPECT_NE(rec.target_slots[0], rec.target_slots[1]);
      }
      if (scenario == Scenario::kReturn || scenario == Scenario::kDualValue) {
        EXPECT_EQ(rec.target_slots[0], rec.target_slots[1]);
      }
    }
  }
}

// A dialogue's output depends only on the seed, its id and its content.
TEST_P(InjectionLaws, IndependentOfCorpusOrder) {
  const Scenario scenario = GetParam();
  Ontology onto = synthetic_ontology();
  auto registry = default_registry();
  Dataset ds = synthetic_corpus(7, {40, 6, 0.1, Phase::kTest});
  Dataset shuffled = ds;
  std::mt19937_64 gen(1);
  std::shuffle(shuffled.dialogues.begin(), shuffled.dialogues.end(), gen);
  shuffled.dialogues.resize(25);

  auto full = inject(ds, scenario, onto, registry, 99);
  auto part = inject(shuffled, scenario, onto, registry, 99);
  std::map<std::string, const Dialogue*> by_id;
  for (const auto& d : full.dataset.dialogues) by_id[d.id] = &d;
  for (const auto& d : part.dataset.dialogues) EXPECT_EQ(d, *by_id.at(d.id));
}

INSTANTIATE_TEST_SUITE_P(AllScenarios, InjectionLaws, ::testing::ValuesIn(kAllScenarios),
                         [](const auto& info) {
                           std::string name(to_string(info.param));
                           std::erase(name, '-');
                           return name;
                         });

TEST(Inject, EmptyDatasetGivesEmptyOutput) {
  Ontology onto = synthetic_ontology();
  Dataset empty;
  empty.phase = Phase::kValidation;
  auto batch = inject(empty, Scenario::kSingle, onto, default_registry(), 1);
  EXPECT_TRUE(batch.dataset.dialogues.empty());
  EXPECT_TRUE(batch.records.empty());
  EXPECT_EQ(batch.dataset.phase, Phase::kValidation);
}

TEST(Inject, PhaseSelectsTemplateGroup) {
  Ontology onto = synthetic_ontology();
  auto registry = default_registry();
  Dataset ds = synthetic_corpus(3, {30, 5, 0.0, Phase::kTrain});
  auto batch = inject(ds, Scenario::kSingle, onto, registry, 5);
  std::set<std::string> train_prefixes;
  for (const auto* t : registry.group(Phase::kTrain, Side::kUser)) {
    train_prefixes.insert(t->pattern.substr(0, 12));
  }
  for (const auto& d : batch.dataset.dialogues) {
    if (!d.has_injection()) continue;
    EXPECT_TRUE(train_prefixes.contains(d.turns.back().user_utterance.substr(0, 12)))
        << d.turns.back().user_utterance;
  }
}

TEST(InjectionRecords, JsonlRoundTrip) {
  Ontology onto = synthetic_ontology();
  Dataset ds = synthetic_corpus(12, {20, 5, 0.2, Phase::kTest});
  auto batch = inject(ds, Scenario::kDualSlot, onto, default_registry(), 12);
  const std::string text = records_to_jsonl(batch.records);
  std::vector<InjectionRecord> back;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    back.push_back(record_from_json(Json::parse(text.substr(start, end - start)), "log"));
    start = end + 1;
  }
  EXPECT_EQ(back, batch.records);
}

}  // namespace
}  // namespace turnback
