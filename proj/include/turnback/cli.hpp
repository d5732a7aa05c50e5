#pragma once

// Command-line front end: inject, mix, evaluate, validate, stats, convert.
//
// Exit codes: 0 success, 1 validation failure, 2 usage error, 3 IO/parse error.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "turnback/corpus.hpp"
#include "turnback/corpus_io.hpp"
#include "turnback/default_templates.hpp"
#include "turnback/errors.hpp"
#include "turnback/eval.hpp"
#include "turnback/manifest.hpp"
#include "turnback/mixer.hpp"
#include "turnback/multiwoz.hpp"
#include "turnback/scenarios.hpp"
#include "turnback/templates.hpp"
#include "turnback/validate.hpp"

namespace turnback::cli {

enum ExitCode : int {
  kSuccess = 0,
  kValidationFailure = 1,
  kUsageError = 2,
  kIoError = 3,
};

namespace fs = std::filesystem;

struct DatasetInput {
  std::string path;
  std::string format = "auto";  // auto | canonical | multiwoz
  std::string split_list;       // multiwoz only
};

struct InjectOptions {
  DatasetInput input;
  std::string scenario;
  std::uint64_t seed = 0;
  std::string phase;
  std::string ontology;
  std::string templates;
  std::string out;
  std::string log;
  int proportion = 100;  // mix only
};

struct EvaluateOptions {
  std::string gold;
  std::string pred;
  std::string out;
};

struct ValidateOptions {
  DatasetInput input;
  std::string templates;
  std::string ontology;
  std::string phase;
};

struct StatsOptions {
  DatasetInput input;
  std::string phase;
};

struct ConvertOptions {
  DatasetInput input;
  std::string phase;
  std::string out;
};

inline std::optional<Phase> phase_flag(const std::string& s) {
  if (s.empty()) return std::nullopt;
  auto p = parse_phase(s);
  if (!p) throw ArgumentError("--phase must be train, validation or test");
  return p;
}

// Canonical files are recognized by their "dialogues" list; anything else is
// read as MultiWOZ data.json.
inline Dataset load_dataset(const DatasetInput& in, std::optional<Phase> phase, std::ostream& err) {
  Json j = read_json_file(in.path);
  std::string format = in.format;
  if (format == "auto") {
    format = j.is_object() && j.contains("dialogues") ? "canonical" : "multiwoz";
  }
  if (format == "canonical") {
    Dataset ds = dataset_from_json(j, in.path);
    if (phase) ds.phase = *phase;
    return ds;
  }
  if (format != "multiwoz") throw ArgumentError("--format must be auto, canonical or multiwoz");
  std::optional<std::vector<std::string>> ids;
  if (!in.split_list.empty()) ids = load_id_list(in.split_list);
  auto loaded = multiwoz_from_json(j, phase.value_or(Phase::kTest), in.path, ids);
  for (const auto& s : loaded.skipped) {
    err << "warning: skipped dialogue " << s.dialogue_id << ": " << s.reason << "\n";
  }
  if (!loaded.skipped.empty()) {
    err << "warning: " << loaded.skipped.size() << " dialogues skipped for unknown slots\n";
  }
  if (loaded.missing_from_split > 0) {
    err << "warning: " << loaded.missing_from_split << " split ids not found in " << in.path
        << "\n";
  }
  return std::move(loaded.dataset);
}

inline std::vector<std::string> command_line(const std::vector<std::string>& args) {
  std::vector<std::string> cmd{"turnback"};
  cmd.insert(cmd.end(), args.begin(), args.end());
  return cmd;
}

inline TemplateRegistry load_templates(const std::string& path) {
  return path.empty() ? default_registry() : load_registry(path);
}

inline bool report_registry(const TemplateRegistry& registry, std::ostream& err) {
  auto report = validate_registry(registry);
  for (const auto& v : report.violations) err << "template violation: " << v << "\n";
  return report.ok();
}

inline void write_injection_outputs(const Dataset& ds, const std::vector<InjectionRecord>& records,
                                    const fs::path& out, const fs::path& log,
                                    const InjectOptions& opt,
                                    const std::vector<std::string>& args) {
  serialize(ds, out);
  write_text_file(log, records_to_jsonl(records));
  RunManifest m;
  m.command = command_line(args);
  m.seed = opt.seed;
  m.add_input(opt.input.path);
  m.add_input(opt.ontology);
  if (!opt.templates.empty()) m.add_input(opt.templates);
  m.add_output(out);
  m.add_output(log);
  write_manifest(m, out);
}

inline int cmd_inject(const InjectOptions& opt, const std::vector<std::string>& args,
                      std::ostream& out, std::ostream& err) {
  auto scenario = parse_scenario(opt.scenario);
  if (!scenario) throw ArgumentError("--scenario must be single, return, dual-value or dual-slot");
  auto phase = phase_flag(opt.phase);
  TemplateRegistry registry = load_templates(opt.templates);
  if (!report_registry(registry, err)) return kValidationFailure;
  Ontology ontology = load_ontology(opt.ontology);
  Dataset input = load_dataset(opt.input, phase, err);

  auto batch = inject(input, *scenario, ontology, registry, opt.seed, phase);
  fs::path log = opt.log.empty() ? fs::path(opt.out + ".log.jsonl") : fs::path(opt.log);
  write_injection_outputs(batch.dataset, batch.records, opt.out, log, opt, args);

  const auto applied = batch.applied_count();
  out << "inject " << to_string(*scenario) << ": " << input.dialogues.size() << " dialogues, "
      << applied << " injected, " << batch.records.size() - applied << " skipped\n";
  out << "wrote " << opt.out << ", " << log.string() << ", " << manifest_path(opt.out).string()
      << "\n";
  return kSuccess;
}

inline int cmd_mix(const InjectOptions& opt, const std::vector<std::string>& args,
                   std::ostream& out, std::ostream& err) {
  auto scenario = parse_scenario(opt.scenario);
  if (!scenario) throw ArgumentError("--scenario must be single, return, dual-value or dual-slot");
  check_proportion(opt.proportion);
  auto phase = phase_flag(opt.phase);
  TemplateRegistry registry = load_templates(opt.templates);
  if (!report_registry(registry, err)) return kValidationFailure;
  Ontology ontology = load_ontology(opt.ontology);
  Dataset input = load_dataset(opt.input, phase, err);

  MixSpec spec{opt.proportion, *scenario, opt.seed, phase};
  auto result = mix(input, spec, ontology, registry);

  const fs::path in_path(opt.input.path);
  const std::string name =
      mix_output_name(in_path.stem().string(), *scenario, opt.proportion, opt.seed);
  fs::path target;
  if (opt.out.empty()) {
    target = in_path.parent_path() / name;
  } else if (fs::is_directory(opt.out)) {
    target = fs::path(opt.out) / name;
  } else {
    target = opt.out;
  }
  fs::path log = opt.log.empty() ? fs::path(target.string() + ".log.jsonl") : fs::path(opt.log);
  write_injection_outputs(result.dataset, result.records, target, log, opt, args);

  out << "mix " << to_string(*scenario) << " p=" << opt.proportion << ": "
      << input.dialogues.size() << " dialogues, " << result.selected << " selected, "
      << result.applied << " injected, " << result.selected - result.applied
      << " selected but skipped (realized " << result.realized_proportion() * 100.0 << "%)\n";
  out << "wrote " << target.string() << "\n";
  return kSuccess;
}

inline int cmd_evaluate(const EvaluateOptions& opt, const std::vector<std::string>& args,
                        std::ostream& out, std::ostream& err) {
  Dataset gold = load_dataset(DatasetInput{opt.gold, "canonical", ""}, std::nullopt, err);
  auto predictions = load_predictions(opt.pred);
  auto result = joint_goal_accuracy(gold, predictions);
  if (result.missing_predictions > 0) {
    err << "warning: " << result.missing_predictions
        << " turns have no prediction and count as incorrect\n";
  }
  report(result, opt.out);
  RunManifest m;
  m.command = command_line(args);
  m.add_input(opt.gold);
  m.add_input(opt.pred);
  m.add_output(opt.out);
  m.add_output(report_table_path(opt.out));
  write_manifest(m, opt.out);
  out << format_report_table(result);
  return kSuccess;
}

inline int cmd_validate(const ValidateOptions& opt, std::ostream& out, std::ostream& err) {
  std::vector<std::string> violations;
  TemplateRegistry registry = load_templates(opt.templates);
  for (auto& v : validate_registry(registry).violations) violations.push_back("templates: " + v);

  std::optional<Ontology> ontology;
  if (!opt.ontology.empty()) ontology = load_ontology(opt.ontology);

  if (!opt.input.path.empty()) {
    try {
      Dataset ds = load_dataset(opt.input, phase_flag(opt.phase), err);
      for (auto& v : validate_dataset(ds, ontology ? &*ontology : nullptr).violations) {
        violations.push_back("dataset: " + v);
      }
    } catch (const SchemaError& e) {
      violations.push_back(std::string("dataset: ") + e.what());
    } catch (const StateError& e) {
      violations.push_back(std::string("dataset: ") + e.what());
    }
  }
  for (const auto& v : violations) out << "violation: " << v << "\n";
  if (!violations.empty()) {
    out << violations.size() << " violation(s)\n";
    return kValidationFailure;
  }
  out << "ok\n";
  return kSuccess;
}

inline int cmd_stats(const StatsOptions& opt, std::ostream& out, std::ostream& err) {
  Dataset ds = load_dataset(opt.input, phase_flag(opt.phase), err);
  std::size_t turns = 0;
  std::size_t injected_turns = 0;
  std::map<std::string, std::pair<std::size_t, std::size_t>> per_scenario;  // dialogues, turns
  std::map<std::string, std::map<std::string, std::size_t>> slot_histogram;
  for (const auto& d : ds.dialogues) {
    turns += d.turns.size();
    std::size_t injected = d.injected_turn_count();
    injected_turns += injected;
    if (injected > 0) {
      auto& entry = per_scenario[std::string(to_string(d.turns.back().provenance->scenario))];
      ++entry.first;
      entry.second += injected;
    }
    for (const auto& [ref, _] : d.final_state()) ++slot_histogram[ref.domain][ref.slot];
  }
  out << "phase: " << to_string(ds.phase) << "\n";
  out << "dialogues: " << ds.dialogues.size() << "\n";
  out << "turns: " << turns << "\n";
  out << "original turns: " << turns - injected_turns << "\n";
  out << "injected turns: " << injected_turns << "\n";
  for (auto s : kAllScenarios) {
    auto it = per_scenario.find(std::string(to_string(s)));
    std::size_t dialogues = it == per_scenario.end() ? 0 : it->second.first;
    std::size_t sturns = it == per_scenario.end() ? 0 : it->second.second;
    out << "scenario " << to_string(s) << ": " << dialogues << " dialogues, " << sturns
        << " turns\n";
  }
  out << "final-state slots per domain:\n";
  for (const auto& [domain, slots] : slot_histogram) {
    std::size_t total = 0;
    for (const auto& [_, n] : slots) total += n;
    out << "  " << domain << ": " << total << "\n";
    for (const auto& [slot, n] : slots) out << "    " << slot << ": " << n << "\n";
  }
  return kSuccess;
}

inline int cmd_convert(const ConvertOptions& opt, const std::vector<std::string>& args,
                       std::ostream& out, std::ostream& err) {
  Dataset ds = load_dataset(opt.input, phase_flag(opt.phase), err);
  serialize(ds, opt.out);
  RunManifest m;
  m.command = command_line(args);
  m.add_input(opt.input.path);
  if (!opt.input.split_list.empty()) m.add_input(opt.input.split_list);
  m.add_output(opt.out);
  write_manifest(m, opt.out);
  out << "converted " << ds.dialogues.size() << " dialogues to " << opt.out << "\n";
  return kSuccess;
}

namespace detail {

inline void add_input_flags(CLI::App& cmd, DatasetInput& in, bool required = true) {
  auto* opt = cmd.add_option("--in", in.path, "Input dataset (canonical JSON or MultiWOZ data.json)");
  if (required) opt->required();
  cmd.add_option("--format", in.format, "Input format")
      ->check(CLI::IsMember({"auto", "canonical", "multiwoz"}));
  cmd.add_option("--split-list", in.split_list, "MultiWOZ id list restricting the split");
}

inline void add_injection_flags(CLI::App& cmd, InjectOptions& o) {
  add_input_flags(cmd, o.input);
  cmd.add_option("--scenario", o.scenario, "Turnback scenario")
      ->required()
      ->check(CLI::IsMember({"single", "return", "dual-value", "dual-slot"}));
  cmd.add_option("--seed", o.seed, "Random seed")->required();
  cmd.add_option("--phase", o.phase, "Template phase (defaults to the dataset phase)")
      ->check(CLI::IsMember({"train", "validation", "test"}));
  cmd.add_option("--ontology", o.ontology, "Ontology JSON")->required();
  cmd.add_option("--templates", o.templates, "Template registry JSON (default: built-in)");
  cmd.add_option("--log", o.log, "Injection audit log (JSONL)");
}

}  // namespace detail

// Runs one CLI invocation; `args` excludes the program name.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Turnback injection and dialogue state tracking evaluation", "turnback"};
  app.require_subcommand(1);

  InjectOptions inject_opt;
  auto* inject_cmd = app.add_subcommand("inject", "Append turnback turns to every dialogue");
  detail::add_injection_flags(*inject_cmd, inject_opt);
  inject_cmd->add_option("--out", inject_opt.out, "Output dataset")->required();

  InjectOptions mix_opt;
  auto* mix_cmd = app.add_subcommand("mix", "Inject a seeded proportion of dialogues");
  detail::add_injection_flags(*mix_cmd, mix_opt);
  mix_cmd->add_option("--proportion", mix_opt.proportion, "Percent of dialogues, 0..100")
      ->required()
      ->check(CLI::Range(0, 100));
  mix_cmd->add_option("--out", mix_opt.out, "Output file or directory");

  EvaluateOptions eval_opt;
  auto* eval_cmd = app.add_subcommand("evaluate", "Score a prediction file");
  eval_cmd->add_option("--gold", eval_opt.gold, "Gold (injected) dataset")->required();
  eval_cmd->add_option("--pred", eval_opt.pred, "Predictions (JSONL)")->required();
  eval_cmd->add_option("--out", eval_opt.out, "Report JSON path")->required();

  ValidateOptions validate_opt;
  auto* validate_cmd = app.add_subcommand("validate", "Check dataset and template invariants");
  detail::add_input_flags(*validate_cmd, validate_opt.input, /*required=*/false);
  validate_cmd->add_option("--templates", validate_opt.templates, "Template registry JSON");
  validate_cmd->add_option("--ontology", validate_opt.ontology, "Ontology JSON");
  validate_cmd->add_option("--phase", validate_opt.phase, "Phase for MultiWOZ input");

  StatsOptions stats_opt;
  auto* stats_cmd = app.add_subcommand("stats", "Print dataset statistics");
  detail::add_input_flags(*stats_cmd, stats_opt.input);
  stats_cmd->add_option("--phase", stats_opt.phase, "Phase for MultiWOZ input");

  ConvertOptions convert_opt;
  auto* convert_cmd = app.add_subcommand("convert", "Write an input dataset in canonical form");
  detail::add_input_flags(*convert_cmd, convert_opt.input);
  convert_cmd->add_option("--phase", convert_opt.phase, "Dataset phase")
      ->check(CLI::IsMember({"train", "validation", "test"}));
  convert_cmd->add_option("--out", convert_opt.out, "Output canonical dataset")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    err << "run with --help for usage\n";
    return kUsageError;
  }

  try {
    if (inject_cmd->parsed()) return cmd_inject(inject_opt, args, out, err);
    if (mix_cmd->parsed()) return cmd_mix(mix_opt, args, out, err);
    if (eval_cmd->parsed()) return cmd_evaluate(eval_opt, args, out, err);
    if (validate_cmd->parsed()) return cmd_validate(validate_opt, out, err);
    if (stats_cmd->parsed()) return cmd_stats(stats_opt, out, err);
    if (convert_cmd->parsed()) return cmd_convert(convert_opt, args, out, err);
  } catch (const ArgumentError& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kIoError;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kIoError;
  } catch (const SchemaError& e) {
    err << "error: " << e.what() << "\n";
    return kIoError;
  } catch (const StateError& e) {
    err << "error: " << e.what() << "\n";
    return kIoError;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kValidationFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kIoError;
  }
  return kUsageError;
}

}  // namespace turnback::cli
