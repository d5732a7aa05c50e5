#pragma once

// Built-in copy of data/templates.json; a test keeps the two in sync.

#include <string_view>

#include "turnback/templates.hpp"

namespace turnback {

inline constexpr std::string_view kDefaultTemplatesJson = R"json([
  {"id": "train-user-1", "phase": "train", "side": "user", "pattern": "Actually , I changed my mind . Please make the {domain} {slot} {value} instead."},
  {"id": "train-user-2", "phase": "train", "side": "user", "pattern": "Sorry , can you update the {domain} {slot} to {value} ?"},
  {"id": "train-user-3", "phase": "train", "side": "user", "pattern": "On second thought , I would prefer {value} for the {domain} {slot}."},
  {"id": "train-user-4", "phase": "train", "side": "user", "pattern": "Let me correct that . The {domain} {slot} should be {value}."},
  {"id": "validation-user-1", "phase": "validation", "side": "user", "pattern": "Oh , one more thing . Could you switch the {domain} {slot} to {value} ?"},
  {"id": "validation-user-2", "phase": "validation", "side": "user", "pattern": "Never mind what I said before , set {domain} {slot} to {value} please."},
  {"id": "validation-user-3", "phase": "validation", "side": "user", "pattern": "Hmm , I think {value} works better as the {domain} {slot}."},
  {"id": "test-user-1", "phase": "test", "side": "user", "pattern": "Wait , it might be better to change {domain} {slot} to {value}."},
  {"id": "test-user-2", "phase": "test", "side": "user", "pattern": "Hold on , I've been thinking about it and I think changing {domain} {slot} to {value} will be better."},
  {"id": "train-system-first", "phase": "train", "side": "system", "pattern": "Completed.", "position": "first"},
  {"id": "train-system-followup", "phase": "train", "side": "system", "pattern": "Sure. Anything else?", "position": "followup"},
  {"id": "validation-system-first", "phase": "validation", "side": "system", "pattern": "Completed.", "position": "first"},
  {"id": "validation-system-followup", "phase": "validation", "side": "system", "pattern": "Sure. Anything else?", "position": "followup"},
  {"id": "test-system-first", "phase": "test", "side": "system", "pattern": "Completed.", "position": "first"},
  {"id": "test-system-followup", "phase": "test", "side": "system", "pattern": "Sure. Anything else?", "position": "followup"}
]
)json";

inline const TemplateRegistry& default_registry() {
  static const TemplateRegistry kRegistry =
      registry_from_json(Json::parse(kDefaultTemplatesJson), "built-in templates");
  return kRegistry;
}

}  // namespace turnback
