#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "halcyon/context.hpp"
#include "halcyon/envelope.hpp"
#include "halcyon/receiver.hpp"
#include "halcyon/rules.hpp"
#include "halcyon/sender.hpp"

namespace halcyon {

struct ScheduledSend {
  Tick at = 0;
  SendRequest request;
  std::size_t decl_line = 0;
};

struct AvailabilityDecl {
  PrincipalId owner;
  TickRange range;
  Availability value;
  std::size_t decl_line = 0;
};

/// A fully validated simulation input. Every referenced id is declared,
/// availability intervals do not overlap, and every scheduled send fits
/// inside the tick limit.
struct Scenario {
  std::string name = "unnamed";
  Tick tick_limit = 1000;
  Tick recheck_delay = 60;
  std::string tick_duration;  // descriptive metadata, never consulted by logic

  std::vector<PrincipalId> principals;  // declaration order drives pipeline order
  std::vector<Device> devices;
  std::vector<AvailabilityDecl> availability;
  std::map<PrincipalId, RuleSet> rulesets;
  ModalityTable modality_table = ModalityTable::defaults();
  std::vector<ScheduledSend> sends;

  // Not scenario-file syntax; adjustable programmatically.
  UrgencyLevel interrupt_threshold = UrgencyLevel::High;
  std::size_t queue_max_items = 0;  // 0 = unlimited
};

struct ScenarioError {
  std::size_t line = 0;
  std::string message;

  std::string to_string() const;
};

struct ScenarioLoad {
  std::optional<Scenario> scenario;
  std::optional<ScenarioError> error;

  bool ok() const { return scenario.has_value(); }
};

/// Line-oriented directives; `#` starts a comment, blank lines are ignored.
/// Directives: scenario, tick-duration, tick-limit, recheck-delay, principal,
/// device, availability, rule, rules, fallback, modality-table, at ... send.
/// Anything else is a ScenarioError. base_dir resolves relative `rules` paths.
ScenarioLoad load_scenario(std::string_view text, const std::string& base_dir = ".");

ScenarioLoad load_scenario_file(const std::string& path);

}  // namespace halcyon
