#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "halcyon/envelope.hpp"

namespace halcyon {

// --- rule structure -------------------------------------------------------

struct PayloadContains {
  std::string keyword;  // case-insensitive substring match
  bool operator==(const PayloadContains&) const = default;
};
struct SenderIs {
  PrincipalId sender;
  bool operator==(const SenderIs&) const = default;
};
struct UrgencyAtLeast {
  UrgencyLevel level;
  bool operator==(const UrgencyAtLeast&) const = default;
};
using Predicate = std::variant<PayloadContains, SenderIs, UrgencyAtLeast>;

struct ForwardAction {
  PrincipalId target;
  UrgencyLevel urgency;
  bool operator==(const ForwardAction&) const = default;
};
struct ReplyAction {
  bool to_sender = false;  // `reply sender "..."` form
  PrincipalId to;          // ignored when to_sender
  std::string payload;
  bool operator==(const ReplyAction&) const = default;
};
using RuleAction = std::variant<ForwardAction, ReplyAction>;

/// One delegation rule: a conjunction of predicates mapped to an ordered,
/// non-empty action list.
struct Rule {
  std::string name;
  std::vector<Predicate> predicates;  // non-empty conjunction
  std::vector<RuleAction> actions;    // non-empty, ordered
};

/// Parsed rules in file order plus the owner's fallback delegate. Immutable
/// after load; evaluation is all-match in file order.
struct RuleSet {
  std::vector<Rule> rules;
  std::optional<PrincipalId> fallback;
};

// --- parsing ---------------------------------------------------------------

/// Position of the first offending token, 1-based.
struct ParseError {
  std::size_t line = 0;
  std::size_t column = 0;
  std::string expected;

  std::string message() const;
};

struct ParseResult {
  std::optional<RuleSet> ruleset;
  std::optional<ParseError> error;

  bool ok() const { return ruleset.has_value(); }
};

/// Grammar:
///   rule <name>: when <pred> { and <pred> } => <action> { ; <action> }
///   pred   := payload contains "<keyword>" | sender is <id> | urgency >= <level>
///   action := forward <target-id> urgency=<level> | reply <sender|target-id> "<payload>"
/// Whitespace-insensitive between tokens; `#` comments to end of line.
ParseResult parse_rules(std::string_view text);

/// Canonical single-line-per-rule form; parse(pretty_print(rs)) is a fixed
/// point of the grammar.
std::string pretty_print(const RuleSet& rs);

// --- matching ---------------------------------------------------------------

struct MatchedForward {
  PrincipalId target;
  UrgencyLevel urgency;
  bool operator==(const MatchedForward&) const = default;
};
struct MatchedReply {
  PrincipalId to;  // resolved: `sender` keyword becomes the envelope's sender
  std::string payload;
  bool operator==(const MatchedReply&) const = default;
};
using MatchedAction = std::variant<MatchedForward, MatchedReply>;

bool rule_matches(const Envelope& env, const Rule& rule);

/// Concatenated actions of ALL matching rules, in file order. Pure function
/// of (envelope, ruleset); the fallback delegate is not consulted here.
std::vector<MatchedAction> match(const Envelope& env, const RuleSet& rs);

/// Payload prefix applied when a forward envelope is materialized.
std::string forwarded_payload(const Envelope& original);

}  // namespace halcyon
