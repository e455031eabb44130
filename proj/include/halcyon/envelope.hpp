#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace halcyon {

// Simulation time unit. The simulator's tick clock is the only clock.
using Tick = std::uint64_t;

// Message identifiers are issued by the sender subsystem's monotonic counter.
using MsgId = std::uint64_t;

/// Opaque, case-sensitive principal identity. Ordering is lexicographic and
/// used only for tie-breaking and deterministic container iteration.
struct PrincipalId {
  std::string id;

  auto operator<=>(const PrincipalId&) const = default;
  bool empty() const { return id.empty(); }
};

/// Sender-declared delivery-timing advice. Totally ordered.
enum class UrgencyLevel : std::uint8_t { Low = 0, Normal = 1, High = 2, Critical = 3 };

std::strong_ordering compare_urgency(UrgencyLevel a, UrgencyLevel b);

std::string_view to_string(UrgencyLevel u);
std::optional<UrgencyLevel> parse_urgency(std::string_view text);  // case-insensitive

/// Closed tick interval [not_before, not_after]; absent not_after = unbounded.
struct ValidityWindow {
  Tick not_before = 0;
  std::optional<Tick> not_after;

  bool operator==(const ValidityWindow&) const = default;
};

/// Set of principals permitted to receive an envelope. Stored sorted and
/// de-duplicated; membership is exact equality.
class AuthorityList {
 public:
  AuthorityList() = default;
  explicit AuthorityList(std::vector<PrincipalId> ids);

  bool contains(const PrincipalId& p) const;
  bool empty() const { return ids_.empty(); }
  std::size_t size() const { return ids_.size(); }
  const std::vector<PrincipalId>& ids() const { return ids_; }

  bool operator==(const AuthorityList&) const = default;

 private:
  std::vector<PrincipalId> ids_;  // sorted, unique
};

/// A grid message. Immutable after composition: payload plus the accompanying
/// details (sender identity, authorized receivers, urgency) and a validity
/// window. A perishable envelope is of value only at its moment of relevance
/// and is never re-queued after a failed final selection.
struct Envelope {
  MsgId msg_id = 0;
  std::string payload;
  PrincipalId sender;
  AuthorityList authority;
  UrgencyLevel urgency = UrgencyLevel::Normal;
  ValidityWindow validity;
  bool perishable = false;
};

enum class ValidationError { EmptyAuthority, EmptyPayload, InvertedWindow };

std::string_view to_string(ValidationError e);

/// nullopt == Ok; otherwise names the first violated invariant.
std::optional<ValidationError> validate(const Envelope& env);

/// True iff not_before <= now <= not_after (unbounded windows never close).
bool is_live(const Envelope& env, Tick now);

/// Canonical textual form, field order fixed:
///   msg=<id> from=<sender> auth=[p1,p2] urg=<level> valid=<lo>..<hi|inf>
///   perishable=<bool> payload="<text>"
std::string to_text(const Envelope& env);

}  // namespace halcyon
