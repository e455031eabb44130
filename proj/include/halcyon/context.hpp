#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "halcyon/envelope.hpp"

namespace halcyon {

/// Sensory channel of presentation. Fixed closed set.
enum class Modality : std::uint8_t { Audio, Visual, Haptic, Olfactory };

std::string_view to_string(Modality m);
std::optional<Modality> parse_modality(std::string_view text);  // case-insensitive

/// Closed tick interval [lo, hi]; absent hi = extends forever.
struct TickRange {
  Tick lo = 0;
  std::optional<Tick> hi;

  bool contains(Tick t) const { return t >= lo && (!hi || t <= *hi); }
  bool operator==(const TickRange&) const = default;
};

/// A presentation device around a principal. priority 1 = most preferred;
/// priorities are unique per (owner, modality) so device choice never ties.
struct Device {
  std::string device_id;
  PrincipalId owner;
  std::vector<Modality> modalities;  // non-empty, unique
  int priority = 1;
  TickRange presence;  // default: always present

  bool supports(Modality m) const;
};

enum class AvailabilityState { Free, Busy };

struct Availability {
  AvailabilityState state = AvailabilityState::Free;
  std::string activity;  // non-empty when Busy

  bool busy() const { return state == AvailabilityState::Busy; }
  bool operator==(const Availability&) const = default;
};

/// A principal's context at one tick: pure function of (scenario, principal,
/// tick), recomputed on demand.
struct EnvironmentSnapshot {
  PrincipalId principal;
  Tick at = 0;
  Availability availability;
  std::vector<Device> present_devices;  // declaration order
};

struct UnknownPrincipal : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Scenario-authored context for all principals: availability timelines and
/// device rosters. Read-only after load.
class ContextBook {
 public:
  void add_principal(const PrincipalId& p);
  void add_device(Device d);
  void add_availability(const PrincipalId& owner, TickRange range, Availability value);

  bool has_principal(const PrincipalId& p) const;
  const std::vector<PrincipalId>& principals() const { return principals_; }

  /// Deterministic snapshot. Availability: the declared interval containing
  /// `at`; ticks past the last interval keep its value; undeclared ticks are
  /// Free. Devices: those whose presence window contains `at`.
  EnvironmentSnapshot snapshot(const PrincipalId& p, Tick at) const;

 private:
  struct AvailabilitySpan {
    TickRange range;
    Availability value;
  };

  std::vector<PrincipalId> principals_;  // declaration order
  std::map<PrincipalId, std::vector<AvailabilitySpan>> timelines_;  // sorted by range.lo
  std::map<PrincipalId, std::vector<Device>> devices_;              // declaration order
};

/// Devices in the snapshot supporting m, by (priority asc, device_id lex).
std::vector<Device> available_devices(const EnvironmentSnapshot& snap, Modality m);

}  // namespace halcyon
