#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "halcyon/context.hpp"
#include "halcyon/deferral_queue.hpp"
#include "halcyon/envelope.hpp"
#include "halcyon/grid.hpp"
#include "halcyon/rules.hpp"
#include "halcyon/sender.hpp"
#include "halcyon/trace.hpp"

namespace halcyon {

enum class PathTag { L1, L2, L3, L4, L5, L6, L7, Q };

std::string_view to_string(PathTag t);

enum class DropReason { Unauthorized, Expired, Undeliverable };

std::string_view to_string(DropReason r);

// --- route decisions ---------------------------------------------------------

struct DeliverNow {
  Modality modality;
  bool operator==(const DeliverNow&) const = default;
};
struct Defer {
  DeferReason reason;
  bool operator==(const Defer&) const = default;
};
struct Drop {
  DropReason reason;
  bool operator==(const Drop&) const = default;
};
struct Requeue {
  bool operator==(const Requeue&) const = default;
};

using RouteDecision = std::variant<DeliverNow, Defer, Drop, Requeue>;
using GateDecision = std::variant<DeliverNow, Defer, Drop>;   // level 2 outcomes
using FinalSelect = std::variant<DeliverNow, Drop, Requeue>;  // level 5 outcomes

std::string to_string(const RouteDecision& d);

// --- presentation ------------------------------------------------------------

/// Information bound to the device chosen at that instant.
struct Presentation {
  MsgId msg_id = 0;
  std::string payload;
  Modality modality = Modality::Visual;
  Device device;
  Tick rendered_at = 0;
};

/// Terminal record of one delivery. path holds each traversed level tag once,
/// in first-traversal order; it begins with L1 and ends with L7.
struct DeliveryRecord {
  Presentation presentation;
  PrincipalId recipient;
  Tick delivered_at = 0;
  std::vector<PathTag> path;
};

// --- modality priority table ---------------------------------------------------

/// Ordered modality preferences per activity. The built-in rows: "driving"
/// prefers audio, "meeting" prefers visual, everything else falls back to the
/// default row. Scenario files may override or add rows.
class ModalityTable {
 public:
  static ModalityTable defaults();

  void set_row(const std::string& activity, std::vector<Modality> row);
  void set_default_row(std::vector<Modality> row);
  const std::vector<Modality>& row(const std::string& activity) const;

 private:
  std::map<std::string, std::vector<Modality>> rows_;
  std::vector<Modality> default_row_ = {Modality::Visual, Modality::Audio, Modality::Haptic,
                                        Modality::Olfactory};
};

// --- level operations ----------------------------------------------------------

/// Level I: security admission. True iff the recipient is on the envelope's
/// authority list.
bool level1_admit(const Envelope& env, const PrincipalId& recipient);

/// Level II: urgency/environment gate. Expired envelopes drop; a busy
/// recipient defers unless the envelope is perishable at or above the
/// interrupt threshold; unimportant (<= Normal, non-perishable) envelopes
/// defer for later; everything else is delivered now through the selected
/// modality. A deliverable envelope with no usable device degrades to
/// Defer{Busy} (non-perishable) or Drop{Undeliverable} (perishable).
GateDecision level2_gate(const Envelope& env, const EnvironmentSnapshot& snap, Tick now,
                         const ModalityTable& table,
                         UrgencyLevel interrupt_threshold = UrgencyLevel::High);

/// First modality of the activity's table row that has a device available.
std::optional<Modality> select_modality(UrgencyLevel urgency, const EnvironmentSnapshot& snap,
                                        const ModalityTable& table);

/// Head of available_devices: a pure multiplexer over the present devices.
std::optional<Device> select_device(Modality m, const EnvironmentSnapshot& snap);

// --- level 3: delegation --------------------------------------------------------

struct ForwardDecision {
  SendRequest request;
  PrincipalId target;
};
struct ReplyDecision {
  SendRequest request;
  PrincipalId to;
};
struct HoldDecision {};
using DelegationAction = std::variant<ForwardDecision, ReplyDecision, HoldDecision>;

/// Level III: evaluate the recipient's rules against a busy-deferred item.
/// All matching rules contribute actions in file order; when nothing matches,
/// the item is forwarded to the fallback delegate if one is configured, else
/// held. The original item always stays queued for the recipient.
std::vector<DelegationAction> level3_delegate(const DeferredItem& item,
                                              const PrincipalId& recipient, const RuleSet& rules,
                                              Tick now);

/// Level IV: FIFO recheck; the storage-layer realization is DeferralQueue::due.
std::vector<DeferredItem> level4_recheck(DeferralQueue& queue, Tick now, Tick delay);

/// Level V: final selection for a rechecked item. Not-live items drop as
/// Expired. A free recipient gets delivery (or, with no usable device,
/// Requeue / Drop{Undeliverable} by perishability). A still-busy recipient
/// requeues non-perishable items; perishable ones drop — the queue option is
/// no longer provided for instant-value information.
FinalSelect level5_final_select(const DeferredItem& item, const EnvironmentSnapshot& snap,
                                Tick now, const ModalityTable& table);

/// Level VI: merge the payload with the device selected at this instant.
/// Empty when no present device supports the modality.
std::optional<Presentation> level6_integrate(const Envelope& env, Modality m,
                                             const EnvironmentSnapshot& snap, Tick now);

/// Level VII: produce the terminal record; delivered_at equals rendered_at.
DeliveryRecord level7_deliver(const Presentation& p, const PrincipalId& recipient,
                              std::vector<PathTag> path);

// --- per-principal pipeline -------------------------------------------------------

struct DecisionEvent {
  MsgId msg = 0;
  PathTag level = PathTag::L1;
  RouteDecision decision;
};
struct ForwardedEvent {
  MsgId original = 0;
  Envelope envelope;  // as published; authority = {target}
};
struct RepliedEvent {
  MsgId original = 0;
  Envelope envelope;
};
using PipelineEvent = std::variant<DecisionEvent, DeliveryRecord, ForwardedEvent, RepliedEvent>;

/// Subsystem A for one principal: a deterministic state machine advanced once
/// per tick. Within a tick: newly polled frames (L1-L2, fast path to L6/L7),
/// then due queue items (L4-L5), then delegation (L3) for items deferred this
/// tick, whose forwards/replies are published at the current tick.
class ReceiverPipeline {
 public:
  ReceiverPipeline(PrincipalId me, Grid& grid, const ContextBook& context, RuleSet rules,
                   const ModalityTable& table, SenderSubsystem& sender, TraceLog* trace,
                   Tick recheck_delay, UrgencyLevel interrupt_threshold = UrgencyLevel::High,
                   std::size_t queue_max_items = 0);

  std::vector<PipelineEvent> process_tick(Tick now);

  const PrincipalId& principal() const { return me_; }
  const DeferralQueue& queue() const { return queue_; }
  Tick recheck_delay() const { return recheck_delay_; }

 private:
  void trace_decision(Tick now, PathTag level, MsgId msg, const std::string& decision) const;
  void tag_journey(MsgId msg, PathTag t);
  std::vector<PathTag> take_journey(MsgId msg);

  // L6/L7 leg shared by the fast path and the queue path; false when no
  // present device supports the modality (caller degrades per the L6 rule).
  bool handle_delivery(const Envelope& env, Modality m, const EnvironmentSnapshot& snap,
                       Tick now, std::vector<PipelineEvent>& events);
  void run_delegation(Tick now, const std::vector<MsgId>& deferred_msgs,
                      std::vector<PipelineEvent>& events);

  PrincipalId me_;
  Grid* grid_;
  const ContextBook* context_;
  RuleSet rules_;
  const ModalityTable* table_;
  SenderSubsystem* sender_;
  TraceLog* trace_;
  DeferralQueue queue_;
  Tick recheck_delay_;
  UrgencyLevel interrupt_threshold_;
  std::map<MsgId, std::vector<PathTag>> journeys_;
};

}  // namespace halcyon
