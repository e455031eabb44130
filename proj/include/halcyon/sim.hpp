#pragma once

#include <map>
#include <string>
#include <vector>

#include "halcyon/context.hpp"
#include "halcyon/grid.hpp"
#include "halcyon/receiver.hpp"
#include "halcyon/scenario.hpp"
#include "halcyon/sender.hpp"
#include "halcyon/trace.hpp"

namespace halcyon {

struct DropRecord {
  MsgId msg = 0;
  PrincipalId principal;
  DropReason reason = DropReason::Expired;
  Tick at = 0;
  PathTag level = PathTag::L1;
};

/// Terminal counters. published/delivered/dropped/still_queued classify each
/// published message once (delivered wins over still-queued wins over
/// dropped), so published = delivered + dropped + still_queued always holds.
/// drop_* / deliveries / forwards / replies count per-recipient events.
struct RunSummary {
  std::size_t published = 0;
  std::size_t delivered = 0;
  std::size_t dropped = 0;
  std::size_t still_queued = 0;
  std::size_t drop_unauthorized = 0;
  std::size_t drop_expired = 0;
  std::size_t drop_undeliverable = 0;
  std::size_t deliveries = 0;
  std::size_t forwards = 0;
  std::size_t replies = 0;
  std::size_t rejected_sends = 0;
  std::size_t max_queue_depth = 0;
  double mean_delivery_latency = 0.0;

  std::string to_text() const;  // the `-- summary --` block
};

struct RunResult {
  std::vector<std::string> trace_lines;
  RunSummary summary;
  std::vector<DeliveryRecord> deliveries;
  std::vector<DropRecord> drops;
  std::map<MsgId, Envelope> envelopes;  // every published envelope
  std::map<MsgId, Tick> published_at;
  std::map<std::string, std::vector<DeferredItem>> leftover_queues;
  Tick end_tick = 0;
  bool quiescent = false;

  /// Full canonical trace: one line per event, then the summary block.
  std::string trace_text() const;
};

struct StepEvents {
  Tick tick = 0;
  bool processed = false;  // false once the run is finished
  bool quiescent_after = false;
  std::vector<PipelineEvent> pipeline_events;
  std::vector<std::string> new_trace_lines;
};

/// The run-loop state, advanced one tick at a time. Per tick: scheduled sends
/// (subsystem B), grid propagation, then every principal's pipeline in
/// declaration order. Finishes at tick_limit or at quiescence (no pending
/// frames, empty queues, no future sends), whichever comes first.
class SimState {
 public:
  explicit SimState(Scenario scenario);

  SimState(const SimState&) = delete;
  SimState& operator=(const SimState&) = delete;

  StepEvents step();

  bool finished() const { return finished_; }
  bool quiescent() const { return quiescent_; }
  Tick now() const { return now_; }
  const TraceLog& trace() const { return trace_; }
  const Scenario& scenario() const { return scenario_; }

  RunResult result() const;

 private:
  bool is_quiescent() const;
  void account_events(const PrincipalId& principal, Tick now,
                      const std::vector<PipelineEvent>& events);

  Scenario scenario_;
  TraceLog trace_;
  Grid grid_;
  ContextBook context_;
  SenderSubsystem sender_;
  std::vector<ReceiverPipeline> pipelines_;
  std::size_t next_send_ = 0;  // scenario sends, sorted by (tick, file order)
  Tick now_ = 0;
  bool finished_ = false;
  bool quiescent_ = false;

  struct MsgAccount {
    Tick published_at = 0;
    std::size_t deliveries = 0;
    std::size_t drops = 0;
  };
  std::map<MsgId, Envelope> envelopes_;
  std::map<MsgId, MsgAccount> accounts_;
  std::vector<DeliveryRecord> deliveries_;
  std::vector<DropRecord> drops_;
  std::size_t forwards_ = 0;
  std::size_t replies_ = 0;
  std::size_t rejected_sends_ = 0;
  std::size_t max_queue_depth_ = 0;
  Tick latency_sum_ = 0;
};

/// Load, tick until done, collect the canonical trace. Equivalent to folding
/// step() over a fresh SimState.
RunResult run(const Scenario& scenario);

}  // namespace halcyon
