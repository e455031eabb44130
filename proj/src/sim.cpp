#include "halcyon/sim.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace halcyon {

std::string RunSummary::to_text() const {
  std::ostringstream out;
  out << "-- summary --\n";
  out << "published=" << published << " delivered=" << delivered << " dropped=" << dropped
      << " still_queued=" << still_queued << "\n";
  out << "drop_events: unauthorized=" << drop_unauthorized << " expired=" << drop_expired
      << " undeliverable=" << drop_undeliverable << "\n";
  out << "deliveries=" << deliveries << " forwards=" << forwards << " replies=" << replies
      << " rejected_sends=" << rejected_sends << "\n";
  out << "max_queue_depth=" << max_queue_depth << "\n";
  char latency[32];
  std::snprintf(latency, sizeof(latency), "%.2f", mean_delivery_latency);
  out << "mean_delivery_latency=" << latency << "\n";
  return out.str();
}

std::string RunResult::trace_text() const {
  std::ostringstream out;
  for (const std::string& line : trace_lines) out << line << "\n";
  out << summary.to_text();
  return out.str();
}

SimState::SimState(Scenario scenario)
    : scenario_(std::move(scenario)), grid_(&trace_) {
  for (const PrincipalId& p : scenario_.principals) {
    context_.add_principal(p);
    grid_.register_subscriber(p);
  }
  for (const Device& d : scenario_.devices) context_.add_device(d);
  for (const AvailabilityDecl& a : scenario_.availability)
    context_.add_availability(a.owner, a.range, a.value);

  // Stable send order: by tick, then file order.
  std::stable_sort(scenario_.sends.begin(), scenario_.sends.end(),
                   [](const ScheduledSend& a, const ScheduledSend& b) { return a.at < b.at; });

  pipelines_.reserve(scenario_.principals.size());
  for (const PrincipalId& p : scenario_.principals) {
    RuleSet rules;
    if (auto it = scenario_.rulesets.find(p); it != scenario_.rulesets.end()) rules = it->second;
    pipelines_.emplace_back(p, grid_, context_, std::move(rules), scenario_.modality_table,
                            sender_, &trace_, scenario_.recheck_delay,
                            scenario_.interrupt_threshold, scenario_.queue_max_items);
  }
}

bool SimState::is_quiescent() const {
  if (next_send_ < scenario_.sends.size()) return false;
  for (const ReceiverPipeline& p : pipelines_) {
    if (!p.queue().empty()) return false;
  }
  return grid_.fully_consumed(Channel::Receive);
}

void SimState::account_events(const PrincipalId& principal, Tick now,
                              const std::vector<PipelineEvent>& events) {
  for (const PipelineEvent& ev : events) {
    if (const auto* decision = std::get_if<DecisionEvent>(&ev)) {
      if (const auto* drop = std::get_if<Drop>(&decision->decision)) {
        accounts_[decision->msg].drops += 1;
        drops_.push_back(DropRecord{decision->msg, principal, drop->reason, now, decision->level});
      }
    } else if (const auto* delivery = std::get_if<DeliveryRecord>(&ev)) {
      MsgId msg = delivery->presentation.msg_id;
      accounts_[msg].deliveries += 1;
      latency_sum_ += delivery->delivered_at - accounts_[msg].published_at;
      deliveries_.push_back(*delivery);
    } else if (const auto* fwd = std::get_if<ForwardedEvent>(&ev)) {
      envelopes_[fwd->envelope.msg_id] = fwd->envelope;
      accounts_[fwd->envelope.msg_id].published_at = now;
      forwards_ += 1;
    } else {
      const auto& rep = std::get<RepliedEvent>(ev);
      envelopes_[rep.envelope.msg_id] = rep.envelope;
      accounts_[rep.envelope.msg_id].published_at = now;
      replies_ += 1;
    }
  }
}

StepEvents SimState::step() {
  StepEvents out;
  if (finished_) {
    out.quiescent_after = quiescent_;
    return out;
  }

  const Tick now = now_;
  const std::size_t trace_before = trace_.size();
  out.tick = now;
  out.processed = true;

  // Phase 1: scheduled sends through subsystem B.
  while (next_send_ < scenario_.sends.size() && scenario_.sends[next_send_].at == now) {
    const ScheduledSend& s = scenario_.sends[next_send_];
    Envelope env = sender_.compose(s.request);
    try {
      sender_.send(env, grid_, now);
      envelopes_[env.msg_id] = env;
      accounts_[env.msg_id].published_at = now;
    } catch (const ExpiredAtSource&) {
      rejected_sends_ += 1;  // rejected, never published
    }
    ++next_send_;
  }

  // Phase 2: grid propagation (frames become visible one tick after publish;
  // nothing to advance explicitly).

  // Phase 3: every principal's pipeline, declaration order.
  for (ReceiverPipeline& p : pipelines_) {
    std::vector<PipelineEvent> events = p.process_tick(now);
    account_events(p.principal(), now, events);
    max_queue_depth_ = std::max(max_queue_depth_, p.queue().size());
    out.pipeline_events.insert(out.pipeline_events.end(),
                               std::make_move_iterator(events.begin()),
                               std::make_move_iterator(events.end()));
  }

  quiescent_ = is_quiescent();
  if (quiescent_ || now_ == scenario_.tick_limit) finished_ = true;
  if (!finished_) ++now_;

  out.quiescent_after = quiescent_;
  for (std::size_t i = trace_before; i < trace_.size(); ++i)
    out.new_trace_lines.push_back(trace_.lines()[i]);
  return out;
}

RunResult SimState::result() const {
  RunResult res;
  res.trace_lines = trace_.lines();
  res.deliveries = deliveries_;
  res.drops = drops_;
  res.envelopes = envelopes_;
  for (const auto& [msg, acct] : accounts_)
    if (envelopes_.count(msg)) res.published_at[msg] = acct.published_at;
  res.end_tick = now_;
  res.quiescent = quiescent_;

  for (const ReceiverPipeline& p : pipelines_) {
    if (!p.queue().empty()) res.leftover_queues[p.principal().id] = p.queue().items();
  }

  RunSummary& s = res.summary;
  s.published = envelopes_.size();
  for (const auto& [msg, acct] : accounts_) {
    if (envelopes_.count(msg) == 0) continue;  // defensive; accounts track published msgs
    bool queued = false;
    for (const auto& [owner, items] : res.leftover_queues) {
      for (const DeferredItem& item : items) {
        if (item.env.msg_id == msg) queued = true;
      }
    }
    if (acct.deliveries > 0)
      s.delivered += 1;
    else if (queued || acct.drops == 0)
      s.still_queued += 1;  // still in a queue or still in flight on the grid
    else
      s.dropped += 1;
  }
  for (const DropRecord& d : drops_) {
    switch (d.reason) {
      case DropReason::Unauthorized: s.drop_unauthorized += 1; break;
      case DropReason::Expired: s.drop_expired += 1; break;
      case DropReason::Undeliverable: s.drop_undeliverable += 1; break;
    }
  }
  s.deliveries = deliveries_.size();
  s.forwards = forwards_;
  s.replies = replies_;
  s.rejected_sends = rejected_sends_;
  s.max_queue_depth = max_queue_depth_;
  s.mean_delivery_latency =
      deliveries_.empty() ? 0.0
                          : static_cast<double>(latency_sum_) /
                                static_cast<double>(deliveries_.size());
  return res;
}

RunResult run(const Scenario& scenario) {
  SimState state(scenario);
  while (state.step().processed) {
  }
  return state.result();
}

}  // namespace halcyon
