#include "halcyon/receiver.hpp"

#include <sstream>

namespace halcyon {

std::string_view to_string(PathTag t) {
  switch (t) {
    case PathTag::L1: return "L1";
    case PathTag::L2: return "L2";
    case PathTag::L3: return "L3";
    case PathTag::L4: return "L4";
    case PathTag::L5: return "L5";
    case PathTag::L6: return "L6";
    case PathTag::L7: return "L7";
    case PathTag::Q: return "Q";
  }
  return "L1";
}

std::string_view to_string(DropReason r) {
  switch (r) {
    case DropReason::Unauthorized: return "Unauthorized";
    case DropReason::Expired: return "Expired";
    case DropReason::Undeliverable: return "Undeliverable";
  }
  return "Expired";
}

std::string to_string(const RouteDecision& d) {
  if (const auto* deliver = std::get_if<DeliverNow>(&d))
    return "DeliverNow:" + std::string(to_string(deliver->modality));
  if (const auto* defer = std::get_if<Defer>(&d))
    return "Defer:" + std::string(to_string(defer->reason));
  if (const auto* drop = std::get_if<Drop>(&d))
    return "Drop:" + std::string(to_string(drop->reason));
  return "Requeue";
}

// --- modality table -----------------------------------------------------------

ModalityTable ModalityTable::defaults() {
  ModalityTable t;
  t.set_row("driving", {Modality::Audio, Modality::Haptic, Modality::Visual});
  t.set_row("meeting", {Modality::Visual, Modality::Haptic, Modality::Audio});
  return t;
}

void ModalityTable::set_row(const std::string& activity, std::vector<Modality> row) {
  rows_[activity] = std::move(row);
}

void ModalityTable::set_default_row(std::vector<Modality> row) {
  default_row_ = std::move(row);
}

const std::vector<Modality>& ModalityTable::row(const std::string& activity) const {
  auto it = rows_.find(activity);
  return it == rows_.end() ? default_row_ : it->second;
}

// --- level operations -----------------------------------------------------------

bool level1_admit(const Envelope& env, const PrincipalId& recipient) {
  return env.authority.contains(recipient);
}

std::optional<Modality> select_modality(UrgencyLevel /*urgency*/, const EnvironmentSnapshot& snap,
                                        const ModalityTable& table) {
  // Rows are keyed by activity; urgency stays a selection line in the
  // signature so urgency-aware tables can slot in without interface churn.
  for (Modality m : table.row(snap.availability.activity)) {
    if (!available_devices(snap, m).empty()) return m;
  }
  return std::nullopt;
}

std::optional<Device> select_device(Modality m, const EnvironmentSnapshot& snap) {
  std::vector<Device> candidates = available_devices(snap, m);
  if (candidates.empty()) return std::nullopt;
  return candidates.front();
}

GateDecision level2_gate(const Envelope& env, const EnvironmentSnapshot& snap, Tick now,
                         const ModalityTable& table, UrgencyLevel interrupt_threshold) {
  if (!is_live(env, now)) return Drop{DropReason::Expired};
  const bool interrupts =
      env.perishable && compare_urgency(env.urgency, interrupt_threshold) >= 0;
  if (snap.availability.busy() && !interrupts) return Defer{DeferReason::Busy};
  if (compare_urgency(env.urgency, UrgencyLevel::Normal) <= 0 && !env.perishable)
    return Defer{DeferReason::NotImportantNow};
  if (auto m = select_modality(env.urgency, snap, table)) return DeliverNow{*m};
  return env.perishable ? GateDecision{Drop{DropReason::Undeliverable}}
                        : GateDecision{Defer{DeferReason::Busy}};
}

std::vector<DelegationAction> level3_delegate(const DeferredItem& item,
                                              const PrincipalId& recipient, const RuleSet& rules,
                                              Tick now) {
  const Envelope& env = item.env;
  std::vector<DelegationAction> out;

  std::vector<MatchedAction> matched = match(env, rules);
  if (matched.empty()) {
    if (rules.fallback) {
      SendRequest req;
      req.payload = forwarded_payload(env);
      req.sender = env.sender;
      req.destinations = AuthorityList({*rules.fallback});
      req.urgency = env.urgency;  // fallback forwards keep the original urgency
      req.validity = env.validity;
      req.perishable = false;
      out.push_back(ForwardDecision{std::move(req), *rules.fallback});
    } else {
      out.push_back(HoldDecision{});
    }
    return out;
  }

  for (const MatchedAction& action : matched) {
    if (const auto* fwd = std::get_if<MatchedForward>(&action)) {
      SendRequest req;
      req.payload = forwarded_payload(env);
      req.sender = env.sender;  // the fact still originates from its source
      req.destinations = AuthorityList({fwd->target});
      req.urgency = fwd->urgency;
      req.validity = env.validity;
      req.perishable = false;
      out.push_back(ForwardDecision{std::move(req), fwd->target});
    } else {
      const auto& rep = std::get<MatchedReply>(action);
      SendRequest req;
      req.payload = rep.payload;
      req.sender = recipient;  // replies speak for the delegating recipient
      req.destinations = AuthorityList({rep.to});
      req.urgency = env.urgency;
      req.validity = ValidityWindow{now, std::nullopt};
      req.perishable = false;
      out.push_back(ReplyDecision{std::move(req), rep.to});
    }
  }
  return out;
}

std::vector<DeferredItem> level4_recheck(DeferralQueue& queue, Tick now, Tick delay) {
  return queue.due(now, delay);
}

FinalSelect level5_final_select(const DeferredItem& item, const EnvironmentSnapshot& snap,
                                Tick now, const ModalityTable& table) {
  if (!is_live(item.env, now)) return Drop{DropReason::Expired};
  if (!snap.availability.busy()) {
    if (auto m = select_modality(item.env.urgency, snap, table)) return DeliverNow{*m};
    return item.env.perishable ? FinalSelect{Drop{DropReason::Undeliverable}}
                               : FinalSelect{Requeue{}};
  }
  // Still busy: the queue option is not provided for instant-value items.
  return item.env.perishable ? FinalSelect{Drop{DropReason::Expired}} : FinalSelect{Requeue{}};
}

std::optional<Presentation> level6_integrate(const Envelope& env, Modality m,
                                             const EnvironmentSnapshot& snap, Tick now) {
  std::optional<Device> device = select_device(m, snap);
  if (!device) return std::nullopt;
  return Presentation{env.msg_id, env.payload, m, *device, now};
}

DeliveryRecord level7_deliver(const Presentation& p, const PrincipalId& recipient,
                              std::vector<PathTag> path) {
  return DeliveryRecord{p, recipient, p.rendered_at, std::move(path)};
}

// --- pipeline -------------------------------------------------------------------

ReceiverPipeline::ReceiverPipeline(PrincipalId me, Grid& grid, const ContextBook& context,
                                   RuleSet rules, const ModalityTable& table,
                                   SenderSubsystem& sender, TraceLog* trace, Tick recheck_delay,
                                   UrgencyLevel interrupt_threshold, std::size_t queue_max_items)
    : me_(std::move(me)),
      grid_(&grid),
      context_(&context),
      rules_(std::move(rules)),
      table_(&table),
      sender_(&sender),
      trace_(trace),
      queue_(me_, trace, queue_max_items),
      recheck_delay_(recheck_delay),
      interrupt_threshold_(interrupt_threshold) {}

void ReceiverPipeline::trace_decision(Tick now, PathTag level, MsgId msg,
                                      const std::string& decision) const {
  if (!trace_) return;
  std::ostringstream line;
  line << "tick=" << now << " " << to_string(level) << " principal=" << me_.id << " msg=" << msg
       << " decision=" << decision;
  trace_->emit(line.str());
}

void ReceiverPipeline::tag_journey(MsgId msg, PathTag t) {
  auto& path = journeys_[msg];
  for (PathTag existing : path) {
    if (existing == t) return;
  }
  path.push_back(t);
}

std::vector<PathTag> ReceiverPipeline::take_journey(MsgId msg) {
  auto it = journeys_.find(msg);
  if (it == journeys_.end()) return {};
  std::vector<PathTag> path = std::move(it->second);
  journeys_.erase(it);
  return path;
}

bool ReceiverPipeline::handle_delivery(const Envelope& env, Modality m,
                                       const EnvironmentSnapshot& snap, Tick now,
                                       std::vector<PipelineEvent>& events) {
  std::optional<Presentation> pres = level6_integrate(env, m, snap, now);
  if (!pres) return false;
  tag_journey(env.msg_id, PathTag::L6);
  trace_decision(now, PathTag::L6, env.msg_id, "Deliver:" + pres->device.device_id);
  tag_journey(env.msg_id, PathTag::L7);
  DeliveryRecord record = level7_deliver(*pres, me_, take_journey(env.msg_id));
  trace_decision(now, PathTag::L7, env.msg_id, "Deliver:" + pres->device.device_id);
  events.push_back(std::move(record));
  return true;
}

std::vector<PipelineEvent> ReceiverPipeline::process_tick(Tick now) {
  std::vector<PipelineEvent> events;
  const EnvironmentSnapshot snap = context_->snapshot(me_, now);
  std::vector<MsgId> deferred_now;

  auto defer_item = [&](const Envelope& env, DeferReason reason, PathTag at_level) {
    if (queue_.at_capacity()) {
      trace_decision(now, at_level, env.msg_id, "Drop:Undeliverable");
      events.push_back(DecisionEvent{env.msg_id, at_level, Drop{DropReason::Undeliverable}});
      journeys_.erase(env.msg_id);
      return;
    }
    trace_decision(now, at_level, env.msg_id,
                   "Defer:" + std::string(to_string(reason)));
    events.push_back(DecisionEvent{env.msg_id, at_level, Defer{reason}});
    queue_.enqueue(env, now, reason);
    tag_journey(env.msg_id, PathTag::Q);
    if (reason == DeferReason::Busy) deferred_now.push_back(env.msg_id);
  };

  // Newly visible frames: L1 admission, L2 gate, fast path straight to L6/L7.
  for (const GridFrame& frame : grid_->poll(me_, Channel::Receive, now)) {
    const Envelope& env = frame.envelope;
    tag_journey(env.msg_id, PathTag::L1);
    if (!level1_admit(env, me_)) {
      trace_decision(now, PathTag::L1, env.msg_id, "Drop:Unauthorized");
      events.push_back(DecisionEvent{env.msg_id, PathTag::L1, Drop{DropReason::Unauthorized}});
      journeys_.erase(env.msg_id);
      grid_->ack(me_, frame);
      continue;
    }
    trace_decision(now, PathTag::L1, env.msg_id, "Admitted");
    tag_journey(env.msg_id, PathTag::L2);

    GateDecision gate = level2_gate(env, snap, now, *table_, interrupt_threshold_);
    if (const auto* deliver = std::get_if<DeliverNow>(&gate)) {
      trace_decision(now, PathTag::L2, env.msg_id, to_string(RouteDecision{*deliver}));
      events.push_back(DecisionEvent{env.msg_id, PathTag::L2, *deliver});
      if (!handle_delivery(env, deliver->modality, snap, now, events)) {
        // Devices gone between selection and integration: degrade per L6 rule.
        if (env.perishable) {
          trace_decision(now, PathTag::L6, env.msg_id, "Drop:Undeliverable");
          events.push_back(DecisionEvent{env.msg_id, PathTag::L6, Drop{DropReason::Undeliverable}});
          journeys_.erase(env.msg_id);
        } else {
          defer_item(env, DeferReason::Busy, PathTag::L6);
        }
      }
    } else if (const auto* defer = std::get_if<Defer>(&gate)) {
      defer_item(env, defer->reason, PathTag::L2);
    } else {
      const Drop& drop = std::get<Drop>(gate);
      trace_decision(now, PathTag::L2, env.msg_id, to_string(RouteDecision{drop}));
      events.push_back(DecisionEvent{env.msg_id, PathTag::L2, drop});
      journeys_.erase(env.msg_id);
    }
    grid_->ack(me_, frame);
  }

  // Due queue items: L4 recheck order, L5 final selection.
  for (const DeferredItem& item : level4_recheck(queue_, now, recheck_delay_)) {
    const MsgId msg = item.env.msg_id;
    tag_journey(msg, PathTag::L4);
    FinalSelect sel = level5_final_select(item, snap, now, *table_);
    tag_journey(msg, PathTag::L5);

    if (const auto* deliver = std::get_if<DeliverNow>(&sel)) {
      trace_decision(now, PathTag::L5, msg, to_string(RouteDecision{*deliver}));
      events.push_back(DecisionEvent{msg, PathTag::L5, *deliver});
      if (handle_delivery(item.env, deliver->modality, snap, now, events)) {
        queue_.remove(msg, now);
      } else if (item.env.perishable) {
        trace_decision(now, PathTag::L6, msg, "Drop:Undeliverable");
        events.push_back(DecisionEvent{msg, PathTag::L6, Drop{DropReason::Undeliverable}});
        queue_.remove(msg, now);
        journeys_.erase(msg);
      } else {
        trace_decision(now, PathTag::L6, msg, "Requeue");
        events.push_back(DecisionEvent{msg, PathTag::L6, Requeue{}});
        queue_.requeue(msg, now);
      }
    } else if (std::get_if<Requeue>(&sel)) {
      trace_decision(now, PathTag::L5, msg, "Requeue");
      events.push_back(DecisionEvent{msg, PathTag::L5, Requeue{}});
      queue_.requeue(msg, now);
    } else {
      const Drop& drop = std::get<Drop>(sel);
      trace_decision(now, PathTag::L5, msg, to_string(RouteDecision{drop}));
      events.push_back(DecisionEvent{msg, PathTag::L5, drop});
      queue_.remove(msg, now);
      journeys_.erase(msg);
    }
  }

  run_delegation(now, deferred_now, events);
  return events;
}

void ReceiverPipeline::run_delegation(Tick now, const std::vector<MsgId>& deferred_msgs,
                                      std::vector<PipelineEvent>& events) {
  for (MsgId msg : deferred_msgs) {
    const DeferredItem* item = queue_.find(msg);
    if (!item) continue;
    bool acted = false;
    for (const DelegationAction& action : level3_delegate(*item, me_, rules_, now)) {
      if (const auto* fwd = std::get_if<ForwardDecision>(&action)) {
        trace_decision(now, PathTag::L3, msg, "Forward:[" + fwd->target.id + "]");
        Envelope out = sender_->compose(fwd->request);
        sender_->send(out, *grid_, now);
        events.push_back(ForwardedEvent{msg, std::move(out)});
        acted = true;
      } else if (const auto* rep = std::get_if<ReplyDecision>(&action)) {
        trace_decision(now, PathTag::L3, msg, "Reply:" + rep->to.id);
        Envelope out = sender_->compose(rep->request);
        sender_->send(out, *grid_, now);
        events.push_back(RepliedEvent{msg, std::move(out)});
        acted = true;
      }
      // HoldDecision: the item just stays queued.
    }
    if (acted) tag_journey(msg, PathTag::L3);
  }
}

}  // namespace halcyon
