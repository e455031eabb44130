#include "halcyon/deferral_queue.hpp"

#include <algorithm>
#include <sstream>

namespace halcyon {

std::string_view to_string(DeferReason r) {
  return r == DeferReason::Busy ? "Busy" : "NotImportantNow";
}

void DeferralQueue::trace_event(Tick now, MsgId msg, std::string_view event,
                                std::uint64_t seq) const {
  if (!trace_) return;
  std::ostringstream line;
  line << "tick=" << now << " Q principal=" << owner_.id << " msg=" << msg
       << " event=" << event << " seq=" << seq;
  trace_->emit(line.str());
}

QueueStatus DeferralQueue::enqueue(const Envelope& env, Tick now, DeferReason reason) {
  if (contains(env.msg_id)) return QueueStatus::Duplicate;
  if (max_items_ != 0 && items_.size() >= max_items_) return QueueStatus::Overflow;

  DeferredItem item;
  item.env = env;
  item.enqueued_at = now;
  item.enqueue_seq = next_seq_++;
  item.last_checked = now;
  item.reason = reason;
  items_.push_back(std::move(item));
  trace_event(now, env.msg_id, "enqueue", items_.back().enqueue_seq);
  return QueueStatus::Ok;
}

std::vector<DeferredItem> DeferralQueue::due(Tick now, Tick delay) {
  std::vector<DeferredItem> out;
  for (DeferredItem& item : items_) {  // items_ is already in enqueue order
    if (item.last_checked + delay <= now) {
      item.last_checked = now;
      item.recheck_count += 1;
      trace_event(now, item.env.msg_id, "due", item.enqueue_seq);
      out.push_back(item);
    }
  }
  return out;
}

QueueStatus DeferralQueue::remove(MsgId msg, Tick now) {
  auto it = std::find_if(items_.begin(), items_.end(),
                         [msg](const DeferredItem& i) { return i.env.msg_id == msg; });
  if (it == items_.end()) return QueueStatus::NotFound;
  trace_event(now, msg, "remove", it->enqueue_seq);
  items_.erase(it);  // relative order of the rest is untouched
  return QueueStatus::Ok;
}

QueueStatus DeferralQueue::requeue(MsgId msg, Tick now) {
  auto it = std::find_if(items_.begin(), items_.end(),
                         [msg](const DeferredItem& i) { return i.env.msg_id == msg; });
  if (it == items_.end()) return QueueStatus::NotFound;
  it->last_checked = now;
  trace_event(now, msg, "requeue", it->enqueue_seq);
  return QueueStatus::Ok;
}

const DeferredItem* DeferralQueue::find(MsgId msg) const {
  auto it = std::find_if(items_.begin(), items_.end(),
                         [msg](const DeferredItem& i) { return i.env.msg_id == msg; });
  return it == items_.end() ? nullptr : &*it;
}

}  // namespace halcyon
