#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "halcyon/envelope.hpp"
#include "halcyon/trace.hpp"

namespace halcyon {

enum class DeferReason { Busy, NotImportantNow };

std::string_view to_string(DeferReason r);

/// A withheld envelope plus recheck bookkeeping.
struct DeferredItem {
  Envelope env;
  Tick enqueued_at = 0;
  std::uint64_t enqueue_seq = 0;
  Tick last_checked = 0;
  DeferReason reason = DeferReason::Busy;
  std::uint32_t recheck_count = 0;
};

enum class QueueStatus { Ok, Duplicate, Overflow, NotFound };

/// Per-principal, unshared FIFO store of deferred envelopes. One instance
/// serves both the delegation and the recheck levels. Items keep their
/// enqueue position for their whole lifetime; requeueing only refreshes the
/// recheck clock.
class DeferralQueue {
 public:
  /// max_items == 0 means unlimited.
  explicit DeferralQueue(PrincipalId owner, TraceLog* trace = nullptr,
                         std::size_t max_items = 0)
      : owner_(std::move(owner)), max_items_(max_items), trace_(trace) {}

  QueueStatus enqueue(const Envelope& env, Tick now, DeferReason reason);

  /// Items with last_checked + delay <= now, in enqueue order. Each returned
  /// item has last_checked set to now and recheck_count bumped by one.
  std::vector<DeferredItem> due(Tick now, Tick delay);

  QueueStatus remove(MsgId msg, Tick now);

  /// Refresh the recheck clock; enqueue_seq (and so FIFO position) unchanged.
  QueueStatus requeue(MsgId msg, Tick now);

  const DeferredItem* find(MsgId msg) const;
  bool contains(MsgId msg) const { return find(msg) != nullptr; }

  bool empty() const { return items_.empty(); }
  std::size_t size() const { return items_.size(); }
  bool at_capacity() const { return max_items_ != 0 && items_.size() >= max_items_; }
  const PrincipalId& owner() const { return owner_; }
  const std::vector<DeferredItem>& items() const { return items_; }

 private:
  void trace_event(Tick now, MsgId msg, std::string_view event, std::uint64_t seq) const;

  PrincipalId owner_;
  std::vector<DeferredItem> items_;  // ordered by enqueue_seq
  std::uint64_t next_seq_ = 1;
  std::size_t max_items_;
  TraceLog* trace_;
};

}  // namespace halcyon
