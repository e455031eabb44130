#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <utility>
#include <vector>

#include "halcyon/envelope.hpp"
#include "halcyon/trace.hpp"

namespace halcyon {

/// The two logical channels of the grid. Tags on one shared medium, not
/// separate transports.
enum class Channel { Transmit, Receive };

std::string_view to_string(Channel ch);  // "TX" / "RX"

/// One published envelope as seen on a channel. Never mutated after
/// publication. publish_seq is the grid-global publish order, used to keep
/// equal-tick frames stable.
struct GridFrame {
  Envelope envelope;
  Tick published_at = 0;
  Channel channel = Channel::Transmit;
  std::uint64_t publish_seq = 0;
};

struct GridError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InvalidEnvelope : GridError {
  using GridError::GridError;
};
struct DuplicateMessage : GridError {
  using GridError::GridError;
};
struct UnknownSubscriber : GridError {
  using GridError::GridError;
};
struct NotDelivered : GridError {
  using GridError::GridError;
};

/// Simulated broadcast medium. Every frame is visible to every subscriber of
/// its channel one tick after publication; the medium never inspects
/// authority lists. Publishing on Transmit also mirrors the frame onto
/// Receive unchanged (same published_at), which is how sender output reaches
/// the receiver pipelines.
class Grid {
 public:
  explicit Grid(TraceLog* trace = nullptr) : trace_(trace) {}

  void register_subscriber(const PrincipalId& p);
  bool is_registered(const PrincipalId& p) const;

  /// Validates, enforces msg_id uniqueness, appends the frame (plus the RX
  /// mirror when ch == Transmit). Returns the frame as published on ch.
  GridFrame publish(const Envelope& env, Channel ch, Tick now);

  /// Frames on ch with published_at < now not yet acknowledged by this
  /// subscriber, ordered by (published_at, publish_seq).
  std::vector<GridFrame> poll(const PrincipalId& subscriber, Channel ch, Tick now);

  /// Never return this frame to this subscriber again. Idempotent; throws
  /// NotDelivered if the frame was never polled by this subscriber.
  void ack(const PrincipalId& subscriber, const GridFrame& frame);

  /// True when every frame on ch has been acknowledged by every registered
  /// subscriber. Drives quiescence detection.
  bool fully_consumed(Channel ch) const;

  std::size_t frame_count(Channel ch) const;

 private:
  using FrameKey = std::pair<Channel, MsgId>;

  struct SubscriberState {
    std::set<FrameKey> polled;
    std::set<FrameKey> acked;
    std::size_t acked_count[2] = {0, 0};  // per channel, for O(1) consumption checks
    std::size_t scan_from[2] = {0, 0};    // poll cursor: frames before it are acked
  };

  static std::size_t channel_index(Channel ch) { return ch == Channel::Transmit ? 0 : 1; }

  std::vector<GridFrame> frames_;        // publish order, both channels
  std::size_t channel_counts_[2] = {0, 0};
  std::set<MsgId> published_ids_;        // client-facing uniqueness check
  std::map<PrincipalId, SubscriberState> subscribers_;
  std::uint64_t next_seq_ = 0;
  TraceLog* trace_;
};

}  // namespace halcyon
