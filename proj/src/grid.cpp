#include "halcyon/grid.hpp"

#include <algorithm>
#include <sstream>
#include <string>

namespace halcyon {

std::string_view to_string(Channel ch) {
  return ch == Channel::Transmit ? "TX" : "RX";
}

void Grid::register_subscriber(const PrincipalId& p) {
  subscribers_.try_emplace(p);
}

bool Grid::is_registered(const PrincipalId& p) const {
  return subscribers_.count(p) != 0;
}

GridFrame Grid::publish(const Envelope& env, Channel ch, Tick now) {
  if (auto err = validate(env))
    throw InvalidEnvelope("publish: invalid envelope: " + std::string(to_string(*err)));
  if (!published_ids_.insert(env.msg_id).second)
    throw DuplicateMessage("publish: duplicate msg_id " + std::to_string(env.msg_id));

  GridFrame frame{env, now, ch, next_seq_++};
  frames_.push_back(frame);
  ++channel_counts_[channel_index(ch)];
  if (ch == Channel::Transmit) {
    // Internal bridge: mirror onto the reception channel, same publish tick.
    frames_.push_back(GridFrame{env, now, Channel::Receive, next_seq_++});
    ++channel_counts_[channel_index(Channel::Receive)];
  }
  if (trace_) {
    std::ostringstream line;
    line << "tick=" << now << " grid publish msg=" << env.msg_id << " ch=" << to_string(ch);
    trace_->emit(line.str());
  }
  return frame;
}

std::vector<GridFrame> Grid::poll(const PrincipalId& subscriber, Channel ch, Tick now) {
  auto it = subscribers_.find(subscriber);
  if (it == subscribers_.end())
    throw UnknownSubscriber("poll: unknown subscriber '" + subscriber.id + "'");

  SubscriberState& state = it->second;
  std::size_t& cursor = state.scan_from[channel_index(ch)];
  while (cursor < frames_.size()) {
    const GridFrame& f = frames_[cursor];
    if (f.channel == ch && !state.acked.count({ch, f.envelope.msg_id})) break;
    ++cursor;
  }

  std::vector<GridFrame> out;
  for (std::size_t i = cursor; i < frames_.size(); ++i) {
    const GridFrame& f = frames_[i];
    if (f.channel != ch || f.published_at >= now) continue;
    if (state.acked.count({f.channel, f.envelope.msg_id})) continue;
    out.push_back(f);
  }
  std::stable_sort(out.begin(), out.end(), [](const GridFrame& a, const GridFrame& b) {
    if (a.published_at != b.published_at) return a.published_at < b.published_at;
    return a.publish_seq < b.publish_seq;
  });
  for (const GridFrame& f : out) state.polled.insert({f.channel, f.envelope.msg_id});

  if (trace_ && !out.empty()) {
    std::ostringstream line;
    line << "tick=" << now << " grid poll sub=" << subscriber.id << " n=" << out.size();
    trace_->emit(line.str());
  }
  return out;
}

void Grid::ack(const PrincipalId& subscriber, const GridFrame& frame) {
  auto it = subscribers_.find(subscriber);
  if (it == subscribers_.end())
    throw UnknownSubscriber("ack: unknown subscriber '" + subscriber.id + "'");
  FrameKey key{frame.channel, frame.envelope.msg_id};
  if (!it->second.polled.count(key))
    throw NotDelivered("ack: frame msg=" + std::to_string(frame.envelope.msg_id) +
                       " was never polled by '" + subscriber.id + "'");
  if (it->second.acked.insert(key).second)  // repeat acks are no-ops
    ++it->second.acked_count[channel_index(frame.channel)];
}

bool Grid::fully_consumed(Channel ch) const {
  for (const auto& [id, state] : subscribers_) {
    if (state.acked_count[channel_index(ch)] != channel_counts_[channel_index(ch)]) return false;
  }
  return true;
}

std::size_t Grid::frame_count(Channel ch) const {
  return channel_counts_[channel_index(ch)];
}

}  // namespace halcyon
