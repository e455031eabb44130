#pragma once

#include <stdexcept>

#include "halcyon/envelope.hpp"
#include "halcyon/grid.hpp"

namespace halcyon {

/// Sender-side intent: an envelope minus its msg_id. The three accompanying
/// details (destinations, sender identity, urgency) are mandatory — an
/// envelope cannot reach the grid without them.
struct SendRequest {
  std::string payload;
  PrincipalId sender;
  AuthorityList destinations;
  UrgencyLevel urgency = UrgencyLevel::Normal;
  ValidityWindow validity;
  bool perishable = false;
};

/// Raised when an envelope is already past its validity window at send time;
/// such envelopes are rejected, never published.
struct ExpiredAtSource : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Subsystem B. Stateless apart from the msg_id counter: everything a
/// receiver learns about sender intent travels in the envelope. Urgency is
/// advice for the receiver pipeline; senders cannot force delivery.
class SenderSubsystem {
 public:
  /// Fresh envelope with the next counter id; all fields copied verbatim.
  /// Throws InvalidEnvelope when the request violates envelope invariants.
  Envelope compose(const SendRequest& req);

  /// Publish on the transmit channel. Throws ExpiredAtSource when
  /// now > not_after; grid errors propagate.
  GridFrame send(const Envelope& env, Grid& grid, Tick now);

  MsgId next_msg_id() const { return next_id_; }

 private:
  MsgId next_id_ = 1;
};

}  // namespace halcyon
