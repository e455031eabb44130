#include "halcyon/sender.hpp"

#include <string>

namespace halcyon {

Envelope SenderSubsystem::compose(const SendRequest& req) {
  Envelope env;
  env.payload = req.payload;
  env.sender = req.sender;
  env.authority = req.destinations;
  env.urgency = req.urgency;
  env.validity = req.validity;
  env.perishable = req.perishable;
  env.msg_id = next_id_;
  if (auto err = validate(env))
    throw InvalidEnvelope("compose: " + std::string(to_string(*err)));
  ++next_id_;  // ids are consumed only by envelopes that pass validation
  return env;
}

GridFrame SenderSubsystem::send(const Envelope& env, Grid& grid, Tick now) {
  if (env.validity.not_after && now > *env.validity.not_after)
    throw ExpiredAtSource("send: msg " + std::to_string(env.msg_id) +
                          " already expired at tick " + std::to_string(now));
  return grid.publish(env, Channel::Transmit, now);
}

}  // namespace halcyon
