#include "halcyon/envelope.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace halcyon {

std::strong_ordering compare_urgency(UrgencyLevel a, UrgencyLevel b) {
  return static_cast<std::uint8_t>(a) <=> static_cast<std::uint8_t>(b);
}

std::string_view to_string(UrgencyLevel u) {
  switch (u) {
    case UrgencyLevel::Low: return "Low";
    case UrgencyLevel::Normal: return "Normal";
    case UrgencyLevel::High: return "High";
    case UrgencyLevel::Critical: return "Critical";
  }
  return "Normal";
}

std::optional<UrgencyLevel> parse_urgency(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (lower == "low") return UrgencyLevel::Low;
  if (lower == "normal") return UrgencyLevel::Normal;
  if (lower == "high") return UrgencyLevel::High;
  if (lower == "critical") return UrgencyLevel::Critical;
  return std::nullopt;
}

AuthorityList::AuthorityList(std::vector<PrincipalId> ids) : ids_(std::move(ids)) {
  std::sort(ids_.begin(), ids_.end());
  ids_.erase(std::unique(ids_.begin(), ids_.end()), ids_.end());
}

bool AuthorityList::contains(const PrincipalId& p) const {
  return std::binary_search(ids_.begin(), ids_.end(), p);
}

std::string_view to_string(ValidationError e) {
  switch (e) {
    case ValidationError::EmptyAuthority: return "EmptyAuthority";
    case ValidationError::EmptyPayload: return "EmptyPayload";
    case ValidationError::InvertedWindow: return "InvertedWindow";
  }
  return "EmptyPayload";
}

std::optional<ValidationError> validate(const Envelope& env) {
  if (env.authority.empty()) return ValidationError::EmptyAuthority;
  if (env.payload.empty()) return ValidationError::EmptyPayload;
  if (env.validity.not_after && env.validity.not_before > *env.validity.not_after)
    return ValidationError::InvertedWindow;
  return std::nullopt;
}

bool is_live(const Envelope& env, Tick now) {
  if (now < env.validity.not_before) return false;
  if (env.validity.not_after && now > *env.validity.not_after) return false;
  return true;
}

std::string to_text(const Envelope& env) {
  std::ostringstream out;
  out << "msg=" << env.msg_id << " from=" << env.sender.id << " auth=[";
  bool first = true;
  for (const auto& p : env.authority.ids()) {
    if (!first) out << ',';
    out << p.id;
    first = false;
  }
  out << "] urg=" << to_string(env.urgency) << " valid=" << env.validity.not_before << "..";
  if (env.validity.not_after)
    out << *env.validity.not_after;
  else
    out << "inf";
  out << " perishable=" << (env.perishable ? "true" : "false");
  out << " payload=\"" << env.payload << "\"";
  return out.str();
}

}  // namespace halcyon
