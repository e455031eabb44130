#include "halcyon/context.hpp"

#include <algorithm>
#include <cctype>

namespace halcyon {

std::string_view to_string(Modality m) {
  switch (m) {
    case Modality::Audio: return "Audio";
    case Modality::Visual: return "Visual";
    case Modality::Haptic: return "Haptic";
    case Modality::Olfactory: return "Olfactory";
  }
  return "Visual";
}

std::optional<Modality> parse_modality(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (lower == "audio") return Modality::Audio;
  if (lower == "visual") return Modality::Visual;
  if (lower == "haptic") return Modality::Haptic;
  if (lower == "olfactory") return Modality::Olfactory;
  return std::nullopt;
}

bool Device::supports(Modality m) const {
  return std::find(modalities.begin(), modalities.end(), m) != modalities.end();
}

void ContextBook::add_principal(const PrincipalId& p) {
  if (!has_principal(p)) {
    principals_.push_back(p);
    timelines_[p];
    devices_[p];
  }
}

void ContextBook::add_device(Device d) {
  devices_[d.owner].push_back(std::move(d));
}

void ContextBook::add_availability(const PrincipalId& owner, TickRange range, Availability value) {
  auto& spans = timelines_[owner];
  spans.push_back({range, std::move(value)});
  std::stable_sort(spans.begin(), spans.end(),
                   [](const AvailabilitySpan& a, const AvailabilitySpan& b) {
                     return a.range.lo < b.range.lo;
                   });
}

bool ContextBook::has_principal(const PrincipalId& p) const {
  return std::find(principals_.begin(), principals_.end(), p) != principals_.end();
}

EnvironmentSnapshot ContextBook::snapshot(const PrincipalId& p, Tick at) const {
  if (!has_principal(p))
    throw UnknownPrincipal("snapshot: unknown principal '" + p.id + "'");

  EnvironmentSnapshot snap;
  snap.principal = p;
  snap.at = at;
  snap.availability = {AvailabilityState::Free, ""};

  const auto& spans = timelines_.at(p);
  bool covered = false;
  for (const AvailabilitySpan& s : spans) {
    if (s.range.contains(at)) {
      snap.availability = s.value;
      covered = true;
      break;
    }
  }
  // Past the end of the last declared interval, its value keeps holding.
  if (!covered && !spans.empty()) {
    const AvailabilitySpan& last = spans.back();
    if (at > last.range.lo) snap.availability = last.value;
  }

  for (const Device& d : devices_.at(p)) {
    if (d.presence.contains(at)) snap.present_devices.push_back(d);
  }
  return snap;
}

std::vector<Device> available_devices(const EnvironmentSnapshot& snap, Modality m) {
  std::vector<Device> out;
  for (const Device& d : snap.present_devices) {
    if (d.supports(m)) out.push_back(d);
  }
  std::sort(out.begin(), out.end(), [](const Device& a, const Device& b) {
    if (a.priority != b.priority) return a.priority < b.priority;
    return a.device_id < b.device_id;
  });
  return out;
}

}  // namespace halcyon
