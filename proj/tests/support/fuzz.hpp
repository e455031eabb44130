#pragma once

// Deterministic random-scenario generator for the acceptance suite. Every
// generated text is a valid scenario by construction: ids are declared before
// use, availability intervals never overlap, priorities stay unique per
// owner, and scheduled sends fit the tick limit.

#include <algorithm>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace fuzz {

class Gen {
 public:
  explicit Gen(unsigned seed) : rng_(seed) {}

  int irange(int lo, int hi) { return lo + static_cast<int>(rng_() % (hi - lo + 1)); }
  bool chance(int pct) { return irange(1, 100) <= pct; }

  template <class T>
  const T& pick(const std::vector<T>& v) {
    return v[rng_() % v.size()];
  }

  std::mt19937& rng() { return rng_; }

 private:
  std::mt19937 rng_;
};

inline std::string scenario_text(unsigned seed) {
  Gen g(seed);
  std::ostringstream out;

  const int tick_limit = g.irange(80, 250);
  const int delay = g.irange(5, 25);
  out << "scenario fuzz-" << seed << "\n";
  out << "tick-limit " << tick_limit << "\n";
  out << "recheck-delay " << delay << "\n";

  const int principal_count = g.irange(2, 5);
  std::vector<std::string> ids;
  for (int i = 0; i < principal_count; ++i) {
    ids.push_back("p" + std::to_string(i));
    out << "principal " << ids.back() << "\n";
  }

  const std::vector<std::string> modalities = {"Visual", "Audio", "Haptic", "Olfactory"};
  const std::vector<std::string> activities = {"meeting", "driving", "lab", "commute"};
  const std::vector<std::string> keywords = {"fire", "alert", "lunch", "report", "warn"};
  const std::vector<std::string> words = {"fire",  "drill",  "ALERT",  "now",   "lunch",
                                          "Plans", "report", "ready",  "warn",  "low",
                                          "skies", "clear",  "Update", "shift", "swap"};
  const std::vector<std::string> levels = {"low", "normal", "high", "critical"};

  for (const std::string& id : ids) {
    const int device_count = g.irange(0, 3);
    for (int d = 0; d < device_count; ++d) {
      out << "device " << id << " dev-" << id << "-" << d << " modality=";
      std::string first = g.pick(modalities);
      out << first;
      if (g.chance(30)) {
        std::string second = g.pick(modalities);
        if (second != first) out << "," << second;
      }
      out << " priority=" << (d + 1);
      if (g.chance(25)) {
        int lo = g.irange(0, tick_limit / 2);
        out << " present=" << lo << "..";
        if (g.chance(50)) out << g.irange(lo, tick_limit);
      }
      out << "\n";
    }

    const int segments = g.irange(0, 3);
    int start = 0;
    for (int s = 0; s < segments; ++s) {
      const int end = start + g.irange(5, 60);
      const bool open_tail = (s == segments - 1) && g.chance(60);
      out << "availability " << id << " " << start << "..";
      if (!open_tail) out << end;
      if (g.chance(50))
        out << " busy(" << g.pick(activities) << ")\n";
      else
        out << " free\n";
      if (open_tail) break;
      start = end + 1;
    }
  }

  // Forwards only point at higher-indexed principals, so delegation depth is
  // bounded by the cast size; one reply per rule keeps reply chains linear.
  for (int i = 0; i < principal_count; ++i) {
    const std::string& id = ids[static_cast<std::size_t>(i)];
    if (!g.chance(40)) continue;
    const int rule_count = g.irange(1, 3);
    for (int r = 0; r < rule_count; ++r) {
      // Every rule keys on a payload keyword: generated reply payloads carry
      // none, so reply traffic cannot re-trigger rules and fan out.
      out << "rule " << id << " r" << r << ": when payload contains \"" << g.pick(keywords)
          << "\"";
      if (g.chance(40)) {
        if (g.chance(50))
          out << " and sender is " << g.pick(ids);
        else
          out << " and urgency >= " << g.pick(levels);
      }
      out << " => ";
      bool can_forward = i + 1 < principal_count;
      bool forwarded = false;
      if (can_forward && g.chance(60)) {
        out << "forward " << ids[static_cast<std::size_t>(g.irange(i + 1, principal_count - 1))]
            << " urgency=" << g.pick(levels);
        forwarded = true;
      }
      if (!forwarded || g.chance(40)) {
        if (forwarded) out << " ; ";
        if (g.chance(60))
          out << "reply sender \"ack-" << g.irange(1, 99) << "\"";
        else
          out << "reply " << g.pick(ids) << " \"note-" << g.irange(1, 99) << "\"";
      }
      out << "\n";
    }
  }
  for (int i = 0; i + 1 < principal_count; ++i) {
    if (g.chance(30))
      out << "fallback " << ids[static_cast<std::size_t>(i)] << " "
          << ids[static_cast<std::size_t>(g.irange(i + 1, principal_count - 1))] << "\n";
  }

  if (g.chance(20))
    out << "modality-table " << g.pick(activities) << " " << g.pick(modalities) << ","
        << g.pick(modalities) << "\n";

  const int send_count = g.irange(1, 20);
  for (int s = 0; s < send_count; ++s) {
    const int at = g.irange(0, tick_limit - 5);
    out << "at " << at << " send from=" << g.pick(ids) << " to=[";
    std::vector<std::string> shuffled = ids;
    std::shuffle(shuffled.begin(), shuffled.end(), g.rng());
    const int dest_count = g.irange(1, std::min<int>(3, static_cast<int>(shuffled.size())));
    for (int d = 0; d < dest_count; ++d) {
      if (d > 0) out << ",";
      out << shuffled[static_cast<std::size_t>(d)];
    }
    out << "] urgency=" << g.pick(levels);

    // Validity mix: mostly live-at-send, some premature, some already stale.
    const int roll = g.irange(1, 100);
    if (roll <= 60) {
      const int lo = std::max(0, at - 5);
      out << " valid=" << lo << "..";
      if (g.chance(30))
        out << "inf";
      else
        out << at + g.irange(3, 60);
    } else if (roll <= 75) {
      const int lo = at + g.irange(2, 20);
      out << " valid=" << lo << ".." << lo + 30;
    } else if (roll <= 85 && at >= 1) {
      out << " valid=0.." << g.irange(0, at - 1);
    } else {
      out << " valid=0..inf";
    }

    if (g.chance(25)) out << " perishable";
    out << " payload=\"";
    const int word_count = g.irange(2, 4);
    for (int w = 0; w < word_count; ++w) {
      if (w > 0) out << " ";
      out << g.pick(words);
    }
    out << "\"\n";
  }
  return out.str();
}

}  // namespace fuzz
