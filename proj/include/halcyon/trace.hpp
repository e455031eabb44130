#pragma once

#include <string>
#include <vector>

namespace halcyon {

/// Append-only event log shared by the grid, the queues and the pipelines.
/// Line formats are owned by the emitting module; the log itself is dumb.
class TraceLog {
 public:
  void emit(std::string line) { lines_.push_back(std::move(line)); }

  const std::vector<std::string>& lines() const { return lines_; }
  std::size_t size() const { return lines_.size(); }
  void clear() { lines_.clear(); }

 private:
  std::vector<std::string> lines_;
};

}  // namespace halcyon
