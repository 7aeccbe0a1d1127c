#pragma once

#include <chrono>
#include <optional>

#include "postclust/error.hpp"

namespace postclust {

/// Cooperative cancellation point for long-running clustering work.
/// A default-constructed deadline never expires.
class Deadline {
 public:
  using Clock = std::chrono::steady_clock;

  Deadline() = default;

  static Deadline after(double seconds) {
    Deadline d;
    d.at_ = Clock::now() + std::chrono::duration_cast<Clock::duration>(
                               std::chrono::duration<double>(seconds));
    return d;
  }

  bool expired() const { return at_ && Clock::now() >= *at_; }

  void check() const {
    if (expired()) throw Cancelled();
  }

 private:
  std::optional<Clock::time_point> at_;
};

/// Wall-clock stopwatch in seconds.
class Stopwatch {
 public:
  Stopwatch() : start_(Deadline::Clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(Deadline::Clock::now() - start_).count();
  }

 private:
  Deadline::Clock::time_point start_;
};

}  // namespace postclust
