#pragma once

#include <cstdint>
#include <deque>
#include <vector>

#include "predho/common.hpp"

namespace predho {

struct StreamConfig {
  double segment_len = 2.0;                    // s
  std::vector<double> bitrates = {1.0, 2.0, 4.0};  // Mbit/s, ascending
  double buffer_capacity = 10.0;               // s
  double down_threshold = 4.0;  // buffer below this at a request: step down
  double up_threshold = 8.0;    // at or above on two requests in a row: step up

  void validate() const;
};

struct SegmentRecord {
  std::size_t index = 0;
  double request_t = 0.0;
  double bitrate = 0.0;  // Mbit/s
  double completion_t = -1.0;  // -1 while still downloading
};

struct StallRecord {
  double start = 0.0;
  double end = 0.0;
  double length() const { return end - start; }
};

struct SessionStats {
  std::size_t stall_count = 0;  // excludes the initial stall
  double mean_stall_len = 0.0;
  std::size_t adaptation_count = 0;
  double hq_fraction = 0.0;  // play time at the top bitrate played / play time
  double initial_stall_len = 0.0;
  double played_time = 0.0;
  double stalled_time = 0.0;  // excludes the initial stall
  double session_time = 0.0;
  double highest_bitrate = 0.0;
  std::vector<StallRecord> stalls;
};

// DASH-like client on a millisecond clock. Each tick: call demand_bits()
// (which may issue the next request), let the network deliver, then
// advance() with what arrived.
class StreamSession {
 public:
  explicit StreamSession(StreamConfig config = {});

  // Bits still missing for the in-flight segment. Issues a request first if
  // none is in flight and the buffer has room for one more segment.
  double demand_bits();
  void advance(double delivered_bits, double dt);
  SessionStats finalize() const;

  double now() const { return static_cast<double>(now_ms_) / 1000.0; }
  double buffer_level() const { return static_cast<double>(buffer_ms_) / 1000.0; }
  bool stalled() const { return phase_ != Phase::kPlaying; }
  const std::vector<SegmentRecord>& segments() const { return segments_; }
  const StreamConfig& config() const { return config_; }

 private:
  enum class Phase { kInitial, kPlaying, kStalled };

  void request();

  StreamConfig config_;
  std::int64_t segment_ms_;
  std::int64_t capacity_ms_;
  std::int64_t now_ms_ = 0;
  std::int64_t buffer_ms_ = 0;
  Phase phase_ = Phase::kInitial;
  std::int64_t phase_start_ms_ = 0;
  std::int64_t initial_stall_ms_ = -1;

  std::size_t quality_ = 0;
  bool last_request_high_ = false;
  bool in_flight_ = false;
  double remaining_bits_ = 0.0;

  // Buffered media: (quality index, ms left) from the play head on.
  std::deque<std::pair<std::size_t, std::int64_t>> queue_;
  std::vector<std::int64_t> played_ms_;  // per quality index
  std::vector<SegmentRecord> segments_;
  std::vector<StallRecord> stalls_;
};

}  // namespace predho
