#include "predho/streaming.hpp"

#include <algorithm>
#include <cmath>

namespace predho {
namespace {

std::int64_t to_ms(double seconds) {
  return static_cast<std::int64_t>(std::llround(seconds * 1000.0));
}

double to_s(std::int64_t ms) { return static_cast<double>(ms) / 1000.0; }

// Leftover bits below this count as a finished download (float dust).
constexpr double kBitEpsilon = 1e-6;

}  // namespace

void StreamConfig::validate() const {
  if (!(segment_len > 0.0)) throw ConfigError("segment_len must be > 0");
  if (bitrates.empty()) throw ConfigError("bitrates must not be empty");
  for (std::size_t i = 0; i < bitrates.size(); ++i) {
    if (!(bitrates[i] > 0.0) || (i > 0 && bitrates[i] <= bitrates[i - 1])) {
      throw ConfigError("bitrates must be positive and strictly ascending");
    }
  }
  if (!(buffer_capacity >= segment_len)) {
    throw ConfigError("buffer_capacity must be >= segment_len");
  }
  if (!(down_threshold <= up_threshold)) {
    throw ConfigError("down_threshold must not exceed up_threshold");
  }
}

StreamSession::StreamSession(StreamConfig config) : config_(std::move(config)) {
  config_.validate();
  segment_ms_ = to_ms(config_.segment_len);
  capacity_ms_ = to_ms(config_.buffer_capacity);
  played_ms_.assign(config_.bitrates.size(), 0);
}

void StreamSession::request() {
  const std::int64_t down = to_ms(config_.down_threshold);
  const std::int64_t up = to_ms(config_.up_threshold);
  const bool high = buffer_ms_ >= up;
  if (!segments_.empty()) {
    // A segment that took longer than its own playback time caps the next
    // choice at the throughput it saw. Without this the ladder keeps asking
    // for 4 Mbit/s from a fading link, and extra capacity can add stalls.
    const auto& last = segments_.back();
    const double rate = last.bitrate * config_.segment_len /
                        std::max(1e-3, last.completion_t - last.request_t);
    if (rate < config_.bitrates[quality_]) {
      while (quality_ > 0 && config_.bitrates[quality_] > rate) --quality_;
    } else if (buffer_ms_ < down) {
      if (quality_ > 0) --quality_;
    } else if (high && last_request_high_ &&
               quality_ + 1 < config_.bitrates.size()) {
      ++quality_;
    }
  }
  last_request_high_ = high;
  SegmentRecord rec;
  rec.index = segments_.size();
  rec.request_t = now();
  rec.bitrate = config_.bitrates[quality_];
  segments_.push_back(rec);
  remaining_bits_ = rec.bitrate * 1e6 * config_.segment_len;
  in_flight_ = true;
}

double StreamSession::demand_bits() {
  if (!in_flight_ && buffer_ms_ + segment_ms_ <= capacity_ms_) request();
  return in_flight_ ? remaining_bits_ : 0.0;
}

void StreamSession::advance(double delivered_bits, double dt) {
  const std::int64_t dt_ms = to_ms(dt);
  const std::int64_t end_ms = now_ms_ + dt_ms;

  // Playback drains the buffer in real time.
  if (phase_ == Phase::kPlaying) {
    const std::int64_t drained = std::min(dt_ms, buffer_ms_);
    buffer_ms_ -= drained;
    for (std::int64_t left = drained; left > 0;) {
      auto& [q, ms] = queue_.front();
      const std::int64_t take = std::min(left, ms);
      played_ms_[q] += take;
      ms -= take;
      left -= take;
      if (ms == 0) queue_.pop_front();
    }
    if (buffer_ms_ == 0) {
      phase_ = Phase::kStalled;
      phase_start_ms_ = now_ms_ + drained;
    }
  }

  bool completed = false;
  if (in_flight_) {
    remaining_bits_ -= std::max(0.0, delivered_bits);
    if (remaining_bits_ <= kBitEpsilon) {
      completed = true;
      in_flight_ = false;
      remaining_bits_ = 0.0;
      segments_.back().completion_t = to_s(end_ms);
      buffer_ms_ += segment_ms_;
      queue_.emplace_back(quality_, segment_ms_);
    }
  }

  if (completed && phase_ != Phase::kPlaying) {
    if (phase_ == Phase::kInitial) {
      initial_stall_ms_ = end_ms;
    } else if (end_ms > phase_start_ms_) {
      // A segment landing exactly as the buffer empties is not a stall.
      stalls_.push_back({to_s(phase_start_ms_), to_s(end_ms)});
    }
    phase_ = Phase::kPlaying;
  }
  now_ms_ = end_ms;
}

SessionStats StreamSession::finalize() const {
  SessionStats s;
  s.session_time = now();
  s.stalls = stalls_;
  if (phase_ == Phase::kStalled && now_ms_ > phase_start_ms_) {
    s.stalls.push_back({to_s(phase_start_ms_), now()});  // still stalled at the end
  }
  s.initial_stall_len = to_s(initial_stall_ms_ < 0 ? now_ms_ : initial_stall_ms_);
  s.stall_count = s.stalls.size();
  std::int64_t stalled_ms = 0;
  for (const auto& st : s.stalls) stalled_ms += to_ms(st.end) - to_ms(st.start);
  s.stalled_time = to_s(stalled_ms);
  s.mean_stall_len =
      s.stall_count == 0 ? 0.0 : s.stalled_time / static_cast<double>(s.stall_count);

  for (std::size_t i = 1; i < segments_.size(); ++i) {
    if (segments_[i].bitrate != segments_[i - 1].bitrate) ++s.adaptation_count;
  }

  std::int64_t played = 0;
  std::size_t top = 0;
  for (std::size_t q = 0; q < played_ms_.size(); ++q) {
    played += played_ms_[q];
    if (played_ms_[q] > 0) top = q;
  }
  s.played_time = to_s(played);
  if (played > 0) {
    s.highest_bitrate = config_.bitrates[top];
    s.hq_fraction =
        static_cast<double>(played_ms_[top]) / static_cast<double>(played);
  }
  return s;
}

}  // namespace predho
