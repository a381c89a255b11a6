#pragma once

#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "seagrass/data/raster.hpp"
#include "seagrass/pipeline/geometry.hpp"

namespace seagrass::pipeline {

struct FrameMeta {
  std::uint64_t frame_id = 0;
  double timestamp = 0.0;  // seconds since the start of the run
  double altitude = 0.0;   // meters
  double velocity = 0.0;   // meters/second
  double x = 0.0;          // survey-local geopose, meters
  double y = 0.0;
};

struct Frame {
  FrameMeta meta;
  Image image;
};

/// Frames in capture order; nullopt ends the stream.
class FrameSource {
 public:
  virtual ~FrameSource() = default;
  virtual std::optional<Frame> next() = 0;
};

struct SimulatedSourceConfig {
  double rate_fps = 30.0;
  double duration_s = 10.0;
  double altitude = 2.5;
  double velocity = 0.4;
  double heading_rad = 0.0;
  /// Extents of the raw camera frames, before the gather stage decimates them.
  std::size_t raw_height = 128;
  std::size_t raw_width = 192;
  double blob_scale = 0.25;
  std::uint64_t seed = 0;
};

/// Synthetic survey: frame i is captured at i/rate for i/rate < duration, with the pose
/// advancing at constant velocity along the heading and image content from the
/// synthetic texture generator.
class SimulatedSource final : public FrameSource {
 public:
  explicit SimulatedSource(SimulatedSourceConfig config);
  std::optional<Frame> next() override;
  std::size_t total_frames() const { return total_; }

 private:
  SimulatedSourceConfig config_;
  std::size_t total_ = 0;
  std::size_t next_ = 0;
};

/// Single-slot latest-wins mailbox between one writer and one reader. deposit never blocks
/// and overwrites an unconsumed item; take blocks until an item exists or the stream is
/// closed and empty.
template <typename T>
class Mailbox {
 public:
  /// Returns true when an unconsumed item was overwritten (dropped).
  bool deposit(T item) {
    bool dropped = false;
    {
      std::lock_guard lock(mutex_);
      dropped = slot_.has_value();
      if (dropped) ++drops_;
      slot_ = std::move(item);
    }
    ready_.notify_one();
    return dropped;
  }

  std::optional<T> take() {
    std::unique_lock lock(mutex_);
    ready_.wait(lock, [&] { return slot_.has_value() || closed_; });
    if (!slot_) return std::nullopt;
    std::optional<T> out = std::move(slot_);
    slot_.reset();
    return out;
  }

  /// Like take but returns the drop count accumulated since the previous take.
  std::optional<std::pair<T, std::size_t>> take_with_drops() {
    std::unique_lock lock(mutex_);
    ready_.wait(lock, [&] { return slot_.has_value() || closed_; });
    if (!slot_) return std::nullopt;
    std::pair<T, std::size_t> out{std::move(*slot_), drops_ - drops_at_take_};
    drops_at_take_ = drops_;
    slot_.reset();
    return out;
  }

  void close() {
    {
      std::lock_guard lock(mutex_);
      closed_ = true;
    }
    ready_.notify_all();
  }

  std::size_t drops() const {
    std::lock_guard lock(mutex_);
    return drops_;
  }

  bool has_item() const {
    std::lock_guard lock(mutex_);
    return slot_.has_value();
  }

 private:
  mutable std::mutex mutex_;
  std::condition_variable ready_;
  std::optional<T> slot_;
  std::size_t drops_ = 0;
  std::size_t drops_at_take_ = 0;
  bool closed_ = false;
};

/// Segment stage. latency_s is the modelled inference time: added as a sleep in real-time
/// mode (0 for a real model) and used as the time cost under the virtual clock.
struct Segmenter {
  std::function<ProbabilityMap(const Image&)> infer;
  double latency_s = 0.0;
};

struct PipelineConfig {
  double image_height_px = 360.0;  // h_image in the footprint formula
  double focal_px = 623.3;
  double min_overlap = 0.0;
  /// Extents the gather stage decimates frames to.
  std::size_t process_height = 64;
  std::size_t process_width = 96;
  /// Replaces the measured framerate in the overlap report.
  std::optional<double> forced_framerate;
  /// Deterministic single-threaded discrete-event run instead of two threads.
  bool virtual_clock = true;
  /// Real-time mode only: sleep until each frame's capture timestamp before gathering.
  bool pace_source = true;
  /// Probability maps are written here as 16-bit PGM when set.
  std::optional<std::filesystem::path> map_dir;

  void validate() const;
};

struct CoverageEntry {
  std::uint64_t frame_id = 0;
  double timestamp = 0.0;
  double x = 0.0;
  double y = 0.0;
  /// Overlap with the previous segmented frame's footprint; unset for the first entry.
  std::optional<double> overlap_to_previous;
  std::size_t drop_count = 0;  // frames dropped since the previous segmented frame
  std::string map_path;
  double completed_at = 0.0;
};

using CoverageLog = std::vector<CoverageEntry>;

struct PipelineCounters {
  std::size_t produced = 0;
  std::size_t segmented = 0;
  std::size_t dropped = 0;
  std::size_t in_flight = 0;  // deposited but neither segmented nor dropped at shutdown
  double elapsed_s = 0.0;
  double achieved_fps = 0.0;
  double mean_overlap = 0.0;  // over per-frame overlaps; 0 with fewer than two entries
};

struct PipelineResult {
  CoverageLog log;
  PipelineCounters counters;
  OverlapReport report;
  CoverageVerdict verdict;
};

class PipelineError : public std::runtime_error {
 public:
  enum class Kind { EmptyRun, SegmenterFailed };
  PipelineError(Kind kind, const std::string& what, CoverageLog partial = {})
      : std::runtime_error(what), kind_(kind), partial_(std::move(partial)) {}
  Kind kind() const { return kind_; }
  /// Entries completed before the failure.
  const CoverageLog& partial_log() const { return partial_; }

 private:
  Kind kind_;
  CoverageLog partial_;
};

PipelineResult run_pipeline(FrameSource& source, const Segmenter& segmenter,
                            const PipelineConfig& config);

/// One JSON object per line: frameId, timestamp, geopose, overlapToPrevious, dropCount, map.
void write_coverage_log(const std::filesystem::path& path, const CoverageLog& log);
std::string coverage_log_jsonl(const CoverageLog& log);

}  // namespace seagrass::pipeline
