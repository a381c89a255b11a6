#include "seagrass/pipeline/pipeline.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <thread>

#include <json.hpp>

#include "seagrass/data/pnm.hpp"
#include "seagrass/data/synth.hpp"
#include "seagrass/data/transforms.hpp"
#include "seagrass/error.hpp"
#include "seagrass/rng.hpp"

namespace seagrass::pipeline {

SimulatedSource::SimulatedSource(SimulatedSourceConfig config) : config_(config) {
  require(config_.rate_fps > 0.0, "SimulatedSource: rate must be positive");
  require(config_.duration_s >= 0.0, "SimulatedSource: duration must be non-negative");
  require(config_.altitude > 0.0, "SimulatedSource: altitude must be positive");
  require(config_.velocity >= 0.0, "SimulatedSource: velocity must be non-negative");
  require(config_.raw_height > 0 && config_.raw_width > 0, "SimulatedSource: empty frame extents");
  while (static_cast<double>(total_) / config_.rate_fps < config_.duration_s) ++total_;
}

std::optional<Frame> SimulatedSource::next() {
  if (next_ >= total_) return std::nullopt;
  const std::size_t i = next_++;
  Frame f;
  f.meta.frame_id = i;
  f.meta.timestamp = static_cast<double>(i) / config_.rate_fps;
  f.meta.altitude = config_.altitude;
  f.meta.velocity = config_.velocity;
  const double travelled = config_.velocity * f.meta.timestamp;
  f.meta.x = travelled * std::cos(config_.heading_rad);
  f.meta.y = travelled * std::sin(config_.heading_rad);
  f.image = data::synth_sample(config_.raw_height, config_.raw_width, config_.blob_scale,
                               derive_seed(config_.seed, static_cast<std::uint64_t>(i)))
                .image;
  return f;
}

void PipelineConfig::validate() const {
  require(image_height_px > 0.0, "PipelineConfig: image height must be positive");
  require(focal_px > 0.0, "PipelineConfig: focal length must be positive");
  require(min_overlap >= 0.0 && min_overlap < 1.0, "PipelineConfig: minOverlap must lie in [0, 1)");
  require(process_height > 0 && process_width > 0, "PipelineConfig: empty processing extents");
  require(!forced_framerate || *forced_framerate > 0.0, "PipelineConfig: forced framerate must be positive");
}

namespace {

// Gather stage work: rectification is the identity for simulated frames; decimation
// resamples to the processing extents.
Frame gather(Frame frame, const PipelineConfig& config) {
  if (frame.image.height != config.process_height || frame.image.width != config.process_width) {
    frame.image = data::preprocess(frame.image, config.process_height, config.process_width);
  }
  return frame;
}

std::string map_path_for(const PipelineConfig& config, std::uint64_t frame_id) {
  if (!config.map_dir) return {};
  char name[64];
  std::snprintf(name, sizeof name, "frame_%06llu.pgm", static_cast<unsigned long long>(frame_id));
  return (*config.map_dir / name).string();
}

class Recorder {
 public:
  explicit Recorder(const PipelineConfig& config) : config_(config) {}

  void record(const Frame& frame, const ProbabilityMap& map, std::size_t drops, double completed_at) {
    CoverageEntry e;
    e.frame_id = frame.meta.frame_id;
    e.timestamp = frame.meta.timestamp;
    e.x = frame.meta.x;
    e.y = frame.meta.y;
    e.drop_count = drops;
    e.completed_at = completed_at;
    e.map_path = map_path_for(config_, frame.meta.frame_id);
    if (!e.map_path.empty()) data::write_probability_pgm(e.map_path, map);
    if (!log_.empty()) {
      const auto& prev = log_.back();
      const double travelled = std::hypot(e.x - prev.x, e.y - prev.y);
      e.overlap_to_previous =
          overlap(footprint_height(frame.meta.altitude, config_.image_height_px, config_.focal_px), travelled);
    }
    altitude_sum_ += frame.meta.altitude;
    velocity_sum_ += frame.meta.velocity;
    log_.push_back(std::move(e));
  }

  CoverageLog& log() { return log_; }
  double mean_altitude() const { return altitude_sum_ / static_cast<double>(log_.size()); }
  double mean_velocity() const { return velocity_sum_ / static_cast<double>(log_.size()); }

 private:
  const PipelineConfig& config_;
  CoverageLog log_;
  double altitude_sum_ = 0.0;
  double velocity_sum_ = 0.0;
};

ProbabilityMap run_segmenter(const Segmenter& segmenter, const Frame& frame, Recorder& recorder) {
  try {
    return segmenter.infer(frame.image);
  } catch (const std::exception& e) {
    throw PipelineError(PipelineError::Kind::SegmenterFailed,
                        "segmenter failed on frame " + std::to_string(frame.meta.frame_id) + ": " + e.what(),
                        recorder.log());
  }
}

struct RunTotals {
  std::size_t produced = 0;
  std::size_t dropped = 0;
  std::size_t in_flight = 0;
  double elapsed = 0.0;
};

// Discrete-event simulation of the two stages on one thread. Frames arrive at their
// capture timestamps; the segmenter is busy for latency_s per frame and always takes the
// newest deposited frame when it becomes free.
RunTotals run_virtual(FrameSource& source, const Segmenter& segmenter, const PipelineConfig& config,
                      Recorder& recorder) {
  require(segmenter.latency_s > 0.0, "run_pipeline: the virtual clock needs a positive segmenter latency");
  RunTotals totals;
  std::optional<std::pair<Frame, double>> slot;  // frame, deposit time
  std::size_t drops_since_take = 0;
  double free_at = 0.0;

  auto advance_to = [&](double t) {
    while (slot) {
      const double start = std::max(free_at, slot->second);
      if (start > t) break;
      Frame frame = std::move(slot->first);
      slot.reset();
      const ProbabilityMap map = run_segmenter(segmenter, frame, recorder);
      free_at = start + segmenter.latency_s;
      recorder.record(frame, map, drops_since_take, free_at);
      drops_since_take = 0;
    }
  };

  while (auto raw = source.next()) {
    const double t = raw->meta.timestamp;
    advance_to(t);
    ++totals.produced;
    if (slot) {
      ++totals.dropped;
      ++drops_since_take;
    }
    slot.emplace(gather(std::move(*raw), config), t);
  }
  // Source closed: drain whatever is still in the slot.
  advance_to(std::numeric_limits<double>::infinity());
  totals.elapsed = free_at;
  return totals;
}

RunTotals run_threaded(FrameSource& source, const Segmenter& segmenter, const PipelineConfig& config,
                       Recorder& recorder) {
  using Clock = std::chrono::steady_clock;
  RunTotals totals;
  Mailbox<Frame> mailbox;
  std::atomic<bool> abort{false};
  std::atomic<std::size_t> produced{0};
  std::exception_ptr source_error;
  const auto start = Clock::now();
  auto seconds_since_start = [&] { return std::chrono::duration<double>(Clock::now() - start).count(); };

  std::thread gather_thread([&] {
    try {
      while (!abort.load()) {
        auto raw = source.next();
        if (!raw) break;
        if (config.pace_source) {
          std::this_thread::sleep_until(start + std::chrono::duration_cast<Clock::duration>(
                                                    std::chrono::duration<double>(raw->meta.timestamp)));
        }
        ++produced;
        mailbox.deposit(gather(std::move(*raw), config));
      }
    } catch (...) {
      source_error = std::current_exception();
    }
    mailbox.close();
  });

  try {
    while (auto item = mailbox.take_with_drops()) {
      const ProbabilityMap map = run_segmenter(segmenter, item->first, recorder);
      if (segmenter.latency_s > 0.0) {
        std::this_thread::sleep_for(std::chrono::duration<double>(segmenter.latency_s));
      }
      recorder.record(item->first, map, item->second, seconds_since_start());
    }
  } catch (...) {
    abort = true;
    mailbox.close();
    gather_thread.join();
    throw;
  }
  gather_thread.join();
  if (source_error) std::rethrow_exception(source_error);
  totals.produced = produced.load();
  totals.dropped = mailbox.drops();
  totals.elapsed = seconds_since_start();
  return totals;
}

}  // namespace

PipelineResult run_pipeline(FrameSource& source, const Segmenter& segmenter, const PipelineConfig& config) {
  config.validate();
  require(static_cast<bool>(segmenter.infer), "run_pipeline: no segmenter");
  require(segmenter.latency_s >= 0.0, "run_pipeline: segmenter latency must be non-negative");

  Recorder recorder(config);
  const RunTotals totals = config.virtual_clock ? run_virtual(source, segmenter, config, recorder)
                                                : run_threaded(source, segmenter, config, recorder);
  if (recorder.log().empty()) {
    throw PipelineError(PipelineError::Kind::EmptyRun, "run_pipeline: source ended before any frame was segmented");
  }

  PipelineResult result;
  auto& c = result.counters;
  c.produced = totals.produced;
  c.segmented = recorder.log().size();
  c.dropped = totals.dropped;
  c.in_flight = c.produced - c.segmented - c.dropped;
  c.elapsed_s = totals.elapsed;
  c.achieved_fps = totals.elapsed > 0.0 ? static_cast<double>(c.segmented) / totals.elapsed : 0.0;
  double overlap_sum = 0.0;
  std::size_t overlap_count = 0;
  for (const auto& e : recorder.log()) {
    if (e.overlap_to_previous) {
      overlap_sum += *e.overlap_to_previous;
      ++overlap_count;
    }
  }
  c.mean_overlap = overlap_count ? overlap_sum / static_cast<double>(overlap_count) : 0.0;

  const double framerate = config.forced_framerate.value_or(c.achieved_fps);
  require(framerate > 0.0, "run_pipeline: elapsed time is zero, framerate undefined");
  result.report = make_overlap_report(recorder.mean_altitude(), recorder.mean_velocity(),
                                      config.image_height_px, config.focal_px, framerate);
  result.verdict = validate_coverage(result.report, config.min_overlap);
  result.log = std::move(recorder.log());
  return result;
}

std::string coverage_log_jsonl(const CoverageLog& log) {
  std::string out;
  for (const auto& e : log) {
    nlohmann::ordered_json j;
    j["frameId"] = e.frame_id;
    j["timestamp"] = e.timestamp;
    j["geopose"] = {{"x", e.x}, {"y", e.y}};
    if (e.overlap_to_previous) {
      j["overlapToPrevious"] = *e.overlap_to_previous;
    } else {
      j["overlapToPrevious"] = nullptr;
    }
    j["dropCount"] = e.drop_count;
    j["map"] = e.map_path;
    out += j.dump();
    out += '\n';
  }
  return out;
}

void write_coverage_log(const std::filesystem::path& path, const CoverageLog& log) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << coverage_log_jsonl(log);
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace seagrass::pipeline
