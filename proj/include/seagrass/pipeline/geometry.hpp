#pragma once

#include <string>

namespace seagrass::pipeline {

/// Seafloor height imaged by one frame: altitude * image height / focal length.
double footprint_height(double altitude_m, double image_height_px, double focal_px);

/// Vehicle travel between consecutive segmented frames: velocity / framerate.
double keyframe_displacement(double velocity_mps, double framerate_fps);

/// (footprint - displacement) / footprint. Negative values mean a coverage gap.
double overlap(double footprint_m, double displacement_m);

struct OverlapReport {
  double altitude = 0.0;
  double velocity = 0.0;
  double image_height_px = 0.0;
  double focal_px = 0.0;
  double framerate = 0.0;
  double footprint_height = 0.0;
  double keyframe_displacement = 0.0;
  double overlap = 0.0;
};

OverlapReport make_overlap_report(double altitude_m, double velocity_mps, double image_height_px,
                                  double focal_px, double framerate_fps);

struct CoverageVerdict {
  bool pass = false;
  std::string explanation;
};

/// Passes iff overlap > min_overlap (strict).
CoverageVerdict validate_coverage(const OverlapReport& report, double min_overlap);

}  // namespace seagrass::pipeline
