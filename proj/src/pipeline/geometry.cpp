#include "seagrass/pipeline/geometry.hpp"

#include <cstdio>

#include "seagrass/error.hpp"

namespace seagrass::pipeline {

double footprint_height(double altitude_m, double image_height_px, double focal_px) {
  require(altitude_m > 0.0, "footprint_height: altitude must be positive");
  require(image_height_px > 0.0, "footprint_height: image height must be positive");
  require(focal_px > 0.0, "footprint_height: focal length must be positive");
  return altitude_m * image_height_px / focal_px;
}

double keyframe_displacement(double velocity_mps, double framerate_fps) {
  require(framerate_fps > 0.0, "keyframe_displacement: framerate must be positive");
  require(velocity_mps >= 0.0, "keyframe_displacement: velocity must be non-negative");
  return velocity_mps / framerate_fps;
}

double overlap(double footprint_m, double displacement_m) {
  require(footprint_m > 0.0, "overlap: footprint height must be positive");
  return (footprint_m - displacement_m) / footprint_m;
}

OverlapReport make_overlap_report(double altitude_m, double velocity_mps, double image_height_px,
                                  double focal_px, double framerate_fps) {
  OverlapReport r{altitude_m, velocity_mps, image_height_px, focal_px, framerate_fps, 0.0, 0.0, 0.0};
  r.footprint_height = footprint_height(altitude_m, image_height_px, focal_px);
  r.keyframe_displacement = keyframe_displacement(velocity_mps, framerate_fps);
  r.overlap = overlap(r.footprint_height, r.keyframe_displacement);
  return r;
}

CoverageVerdict validate_coverage(const OverlapReport& r, double min_overlap) {
  CoverageVerdict v;
  v.pass = r.overlap > min_overlap;
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "%s: overlap %.4f (%.1f%%) %s minimum %.4f; footprint h_FP = a*h_image/f = "
                "%.4f*%.1f/%.4f = %.4f m; keyframe displacement d_KF = v/framerate = %.4f/%.4f = "
                "%.4f m",
                v.pass ? "PASS" : "FAIL", r.overlap, 100.0 * r.overlap, v.pass ? ">" : "<=", min_overlap,
                r.altitude, r.image_height_px, r.focal_px, r.footprint_height, r.velocity, r.framerate,
                r.keyframe_displacement);
  v.explanation = buf;
  if (r.overlap < 0.0) {
    std::snprintf(buf, sizeof buf, "; coverage gap of %.4f m between consecutive footprints",
                  r.keyframe_displacement - r.footprint_height);
    v.explanation += buf;
  }
  return v;
}

}  // namespace seagrass::pipeline
