#ifndef HANDFIT_CAMERA_HPP
#define HANDFIT_CAMERA_HPP

#include <Eigen/Core>

#include "handfit/image.hpp"

namespace handfit {

// Pinhole intrinsics. Camera looks down +z, x right, y down (image convention).
struct PinholeCamera {
  double fx = 0, fy = 0, cx = 0, cy = 0;
  int width = 0;
  int height = 0;

  // 3d point (z > 0) -> continuous pixel coordinates
  Eigen::Vector2d project(const Eigen::Vector3d& p) const {
    return {fx * p.x() / p.z() + cx, fy * p.y() / p.z() + cy};
  }

  // pixel center (x,y) + metric depth -> 3d point. Pixel (x,y) spans
  // [x,x+1)x[y,y+1), so its center sits at (x+0.5, y+0.5); the rasterizer
  // samples the same spot.
  Eigen::Vector3d backproject(int x, int y, double depth) const {
    return {(x + 0.5 - cx) / fx * depth, (y + 0.5 - cy) / fy * depth, depth};
  }

  // Same camera at 1/factor resolution. The principal point is placed so the
  // center of reduced pixel (i,j) coincides with the center of full-res pixel
  // (factor*i, factor*j); stride-sampling a full-res image then matches a
  // render at the reduced camera exactly.
  PinholeCamera scaled(int factor) const {
    PinholeCamera c;
    c.width = width / factor;
    c.height = height / factor;
    c.fx = fx / factor;
    c.fy = fy / factor;
    c.cx = 0.5 + (cx - 0.5) / factor;
    c.cy = 0.5 + (cy - 0.5) / factor;
    return c;
  }
};

// intrinsics used by the synthesizer and tests unless a config overrides them
inline PinholeCamera default_camera() {
  PinholeCamera c;
  c.fx = 320;
  c.fy = 320;
  c.cx = 160;
  c.cy = 120;
  c.width = 320;
  c.height = 240;
  return c;
}

// Per-pixel back-projection of a depth map. Background pixels map to (0,0,0).
inline std::vector<Eigen::Vector3d> backproject_depth(const DepthImage& depth,
                                                      const PinholeCamera& cam) {
  std::vector<Eigen::Vector3d> pts(depth.size(), Eigen::Vector3d::Zero());
  for (int y = 0; y < depth.height; ++y)
    for (int x = 0; x < depth.width; ++x) {
      float d = depth.at(x, y);
      if (d > 0.f) pts[size_t(y) * depth.width + x] = cam.backproject(x, y, d);
    }
  return pts;
}

}  // namespace handfit

#endif
