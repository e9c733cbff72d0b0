#ifndef HANDFIT_RASTER_HPP
#define HANDFIT_RASTER_HPP

#include "handfit/camera.hpp"
#include "handfit/image.hpp"

namespace handfit {

struct RasterBundle {
  DepthImage depth;  // meters, 0 = background
  MaskImage mask;    // 255 where depth > 0
  CorrImage corr;    // interpolated vertex attributes, (0,0,0) on background
};

// Plain z-buffer rasterization of a triangle mesh with one 3-channel float
// attribute per vertex (the correspondence coordinate). Pixel centers sample
// at (x+0.5, y+0.5); attributes are perspective-correct barycentric; no
// antialiasing. Triangles with any vertex at or behind the camera are skipped.
RasterBundle rasterize(const Eigen::MatrixXd& verts, const Eigen::MatrixXi& tris,
                       const Eigen::Matrix<float, Eigen::Dynamic, 3>& attrs,
                       const PinholeCamera& cam);

// intersection over union; two empty masks count as perfect agreement (1)
double jaccard(const MaskImage& a, const MaskImage& b);

// back-projection of a single foreground pixel; throws on background
Eigen::Vector3d backproject(const DepthImage& depth, int x, int y, const PinholeCamera& cam);

// Per-pixel unit normals from central differences of back-projected
// neighbors, falling back to one-sided differences at mask edges. Zero at
// background pixels and at the 1-px image border. A camera-facing plane
// yields (0,0,-1).
NormalImage depth_normals(const DepthImage& depth, const PinholeCamera& cam);

}  // namespace handfit

#endif
