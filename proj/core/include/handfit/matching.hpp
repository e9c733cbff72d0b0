#ifndef HANDFIT_MATCHING_HPP
#define HANDFIT_MATCHING_HPP

#include <array>
#include <limits>
#include <optional>
#include <vector>

#include "handfit/camera.hpp"
#include "handfit/corr_space.hpp"
#include "handfit/hand_model.hpp"
#include "handfit/image.hpp"
#include "handfit/kdtree.hpp"

namespace handfit {

// One observed frame with everything matching and the energy need
// precomputed: mask, back-projected points, depth normals, segment labels.
struct Observation {
  PinholeCamera cam;
  DepthImage depth;
  CorrImage corr;
  MaskImage mask;
  NormalImage normals;
  LabelImage labels;
  std::vector<Eigen::Vector3d> points;  // zero at background
  double median_depth = 0;              // lower median over the mask, 0 if empty

  static Observation build(DepthImage depth, CorrImage corr, const PinholeCamera& cam,
                           const CorrSpace& cs);
};

struct MatchParams {
  double t_d = 0.10;    // max deviation from the hand's median depth (m)
  double t_n = 1.3090;  // max pixel-normal angle from the view ray (rad), 75 deg
  double t_3d = 0.05;   // max 3d distance to the posed vertex (m)
  // Required agreement between the observed pixel normal and the matched
  // vertex's posed normal. The embedding is two-to-one where opposite sides
  // of the hand share both hue and normal height (palm front vs back, tube
  // flanks), so nearest-neighbor lookups alone land on the occluded sheet
  // about half the time there; the facing test is what tells the sheets
  // apart. Applied with the other pose-dependent gate; -1 disables.
  double min_normal_dot = 0.0;
  // floor of the anchored-residual rejection, see refine_anchors
  double t_corr = 1e-4;
  int pixel_stride = 1;
};

struct CorrPair {
  Eigen::Vector3d p;  // back-projected image point
  int vertex;
  int pixel;  // linear index into the observation rasters
  int label;
  // Sub-vertex anchor: the point of the vertex's one-ring whose interpolated
  // correspondence value lies closest to the observed pixel value. tri < 0
  // means the anchor is the vertex itself. Snapping targets to whole vertices
  // leaves a mesh-resolution error floor that biases the fit; the anchor
  // removes it (rendered correspondence values are barycentric to begin with).
  int tri = -1;
  Eigen::Vector3d bary{0, 0, 0};
};

using Matches = std::vector<CorrPair>;

// Fills tri/bary for every pair; deterministic, pose-independent. When
// drop_floor is finite, pairs whose anchored residual in correspondence space
// exceeds max(drop_floor, 4 * median residual) are removed. Rendered values
// are exact barycentric blends of vertex values, so a residual that stays
// large after anchoring marks a pixel whose value cannot come from any
// surface point near its matched vertex: interpolation across the wrist-angle
// singularity, values realized only on far triangle interiors, or corrupted
// input. The median scaling keeps the cut above the sensor noise floor.
void refine_anchors(Matches& ms, const HandModel& model, const CorrSpace& cs,
                    const CorrImage& corr,
                    double drop_floor = std::numeric_limits<double>::infinity());

// Per-segment nearest-neighbor index over the model's vertex embedding.
class SegmentIndex {
 public:
  explicit SegmentIndex(const CorrSpace& cs);

  // nearest vertex of the given segment in correspondence space, -1 if the
  // segment is empty; ties resolve to the lowest vertex index
  int nearest(int label, const Eigen::Vector3f& coord) const;

 private:
  std::array<KdTree3, kNumSegments + 1> trees_;
};

// lower median of masked depth values; throws if the mask is empty
double median_hand_depth(const DepthImage& depth, const MaskImage& mask);

// Segment-gated nearest-neighbor matching with the rejection filters:
// median-depth deviation > t_d, pixel normal too oblique to the view ray
// (> t_n, undefined normals rejected), and — when a posed hand is supplied —
// pixel-to-vertex 3d distance > t_3d plus the facing test (min_normal_dot).
// Without a pose (cold start) the pose-dependent gates are skipped, since no
// vertex positions exist yet.
Matches match(const Observation& obs, const SegmentIndex& index, const MatchParams& params,
              const PosedHand* posed);

// re-applies only the pose-dependent gates (3d distance, facing) to a base
// match set for a new pose
Matches refilter(const Matches& base, const Observation& obs, const PosedHand& posed,
                 const MatchParams& params);

}  // namespace handfit

#endif
