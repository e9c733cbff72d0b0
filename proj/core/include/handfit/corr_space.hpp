#ifndef HANDFIT_CORR_SPACE_HPP
#define HANDFIT_CORR_SPACE_HPP

#include <array>
#include <vector>

#include "handfit/hand_model.hpp"
#include "handfit/image.hpp"

namespace handfit {

// Canonical embedding of the hand surface into an HSV-style cube:
//   h - which finger: angle of the point around the wrist within the coronal
//       (x-z) plane, normalized to the model's angular extent
//   s - how far along that finger: projection onto the wrist->fingertip axis,
//       normalized by the axis length
//   v - front/back: (n_y + 1)/2 from the rest-pose surface normal
// The discretizer cuts h at the midpoints between neighboring finger root
// angles and s at the projections of the MCP/PIP/DIP joints, yielding 20
// segment labels: 3f+j+1 for joint j of finger f, 16+f for the wrist region
// nearest finger f.
struct CorrSpace {
  Eigen::Vector3d wrist;
  double angle_min = 0, angle_max = 0;              // radians, over rest vertices
  std::array<double, kNumFingers> root_angle{};     // per finger
  std::array<int, kNumFingers> order{};             // fingers sorted by root angle
  std::array<double, kNumFingers + 1> hue_edges{};  // normalized; band k = order[k]

  struct FingerAxis {
    Eigen::Vector3d dir;             // unit, wrist -> fingertip
    double len = 0;                  // meters
    double s_mcp = 0, s_pip = 0, s_dip = 0;  // normalized joint stations
  };
  std::array<FingerAxis, kNumFingers> finger{};
  Eigen::MatrixXd fingertips;  // 5 x 3, derived extreme surface points

  // cached per-vertex embedding of the source model
  Eigen::Matrix<float, Eigen::Dynamic, 3> vertex_coords;
  std::vector<int> vertex_label;                                 // segment per vertex
  std::array<std::vector<int>, kNumSegments + 1> segment_verts;  // by label, [0] unused

  double hue_of_point(const Eigen::Vector3d& p) const;
  int finger_of_hue(double h) const;
  double saturation(int f, const Eigen::Vector3d& p) const;
  Eigen::Vector3f coord_of_point(const Eigen::Vector3d& p, double normal_y) const;
  int discretize(float h, float s) const;  // -> label 1..20 (value channel unused)
  int discretize(const Eigen::Vector3f& c) const { return discretize(c.x(), c.y()); }
};

// Builds the embedding from rest geometry alone; validates that every segment
// receives at least one vertex. Throws on degenerate geometry.
CorrSpace build_corr_space(const HandModel& model);

// Per-pixel labels; 0 outside the mask. Throws on resolution mismatch.
LabelImage discretize_image(const CorrImage& corr, const MaskImage& mask, const CorrSpace& cs);

// Pixel sets per label over the masked area (a partition of the mask).
std::array<std::vector<int>, kNumSegments + 1> segment_pixels(const CorrImage& corr,
                                                              const MaskImage& mask,
                                                              const CorrSpace& cs);

}  // namespace handfit

#endif
