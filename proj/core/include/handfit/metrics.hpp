#ifndef HANDFIT_METRICS_HPP
#define HANDFIT_METRICS_HPP

#include <array>
#include <vector>

#include "handfit/hand_model.hpp"
#include "handfit/uncertainty.hpp"

namespace handfit {

// mean euclidean distance between matching rows, in millimeters
double mepe_mm(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& gt);

// fraction of rows within tol_mm of their counterpart (inclusive)
double pck(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& gt, double tol_mm);

// Finger spread read off the posed skeleton: each finger's knuckle-to-middle
// bone is projected onto the best-fit palm plane (through the wrist and the
// five knuckles) and measured as a signed angle against the middle finger,
// positive toward the thumb. The middle finger is 0 by construction. mirrored
// flips the sign so left and right hands report the same spread.
std::array<double, kNumFingers> abduction_angles(const HandModel& model, const HandParams& params,
                                                 bool mirrored = false);

// Per-frame, per-finger validity from a sequence of trust reports: a finger
// drops out wherever one of its segments stays flagged for at least `window`
// consecutive frames (the whole run is dropped, not just its tail).
std::vector<std::array<bool, kNumFingers>> filter_by_uncertainty(
    const std::vector<UncertaintyReport>& reports, int window = 3);

struct AngleStats {
  int count = 0;
  double variance = 0;  // sample variance (n - 1 denominator)
  double stddev = 0;
  double range = 0;  // max - min
};

// stats over the values; with fewer than two values only count is meaningful
AngleStats angle_stats(const std::vector<double>& values);

}  // namespace handfit

#endif
