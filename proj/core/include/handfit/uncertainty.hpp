#ifndef HANDFIT_UNCERTAINTY_HPP
#define HANDFIT_UNCERTAINTY_HPP

#include <array>
#include <cstdint>
#include <string>

#include "handfit/corr_space.hpp"
#include "handfit/hand_model.hpp"
#include "handfit/matching.hpp"

namespace handfit {

struct UncertaintyParams {
  double tau_v = 0.15;    // below this matched-vertex fraction: unobserved
  double tau_2d = 0.3;    // error-pixel fraction that flags a segment
  double tau_3d = 0.3;    // error-vertex fraction that flags a segment
  double eps_2d = 0.003;  // squared correspondence distance counted as an error
  double eps_3d = 0.005;  // mean |depth - model z| (meters) counted as an error
};

// why a segment was (or was not) flagged
enum class SegmentStatus { kObservedOk, kUnobserved, kErrorProne2d, kErrorProne3d };

const char* to_string(SegmentStatus s);
SegmentStatus segment_status_from_string(const std::string& s);

struct SegmentReport {
  int segment = 0;  // 1..20
  int u = 0;        // 1 = do not trust this segment's fit
  SegmentStatus status = SegmentStatus::kObservedOk;
  double visibility = 0;  // matched fraction of the segment's vertices
  double r2d = 0;         // erroneous fraction of the segment's observed pixels
  double r3d = 0;         // erroneous fraction of the segment's vertices
};

struct UncertaintyReport {
  std::array<SegmentReport, kNumSegments> segments{};  // [i] = segment i+1
};

// Per-segment trust assessment of a fit against one observation.
//
// A segment is unobserved when too few of its vertices were matched at all,
// error-prone-2d when the observed correspondence image disagrees with the
// one rendered from the fit over too many of the segment's observed pixels,
// and error-prone-3d when too many of its vertices sit at the wrong depth
// under their matched points. Checks apply in that order; the first hit wins.
UncertaintyReport assess_uncertainty(const HandModel& model, const CorrSpace& cs,
                                     const Observation& obs, const HandParams& params,
                                     const Matches& matches, const UncertaintyParams& up = {});

// per-vertex copy of the segment flags, for mesh export
Eigen::VectorXf vertex_uncertainty(const CorrSpace& cs, const UncertaintyReport& rep);

// Picks eps_2d / eps_3d by rendering probe frames from the bundled motion
// scripts: clean ones bound the residuals from below, hue-corrupted and
// finger-occluded ones from above; each threshold lands at the log-midpoint
// of the two populations. tau values keep their defaults unless the clean
// and corrupted ratios fail to separate. Throws when no margin exists.
struct CalibrationResult {
  UncertaintyParams params;
  double clean_2d_high = 0, corrupt_2d_low = 0;  // residual envelopes
  double clean_3d_high = 0, corrupt_3d_low = 0;
};

CalibrationResult calibrate_uncertainty(const HandModel& model, std::uint64_t seed = 1,
                                        int probe_frames = 6);

}  // namespace handfit

#endif
