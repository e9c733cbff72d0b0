#ifndef HANDFIT_ENERGY_HPP
#define HANDFIT_ENERGY_HPP

#include <Eigen/Core>

#include "handfit/corr_space.hpp"
#include "handfit/hand_model.hpp"
#include "handfit/matching.hpp"

namespace handfit {

struct EnergyWeights {
  double w_3d = 1.0;
  // The dense correspondence term is kept for scoring but defaults out of the
  // objective: its value staircases pixel by pixel, and on the fits this
  // tracker produces the staircase noise between nearby poses exceeds the
  // signal, vetoing good steps at random.
  double w_2d = 0.0;
  double w_shape = 1e-2;
  double w_pose = 10.0;
  double w_temp = 1e-5;
  double lambda_pt = 0.5;  // point-to-point vs point-to-plane blend inside e3d
  int raster_scale = 2;    // downsample factor for the silhouette render
  double fd_step = 1e-4;   // central-difference step for the render-backed terms
  // Include the finite-difference e2d derivative in gradients. A differenced
  // raster term measures mostly pixel-flip shot noise at any usable step, so
  // descent directions are better off without it; e2d still acts on the
  // optimizer through the energy value itself. Off by default.
  bool grad_2d = false;
};

// One objective evaluation, itemized. total is always the weighted sum
//   w_3d * lambda * e3d + w_2d * e2d + w_shape * e_shape + w_pose * e_pose
//   + w_temp * e_temp
struct EnergyBreakdown {
  double total = 0;
  double e3d = 0;      // mean blended point/plane error over the active pairs
  double e2d = 0;      // mean squared correspondence error over the mask overlap
  double e_shape = 0;  // |beta|^2
  double e_pose = 0;   // squared joint-limit overshoot, summed over dofs
  double e_temp = 0;   // |params - prev|^2, 0 without a previous frame
  double lambda = 0;   // silhouette gate exp(jaccard + 1)
  double jaccard = 0;  // rendered mask vs observed mask
  int pairs = 0;
};

// Fitting objective for a single observation. The active correspondence pairs
// are held fixed between set_matches() calls; the silhouette gate and the
// dense correspondence term re-render the model at a reduced resolution on
// every evaluation.
//
// With w_2d == 0 the correspondence images are never read, so the value and
// gradient are bitwise independent of them.
class Energy {
 public:
  Energy(const HandModel& model, const CorrSpace& cs, const Observation& obs,
         const EnergyWeights& weights = {});

  // Pairs with refined anchors (CorrPair::tri) pull toward their sub-vertex
  // target; plain pairs fall back to the matched vertex.
  void set_matches(Matches m) { matches_ = std::move(m); }
  const Matches& matches() const { return matches_; }

  void set_prev_params(const HandParams& prev) {
    prev_ = prev;
    has_prev_ = true;
  }
  void clear_prev_params() { has_prev_ = false; }

  EnergyBreakdown eval(const HandParams& params) const;
  EnergyBreakdown eval(const HandParams& params, const PosedHand& posed) const;

  // d(total)/d(params). The pair term and the regularizers are differentiated
  // analytically (including the dependence of vertex normals on the pose);
  // lambda and e2d go through central differences of the reduced render.
  // Fills *at with the breakdown at params when given.
  Eigen::VectorXd gradient(const HandParams& params, EnergyBreakdown* at = nullptr) const;

  // Analytic building blocks of gradient(): d(e3d)/d(params) alone, and the
  // gradient of the weighted regularizer sum.
  Eigen::VectorXd e3d_gradient(const HandParams& params) const;
  Eigen::VectorXd reg_gradient(const HandParams& params) const;

  const EnergyWeights& weights() const { return weights_; }
  const Observation& observation() const { return obs_; }

 private:
  // jaccard of the reduced-resolution render against the observed mask;
  // optionally also the mean squared correspondence error over the overlap
  double silhouette(const Eigen::MatrixXd& verts, double* e2d) const;
  Eigen::VectorXd e3d_gradient_at(const PoseJacobian& pj) const;

  const HandModel& model_;
  const CorrSpace& cs_;
  const Observation& obs_;
  EnergyWeights weights_;
  Matches matches_;
  HandParams prev_;
  bool has_prev_ = false;

  PinholeCamera small_cam_;
  MaskImage small_mask_;
  CorrImage small_corr_;
  Eigen::Matrix<float, Eigen::Dynamic, 3> attrs_;  // per-vertex render colors
  mutable bool warned_empty_overlap_ = false;
};

}  // namespace handfit

#endif
