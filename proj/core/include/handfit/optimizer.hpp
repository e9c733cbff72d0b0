#ifndef HANDFIT_OPTIMIZER_HPP
#define HANDFIT_OPTIMIZER_HPP

#include <cstdint>
#include <deque>
#include <functional>

#include "handfit/energy.hpp"
#include "handfit/matching.hpp"

namespace handfit {

// ---------------------------------------------------------------------------
// rigid alignment
// ---------------------------------------------------------------------------

struct RigidTransform {
  Eigen::Matrix3d R;
  Eigen::Vector3d t;
};

// Least-squares rigid transform with dst ~ R * src + t (SVD, reflection-safe).
// Throws when fewer than 3 pairs are given or the source points span a line.
RigidTransform fit_procrustes(const std::vector<Eigen::Vector3d>& src,
                              const std::vector<Eigen::Vector3d>& dst);

// ---------------------------------------------------------------------------
// articulation prior
// ---------------------------------------------------------------------------

// Random plausible articulations, count x 23, every coordinate within its
// joint limits. Finger flexion is correlated through a shared grasp level so
// the leading principal components capture whole-hand opening and closing.
Eigen::MatrixXd sample_pose_corpus(const HandModel& model, int count, std::uint64_t seed);

struct PcaPrior {
  Eigen::VectorXd mean;      // 23
  Eigen::MatrixXd basis;     // 23 x k, orthonormal columns
  Eigen::VectorXd variance;  // k, descending
};

// Principal components of a pose corpus (rows = samples). Eigenvector signs
// are fixed so repeated builds agree exactly.
PcaPrior build_pca_prior(const Eigen::MatrixXd& corpus, int components = 12);

// ---------------------------------------------------------------------------
// generic minimizers
// ---------------------------------------------------------------------------

// Objective callback: returns the value at x and, when grad is non-null,
// writes the gradient into it.
using Objective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd* grad)>;

struct LbfgsOptions {
  int max_iters = 40;
  int history = 8;
  double grad_tol = 1e-7;   // stop when |g|_inf drops below this
  double armijo_c1 = 1e-4;  // sufficient-decrease slope
  int max_backtracks = 30;
};

// Limited-memory BFGS with Armijo backtracking. Falls back to steepest
// descent when the quasi-Newton direction stops being a descent direction;
// returns the best point seen when the line search bottoms out.
Eigen::VectorXd minimize_lbfgs(const Objective& f, Eigen::VectorXd x0,
                               const LbfgsOptions& opt = {});

struct RefineOptions {
  int max_iters = 200;    // Adam iterations
  double lr = 2e-3;       // Adam step size
  double stop_dx = 1e-5;  // stop when an iterate moves less than this
  int rematch_every = 5;  // iterations between correspondence updates
  int patience = 50;      // stop after this many iterations without a new best
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  std::function<void(int iter, const EnergyBreakdown&)> on_accept;  // optional trace
};

struct RefineResult {
  HandParams params;
  EnergyBreakdown energy;  // at the returned parameters, final pairs
  int iterations = 0;      // accepted (energy-improving) iterates
  bool diverged = false;   // a non-finite value or gradient appeared
};

// Adam descent on the full 39-vector. The render-backed energy pieces are
// staircase-shaped, so finite-difference gradients carry shot noise; rather
// than force every step downhill the iterates run free (the per-coordinate
// normalization averages the noise out) and the best energy seen is what
// gets accepted and returned. When a rematch callback is given it is invoked
// every rematch_every iterations to refresh the active pairs against the
// current pose.
RefineResult refine(Energy& energy, const HandParams& init, const RefineOptions& opt = {},
                    const std::function<Matches(const HandParams&)>& rematch = nullptr);

// ---------------------------------------------------------------------------
// frame-to-frame tracking
// ---------------------------------------------------------------------------

struct TrackerOptions {
  MatchParams match;
  EnergyWeights weights;
  LbfgsOptions init;
  RefineOptions refine;
  int pca_components = 12;
  int corpus_size = 2000;
  std::uint64_t corpus_seed = 1234;
  double lost_energy_factor = 4.0;  // vs the median e3d of recent good frames
  double lost_energy_abs = 1e-4;    // and only above this absolute floor
  int lost_window = 10;
  double lost_jaccard = 0.3;
  int lost_min_pairs = 50;
};

struct FrameResult {
  HandParams params;
  EnergyBreakdown energy;
  Matches matches;  // active pairs at the solution
  int iterations = 0;
  bool lost = false;
  bool cold = false;  // frame was initialized from scratch
};

// Sequential fitter. Each frame is either warm-started from the previous
// solution or, after a loss (or at the start), re-initialized cold:
// unposed match -> rigid Procrustes alignment -> L-BFGS over global pose and
// prior coefficients -> full refine. A frame is declared lost when too few
// pairs survive, the silhouettes stop overlapping, the data term jumps well
// above its recent history, or the solve diverges; the previous parameters
// are then carried over and the next frame starts cold.
class Tracker {
 public:
  explicit Tracker(const HandModel& model, const TrackerOptions& opt = {});

  FrameResult step(const Observation& obs);
  void reset();

  const CorrSpace& corr_space() const { return cs_; }
  const SegmentIndex& segment_index() const { return index_; }
  const PcaPrior& prior() const { return prior_; }
  const TrackerOptions& options() const { return opt_; }

 private:
  HandParams cold_init(Energy& energy, const Matches& base) const;

  const HandModel& model_;
  TrackerOptions opt_;
  CorrSpace cs_;
  SegmentIndex index_;
  PcaPrior prior_;

  bool tracking_ = false;
  HandParams prev_;
  std::deque<double> recent_e3d_;
};

}  // namespace handfit

#endif
