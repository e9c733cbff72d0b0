#include "handfit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <Eigen/Geometry>

namespace handfit {

double mepe_mm(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& gt) {
  if (pred.rows() != gt.rows() || pred.cols() != 3 || gt.cols() != 3)
    throw std::runtime_error("joint arrays must both be n x 3");
  if (pred.rows() == 0) throw std::runtime_error("joint arrays are empty");
  return (pred - gt).rowwise().norm().mean() * 1000.0;
}

double pck(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& gt, double tol_mm) {
  if (pred.rows() != gt.rows() || pred.cols() != 3 || gt.cols() != 3)
    throw std::runtime_error("joint arrays must both be n x 3");
  if (pred.rows() == 0) throw std::runtime_error("joint arrays are empty");
  int hit = 0;
  for (int i = 0; i < pred.rows(); ++i)
    if ((pred.row(i) - gt.row(i)).norm() * 1000.0 <= tol_mm) ++hit;
  return double(hit) / double(pred.rows());
}

std::array<double, kNumFingers> abduction_angles(const HandModel& model, const HandParams& params,
                                                 bool mirrored) {
  PosedHand posed = pose_hand(model, params);

  // palm plane through the wrist and the five knuckles
  Eigen::Matrix<double, 6, 3> pts;
  pts.row(0) = posed.joints.row(0);
  for (int f = 0; f < kNumFingers; ++f) pts.row(f + 1) = posed.joints.row(joint_id(f, 0));
  Eigen::RowVector3d centroid = pts.colwise().mean();
  Eigen::Matrix3d scatter = Eigen::Matrix3d::Zero();
  for (int i = 0; i < 6; ++i) {
    Eigen::Vector3d d = (pts.row(i) - centroid).transpose();
    scatter += d * d.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(scatter);
  if (eig.info() != Eigen::Success) throw std::runtime_error("palm plane fit failed");
  if (eig.eigenvalues()[1] <= 1e-12 * std::max(eig.eigenvalues()[2], 1e-30))
    throw std::runtime_error("palm landmarks are collinear");
  Eigen::Vector3d n = eig.eigenvectors().col(0);

  // orient the normal out of the back of the hand so "toward the thumb" keeps
  // one sign no matter how the hand is rotated
  Eigen::Vector3d back = rodrigues(params.rot) * Eigen::Vector3d::UnitY();
  if (n.dot(back) < 0) n = -n;

  auto in_plane = [&](int f) {
    Eigen::Vector3d e =
        (posed.joints.row(joint_id(f, 1)) - posed.joints.row(joint_id(f, 0))).transpose();
    e -= n * n.dot(e);
    double len = e.norm();
    if (len < 1e-12) throw std::runtime_error("finger bone is normal to the palm plane");
    return Eigen::Vector3d(e / len);
  };

  Eigen::Vector3d mid = in_plane(kMiddle);
  std::array<double, kNumFingers> out{};
  for (int f = 0; f < kNumFingers; ++f) {
    Eigen::Vector3d e = in_plane(f);
    double ang = std::atan2(n.dot(mid.cross(e)), mid.dot(e)) * 180.0 / M_PI;
    out[f] = mirrored ? -ang : ang;
  }
  return out;
}

std::vector<std::array<bool, kNumFingers>> filter_by_uncertainty(
    const std::vector<UncertaintyReport>& reports, int window) {
  if (window < 1) throw std::runtime_error("filter window must be positive");
  const int n = int(reports.size());
  std::vector<std::array<bool, kNumFingers>> valid(n);
  for (auto& row : valid) row.fill(true);

  for (int f = 0; f < kNumFingers; ++f) {
    for (int j = 0; j < 3; ++j) {
      const int seg = finger_segment(f, j);
      int run_start = -1;
      for (int k = 0; k <= n; ++k) {
        bool flagged = k < n && reports[k].segments[seg - 1].u != 0;
        if (flagged && run_start < 0) run_start = k;
        if (!flagged && run_start >= 0) {
          if (k - run_start >= window)
            for (int i = run_start; i < k; ++i) valid[i][f] = false;
          run_start = -1;
        }
      }
    }
  }
  return valid;
}

AngleStats angle_stats(const std::vector<double>& values) {
  AngleStats s;
  s.count = int(values.size());
  if (s.count < 2) return s;
  double mean = 0;
  for (double v : values) mean += v;
  mean /= s.count;
  double acc = 0;
  for (double v : values) acc += (v - mean) * (v - mean);
  s.variance = acc / (s.count - 1);
  s.stddev = std::sqrt(s.variance);
  auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  s.range = *hi - *lo;
  return s;
}

}  // namespace handfit
