#include "handfit/energy.hpp"

#include <cmath>
#include <iostream>

#include <Eigen/Geometry>

#include "handfit/raster.hpp"

namespace handfit {

namespace {

Eigen::Matrix3d skew(const Eigen::Vector3d& a) {
  Eigen::Matrix3d s;
  s << 0, -a.z(), a.y(), a.z(), 0, -a.x(), -a.y(), a.x(), 0;
  return s;
}

// A pair's anchor under the current pose: position and unit normal, both
// barycentric blends of the anchor triangle's corners (or the plain vertex
// when there is no refined anchor). len is the blended normal's length before
// normalization; n is zero when that degenerates.
struct AnchorFrame {
  Eigen::Vector3d x;
  Eigen::Vector3d n;
  double len;
};

AnchorFrame anchor_frame(const PosedHand& posed, const HandModel& model, const CorrPair& pr) {
  AnchorFrame a;
  if (pr.tri < 0) {
    a.x = posed.vertices.row(pr.vertex);
    a.n = posed.normals.row(pr.vertex);
    a.len = 1.0;
    return a;
  }
  a.x.setZero();
  Eigen::Vector3d u = Eigen::Vector3d::Zero();
  for (int k = 0; k < 3; ++k) {
    int c = model.triangles(pr.tri, k);
    a.x += pr.bary[k] * posed.vertices.row(c).transpose();
    u += pr.bary[k] * posed.normals.row(c).transpose();
  }
  a.len = u.norm();
  a.n = a.len > 1e-12 ? Eigen::Vector3d(u / a.len) : Eigen::Vector3d::Zero();
  return a;
}

}  // namespace

Energy::Energy(const HandModel& model, const CorrSpace& cs, const Observation& obs,
               const EnergyWeights& weights)
    : model_(model), cs_(cs), obs_(obs), weights_(weights) {
  int s = std::max(1, weights_.raster_scale);
  small_cam_ = obs.cam.scaled(s);
  small_mask_ = MaskImage(small_cam_.width, small_cam_.height, 0);
  small_corr_ = CorrImage(small_cam_.width, small_cam_.height, Eigen::Vector3f::Zero());
  for (int y = 0; y < small_cam_.height; ++y)
    for (int x = 0; x < small_cam_.width; ++x) {
      small_mask_.at(x, y) = obs.mask.at(x * s, y * s);
      small_corr_.at(x, y) = obs.corr.at(x * s, y * s);
    }
  attrs_ = cs.vertex_coords;
}

double Energy::silhouette(const Eigen::MatrixXd& verts, double* e2d) const {
  RasterBundle rb = rasterize(verts, model_.triangles, attrs_, small_cam_);
  if (e2d) {
    double sum = 0;
    int n = 0;
    for (size_t i = 0; i < rb.mask.size(); ++i) {
      if (!rb.mask.data[i] || !small_mask_.data[i]) continue;
      sum += (small_corr_.data[i] - rb.corr.data[i]).cast<double>().squaredNorm();
      ++n;
    }
    if (n == 0) {
      if (!warned_empty_overlap_) {
        std::cerr << "warning: observed and rendered masks do not overlap, e2d = 0\n";
        warned_empty_overlap_ = true;
      }
      *e2d = 0;
    } else {
      *e2d = sum / n;
    }
  }
  return jaccard(small_mask_, rb.mask);
}

EnergyBreakdown Energy::eval(const HandParams& params) const {
  return eval(params, pose_hand(model_, params));
}

EnergyBreakdown Energy::eval(const HandParams& params, const PosedHand& posed) const {
  EnergyBreakdown out;
  out.pairs = int(matches_.size());

  if (!matches_.empty()) {
    const double lp = weights_.lambda_pt;
    double sum = 0;
    for (const CorrPair& pr : matches_) {
      AnchorFrame a = anchor_frame(posed, model_, pr);
      Eigen::Vector3d r = pr.p - a.x;
      double plane = r.dot(a.n);
      sum += lp * r.squaredNorm() + (1.0 - lp) * plane * plane;
    }
    out.e3d = sum / double(matches_.size());
  }

  double e2d = 0;
  out.jaccard = silhouette(posed.vertices, weights_.w_2d != 0.0 ? &e2d : nullptr);
  out.e2d = e2d;
  out.lambda = std::exp(out.jaccard + 1.0);

  out.e_shape = params.beta.squaredNorm();
  for (int d = 0; d < kNumPoseDof; ++d) {
    double over = std::max(0.0, params.theta[d] - model_.dof_upper[d]) +
                  std::max(0.0, model_.dof_lower[d] - params.theta[d]);
    out.e_pose += over * over;
  }
  if (has_prev_) out.e_temp = (params.to_vector() - prev_.to_vector()).squaredNorm();

  out.total = weights_.w_3d * out.lambda * out.e3d + weights_.w_2d * out.e2d +
              weights_.w_shape * out.e_shape + weights_.w_pose * out.e_pose +
              weights_.w_temp * out.e_temp;
  return out;
}

Eigen::VectorXd Energy::e3d_gradient_at(const PoseJacobian& pj) const {
  Eigen::Matrix<double, 1, kNumParams> acc = Eigen::Matrix<double, 1, kNumParams>::Zero();
  if (matches_.empty()) return acc.transpose();

  const PosedHand& posed = pj.posed;
  const double lp = weights_.lambda_pt;

  // accumulate d(e)/d(vertex) and d(e)/d(normal) per matched vertex
  std::vector<Eigen::Vector3d> gv(model_.num_vertices(), Eigen::Vector3d::Zero());
  std::vector<Eigen::Vector3d> gn(model_.num_vertices(), Eigen::Vector3d::Zero());
  std::vector<char> hit(model_.num_vertices(), 0);
  for (const CorrPair& pr : matches_) {
    AnchorFrame a = anchor_frame(posed, model_, pr);
    Eigen::Vector3d r = pr.p - a.x;
    double plane = r.dot(a.n);
    Eigen::Vector3d dx = -(2.0 * lp * r + 2.0 * (1.0 - lp) * plane * a.n);
    Eigen::Vector3d dn = 2.0 * (1.0 - lp) * plane * r;
    if (pr.tri < 0) {
      gv[pr.vertex] += dx;
      gn[pr.vertex] += dn;
      hit[pr.vertex] = 1;
    } else {
      // chain d(e)/d(blended unit normal) back through the blend normalization
      // before distributing to the corner normals
      Eigen::Vector3d dnu = a.len > 1e-12
                                ? Eigen::Vector3d((dn - a.n * a.n.dot(dn)) / a.len)
                                : Eigen::Vector3d::Zero();
      for (int k = 0; k < 3; ++k) {
        int c = model_.triangles(pr.tri, k);
        gv[c] += pr.bary[k] * dx;
        gn[c] += pr.bary[k] * dnu;
        hit[c] = 1;
      }
    }
  }

  for (int v = 0; v < model_.num_vertices(); ++v) {
    if (!hit[v]) continue;
    acc += gv[v].transpose() * pj.dv[v];

    // the vertex normal is the normalized one-ring sum of face cross products;
    // push d(e)/d(normal) back through normalization and each incident face
    Eigen::Vector3d raw = Eigen::Vector3d::Zero();
    for (int f : model_.vertex_faces[v]) {
      Eigen::Vector3d a = posed.vertices.row(model_.triangles(f, 0));
      Eigen::Vector3d b = posed.vertices.row(model_.triangles(f, 1));
      Eigen::Vector3d c = posed.vertices.row(model_.triangles(f, 2));
      raw += (b - a).cross(c - a);
    }
    double len = raw.norm();
    if (len <= 1e-20) continue;
    Eigen::Vector3d n = raw / len;
    Eigen::RowVector3d graw = gn[v].transpose() * (Eigen::Matrix3d::Identity() - n * n.transpose()) / len;
    for (int f : model_.vertex_faces[v]) {
      int ia = model_.triangles(f, 0), ib = model_.triangles(f, 1), ic = model_.triangles(f, 2);
      Eigen::Vector3d e1 = posed.vertices.row(ib) - posed.vertices.row(ia);
      Eigen::Vector3d e2 = posed.vertices.row(ic) - posed.vertices.row(ia);
      Eigen::RowVector3d r1 = -graw * skew(e2);  // weight of d(b - a)
      Eigen::RowVector3d r2 = graw * skew(e1);   // weight of d(c - a)
      acc += r1 * (pj.dv[ib] - pj.dv[ia]) + r2 * (pj.dv[ic] - pj.dv[ia]);
    }
  }
  return acc.transpose() / double(matches_.size());
}

Eigen::VectorXd Energy::e3d_gradient(const HandParams& params) const {
  std::vector<char> need(model_.num_vertices(), 0);
  auto mark = [&](int v) {
    need[v] = 1;
    for (int f : model_.vertex_faces[v])
      for (int k = 0; k < 3; ++k) need[model_.triangles(f, k)] = 1;
  };
  for (const CorrPair& pr : matches_) {
    mark(pr.vertex);
    if (pr.tri >= 0)
      for (int k = 0; k < 3; ++k) mark(model_.triangles(pr.tri, k));
  }
  std::vector<int> subset;
  for (int v = 0; v < model_.num_vertices(); ++v)
    if (need[v]) subset.push_back(v);
  return e3d_gradient_at(pose_jacobian(model_, params, &subset));
}

Eigen::VectorXd Energy::reg_gradient(const HandParams& params) const {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(kNumParams);
  g.tail<kNumShape>() = 2.0 * weights_.w_shape * params.beta;
  for (int d = 0; d < kNumPoseDof; ++d) {
    double over = std::max(0.0, params.theta[d] - model_.dof_upper[d]) -
                  std::max(0.0, model_.dof_lower[d] - params.theta[d]);
    g[6 + d] += 2.0 * weights_.w_pose * over;
  }
  if (has_prev_) g += 2.0 * weights_.w_temp * (params.to_vector() - prev_.to_vector());
  return g;
}

Eigen::VectorXd Energy::gradient(const HandParams& params, EnergyBreakdown* at) const {
  std::vector<char> need(model_.num_vertices(), 0);
  auto mark = [&](int v) {
    need[v] = 1;
    for (int f : model_.vertex_faces[v])
      for (int k = 0; k < 3; ++k) need[model_.triangles(f, k)] = 1;
  };
  for (const CorrPair& pr : matches_) {
    mark(pr.vertex);
    if (pr.tri >= 0)
      for (int k = 0; k < 3; ++k) mark(model_.triangles(pr.tri, k));
  }
  std::vector<int> subset;
  for (int v = 0; v < model_.num_vertices(); ++v)
    if (need[v]) subset.push_back(v);

  PoseJacobian pj = pose_jacobian(model_, params, &subset);
  EnergyBreakdown bd = eval(params, pj.posed);
  if (at) *at = bd;

  Eigen::VectorXd g = reg_gradient(params);
  if (weights_.w_3d != 0.0 && !matches_.empty())
    g += weights_.w_3d * bd.lambda * e3d_gradient_at(pj);

  // central differences of the render-backed pieces
  bool want_e2d = weights_.w_2d != 0.0 && weights_.grad_2d;
  bool want_lambda = weights_.w_3d != 0.0 && bd.e3d != 0.0;
  if (want_e2d || want_lambda) {
    const double h = weights_.fd_step;
    Eigen::VectorXd x = params.to_vector();
    for (int k = 0; k < kNumParams; ++k) {
      double lam[2], e2d[2];
      for (int s = 0; s < 2; ++s) {
        Eigen::VectorXd xs = x;
        xs[k] += s == 0 ? h : -h;
        PosedHand ph = pose_hand(model_, HandParams::from_vector(xs));
        double e = 0;
        lam[s] = std::exp(silhouette(ph.vertices, want_e2d ? &e : nullptr) + 1.0);
        e2d[s] = e;
      }
      if (want_lambda) g[k] += weights_.w_3d * bd.e3d * (lam[0] - lam[1]) / (2.0 * h);
      if (want_e2d) g[k] += weights_.w_2d * (e2d[0] - e2d[1]) / (2.0 * h);
    }
  }
  return g;
}

}  // namespace handfit
