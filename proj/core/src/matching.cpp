#include "handfit/matching.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "handfit/raster.hpp"

namespace handfit {

Observation Observation::build(DepthImage depth, CorrImage corr, const PinholeCamera& cam,
                               const CorrSpace& cs) {
  if (depth.width != corr.width || depth.height != corr.height)
    throw std::runtime_error("depth and correspondence raster sizes differ");
  Observation obs;
  obs.cam = cam;
  obs.depth = std::move(depth);
  obs.corr = std::move(corr);
  obs.mask = mask_from_depth(obs.depth);
  obs.normals = depth_normals(obs.depth, cam);
  obs.labels = discretize_image(obs.corr, obs.mask, cs);
  obs.points = backproject_depth(obs.depth, cam);
  bool any = std::any_of(obs.mask.data.begin(), obs.mask.data.end(),
                         [](std::uint8_t m) { return m != 0; });
  obs.median_depth = any ? median_hand_depth(obs.depth, obs.mask) : 0.0;
  return obs;
}

SegmentIndex::SegmentIndex(const CorrSpace& cs) {
  for (int label = 1; label <= kNumSegments; ++label) {
    std::vector<Eigen::Vector3f> pts;
    std::vector<int> ids;
    for (int v : cs.segment_verts[label]) {
      pts.push_back(cs.vertex_coords.row(v));
      ids.push_back(v);
    }
    trees_[label] = KdTree3(std::move(pts), std::move(ids));
  }
}

int SegmentIndex::nearest(int label, const Eigen::Vector3f& coord) const {
  if (label < 1 || label > kNumSegments) return -1;
  return trees_[label].nearest(coord).first;
}

double median_hand_depth(const DepthImage& depth, const MaskImage& mask) {
  if (depth.width != mask.width || depth.height != mask.height)
    throw std::runtime_error("depth and mask sizes differ");
  std::vector<float> vals;
  vals.reserve(1024);
  for (size_t i = 0; i < mask.data.size(); ++i)
    if (mask.data[i]) vals.push_back(depth.data[i]);
  if (vals.empty()) throw std::runtime_error("empty mask has no median depth");
  size_t k = (vals.size() - 1) / 2;  // lower median
  std::nth_element(vals.begin(), vals.begin() + k, vals.end());
  return vals[k];
}

Matches match(const Observation& obs, const SegmentIndex& index, const MatchParams& params,
              const PosedHand* posed) {
  Matches out;
  const double cos_tn = std::cos(params.t_n);
  const int stride = std::max(1, params.pixel_stride);
  for (int y = 0; y < obs.mask.height; y += stride) {
    for (int x = 0; x < obs.mask.width; x += stride) {
      if (!obs.mask.at(x, y)) continue;
      int pix = y * obs.mask.width + x;

      if (std::abs(double(obs.depth.data[pix]) - obs.median_depth) > params.t_d) continue;

      // grazing or undefined observation normals are unreliable
      const Eigen::Vector3f& n = obs.normals.data[pix];
      if (n.squaredNorm() < 0.25f) continue;
      Eigen::Vector3d view = -obs.points[pix].normalized();
      if (n.cast<double>().dot(view) < cos_tn) continue;

      int label = obs.labels.data[pix];
      int v = index.nearest(label, obs.corr.data[pix]);
      if (v < 0) continue;

      if (posed) {
        Eigen::Vector3d vp = posed->vertices.row(v);
        if ((obs.points[pix] - vp).norm() > params.t_3d) continue;
        if (n.cast<double>().dot(posed->normals.row(v)) <= params.min_normal_dot) continue;
      }
      out.push_back({obs.points[pix], v, pix, label});
    }
  }
  return out;
}

namespace {

// closest point of triangle (a,b,c) to p, returned as barycentric weights
Eigen::Vector3d closest_bary(const Eigen::Vector3d& p, const Eigen::Vector3d& a,
                             const Eigen::Vector3d& b, const Eigen::Vector3d& c) {
  Eigen::Vector3d ab = b - a, ac = c - a, ap = p - a;
  double d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) return {1, 0, 0};
  Eigen::Vector3d bp = p - b;
  double d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) return {0, 1, 0};
  double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
    double t = d1 / (d1 - d3);
    return {1.0 - t, t, 0};
  }
  Eigen::Vector3d cp = p - c;
  double d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) return {0, 0, 1};
  double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
    double t = d2 / (d2 - d6);
    return {1.0 - t, 0, t};
  }
  double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && d4 - d3 >= 0.0 && d5 - d6 >= 0.0) {
    double t = (d4 - d3) / ((d4 - d3) + (d5 - d6));
    return {0, 1.0 - t, t};
  }
  double sum = va + vb + vc;
  if (!(sum > 0.0)) return {1, 0, 0};  // degenerate triangle: keep the vertex
  double v = vb / sum, w = vc / sum;
  return {1.0 - v - w, v, w};
}

}  // namespace

void refine_anchors(Matches& ms, const HandModel& model, const CorrSpace& cs,
                    const CorrImage& corr, double drop_floor) {
  std::vector<double> resid(ms.size());
  for (size_t i = 0; i < ms.size(); ++i) {
    CorrPair& pr = ms[i];
    Eigen::Vector3d c = corr.data[pr.pixel].cast<double>();
    double best = (cs.vertex_coords.row(pr.vertex).transpose().cast<double>() - c).squaredNorm();
    pr.tri = -1;
    pr.bary = {0, 0, 0};
    for (int f : model.vertex_faces[pr.vertex]) {
      Eigen::Vector3d a = cs.vertex_coords.row(model.triangles(f, 0)).transpose().cast<double>();
      Eigen::Vector3d b = cs.vertex_coords.row(model.triangles(f, 1)).transpose().cast<double>();
      Eigen::Vector3d d = cs.vertex_coords.row(model.triangles(f, 2)).transpose().cast<double>();
      Eigen::Vector3d w = closest_bary(c, a, b, d);
      double d2 = (w[0] * a + w[1] * b + w[2] * d - c).squaredNorm();
      if (d2 < best) {
        best = d2;
        pr.tri = f;
        pr.bary = w;
      }
    }
    resid[i] = std::sqrt(best);
  }
  if (!std::isfinite(drop_floor) || ms.empty()) return;

  std::vector<double> scale = resid;
  std::nth_element(scale.begin(), scale.begin() + scale.size() / 2, scale.end());
  double cut = std::max(drop_floor, 4.0 * scale[scale.size() / 2]);
  Matches kept;
  kept.reserve(ms.size());
  for (size_t i = 0; i < ms.size(); ++i)
    if (resid[i] <= cut) kept.push_back(ms[i]);
  ms = std::move(kept);
}

Matches refilter(const Matches& base, const Observation& obs, const PosedHand& posed,
                 const MatchParams& params) {
  Matches out;
  out.reserve(base.size());
  for (const CorrPair& pr : base) {
    Eigen::Vector3d vp = posed.vertices.row(pr.vertex);
    if ((pr.p - vp).norm() > params.t_3d) continue;
    Eigen::Vector3d vn = posed.normals.row(pr.vertex);
    if (obs.normals.data[pr.pixel].cast<double>().dot(vn) <= params.min_normal_dot) continue;
    out.push_back(pr);
  }
  return out;
}

}  // namespace handfit
