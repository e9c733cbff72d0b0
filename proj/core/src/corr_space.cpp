#include "handfit/corr_space.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace handfit {

double CorrSpace::hue_of_point(const Eigen::Vector3d& p) const {
  double a = std::atan2(p.x() - wrist.x(), p.z() - wrist.z());
  return std::clamp((a - angle_min) / (angle_max - angle_min), 0.0, 1.0);
}

int CorrSpace::finger_of_hue(double h) const {
  for (int k = 0; k < kNumFingers - 1; ++k)
    if (h < hue_edges[k + 1]) return order[k];
  return order[kNumFingers - 1];
}

double CorrSpace::saturation(int f, const Eigen::Vector3d& p) const {
  const FingerAxis& ax = finger[f];
  return std::clamp((p - wrist).dot(ax.dir) / ax.len, 0.0, 1.0);
}

Eigen::Vector3f CorrSpace::coord_of_point(const Eigen::Vector3d& p, double normal_y) const {
  double h = hue_of_point(p);
  double s = saturation(finger_of_hue(h), p);
  double v = (normal_y + 1.0) / 2.0;
  return Eigen::Vector3f(float(h), float(s), float(std::clamp(v, 0.0, 1.0)));
}

int CorrSpace::discretize(float h, float s) const {
  int f = finger_of_hue(h);
  const FingerAxis& ax = finger[f];
  if (s < ax.s_mcp) return wrist_segment(f);
  if (s < ax.s_pip) return finger_segment(f, 0);
  if (s < ax.s_dip) return finger_segment(f, 1);
  return finger_segment(f, 2);
}

CorrSpace build_corr_space(const HandModel& model) {
  CorrSpace cs;
  cs.wrist = model.joints.row(0);

  for (int f = 0; f < kNumFingers; ++f) {
    Eigen::Vector3d root = model.joints.row(joint_id(f, 0));
    cs.root_angle[f] = std::atan2(root.x() - cs.wrist.x(), root.z() - cs.wrist.z());
  }
  for (int f = 0; f < kNumFingers; ++f) cs.order[f] = f;
  std::sort(cs.order.begin(), cs.order.end(),
            [&](int a, int b) { return cs.root_angle[a] < cs.root_angle[b]; });

  // angular extent over the rest surface
  const int nv = model.num_vertices();
  cs.angle_min = 1e30;
  cs.angle_max = -1e30;
  for (int v = 0; v < nv; ++v) {
    Eigen::Vector3d p = model.vertices.row(v);
    double a = std::atan2(p.x() - cs.wrist.x(), p.z() - cs.wrist.z());
    cs.angle_min = std::min(cs.angle_min, a);
    cs.angle_max = std::max(cs.angle_max, a);
  }
  if (cs.angle_max - cs.angle_min < 1e-6)
    throw std::runtime_error("hand model has no angular extent in the coronal plane");

  // hue bands: midpoints between neighboring root angles, normalized
  auto norm = [&](double a) { return (a - cs.angle_min) / (cs.angle_max - cs.angle_min); };
  cs.hue_edges[0] = 0.0;
  cs.hue_edges[kNumFingers] = 1.0;
  for (int k = 1; k < kNumFingers; ++k)
    cs.hue_edges[k] =
        norm((cs.root_angle[cs.order[k - 1]] + cs.root_angle[cs.order[k]]) / 2.0);

  // per-finger axis: a provisional knuckle->distal direction selects the
  // fingertip as the farthest surface point of that finger's hue band
  cs.fingertips.resize(kNumFingers, 3);
  for (int f = 0; f < kNumFingers; ++f) {
    Eigen::Vector3d dir0 =
        (model.joints.row(joint_id(f, 2)) - model.joints.row(0)).normalized();
    double best = -1e30;
    Eigen::Vector3d tip = Eigen::Vector3d::Zero();
    for (int v = 0; v < nv; ++v) {
      Eigen::Vector3d p = model.vertices.row(v);
      if (cs.finger_of_hue(cs.hue_of_point(p)) != f) continue;
      double proj = (p - cs.wrist).dot(dir0);
      if (proj > best) {
        best = proj;
        tip = p;
      }
    }
    if (best <= 0) throw std::runtime_error("finger band holds no surface points");
    cs.fingertips.row(f) = tip;

    CorrSpace::FingerAxis& ax = cs.finger[f];
    ax.len = (tip - cs.wrist).norm();
    ax.dir = (tip - cs.wrist) / ax.len;
    auto station = [&](int j) {
      return (Eigen::Vector3d(model.joints.row(joint_id(f, j))) - cs.wrist).dot(ax.dir) /
             ax.len;
    };
    ax.s_mcp = station(0);
    ax.s_pip = station(1);
    ax.s_dip = station(2);
    if (!(0 < ax.s_mcp && ax.s_mcp < ax.s_pip && ax.s_pip < ax.s_dip && ax.s_dip < 1))
      throw std::runtime_error("finger joint stations are not ordered along the axis");
  }

  // cache the per-vertex embedding and the 3d segment sets
  Eigen::MatrixXd normals = vertex_normals(model.vertices, model.triangles);
  cs.vertex_coords.resize(nv, 3);
  cs.vertex_label.resize(nv);
  for (int v = 0; v < nv; ++v) {
    Eigen::Vector3f c = cs.coord_of_point(model.vertices.row(v), normals(v, 1));
    cs.vertex_coords.row(v) = c;
    int label = cs.discretize(c);
    cs.vertex_label[v] = label;
    cs.segment_verts[label].push_back(v);
  }
  for (int i = 1; i <= kNumSegments; ++i)
    if (cs.segment_verts[i].empty())
      throw std::runtime_error("segment " + std::to_string(i) + " holds no vertices");
  return cs;
}

LabelImage discretize_image(const CorrImage& corr, const MaskImage& mask, const CorrSpace& cs) {
  if (corr.width != mask.width || corr.height != mask.height)
    throw std::runtime_error("correspondence raster and mask sizes differ");
  LabelImage out(corr.width, corr.height, 0);
  for (size_t i = 0; i < corr.data.size(); ++i)
    if (mask.data[i]) out.data[i] = cs.discretize(corr.data[i]);
  return out;
}

std::array<std::vector<int>, kNumSegments + 1> segment_pixels(const CorrImage& corr,
                                                              const MaskImage& mask,
                                                              const CorrSpace& cs) {
  std::array<std::vector<int>, kNumSegments + 1> sets;
  LabelImage labels = discretize_image(corr, mask, cs);
  for (size_t i = 0; i < labels.data.size(); ++i)
    if (labels.data[i]) sets[labels.data[i]].push_back(int(i));
  return sets;
}

}  // namespace handfit
