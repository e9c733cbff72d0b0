#include "handfit/hand_model.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <stdexcept>

#include <Eigen/Geometry>

namespace handfit {

using json = nlohmann::json;

namespace {

const char* kFingerNames[kNumFingers] = {"thumb", "index", "middle", "ring", "pinky"};

Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d m;
  m << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return m;
}

// minimal rigid transform helper; R then +t
struct Affine {
  Eigen::Matrix3d R = Eigen::Matrix3d::Identity();
  Eigen::Vector3d t = Eigen::Vector3d::Zero();

  Affine operator*(const Affine& o) const { return {R * o.R, R * o.t + t}; }
};

}  // namespace

const char* finger_name(int finger) { return kFingerNames[finger]; }

int finger_from_name(const std::string& name) {
  for (int f = 0; f < kNumFingers; ++f)
    if (name == kFingerNames[f]) return f;
  return -1;
}

int HandModel::dof_count() const {
  int n = 0;
  for (const auto& j : dof_mask)
    for (bool b : j) n += b ? 1 : 0;
  return n;
}

void HandModel::finalize() {
  const int nv = num_vertices();
  weights_sparse.assign(nv, {});
  for (int v = 0; v < nv; ++v)
    for (int b = 0; b < kNumJoints; ++b)
      if (weights(v, b) > 1e-9) weights_sparse[v].push_back({b, weights(v, b)});

  vertex_faces.assign(nv, {});
  for (int f = 0; f < num_triangles(); ++f)
    for (int k = 0; k < 3; ++k) vertex_faces[triangles(f, k)].push_back(f);
}

void HandModel::validate() const {
  const int nv = num_vertices();
  if (nv < 4 || num_triangles() < 4) throw std::runtime_error("model mesh is degenerate");
  for (int f = 0; f < num_triangles(); ++f)
    for (int k = 0; k < 3; ++k)
      if (triangles(f, k) < 0 || triangles(f, k) >= nv)
        throw std::runtime_error("triangle index out of range");

  if (weights.rows() != nv || weights.cols() != kNumJoints)
    throw std::runtime_error("skinning weight matrix has wrong shape");
  for (int v = 0; v < nv; ++v) {
    double sum = 0;
    for (int b = 0; b < kNumJoints; ++b) {
      if (weights(v, b) < 0) throw std::runtime_error("skinning weights not normalized");
      sum += weights(v, b);
    }
    if (std::abs(sum - 1.0) > 1e-6) throw std::runtime_error("skinning weights not normalized");
  }

  // acyclic, wrist-rooted tree
  if (parent[0] != -1) throw std::runtime_error("bone 0 must be the single root");
  for (int b = 1; b < kNumJoints; ++b) {
    int cur = b, steps = 0;
    while (cur != 0) {
      cur = parent[cur];
      if (cur < 0 || cur >= kNumJoints || ++steps > kNumJoints)
        throw std::runtime_error("kinematic tree cyclic");
    }
  }
  // 5 fingers x 3-joint chains hanging off the wrist
  for (int f = 0; f < kNumFingers; ++f) {
    int base = joint_id(f, 0);
    if (parent[base] != 0 || parent[base + 1] != base || parent[base + 2] != base + 1)
      throw std::runtime_error("each finger chain must have 3 joints off the wrist");
  }

  if (int(blendshapes.size()) != kNumShape)
    throw std::runtime_error("expected 10 shape blendshapes");
  for (const auto& b : blendshapes)
    if (b.rows() != nv || b.cols() != 3)
      throw std::runtime_error("blendshape has wrong shape");

  if (int(joint_axes.size()) != kNumArticulated)
    throw std::runtime_error("expected 15 joint frames");
  for (const auto& a : joint_axes)
    if ((a * a.transpose() - Eigen::Matrix3d::Identity()).norm() > 1e-6)
      throw std::runtime_error("joint frame not orthonormal");

  if (dof_count() != kNumPoseDof)
    throw std::runtime_error("dof mask must enable exactly 23 coordinates");
  if (dof_lower.size() != kNumPoseDof || dof_upper.size() != kNumPoseDof)
    throw std::runtime_error("joint limits must cover the 23 free coordinates");
  for (int d = 0; d < kNumPoseDof; ++d)
    if (!(dof_lower[d] < dof_upper[d])) throw std::runtime_error("joint limit interval empty");
}

std::vector<DofInfo> dof_layout(const HandModel& model) {
  static const char* kJointNames[2][3] = {{"cmc", "mcp", "ip"}, {"mcp", "pip", "dip"}};
  static const char* kAxisNames[3] = {"flex", "abd", "twist"};
  std::vector<DofInfo> out;
  for (int j = 0; j < kNumArticulated; ++j) {
    int finger = j / 3, within = j % 3;
    for (int a = 0; a < 3; ++a) {
      if (!model.dof_mask[j][a]) continue;
      std::string name = std::string(kFingerNames[finger]) + "_" +
                         kJointNames[finger == kThumb ? 0 : 1][within] + "_" + kAxisNames[a];
      out.push_back({j, a, name});
    }
  }
  return out;
}

int dof_index(const HandModel& model, int joint, int axis) {
  int d = 0;
  for (int j = 0; j < kNumArticulated; ++j)
    for (int a = 0; a < 3; ++a) {
      if (!model.dof_mask[j][a]) continue;
      if (j == joint && a == axis) return d;
      ++d;
    }
  return -1;
}

HandModel HandModel::mirrored() const {
  HandModel m = *this;
  m.vertices.col(0) *= -1.0;
  m.joints.col(0) *= -1.0;
  for (auto& bs : m.blendshapes) bs.col(0) *= -1.0;
  // flip winding so normals keep pointing outward
  m.triangles.col(1).swap(m.triangles.col(2));
  // conjugating a rotation by diag(-1,1,1) maps rotation vector a to -M a,
  // so the same anatomical coordinate produces the mirrored motion
  for (auto& ax : m.joint_axes)
    for (int r = 0; r < 3; ++r) {
      ax(r, 1) *= -1.0;
      ax(r, 2) *= -1.0;
    }
  m.finalize();
  return m;
}

HandParams mirrored(const HandParams& p) {
  HandParams q = p;
  q.rot = Eigen::Vector3d(p.rot.x(), -p.rot.y(), -p.rot.z());
  q.trans = Eigen::Vector3d(-p.trans.x(), p.trans.y(), p.trans.z());
  return q;
}

// ---------------------------------------------------------------------------
// parameters
// ---------------------------------------------------------------------------

Eigen::VectorXd HandParams::to_vector() const {
  Eigen::VectorXd v(kNumParams);
  v.segment<3>(0) = rot;
  v.segment<3>(3) = trans;
  v.segment(6, kNumPoseDof) = theta;
  v.segment(6 + kNumPoseDof, kNumShape) = beta;
  return v;
}

HandParams HandParams::from_vector(const Eigen::VectorXd& v) {
  if (v.size() != kNumParams) throw std::runtime_error("parameter vector must have 39 entries");
  HandParams p;
  p.rot = v.segment<3>(0);
  p.trans = v.segment<3>(3);
  p.theta = v.segment(6, kNumPoseDof);
  p.beta = v.segment(6 + kNumPoseDof, kNumShape);
  return p;
}

Eigen::VectorXd expand_pose(const HandModel& model, const Eigen::VectorXd& theta) {
  if (theta.size() != model.dof_count())
    throw std::runtime_error("theta size does not match the model's free coordinates");
  Eigen::VectorXd raw = Eigen::VectorXd::Zero(3 * kNumArticulated);
  int d = 0;
  for (int j = 0; j < kNumArticulated; ++j)
    for (int a = 0; a < 3; ++a)
      if (model.dof_mask[j][a])
        raw.segment<3>(3 * j) += theta[d++] * model.joint_axes[j].row(a).transpose();
  return raw;
}

Eigen::VectorXd extract_pose(const HandModel& model, const Eigen::VectorXd& raw) {
  Eigen::VectorXd theta(model.dof_count());
  int d = 0;
  for (int j = 0; j < kNumArticulated; ++j)
    for (int a = 0; a < 3; ++a)
      if (model.dof_mask[j][a])
        theta[d++] = model.joint_axes[j].row(a).dot(raw.segment<3>(3 * j));
  return theta;
}

// ---------------------------------------------------------------------------
// rotations
// ---------------------------------------------------------------------------

Eigen::Matrix3d rodrigues(const Eigen::Vector3d& a) {
  double t2 = a.squaredNorm();
  Eigen::Matrix3d K = skew(a);
  double c1, c2;  // sin t / t, (1 - cos t) / t^2
  if (t2 < 1e-12) {
    c1 = 1.0 - t2 / 6.0;
    c2 = 0.5 - t2 / 24.0;
  } else {
    double t = std::sqrt(t2);
    c1 = std::sin(t) / t;
    c2 = (1.0 - std::cos(t)) / t2;
  }
  return Eigen::Matrix3d::Identity() + c1 * K + c2 * K * K;
}

Eigen::Matrix3d so3_right_jacobian(const Eigen::Vector3d& a) {
  double t2 = a.squaredNorm();
  Eigen::Matrix3d K = skew(a);
  double c2, c3;  // (1 - cos t) / t^2, (t - sin t) / t^3
  if (t2 < 1e-12) {
    c2 = 0.5 - t2 / 24.0;
    c3 = 1.0 / 6.0 - t2 / 120.0;
  } else {
    double t = std::sqrt(t2);
    c2 = (1.0 - std::cos(t)) / t2;
    c3 = (t - std::sin(t)) / (t2 * t);
  }
  return Eigen::Matrix3d::Identity() - c2 * K + c3 * K * K;
}

// ---------------------------------------------------------------------------
// posing
// ---------------------------------------------------------------------------

Eigen::MatrixXd vertex_normals(const Eigen::MatrixXd& verts, const Eigen::MatrixXi& tris) {
  Eigen::MatrixXd n = Eigen::MatrixXd::Zero(verts.rows(), 3);
  for (int f = 0; f < tris.rows(); ++f) {
    int ia = tris(f, 0), ib = tris(f, 1), ic = tris(f, 2);
    Eigen::Vector3d a = verts.row(ia), b = verts.row(ib), c = verts.row(ic);
    Eigen::Vector3d fn = (b - a).cross(c - a);  // magnitude = 2 * area
    n.row(ia) += fn;
    n.row(ib) += fn;
    n.row(ic) += fn;
  }
  for (int v = 0; v < n.rows(); ++v) {
    double len = n.row(v).norm();
    if (len > 1e-20) n.row(v) /= len;
  }
  return n;
}

namespace {

struct Skeleton {
  std::vector<Affine> local;            // per bone, relative to parent
  std::vector<Affine> world;            // bone frame in camera space (pre-global)
  std::vector<Eigen::Vector3d> rotvec;  // per articulated joint
};

Skeleton forward_kinematics(const HandModel& model, const Eigen::VectorXd& theta) {
  Skeleton s;
  s.local.resize(kNumJoints);
  s.world.resize(kNumJoints);
  s.rotvec.resize(kNumArticulated);
  Eigen::VectorXd raw = expand_pose(model, theta);
  s.local[0] = {Eigen::Matrix3d::Identity(), model.joints.row(0)};
  s.world[0] = s.local[0];
  for (int b = 1; b < kNumJoints; ++b) {
    int a = b - 1;  // articulated index
    s.rotvec[a] = raw.segment<3>(3 * a);
    Eigen::Vector3d dj = model.joints.row(b) - model.joints.row(model.parent[b]);
    s.local[b] = {rodrigues(s.rotvec[a]), dj};
    s.world[b] = s.world[model.parent[b]] * s.local[b];
  }
  return s;
}

Eigen::MatrixXd shaped_vertices(const HandModel& model, const Eigen::VectorXd& beta) {
  Eigen::MatrixXd v = model.vertices;
  for (int k = 0; k < kNumShape; ++k)
    if (beta[k] != 0.0) v += beta[k] * model.blendshapes[k];
  return v;
}

}  // namespace

PosedHand pose_hand(const HandModel& model, const HandParams& params) {
  Skeleton skel = forward_kinematics(model, params.theta);
  Eigen::MatrixXd shaped = shaped_vertices(model, params.beta);
  Eigen::Matrix3d Rg = rodrigues(params.rot);

  PosedHand out;
  out.vertices.resize(model.num_vertices(), 3);
  out.joints.resize(kNumJoints, 3);
  for (int b = 0; b < kNumJoints; ++b)
    out.joints.row(b) = (Rg * skel.world[b].t + params.trans).transpose();
  for (int v = 0; v < model.num_vertices(); ++v) {
    Eigen::Vector3d rest = shaped.row(v);
    Eigen::Vector3d p = Eigen::Vector3d::Zero();
    for (auto [b, w] : model.weights_sparse[v]) {
      const Affine& W = skel.world[b];
      Eigen::Vector3d jb = model.joints.row(b);
      p += w * (W.R * (rest - jb) + W.t);
    }
    out.vertices.row(v) = (Rg * p + params.trans).transpose();
  }
  out.normals = vertex_normals(out.vertices, model.triangles);
  return out;
}

PoseJacobian pose_jacobian(const HandModel& model, const HandParams& params,
                           const std::vector<int>* vertex_subset) {
  const int nv = model.num_vertices();
  Skeleton skel = forward_kinematics(model, params.theta);
  Eigen::MatrixXd shaped = shaped_vertices(model, params.beta);
  Eigen::Matrix3d Rg = rodrigues(params.rot);
  Eigen::Matrix3d Jr_g = so3_right_jacobian(params.rot);

  std::vector<char> want(nv, vertex_subset ? 0 : 1);
  if (vertex_subset)
    for (int v : *vertex_subset) want[v] = 1;

  // pre-global skinned positions and per-vertex blended rotations
  std::vector<Eigen::Vector3d> skinned(nv);
  std::vector<Eigen::Matrix3d> blended_rot(nv);
  for (int v = 0; v < nv; ++v) {
    Eigen::Vector3d rest = shaped.row(v);
    Eigen::Vector3d p = Eigen::Vector3d::Zero();
    Eigen::Matrix3d A = Eigen::Matrix3d::Zero();
    for (auto [b, w] : model.weights_sparse[v]) {
      const Affine& W = skel.world[b];
      Eigen::Vector3d jb = model.joints.row(b);
      p += w * (W.R * (rest - jb) + W.t);
      if (want[v]) A += w * W.R;
    }
    skinned[v] = p;
    blended_rot[v] = A;
  }

  PoseJacobian out;
  out.posed.vertices.resize(nv, 3);
  out.posed.joints.resize(kNumJoints, 3);
  for (int b = 0; b < kNumJoints; ++b)
    out.posed.joints.row(b) = (Rg * skel.world[b].t + params.trans).transpose();
  for (int v = 0; v < nv; ++v)
    out.posed.vertices.row(v) = (Rg * skinned[v] + params.trans).transpose();
  out.posed.normals = vertex_normals(out.posed.vertices, model.triangles);

  out.dv.assign(nv, VertexJacobian::Zero());

  // global rotation and translation columns
  for (int v = 0; v < nv; ++v) {
    if (!want[v]) continue;
    out.dv[v].block<3, 3>(0, 0) = -Rg * skew(skinned[v]) * Jr_g;
    out.dv[v].block<3, 3>(0, 3) = Eigen::Matrix3d::Identity();
  }

  // articulation columns: perturb one anatomical coordinate, propagate the
  // world transform derivative down the affected chain
  auto layout = dof_layout(model);
  std::vector<Affine> dW(kNumJoints);
  std::vector<char> affected(kNumJoints);
  for (size_t d = 0; d < layout.size(); ++d) {
    int bone = layout[d].joint + 1;
    Eigen::Vector3d u = model.joint_axes[layout[d].joint].row(layout[d].axis);
    Eigen::Matrix3d Jr = so3_right_jacobian(skel.rotvec[layout[d].joint]);

    std::fill(affected.begin(), affected.end(), 0);
    affected[bone] = 1;
    const Affine& Wp = skel.world[model.parent[bone]];
    dW[bone].R = Wp.R * skel.local[bone].R * skew(Jr * u);
    dW[bone].t.setZero();
    for (int b = bone + 1; b < kNumJoints; ++b) {
      if (!affected[model.parent[b]]) continue;
      affected[b] = 1;
      const Affine& dp = dW[model.parent[b]];
      dW[b].R = dp.R * skel.local[b].R;
      dW[b].t = dp.R * skel.local[b].t + dp.t;
    }

    int col = 6 + int(d);
    for (int v = 0; v < nv; ++v) {
      if (!want[v]) continue;
      Eigen::Vector3d dp = Eigen::Vector3d::Zero();
      bool touched = false;
      for (auto [b, w] : model.weights_sparse[v]) {
        if (!affected[b]) continue;
        touched = true;
        Eigen::Vector3d rest = shaped.row(v);
        Eigen::Vector3d jb = model.joints.row(b);
        dp += w * (dW[b].R * (rest - jb) + dW[b].t);
      }
      if (touched) out.dv[v].col(col) = Rg * dp;
    }
  }

  // shape columns
  for (int k = 0; k < kNumShape; ++k) {
    int col = 6 + kNumPoseDof + k;
    for (int v = 0; v < nv; ++v) {
      if (!want[v]) continue;
      Eigen::Vector3d dir = model.blendshapes[k].row(v);
      if (dir.squaredNorm() == 0.0) continue;
      out.dv[v].col(col) = Rg * (blended_rot[v] * dir);
    }
  }

  return out;
}

// ---------------------------------------------------------------------------
// io
// ---------------------------------------------------------------------------

namespace {

json nested(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (int r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

Eigen::MatrixXd un_nested(const json& j, int cols, const char* what) {
  if (!j.is_array() || j.empty())
    throw std::runtime_error(std::string("model field '") + what + "' missing or empty");
  Eigen::MatrixXd m(j.size(), cols);
  for (size_t r = 0; r < j.size(); ++r) {
    if (int(j[r].size()) != cols)
      throw std::runtime_error(std::string("model field '") + what + "' has ragged rows");
    for (int c = 0; c < cols; ++c) m(int(r), c) = j[r][c].get<double>();
  }
  return m;
}

}  // namespace

void save_model(const std::string& path, const HandModel& model) {
  json j;
  j["schema_version"] = 1;
  j["vertices"] = nested(model.vertices);
  {
    json tris = json::array();
    for (int f = 0; f < model.num_triangles(); ++f)
      tris.push_back({model.triangles(f, 0), model.triangles(f, 1), model.triangles(f, 2)});
    j["triangles"] = tris;
  }
  j["skinning_weights"] = nested(model.weights);
  j["tree_parents"] = std::vector<int>(model.parent.begin(), model.parent.end());
  j["rest_joints"] = nested(model.joints);
  {
    json bs = json::array();
    for (const auto& b : model.blendshapes) bs.push_back(nested(b));
    j["shape_basis"] = bs;
  }
  {
    json ax = json::array();
    for (const auto& a : model.joint_axes) ax.push_back(nested(a));
    j["joint_axes"] = ax;
  }
  {
    std::vector<int> mask;
    for (const auto& jm : model.dof_mask)
      for (bool b : jm) mask.push_back(b ? 1 : 0);
    j["dof_mask"] = mask;
  }
  {
    json lim = json::array();
    for (int d = 0; d < model.dof_lower.size(); ++d)
      lim.push_back({model.dof_lower[d], model.dof_upper[d]});
    j["joint_limits"] = lim;
  }

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write model file: " + path);
  out << j.dump();
}

HandModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error("model file is not valid json: " + path + " (" + e.what() + ")");
  }
  if (j.value("schema_version", 0) != 1)
    throw std::runtime_error("unsupported model schema_version in " + path);

  HandModel m;
  m.vertices = un_nested(j.at("vertices"), 3, "vertices");
  {
    const json& tj = j.at("triangles");
    m.triangles.resize(tj.size(), 3);
    for (size_t f = 0; f < tj.size(); ++f)
      for (int k = 0; k < 3; ++k) m.triangles(int(f), k) = tj[f][k].get<int>();
  }
  m.weights = un_nested(j.at("skinning_weights"), kNumJoints, "skinning_weights");
  {
    auto par = j.at("tree_parents").get<std::vector<int>>();
    if (par.size() != kNumJoints)
      throw std::runtime_error("tree_parents must list 16 bones");
    std::copy(par.begin(), par.end(), m.parent.begin());
  }
  m.joints = un_nested(j.at("rest_joints"), 3, "rest_joints");
  if (m.joints.rows() != kNumJoints) throw std::runtime_error("rest_joints must list 16 joints");
  for (const auto& b : j.at("shape_basis"))
    m.blendshapes.push_back(un_nested(b, 3, "shape_basis"));
  for (const auto& a : j.at("joint_axes")) {
    Eigen::MatrixXd f = un_nested(a, 3, "joint_axes");
    if (f.rows() != 3) throw std::runtime_error("joint frame must be 3x3");
    m.joint_axes.push_back(f);
  }
  {
    auto mask = j.at("dof_mask").get<std::vector<int>>();
    if (mask.size() != 3 * kNumArticulated)
      throw std::runtime_error("dof mask must have 45 entries");
    for (int i = 0; i < kNumArticulated; ++i)
      for (int a = 0; a < 3; ++a) m.dof_mask[i][a] = mask[size_t(i) * 3 + a] != 0;
  }
  {
    const json& lim = j.at("joint_limits");
    m.dof_lower.resize(lim.size());
    m.dof_upper.resize(lim.size());
    for (size_t d = 0; d < lim.size(); ++d) {
      m.dof_lower[int(d)] = lim[d][0].get<double>();
      m.dof_upper[int(d)] = lim[d][1].get<double>();
    }
  }
  m.validate();
  m.finalize();
  return m;
}

}  // namespace handfit
