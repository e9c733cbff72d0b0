#ifndef HANDFIT_HAND_MODEL_HPP
#define HANDFIT_HAND_MODEL_HPP

#include <Eigen/Core>
#include <array>
#include <string>
#include <vector>

namespace handfit {

// ---------------------------------------------------------------------------
// skeleton layout
// ---------------------------------------------------------------------------
// 16 bones: 0 = wrist, then 3 per finger in the order
// thumb, index, middle, ring, pinky. Joint j of finger f (0 = knuckle,
// 1 = middle, 2 = distal) has id 1 + 3*f + j and parents the previous joint
// in the chain (the knuckle parents the wrist).
//
// Surface segments: 1..15 = finger segment (3*f + j + 1, so a finger bone and
// the skin segment it drives share the same id), 16..20 = wrist/palm region
// closest to finger f (16 + f). 0 is reserved for background in images.

inline constexpr int kNumFingers = 5;
inline constexpr int kNumJoints = 16;
inline constexpr int kNumArticulated = 15;  // finger joints, i.e. all but the wrist
inline constexpr int kNumSegments = 20;
inline constexpr int kNumShape = 10;
inline constexpr int kNumPoseDof = 23;
inline constexpr int kNumParams = 3 + 3 + kNumPoseDof + kNumShape;  // 39

enum FingerId { kThumb = 0, kIndex = 1, kMiddle = 2, kRing = 3, kPinky = 4 };

inline int joint_id(int finger, int joint) { return 1 + 3 * finger + joint; }
inline int finger_segment(int finger, int joint) { return 3 * finger + joint + 1; }
inline int wrist_segment(int finger) { return 16 + finger; }

const char* finger_name(int finger);
int finger_from_name(const std::string& name);  // -1 if unknown

// ---------------------------------------------------------------------------
// model
// ---------------------------------------------------------------------------

struct HandModel {
  Eigen::MatrixXd vertices;   // V x 3, rest pose
  Eigen::MatrixXi triangles;  // F x 3, CCW seen from outside
  Eigen::MatrixXd joints;     // 16 x 3, rest joint centers
  std::array<int, kNumJoints> parent{};
  Eigen::MatrixXd weights;  // V x 16 skinning weights, rows sum to 1

  // 10 additive shape displacement fields, each V x 3
  std::vector<Eigen::MatrixXd> blendshapes;

  // Anatomical frames for the 15 articulated joints. Row 0 = flexion axis,
  // row 1 = abduction axis, row 2 = twist axis; orthonormal, expressed in the
  // rest frame of the joint's parent (identity at rest, so model frame).
  std::vector<Eigen::Matrix3d> joint_axes;

  // Which anatomical coordinates are free. 23 entries are true; the rest of
  // the 45 raw coordinates are pinned to zero.
  std::array<std::array<bool, 3>, kNumArticulated> dof_mask{};

  // Joint limits per free coordinate (radians), in dof_layout() order.
  Eigen::VectorXd dof_lower, dof_upper;

  // --- derived, filled by finalize() ---
  std::vector<std::vector<std::pair<int, double>>> weights_sparse;  // per vertex
  std::vector<std::vector<int>> vertex_faces;                       // one-ring faces

  int num_vertices() const { return int(vertices.rows()); }
  int num_triangles() const { return int(triangles.rows()); }
  int dof_count() const;

  // rebuild derived members; must be called after mutating geometry/weights
  void finalize();

  // throws std::runtime_error naming the violated invariant
  void validate() const;

  // x -> -x mirror (left hand from a right hand model). Winding is flipped so
  // normals stay outward; anatomical coordinates keep their meaning, so the
  // same theta produces the mirrored motion.
  HandModel mirrored() const;
};

struct DofInfo {
  int joint;  // 0..14 (articulated index; bone id is joint+1)
  int axis;   // 0 flexion, 1 abduction, 2 twist
  std::string name;
};

// enumeration of the free anatomical coordinates, defining theta's ordering
std::vector<DofInfo> dof_layout(const HandModel& model);

// position of (joint, axis) within theta; -1 when that coordinate is pinned
int dof_index(const HandModel& model, int joint, int axis);

// ---------------------------------------------------------------------------
// pose parameters
// ---------------------------------------------------------------------------

/// Full parameter set. Vector layout: [rot(3), trans(3), theta(23), beta(10)].
struct HandParams {
  Eigen::Vector3d rot = Eigen::Vector3d::Zero();    // global axis-angle
  Eigen::Vector3d trans = Eigen::Vector3d::Zero();  // meters
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(kNumPoseDof);
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(kNumShape);

  Eigen::VectorXd to_vector() const;
  static HandParams from_vector(const Eigen::VectorXd& v);
};

// parameters that drive HandModel::mirrored() through the mirrored motion
HandParams mirrored(const HandParams& p);

/// anatomical -> raw: distributes the 23 free coordinates onto the 45 raw
// per-joint rotation vector entries via the joint frames
Eigen::VectorXd expand_pose(const HandModel& model, const Eigen::VectorXd& theta);

// inverse of expand_pose on the enabled slots
Eigen::VectorXd extract_pose(const HandModel& model, const Eigen::VectorXd& raw);

struct PosedHand {
  Eigen::MatrixXd vertices;  // V x 3, camera frame
  Eigen::MatrixXd joints;    // 16 x 3
  Eigen::MatrixXd normals;   // V x 3, unit vertex normals
};

PosedHand pose_hand(const HandModel& model, const HandParams& params);

// Area-weighted vertex normals; zero where a vertex has no incident area.
Eigen::MatrixXd vertex_normals(const Eigen::MatrixXd& verts, const Eigen::MatrixXi& tris);

// ---------------------------------------------------------------------------
// derivatives
// ---------------------------------------------------------------------------

using VertexJacobian = Eigen::Matrix<double, 3, kNumParams>;

struct PoseJacobian {
  PosedHand posed;
  std::vector<VertexJacobian> dv;  // per vertex, d(position)/d(params)
};

// Posed vertices together with analytic position jacobians. With a subset,
// dv is only filled (non-zero) for the listed vertices; posed is always full.
PoseJacobian pose_jacobian(const HandModel& model, const HandParams& params,
                           const std::vector<int>* vertex_subset = nullptr);

// Rodrigues map and its right jacobian (exp(a + d) ~ exp(a) * exp([Jr(a) d]x))
Eigen::Matrix3d rodrigues(const Eigen::Vector3d& a);
Eigen::Matrix3d so3_right_jacobian(const Eigen::Vector3d& a);

// ---------------------------------------------------------------------------
/// io (schema: see README / bundled simplehand.json)
// ---------------------------------------------------------------------------

HandModel load_model(const std::string& path);
void save_model(const std::string& path, const HandModel& model);

}  // namespace handfit

#endif
