#include "handfit/model_builder.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Geometry>

#include "handfit/corr_space.hpp"

namespace handfit {

namespace {

constexpr int kRingVerts = 12;
constexpr double kRingSpacing = 0.005;  // meters between tube rings
constexpr double kBlendWidth = 0.004;   // skinning transition half-width, meters

struct FingerSpec {
  Eigen::Vector3d root;   // knuckle joint
  Eigen::Vector3d dir;    // unit, wrist out through the finger
  double len[3];          // bone lengths
  double r_base, r_tip;   // tube radii
  double inset;           // how far the tube starts behind the knuckle
};

std::array<FingerSpec, kNumFingers> finger_specs() {
  auto make = [](double rx, double ry, double rz, double dy, double l0, double l1, double l2,
                 double rb, double rt, double inset) {
    FingerSpec s;
    s.root = Eigen::Vector3d(rx, ry, rz);
    // the direction keeps the root's x:z ratio so the whole finger stays in
    // one hue band; dy lets the thumb dip out of the palm plane
    s.dir = Eigen::Vector3d(rx, dy, rz).normalized();
    s.len[0] = l0;
    s.len[1] = l1;
    s.len[2] = l2;
    s.r_base = rb;
    s.r_tip = rt;
    s.inset = inset;
    return s;
  };
  return {
      make(0.042, 0, 0.020, -0.012, 0.042, 0.032, 0.026, 0.010, 0.0065, 0.016),  // thumb
      make(0.030, 0, 0.088, 0, 0.038, 0.024, 0.020, 0.008, 0.0055, 0.012),       // index
      make(0.010, 0, 0.090, 0, 0.040, 0.026, 0.021, 0.008, 0.0055, 0.012),       // middle
      make(-0.010, 0, 0.089, 0, 0.037, 0.024, 0.020, 0.008, 0.0055, 0.012),      // ring
      make(-0.030, 0, 0.083, 0, 0.030, 0.019, 0.016, 0.007, 0.005, 0.012),       // pinky
  };
}

double smoothstep01(double t) {
  t = std::clamp(t, 0.0, 1.0);
  return t * t * (3.0 - 2.0 * t);
}

struct MeshAcc {
  std::vector<Eigen::Vector3d> verts;
  std::vector<Eigen::Vector3i> tris;

  int add(const Eigen::Vector3d& p) {
    verts.push_back(p);
    return int(verts.size()) - 1;
  }
  void tri(int a, int b, int c) { tris.push_back(Eigen::Vector3i(a, b, c)); }
  // corners counterclockwise as seen from outside
  void quad(int a, int b, int c, int d) {
    tri(a, b, c);
    tri(a, c, d);
  }
};

void add_finger(MeshAcc& m, const FingerSpec& fs) {
  const double total = fs.len[0] + fs.len[1] + fs.len[2];
  const double span = fs.inset + total;
  const int nr = std::max(4, int(std::lround(span / kRingSpacing)) + 1);

  Eigen::Vector3d u = fs.dir.cross(Eigen::Vector3d::UnitY()).normalized();
  Eigen::Vector3d v = fs.dir.cross(u);

  std::vector<std::array<int, kRingVerts>> rings(nr);
  for (int k = 0; k < nr; ++k) {
    double t = double(k) / (nr - 1);
    Eigen::Vector3d c = fs.root + fs.dir * (t * span - fs.inset);
    double r = fs.r_base + (fs.r_tip - fs.r_base) * t;
    for (int i = 0; i < kRingVerts; ++i) {
      double phi = 2.0 * M_PI * i / kRingVerts;
      rings[k][i] = m.add(c + r * (std::cos(phi) * u + std::sin(phi) * v));
    }
  }
  for (int k = 0; k + 1 < nr; ++k)
    for (int i = 0; i < kRingVerts; ++i) {
      int j = (i + 1) % kRingVerts;
      m.quad(rings[k][i], rings[k][j], rings[k + 1][j], rings[k + 1][i]);
    }

  // pole caps; the tip pole sits on the wrist ray so the farthest surface
  // point of the finger's hue band is exactly on axis
  int base_pole = m.add(fs.root - fs.dir * (fs.inset + 0.7 * fs.r_base));
  int tip_pole = m.add(fs.root + fs.dir * (total + fs.r_tip));
  for (int i = 0; i < kRingVerts; ++i) {
    int j = (i + 1) % kRingVerts;
    m.tri(rings[0][j], rings[0][i], base_pole);
    m.tri(rings[nr - 1][i], rings[nr - 1][j], tip_pole);
  }
}

void add_palm(MeshAcc& m) {
  // trapezoid slab; z stays well clear of 0 so the hue angle is stable, and
  // the top edge tucks under the finger tube bases
  const int nx = 10, nz = 13;
  const double y = 0.011, z0 = 0.002, z1 = 0.080;
  auto xlim = [&](double z, double& lo, double& hi) {
    double t = (z - z0) / (z1 - z0);
    lo = -0.030 - 0.006 * t;
    hi = 0.045 - 0.009 * t;
  };

  int top[nz][nx], bot[nz][nx];
  for (int r = 0; r < nz; ++r) {
    double z = z0 + (z1 - z0) * r / (nz - 1);
    double lo, hi;
    xlim(z, lo, hi);
    for (int c = 0; c < nx; ++c) {
      double x = lo + (hi - lo) * c / (nx - 1);
      top[r][c] = m.add(Eigen::Vector3d(x, y, z));
      bot[r][c] = m.add(Eigen::Vector3d(x, -y, z));
    }
  }
  for (int r = 0; r + 1 < nz; ++r)
    for (int c = 0; c + 1 < nx; ++c) {
      m.quad(top[r][c], top[r + 1][c], top[r + 1][c + 1], top[r][c + 1]);
      m.quad(bot[r][c], bot[r][c + 1], bot[r + 1][c + 1], bot[r + 1][c]);
    }
  for (int c = 0; c + 1 < nx; ++c) {
    m.quad(top[0][c], top[0][c + 1], bot[0][c + 1], bot[0][c]);
    m.quad(top[nz - 1][c + 1], top[nz - 1][c], bot[nz - 1][c], bot[nz - 1][c + 1]);
  }
  for (int r = 0; r + 1 < nz; ++r) {
    m.quad(top[r + 1][0], top[r][0], bot[r][0], bot[r + 1][0]);
    m.quad(top[r][nx - 1], top[r + 1][nx - 1], bot[r + 1][nx - 1], bot[r][nx - 1]);
  }
}

}  // namespace

HandModel build_simple_hand() {
  auto specs = finger_specs();

  MeshAcc mesh;
  add_palm(mesh);
  for (const FingerSpec& fs : specs) add_finger(mesh, fs);

  HandModel m;
  m.vertices.resize(int(mesh.verts.size()), 3);
  for (size_t i = 0; i < mesh.verts.size(); ++i) m.vertices.row(int(i)) = mesh.verts[i];
  m.triangles.resize(int(mesh.tris.size()), 3);
  for (size_t i = 0; i < mesh.tris.size(); ++i) m.triangles.row(int(i)) = mesh.tris[i];

  // skeleton: wrist at the origin, three joints per finger along its ray
  m.joints = Eigen::MatrixXd::Zero(kNumJoints, 3);
  m.parent[0] = -1;
  m.joint_axes.resize(kNumArticulated);
  for (int f = 0; f < kNumFingers; ++f) {
    const FingerSpec& fs = specs[f];
    double along = 0;
    for (int j = 0; j < 3; ++j) {
      int id = joint_id(f, j);
      m.joints.row(id) = fs.root + fs.dir * along;
      m.parent[id] = j == 0 ? 0 : id - 1;
      along += fs.len[j];

      // flexion curls toward the palm (-y), abduction swings toward the
      // thumb (+x), twist spins about the finger
      Eigen::Vector3d t = fs.dir;
      Eigen::Vector3d a = (Eigen::Vector3d::UnitY() - t.y() * t).normalized();
      Eigen::Vector3d fl = a.cross(t);
      Eigen::Matrix3d& ax = m.joint_axes[id - 1];
      ax.row(0) = fl;
      ax.row(1) = a;
      ax.row(2) = t;
    }
  }

  // 23 free coordinates: every joint flexes, knuckles abduct, the thumb
  // knuckle gets a second abduction plus twist, the index knuckle twists
  for (int f = 0; f < kNumFingers; ++f) {
    m.dof_mask[3 * f + 0] = {true, true, false};
    m.dof_mask[3 * f + 1] = {true, false, false};
    m.dof_mask[3 * f + 2] = {true, false, false};
  }
  m.dof_mask[3 * kThumb + 1] = {true, true, true};
  m.dof_mask[3 * kIndex + 0][2] = true;

  m.dof_lower.resize(kNumPoseDof);
  m.dof_upper.resize(kNumPoseDof);
  int d = 0;
  for (int j = 0; j < kNumArticulated; ++j) {
    bool thumb = j / 3 == kThumb;
    for (int a = 0; a < 3; ++a) {
      if (!m.dof_mask[j][a]) continue;
      double lo, hi;
      if (a == 0) {
        lo = -0.26;
        hi = 1.74;
      } else if (a == 1) {
        lo = thumb ? -0.5 : -0.35;
        hi = thumb ? 0.5 : 0.35;
      } else {
        lo = -0.3;
        hi = 0.3;
      }
      m.dof_lower[d] = lo;
      m.dof_upper[d] = hi;
      ++d;
    }
  }

  // Skinning and shape fields are functions of the correspondence embedding,
  // which only needs the geometry built so far. Bone transitions are
  // smoothsteps centered on the same stations the discretizer cuts at, so
  // the dominant bone flips exactly where the label does.
  m.weights = Eigen::MatrixXd::Zero(m.num_vertices(), kNumJoints);
  CorrSpace cs = build_corr_space(m);

  m.blendshapes.assign(kNumShape, Eigen::MatrixXd::Zero(m.num_vertices(), 3));
  for (int v = 0; v < m.num_vertices(); ++v) {
    Eigen::Vector3d p = m.vertices.row(v);
    int f = cs.finger_of_hue(cs.vertex_coords(v, 0));
    const CorrSpace::FingerAxis& ax = cs.finger[f];
    double s = cs.vertex_coords(v, 1);
    double hw = kBlendWidth / ax.len;
    auto blend = [&](double c) { return smoothstep01((s - c + hw) / (2.0 * hw)); };
    double a1 = blend(ax.s_mcp), a2 = blend(ax.s_pip), a3 = blend(ax.s_dip);

    m.weights(v, 0) = 1.0 - a1;
    m.weights(v, joint_id(f, 0)) = a1 * (1.0 - a2);
    m.weights(v, joint_id(f, 1)) = a1 * a2 * (1.0 - a3);
    m.weights(v, joint_id(f, 2)) = a1 * a2 * a3;

    // shape fields: 0 overall scale, 1 finger thickness, 2..4 palm width /
    // thickness / length, 5+f length of finger f
    Eigen::Vector3d perp = p - ax.dir * p.dot(ax.dir);
    m.blendshapes[0].row(v) = p;
    m.blendshapes[1].row(v) = a1 * perp;
    m.blendshapes[2].row(v) = Eigen::Vector3d((1.0 - a1) * p.x(), 0, 0);
    m.blendshapes[3].row(v) = Eigen::Vector3d(0, (1.0 - a1) * p.y(), 0);
    m.blendshapes[4].row(v) = Eigen::Vector3d(0, 0, (1.0 - a1) * p.z());
    m.blendshapes[5 + f].row(v) = a1 * ax.len * (s - ax.s_mcp) * ax.dir;
  }

  m.finalize();
  m.validate();
  return m;
}

}  // namespace handfit
