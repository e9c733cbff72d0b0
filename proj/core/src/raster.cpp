#include "handfit/raster.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Geometry>

namespace handfit {

RasterBundle rasterize(const Eigen::MatrixXd& verts, const Eigen::MatrixXi& tris,
                       const Eigen::Matrix<float, Eigen::Dynamic, 3>& attrs,
                       const PinholeCamera& cam) {
  if (attrs.rows() != verts.rows())
    throw std::runtime_error("attribute table must match vertex count");

  RasterBundle out;
  out.depth = DepthImage(cam.width, cam.height, 0.f);
  out.corr = CorrImage(cam.width, cam.height, Eigen::Vector3f::Zero());

  const int nv = int(verts.rows());
  std::vector<double> px(nv), py(nv), inv_z(nv);
  for (int v = 0; v < nv; ++v) {
    double z = verts(v, 2);
    inv_z[v] = z > 1e-8 ? 1.0 / z : 0.0;
    px[v] = cam.fx * verts(v, 0) * inv_z[v] + cam.cx;
    py[v] = cam.fy * verts(v, 1) * inv_z[v] + cam.cy;
  }

  for (int f = 0; f < tris.rows(); ++f) {
    int ia = tris(f, 0), ib = tris(f, 1), ic = tris(f, 2);
    if (inv_z[ia] == 0.0 || inv_z[ib] == 0.0 || inv_z[ic] == 0.0) continue;

    double ax = px[ia], ay = py[ia], bx = px[ib], by = py[ib], cx = px[ic], cy = py[ic];
    double area = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax);
    if (std::abs(area) < 1e-12) continue;

    int x0 = std::max(0, int(std::floor(std::min({ax, bx, cx}) - 0.5)));
    int x1 = std::min(cam.width - 1, int(std::ceil(std::max({ax, bx, cx}))));
    int y0 = std::max(0, int(std::floor(std::min({ay, by, cy}) - 0.5)));
    int y1 = std::min(cam.height - 1, int(std::ceil(std::max({ay, by, cy}))));

    double inv_area = 1.0 / area;
    for (int y = y0; y <= y1; ++y) {
      double sy = y + 0.5;
      for (int x = x0; x <= x1; ++x) {
        double sx = x + 0.5;
        double w0 = ((bx - sx) * (cy - sy) - (by - sy) * (cx - sx)) * inv_area;
        double w1 = ((cx - sx) * (ay - sy) - (cy - sy) * (ax - sx)) * inv_area;
        double w2 = 1.0 - w0 - w1;
        if (w0 < 0 || w1 < 0 || w2 < 0) continue;

        // perspective-correct: interpolate 1/z and attr/z
        double izi = w0 * inv_z[ia] + w1 * inv_z[ib] + w2 * inv_z[ic];
        float z = float(1.0 / izi);
        float& zbuf = out.depth.at(x, y);
        if (zbuf != 0.f && zbuf <= z) continue;
        zbuf = z;
        Eigen::Vector3d a = w0 * inv_z[ia] * attrs.row(ia).cast<double>() +
                            w1 * inv_z[ib] * attrs.row(ib).cast<double>() +
                            w2 * inv_z[ic] * attrs.row(ic).cast<double>();
        out.corr.at(x, y) = (a / izi).cast<float>();
      }
    }
  }

  out.mask = mask_from_depth(out.depth);
  return out;
}

double jaccard(const MaskImage& a, const MaskImage& b) {
  if (a.width != b.width || a.height != b.height)
    throw std::runtime_error("mask sizes differ");
  size_t inter = 0, uni = 0;
  for (size_t i = 0; i < a.data.size(); ++i) {
    bool pa = a.data[i] != 0, pb = b.data[i] != 0;
    inter += pa && pb;
    uni += pa || pb;
  }
  if (uni == 0) return 1.0;
  return double(inter) / double(uni);
}

Eigen::Vector3d backproject(const DepthImage& depth, int x, int y, const PinholeCamera& cam) {
  float d = depth.at(x, y);
  if (d <= 0.f) throw std::runtime_error("background pixel");
  return cam.backproject(x, y, d);
}

NormalImage depth_normals(const DepthImage& depth, const PinholeCamera& cam) {
  NormalImage out(depth.width, depth.height, Eigen::Vector3f::Zero());
  auto point = [&](int x, int y) { return cam.backproject(x, y, depth.at(x, y)); };

  for (int y = 1; y < depth.height - 1; ++y) {
    for (int x = 1; x < depth.width - 1; ++x) {
      if (depth.at(x, y) <= 0.f) continue;
      bool xm = depth.at(x - 1, y) > 0.f, xp = depth.at(x + 1, y) > 0.f;
      bool ym = depth.at(x, y - 1) > 0.f, yp = depth.at(x, y + 1) > 0.f;

      Eigen::Vector3d tx, ty;
      if (xm && xp)
        tx = point(x + 1, y) - point(x - 1, y);
      else if (xp)
        tx = point(x + 1, y) - point(x, y);
      else if (xm)
        tx = point(x, y) - point(x - 1, y);
      else
        continue;  // isolated column, normal undefined
      if (ym && yp)
        ty = point(x, y + 1) - point(x, y - 1);
      else if (yp)
        ty = point(x, y + 1) - point(x, y);
      else if (ym)
        ty = point(x, y) - point(x, y - 1);
      else
        continue;

      Eigen::Vector3d n = ty.cross(tx);  // oriented toward the camera
      double len = n.norm();
      if (len > 1e-20) out.at(x, y) = (n / len).cast<float>();
    }
  }
  return out;
}

}  // namespace handfit
