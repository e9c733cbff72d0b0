#ifndef HANDFIT_KDTREE_HPP
#define HANDFIT_KDTREE_HPP

#include <Eigen/Core>
#include <algorithm>
#include <vector>

namespace handfit {

// Minimal static 3d k-d tree used for nearest-neighbor lookups in
// correspondence space. Exact; distance ties resolve to the lowest stored id
// so results are independent of build order.
class KdTree3 {
 public:
  KdTree3() = default;

  KdTree3(std::vector<Eigen::Vector3f> points, std::vector<int> ids)
      : pts_(std::move(points)), ids_(std::move(ids)) {
    order_.resize(pts_.size());
    for (size_t i = 0; i < order_.size(); ++i) order_[i] = int(i);
    if (!order_.empty()) build(0, int(order_.size()), 0);
  }

  int size() const { return int(pts_.size()); }

  // returns (id, squared distance); id -1 when empty
  std::pair<int, float> nearest(const Eigen::Vector3f& q) const {
    int best = -1;
    float best_d2 = std::numeric_limits<float>::max();
    if (!order_.empty()) search(0, int(order_.size()), 0, q, best, best_d2);
    return {best, best_d2};
  }

 private:
  void build(int lo, int hi, int axis) {
    if (hi - lo <= 1) return;
    int mid = (lo + hi) / 2;
    std::nth_element(order_.begin() + lo, order_.begin() + mid, order_.begin() + hi,
                     [&](int a, int b) { return pts_[a][axis] < pts_[b][axis]; });
    build(lo, mid, (axis + 1) % 3);
    build(mid + 1, hi, (axis + 1) % 3);
  }

  void search(int lo, int hi, int axis, const Eigen::Vector3f& q, int& best,
              float& best_d2) const {
    if (lo >= hi) return;
    int mid = (lo + hi) / 2;
    int p = order_[mid];
    float d2 = (pts_[p] - q).squaredNorm();
    if (d2 < best_d2 || (d2 == best_d2 && ids_[p] < best)) {
      best_d2 = d2;
      best = ids_[p];
    }
    float delta = q[axis] - pts_[p][axis];
    int next = (axis + 1) % 3;
    if (delta < 0) {
      search(lo, mid, next, q, best, best_d2);
      if (delta * delta <= best_d2) search(mid + 1, hi, next, q, best, best_d2);
    } else {
      search(mid + 1, hi, next, q, best, best_d2);
      if (delta * delta <= best_d2) search(lo, mid, next, q, best, best_d2);
    }
  }

  std::vector<Eigen::Vector3f> pts_;
  std::vector<int> ids_;
  std::vector<int> order_;
};

}  // namespace handfit

#endif
