#ifndef HANDFIT_IMAGE_HPP
#define HANDFIT_IMAGE_HPP

#include <Eigen/Core>
#include <cstdint>
#include <vector>

namespace handfit {

// Row-major image container. (0,0) is the top-left pixel.
template <class T>
struct Image {
  int width = 0;
  int height = 0;
  std::vector<T> data;

  Image() = default;
  Image(int w, int h, T fill = T{}) : width(w), height(h), data(size_t(w) * size_t(h), fill) {}

  T& at(int x, int y) { return data[size_t(y) * width + x]; }
  const T& at(int x, int y) const { return data[size_t(y) * width + x]; }

  bool inside(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }
  size_t size() const { return data.size(); }
};

using DepthImage = Image<float>;                 // meters, 0 = background
using MaskImage = Image<std::uint8_t>;           // 0 / 255
using CorrImage = Image<Eigen::Vector3f>;        // hsv triplets in [0,1]^3
using NormalImage = Image<Eigen::Vector3f>;      // unit normals, zero where undefined
using LabelImage = Image<int>;                   // 0 = background, 1..20 = segment id

inline MaskImage mask_from_depth(const DepthImage& depth) {
  MaskImage m(depth.width, depth.height, 0);
  for (size_t i = 0; i < depth.data.size(); ++i)
    if (depth.data[i] > 0.f) m.data[i] = 255;
  return m;
}

}  // namespace handfit

#endif
