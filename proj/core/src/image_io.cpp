#include "handfit/image_io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace handfit {

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  return in;
}

// header: magic, whitespace, width, height, scale; negative scale = little endian
void read_pfm_header(std::istream& in, const std::string& path, const char* magic, int& w,
                     int& h) {
  std::string tag;
  double scale = 0;
  in >> tag >> w >> h >> scale;
  if (!in || tag != magic || w <= 0 || h <= 0)
    throw std::runtime_error("not a " + std::string(magic) + " raster: " + path);
  if (scale >= 0) throw std::runtime_error("big-endian PFM not supported: " + path);
  in.get();  // single whitespace byte before the pixel block
}

}  // namespace

void write_pfm(const std::string& path, const DepthImage& img) {
  auto out = open_out(path);
  out << "Pf\n" << img.width << " " << img.height << "\n-1.0\n";
  for (int y = img.height - 1; y >= 0; --y)
    out.write(reinterpret_cast<const char*>(&img.at(0, y)), sizeof(float) * img.width);
}

void write_pfm(const std::string& path, const CorrImage& img) {
  auto out = open_out(path);
  out << "PF\n" << img.width << " " << img.height << "\n-1.0\n";
  std::vector<float> row(size_t(img.width) * 3);
  for (int y = img.height - 1; y >= 0; --y) {
    for (int x = 0; x < img.width; ++x) {
      const Eigen::Vector3f& c = img.at(x, y);
      row[size_t(x) * 3 + 0] = c.x();
      row[size_t(x) * 3 + 1] = c.y();
      row[size_t(x) * 3 + 2] = c.z();
    }
    out.write(reinterpret_cast<const char*>(row.data()), sizeof(float) * row.size());
  }
}

DepthImage read_pfm_gray(const std::string& path) {
  auto in = open_in(path);
  int w, h;
  read_pfm_header(in, path, "Pf", w, h);
  DepthImage img(w, h);
  for (int y = h - 1; y >= 0; --y)
    in.read(reinterpret_cast<char*>(&img.at(0, y)), sizeof(float) * w);
  if (!in) throw std::runtime_error("truncated PFM: " + path);
  return img;
}

CorrImage read_pfm_rgb(const std::string& path) {
  auto in = open_in(path);
  int w, h;
  read_pfm_header(in, path, "PF", w, h);
  CorrImage img(w, h);
  std::vector<float> row(size_t(w) * 3);
  for (int y = h - 1; y >= 0; --y) {
    in.read(reinterpret_cast<char*>(row.data()), sizeof(float) * row.size());
    for (int x = 0; x < w; ++x)
      img.at(x, y) = Eigen::Vector3f(row[size_t(x) * 3], row[size_t(x) * 3 + 1],
                                     row[size_t(x) * 3 + 2]);
  }
  if (!in) throw std::runtime_error("truncated PFM: " + path);
  return img;
}

void write_pgm(const std::string& path, const MaskImage& img) {
  auto out = open_out(path);
  out << "P5\n" << img.width << " " << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.data.data()), img.data.size());
}

MaskImage read_pgm(const std::string& path) {
  auto in = open_in(path);
  std::string tag;
  int w, h, maxval;
  in >> tag >> w >> h >> maxval;
  if (!in || tag != "P5" || w <= 0 || h <= 0 || maxval != 255)
    throw std::runtime_error("not a P5 PGM: " + path);
  in.get();
  MaskImage img(w, h);
  in.read(reinterpret_cast<char*>(img.data.data()), img.data.size());
  if (!in) throw std::runtime_error("truncated PGM: " + path);
  return img;
}

void write_ply(const std::string& path, const Eigen::MatrixXd& verts,
               const Eigen::MatrixXi& tris, const std::vector<float>& uncertainty) {
  if (int(uncertainty.size()) != verts.rows())
    throw std::runtime_error("uncertainty attribute must match vertex count");
  auto out = open_out(path);
  out << "ply\nformat ascii 1.0\n";
  out << "element vertex " << verts.rows() << "\n";
  out << "property float x\nproperty float y\nproperty float z\n";
  out << "property float uncertainty\n";
  out << "element face " << tris.rows() << "\n";
  out << "property list uchar int vertex_indices\nend_header\n";
  std::ostringstream body;
  for (int v = 0; v < verts.rows(); ++v)
    body << float(verts(v, 0)) << " " << float(verts(v, 1)) << " " << float(verts(v, 2)) << " "
         << uncertainty[v] << "\n";
  for (int f = 0; f < tris.rows(); ++f)
    body << "3 " << tris(f, 0) << " " << tris(f, 1) << " " << tris(f, 2) << "\n";
  out << body.str();
}

}  // namespace handfit
