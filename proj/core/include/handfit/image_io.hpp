#ifndef HANDFIT_IMAGE_IO_HPP
#define HANDFIT_IMAGE_IO_HPP

#include <string>

#include "handfit/image.hpp"

namespace handfit {

// PFM, little-endian float32 (negative scale), rows stored bottom-up.
// Depth rasters use the 1-channel "Pf" variant, correspondence rasters "PF".
void write_pfm(const std::string& path, const DepthImage& img);
void write_pfm(const std::string& path, const CorrImage& img);
DepthImage read_pfm_gray(const std::string& path);
CorrImage read_pfm_rgb(const std::string& path);

// binary PGM (P5, maxval 255); 255 = hand
void write_pgm(const std::string& path, const MaskImage& img);
MaskImage read_pgm(const std::string& path);

// ASCII PLY mesh with one scalar per vertex (0 = certain, 1 = uncertain)
void write_ply(const std::string& path, const Eigen::MatrixXd& verts,
               const Eigen::MatrixXi& tris, const std::vector<float>& uncertainty);

}  // namespace handfit

#endif
