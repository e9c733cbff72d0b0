#include "handfit/synth.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <stdexcept>
#include <thread>

#include <Eigen/Geometry>

#include "handfit/image_io.hpp"
#include "handfit/matching.hpp"
#include "handfit/raster.hpp"
#include "handfit/serialize.hpp"

namespace handfit {

// ---------------------------------------------------------------------------
// noise stream
// ---------------------------------------------------------------------------

NoiseStream::NoiseStream(std::uint64_t seed, std::uint64_t frame)
    : state_((seed + 1) * 0x9e3779b97f4a7c15ULL ^ (frame + 1) * 0xbf58476d1ce4e5b9ULL) {}

double NoiseStream::uniform() {
  state_ += 0x9e3779b97f4a7c15ULL;  // splitmix64
  std::uint64_t z = state_;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return (double(z >> 11) + 0.5) * 0x1.0p-53;
}

double NoiseStream::gauss() {
  double u1 = uniform(), u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

// ---------------------------------------------------------------------------
// scripts
// ---------------------------------------------------------------------------

namespace {

HandParams base_pose() {
  HandParams p;
  p.rot = Eigen::Vector3d(M_PI / 2, 0, 0);  // palm to camera, fingers up
  p.trans = Eigen::Vector3d(0, 0, 0.45);
  return p;
}

void set_dof(const HandModel& model, HandParams& p, int joint, int axis, double value) {
  int d = dof_index(model, joint, axis);
  if (d >= 0) p.theta[d] = std::min(model.dof_upper[d], std::max(model.dof_lower[d], value));
}

}  // namespace

HandParams script_pose(const HandModel& model, const std::string& script, int frame, int total,
                       double amplitude) {
  if (total < 1) throw std::runtime_error("script needs at least one frame");
  HandParams p = base_pose();

  if (script == "abduction_adduction") {
    // the fan: outer fingers swing the most, the middle stays put
    static const double kSpread[kNumFingers] = {0.0, 1.0, 0.4, -0.4, -1.0};
    double s = std::sin(2.0 * M_PI * 3.0 * frame / total);
    for (int f = 0; f < kNumFingers; ++f)
      set_dof(model, p, 3 * f, 1, amplitude * kSpread[f] * s);
    return p;
  }

  if (script == "hyperextension") {
    double s = std::sin(M_PI * frame / std::max(1, total - 1));
    for (int f = 0; f < kNumFingers; ++f)
      set_dof(model, p, 3 * f, 0, -amplitude * s);  // clamped to the limit
    return p;
  }

  if (script == "ball_rotation") {
    static const double kCurl[3] = {0.5, 0.6, 0.45};  // proximal, middle, distal
    for (int f = 0; f < kNumFingers; ++f)
      for (int j = 0; j < 3; ++j)
        set_dof(model, p, 3 * f + j, 0, f == kThumb ? 0.6 * kCurl[j] : kCurl[j]);
    double phi = 2.0 * M_PI * frame / total;
    Eigen::Matrix3d r = Eigen::AngleAxisd(phi, Eigen::Vector3d::UnitZ()).toRotationMatrix() *
                        rodrigues(p.rot);
    Eigen::AngleAxisd aa(r);
    p.rot = aa.angle() * aa.axis();
    return p;
  }

  throw std::runtime_error("unknown script '" + script + "'");
}

// ---------------------------------------------------------------------------
// frame synthesis
// ---------------------------------------------------------------------------

SynthFrame synth_frame(const HandModel& model, const CorrSpace& cs, const PinholeCamera& cam,
                       const SynthOptions& opt, int frame) {
  SynthFrame out;
  out.gt = script_pose(model, opt.script, frame, opt.frames, opt.amplitude);

  PosedHand posed = pose_hand(model, out.gt);
  RasterBundle rb = rasterize(posed.vertices, model.triangles, cs.vertex_coords, cam);
  out.depth = std::move(rb.depth);
  out.mask = std::move(rb.mask);
  out.corr = std::move(rb.corr);

  // labels of the clean render drive corruption and finger occlusion
  LabelImage labels = discretize_image(out.corr, out.mask, cs);

  for (const HueCorruption& c : opt.corruptions) {
    if (c.segment < 1 || c.segment > kNumSegments)
      throw std::runtime_error("corruption segment out of range");
    if (frame < c.first || frame > c.last) continue;
    for (size_t i = 0; i < labels.size(); ++i)
      if (labels.data[i] == c.segment) {
        float h = out.corr.data[i].x() + float(c.shift);
        out.corr.data[i].x() = std::min(1.f, std::max(0.f, h));
      }
  }

  if (opt.depth_noise > 0) {
    NoiseStream ns(opt.seed, std::uint64_t(frame) * 2);
    for (size_t i = 0; i < out.depth.size(); ++i)
      if (out.mask.data[i])
        out.depth.data[i] =
            std::max(1e-3, out.depth.data[i] + opt.depth_noise * ns.gauss());
  }
  if (opt.corr_noise > 0) {
    NoiseStream ns(opt.seed, std::uint64_t(frame) * 2 + 1);
    for (size_t i = 0; i < out.corr.size(); ++i)
      if (out.mask.data[i])
        for (int c = 0; c < 3; ++c) {
          float v = out.corr.data[i][c] + float(opt.corr_noise * ns.gauss());
          out.corr.data[i][c] = std::min(1.f, std::max(0.f, v));
        }
  }

  // occlusion comes last so nothing leaks through it
  auto zero_pixel = [&](size_t i) {
    out.depth.data[i] = 0;
    out.mask.data[i] = 0;
    out.corr.data[i].setZero();
  };
  for (const std::string& name : opt.occlude_fingers) {
    int f = finger_from_name(name);
    for (size_t i = 0; i < labels.size(); ++i) {
      int seg = labels.data[i];
      if (seg >= finger_segment(f, 0) && seg <= finger_segment(f, 2)) zero_pixel(i);
    }
  }
  for (const OccludeRect& r : opt.occlude_rects) {
    int x0 = std::max(0, r.x), y0 = std::max(0, r.y);
    int x1 = std::min(cam.width, r.x + r.w), y1 = std::min(cam.height, r.y + r.h);
    for (int y = y0; y < y1; ++y)
      for (int x = x0; x < x1; ++x) zero_pixel(size_t(y) * cam.width + x);
  }
  return out;
}

// ---------------------------------------------------------------------------
// sequence io
// ---------------------------------------------------------------------------

namespace {

std::string frame_stem(const std::string& dir, int frame) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "frame_%04d", frame);
  return (std::filesystem::path(dir) / buf).string();
}

}  // namespace

void write_synth_sequence(const std::string& dir, const HandModel& model, const CorrSpace& cs,
                          const PinholeCamera& cam, const SynthOptions& opt, int jobs) {
  if (opt.frames < 1) throw std::runtime_error("sequence needs at least one frame");
  std::filesystem::create_directories(dir);

  GtFile gt;
  gt.camera = cam;
  gt.script = opt.script;
  gt.seed = opt.seed;
  gt.amplitude = opt.amplitude;
  gt.frames.resize(opt.frames);

  jobs = std::max(1, jobs);
  for (int base = 0; base < opt.frames; base += jobs) {
    int n = std::min(jobs, opt.frames - base);
    std::vector<SynthFrame> chunk(n);
    if (n == 1) {
      chunk[0] = synth_frame(model, cs, cam, opt, base);
    } else {
      std::vector<std::thread> pool;
      for (int i = 0; i < n; ++i)
        pool.emplace_back(
            [&, i] { chunk[i] = synth_frame(model, cs, cam, opt, base + i); });
      for (std::thread& t : pool) t.join();
    }
    for (int i = 0; i < n; ++i) {
      std::string stem = frame_stem(dir, base + i);
      write_pfm(stem + ".depth.pfm", chunk[i].depth);
      write_pgm(stem + ".mask.pgm", chunk[i].mask);
      write_pfm(stem + ".corr.pfm", chunk[i].corr);
      gt.frames[base + i] = chunk[i].gt;
    }
  }
  write_gt((std::filesystem::path(dir) / "gt.json").string(), gt);
}

Observation load_observation(const std::string& dir, int frame, const PinholeCamera& cam,
                             const CorrSpace& cs) {
  std::string stem = frame_stem(dir, frame);
  DepthImage depth = read_pfm_gray(stem + ".depth.pfm");
  CorrImage corr = read_pfm_rgb(stem + ".corr.pfm");
  return Observation::build(depth, corr, cam, cs);
}

}  // namespace handfit
