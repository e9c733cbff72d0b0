#ifndef HANDFIT_SYNTH_HPP
#define HANDFIT_SYNTH_HPP

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "handfit/camera.hpp"
#include "handfit/corr_space.hpp"
#include "handfit/hand_model.hpp"
#include "handfit/image.hpp"
#include "handfit/matching.hpp"

namespace handfit {

// Scripted ground-truth motions, all starting from a palm-to-camera pose at
// 0.45 m with the fingers pointing up:
// - abduction_adduction: the fingers fan apart and back together, three
//   periods over the sequence (frame 0 and frame n/3 coincide)
// - hyperextension: the knuckles bend backwards once and return, staying
//   within the joint limits
// - ball_rotation: a fixed half-curled grasp revolves once about the view axis
HandParams script_pose(const HandModel& model, const std::string& script, int frame, int total,
                       double amplitude);

struct OccludeRect {
  int x = 0, y = 0, w = 0, h = 0;
};

struct HueCorruption {
  int segment = 0;   // 1..20
  double shift = 0;  // added to the h channel, result clamped to [0,1]
  int first = 0;     // first and last affected frame, inclusive
  int last = std::numeric_limits<int>::max();
};

struct SynthOptions {
  std::string script = "abduction_adduction";
  int frames = 60;
  std::uint64_t seed = 0;
  double amplitude = 0.2;   // peak joint excursion, radians
  double depth_noise = 0;   // gaussian sigma on depth (meters), hand pixels only
  double corr_noise = 0;    // gaussian sigma per correspondence channel
  std::vector<std::string> occlude_fingers;
  std::vector<OccludeRect> occlude_rects;
  std::vector<HueCorruption> corruptions;
};

struct SynthFrame {
  HandParams gt;
  DepthImage depth;
  MaskImage mask;
  CorrImage corr;
};

// One rendered frame of the scripted sequence. Effects apply in a fixed
// order: hue corruption (selected on the clean rendered labels), sensor
// noise (stream derived from seed and frame only), occlusion last.
SynthFrame synth_frame(const HandModel& model, const CorrSpace& cs, const PinholeCamera& cam,
                       const SynthOptions& opt, int frame);

// Writes frame_%04d.depth.pfm / frame_%04d.mask.pgm / frame_%04d.corr.pfm
// plus gt.json under dir, creating it if needed. jobs > 1 renders frames in
// parallel; the files are identical either way.
void write_synth_sequence(const std::string& dir, const HandModel& model, const CorrSpace& cs,
                          const PinholeCamera& cam, const SynthOptions& opt, int jobs = 1);

// Counterpart of write_synth_sequence: loads frame k of a sequence directory.
Observation load_observation(const std::string& dir, int frame, const PinholeCamera& cam,
                             const CorrSpace& cs);

// deterministic per-(seed, frame) gaussian stream
struct NoiseStream {
  explicit NoiseStream(std::uint64_t seed, std::uint64_t frame = 0);
  double uniform();  // (0,1)
  double gauss();    // standard normal, Box-Muller

 private:
  std::uint64_t state_;
};

}  // namespace handfit

#endif
