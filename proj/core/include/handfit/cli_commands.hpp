#ifndef HANDFIT_CLI_COMMANDS_HPP
#define HANDFIT_CLI_COMMANDS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "handfit/config.hpp"
#include "handfit/synth.hpp"

namespace handfit {

// Subcommand bodies, separated from argument parsing so tests can drive them
// in-process. Every command writes byte-identical output for identical
// inputs. Failures are reported by throwing (ConfigError for bad usage,
// std::runtime_error otherwise); the frontend maps them to exit codes.

// the bundled procedural hand when path is empty, a model file otherwise
HandModel load_or_build_model(const std::string& path);

// "x,y,w,h" and "segment:shift[:first:last]" flag values
OccludeRect parse_rect(const std::string& s);
HueCorruption parse_corruption(const std::string& s);

struct SynthArgs {
  std::string model;  // empty = built-in hand
  std::string out;    // sequence directory
  std::string script = "abduction_adduction";
  int frames = 60;
  std::uint64_t seed = 0;
  double amplitude = -1;  // < 0: take the config value
  double depth_noise = 0;
  double corr_noise = 0;
  std::vector<std::string> occlude_fingers;
  std::vector<OccludeRect> occlude_rects;
  std::vector<HueCorruption> corruptions;
  int jobs = 1;
  bool log_json = false;
};
int cmd_synth(const Config& cfg, const SynthArgs& args);

struct TrackArgs {
  std::string model;
  std::string in;           // sequence directory
  std::string fits;         // default <in>/fits.json
  std::string unc;          // default <in>/unc.json
  std::string ply_dir;      // write fit_%04d.ply per frame when set
  std::string dump_energy;  // per-iteration energy trace (jsonl) when set
  bool log_json = false;
};
int cmd_track(const Config& cfg, const TrackArgs& args);

struct AssessArgs {
  std::string model;
  std::string in;       // fits.json
  std::string reports;  // unc.json
  std::string out;      // trace csv
  int window = 3;
  bool mirrored = false;
  bool log_json = false;
};
int cmd_assess(const AssessArgs& args);

struct EvalArgs {
  std::string model;
  std::string pred;  // fits.json
  std::string gt;    // gt.json
  std::vector<double> pck_tols = {15.0, 30.0};
  int jobs = 1;
  bool log_json = false;
};
int cmd_eval(const EvalArgs& args);

struct CalibArgs {
  std::string model;
  std::uint64_t seed = 1;
  int probe_frames = 6;
  std::string out;  // optional: write a full config with the tuned values
  bool log_json = false;
};
int cmd_calibrate(const Config& cfg, const CalibArgs& args);

}  // namespace handfit

#endif
