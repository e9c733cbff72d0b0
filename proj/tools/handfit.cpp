#include <CLI11.hpp>
#include <iostream>
#include <string>
#include <vector>

#include "handfit/cli_commands.hpp"

using namespace handfit;

int main(int argc, char** argv) {
  CLI::App app{"hand pose and shape fitting on depth + correspondence frames"};
  app.require_subcommand(1);

  // synth ------------------------------------------------------------------
  SynthArgs sa;
  std::string synth_config;
  std::vector<std::string> rect_flags, corrupt_flags;
  CLI::App* synth = app.add_subcommand("synth", "render a scripted ground-truth sequence");
  synth->add_option("--out", sa.out, "output directory")->required();
  synth->add_option("--script", sa.script,
                    "abduction_adduction, hyperextension or ball_rotation");
  synth->add_option("--frames", sa.frames, "frame count");
  synth->add_option("--seed", sa.seed, "noise seed");
  synth->add_option("--amplitude", sa.amplitude, "peak joint excursion (radians)");
  synth->add_option("--depth-noise", sa.depth_noise, "gaussian depth noise sigma (meters)");
  synth->add_option("--corr-noise", sa.corr_noise, "gaussian correspondence noise sigma");
  synth->add_option("--occlude-finger", sa.occlude_fingers, "blank this finger's pixels")
      ->take_all();
  synth->add_option("--occlude-rect", rect_flags, "blank a pixel rectangle x,y,w,h")->take_all();
  synth->add_option("--corrupt", corrupt_flags,
                    "shift one segment's hue: segment:shift[:first:last]")
      ->take_all();
  synth->add_option("--jobs", sa.jobs, "render threads");
  synth->add_option("--model", sa.model, "model json (default: built-in hand)");
  synth->add_option("--config", synth_config, "config json");
  synth->add_flag("--log-json", sa.log_json, "one json progress line per event on stderr");

  // track ------------------------------------------------------------------
  TrackArgs ta;
  std::string track_config;
  CLI::App* track = app.add_subcommand("track", "fit every frame of a sequence");
  track->add_option("--in", ta.in, "sequence directory")->required();
  track->add_option("--fits", ta.fits, "output fits json (default <in>/fits.json)");
  track->add_option("--unc", ta.unc, "output trust reports (default <in>/unc.json)");
  track->add_option("--ply-dir", ta.ply_dir, "write a colored mesh per frame");
  track->add_option("--dump-energy", ta.dump_energy, "per-iteration energy trace (jsonl)");
  track->add_option("--model", ta.model, "model json (default: built-in hand)");
  track->add_option("--config", track_config, "config json");
  track->add_flag("--log-json", ta.log_json, "one json progress line per frame on stderr");
  double t_d = 0, t_n = 0, t_3d = 0;
  int pixel_stride = 0;
  CLI::Option* opt_td = track->add_option("--t-d", t_d, "depth gate around the hand median (m)");
  CLI::Option* opt_tn = track->add_option("--t-n", t_n, "normal-to-view-ray gate (radians)");
  CLI::Option* opt_t3 = track->add_option("--t-3d", t_3d, "pair distance gate once posed (m)");
  CLI::Option* opt_ps = track->add_option("--pixel-stride", pixel_stride, "sample every nth pixel");

  // assess -----------------------------------------------------------------
  AssessArgs aa;
  CLI::App* assess = app.add_subcommand("assess", "abduction trace with trust filtering");
  assess->add_option("--in", aa.in, "fits json")->required();
  assess->add_option("--reports", aa.reports, "trust reports json")->required();
  assess->add_option("--out", aa.out, "trace csv")->required();
  assess->add_option("--window", aa.window, "consecutive flagged frames that drop a finger");
  assess->add_flag("--mirrored", aa.mirrored, "fits come from a mirrored (left) hand");
  assess->add_option("--model", aa.model, "model json (default: built-in hand)");
  assess->add_flag("--log-json", aa.log_json, "json progress lines on stderr");

  // eval -------------------------------------------------------------------
  EvalArgs ea;
  CLI::App* eval = app.add_subcommand("eval", "joint error metrics against ground truth");
  eval->add_option("--pred", ea.pred, "fits json")->required();
  eval->add_option("--gt", ea.gt, "ground truth json")->required();
  eval->add_option("--pck", ea.pck_tols, "pck tolerances in mm")->delimiter(',');
  eval->add_option("--jobs", ea.jobs, "pose evaluation threads");
  eval->add_option("--model", ea.model, "model json (default: built-in hand)");
  eval->add_flag("--log-json", ea.log_json, "json progress lines on stderr");

  // calibrate-uncertainty ----------------------------------------------------
  CalibArgs ca;
  std::string calib_config;
  CLI::App* calib =
      app.add_subcommand("calibrate-uncertainty", "tune the trust thresholds on probe frames");
  calib->add_option("--seed", ca.seed, "probe noise seed");
  calib->add_option("--probe-frames", ca.probe_frames, "probe frames per condition");
  calib->add_option("--out", ca.out, "write a config json with the tuned thresholds");
  calib->add_option("--model", ca.model, "model json (default: built-in hand)");
  calib->add_option("--config", calib_config, "config json the output is based on");
  calib->add_flag("--log-json", ca.log_json, "json progress lines on stderr");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*synth) {
      Config cfg = synth_config.empty() ? Config{} : load_config(synth_config);
      for (const auto& s : rect_flags) sa.occlude_rects.push_back(parse_rect(s));
      for (const auto& s : corrupt_flags) sa.corruptions.push_back(parse_corruption(s));
      return cmd_synth(cfg, sa);
    }
    if (*track) {
      Config cfg = track_config.empty() ? Config{} : load_config(track_config);
      if (*opt_td) cfg.tracker.match.t_d = t_d;
      if (*opt_tn) cfg.tracker.match.t_n = t_n;
      if (*opt_t3) cfg.tracker.match.t_3d = t_3d;
      if (*opt_ps) cfg.tracker.match.pixel_stride = pixel_stride;
      return cmd_track(cfg, ta);
    }
    if (*assess) return cmd_assess(aa);
    if (*eval) return cmd_eval(ea);
    Config cfg = calib_config.empty() ? Config{} : load_config(calib_config);
    return cmd_calibrate(cfg, ca);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
