#include "handfit/cli_commands.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "handfit/image_io.hpp"
#include "handfit/metrics.hpp"
#include "handfit/model_builder.hpp"
#include "handfit/optimizer.hpp"
#include "handfit/serialize.hpp"
#include "handfit/uncertainty.hpp"

namespace handfit {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

void log_event(bool enabled, const json& j) {
  if (enabled) std::cerr << j.dump() << "\n";
}

std::string frame_file(const std::string& dir, int frame, const char* suffix) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "frame_%04d", frame);
  return dir + "/" + buf + suffix;
}

json stats_json(const AngleStats& s) {
  json j{{"count", s.count}};
  if (s.count >= 2) {
    j["variance"] = s.variance;
    j["stddev"] = s.stddev;
    j["range"] = s.range;
  }
  return j;
}

std::string tol_key(double tol) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", tol);
  return buf;
}

}  // namespace

HandModel load_or_build_model(const std::string& path) {
  return path.empty() ? build_simple_hand() : load_model(path);
}

OccludeRect parse_rect(const std::string& s) {
  OccludeRect r;
  char tail;
  if (std::sscanf(s.c_str(), "%d,%d,%d,%d%c", &r.x, &r.y, &r.w, &r.h, &tail) != 4 || r.w < 0 ||
      r.h < 0)
    throw ConfigError("bad rectangle '" + s + "' (expected x,y,w,h)");
  return r;
}

HueCorruption parse_corruption(const std::string& s) {
  HueCorruption c;
  char tail;
  int n = std::sscanf(s.c_str(), "%d:%lf:%d:%d%c", &c.segment, &c.shift, &c.first, &c.last, &tail);
  if (n != 4) {
    c = HueCorruption{};
    n = std::sscanf(s.c_str(), "%d:%lf%c", &c.segment, &c.shift, &tail);
    if (n != 2) throw ConfigError("bad corruption '" + s + "' (expected segment:shift[:first:last])");
  }
  if (c.segment < 1 || c.segment > kNumSegments)
    throw ConfigError("corruption segment must be 1..20, got '" + s + "'");
  if (c.first > c.last) throw ConfigError("corruption frame range is empty in '" + s + "'");
  return c;
}

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

int cmd_synth(const Config& cfg, const SynthArgs& args) {
  HandModel model = load_or_build_model(args.model);
  CorrSpace cs = build_corr_space(model);

  SynthOptions opt;
  opt.script = args.script;
  opt.frames = args.frames;
  opt.seed = args.seed;
  opt.amplitude = args.amplitude < 0 ? cfg.synth_amplitude : args.amplitude;
  opt.depth_noise = args.depth_noise;
  opt.corr_noise = args.corr_noise;
  opt.occlude_fingers = args.occlude_fingers;
  opt.occlude_rects = args.occlude_rects;
  opt.corruptions = args.corruptions;

  write_synth_sequence(args.out, model, cs, cfg.camera, opt, args.jobs);
  log_event(args.log_json, {{"event", "synth"},
                            {"dir", args.out},
                            {"script", opt.script},
                            {"frames", opt.frames},
                            {"seed", opt.seed}});
  return 0;
}

// ---------------------------------------------------------------------------
// track
// ---------------------------------------------------------------------------

int cmd_track(const Config& cfg, const TrackArgs& args) {
  HandModel model = load_or_build_model(args.model);

  // the sequence's own calibration wins when it is available
  PinholeCamera cam = cfg.camera;
  if (fs::exists(args.in + "/gt.json")) cam = read_gt(args.in + "/gt.json").camera;

  TrackerOptions topt = cfg.tracker;
  std::ofstream energy_log;
  int cur_frame = 0;
  if (!args.dump_energy.empty()) {
    energy_log.open(args.dump_energy);
    if (!energy_log) throw std::runtime_error("cannot write " + args.dump_energy);
    topt.refine.on_accept = [&](int iter, const EnergyBreakdown& bd) {
      energy_log << json{{"frame", cur_frame}, {"iter", iter},       {"total", bd.total},
                         {"e3d", bd.e3d},      {"e2d", bd.e2d},      {"e_shape", bd.e_shape},
                         {"e_pose", bd.e_pose}, {"e_temp", bd.e_temp}, {"lambda", bd.lambda}}
                        .dump()
                 << "\n";
    };
  }

  Tracker tracker(model, topt);
  if (!args.ply_dir.empty()) fs::create_directories(args.ply_dir);

  FitsFile fits;
  fits.camera = cam;
  std::vector<UncertaintyReport> reports;

  for (cur_frame = 0; fs::exists(frame_file(args.in, cur_frame, ".depth.pfm")); ++cur_frame) {
    Observation obs = load_observation(args.in, cur_frame, cam, tracker.corr_space());
    FrameResult r = tracker.step(obs);
    UncertaintyReport rep = assess_uncertainty(model, tracker.corr_space(), obs, r.params,
                                               r.matches, cfg.uncertainty);
    fits.frames.push_back({r.params, r.energy, r.iterations, r.lost, r.cold});
    reports.push_back(rep);

    if (!args.ply_dir.empty()) {
      PosedHand posed = pose_hand(model, r.params);
      Eigen::VectorXf u = vertex_uncertainty(tracker.corr_space(), rep);
      write_ply(frame_file(args.ply_dir, cur_frame, ".ply"), posed.vertices, model.triangles,
                std::vector<float>(u.data(), u.data() + u.size()));
    }
    log_event(args.log_json, {{"event", "frame"},
                              {"frame", cur_frame},
                              {"lost", r.lost},
                              {"cold", r.cold},
                              {"iterations", r.iterations},
                              {"e3d", r.energy.e3d},
                              {"pairs", r.energy.pairs}});
  }
  if (fits.frames.empty()) throw std::runtime_error("no frames found under " + args.in);

  write_fits(args.fits.empty() ? args.in + "/fits.json" : args.fits, fits);
  write_unc(args.unc.empty() ? args.in + "/unc.json" : args.unc, reports);
  return 0;
}

// ---------------------------------------------------------------------------
// assess
// ---------------------------------------------------------------------------

int cmd_assess(const AssessArgs& args) {
  HandModel model = load_or_build_model(args.model);
  FitsFile fits = read_fits(args.in);
  std::vector<UncertaintyReport> reports = read_unc(args.reports);
  if (fits.frames.size() != reports.size())
    throw std::runtime_error("fit and report frame counts differ");

  auto valid = filter_by_uncertainty(reports, args.window);

  std::ofstream csv(args.out);
  if (!csv) throw std::runtime_error("cannot write " + args.out);
  csv << "frame,finger,angle_deg,valid\n";

  std::array<std::vector<double>, kNumFingers> all, kept;
  for (size_t k = 0; k < fits.frames.size(); ++k) {
    auto angles = abduction_angles(model, fits.frames[k].params, args.mirrored);
    for (int f = 0; f < kNumFingers; ++f) {
      char row[96];
      std::snprintf(row, sizeof(row), "%zu,%s,%.6f,%d\n", k, finger_name(f), angles[f],
                    valid[k][f] ? 1 : 0);
      csv << row;
      all[f].push_back(angles[f]);
      if (valid[k][f]) kept[f].push_back(angles[f]);
    }
  }

  json report{{"window", args.window}, {"fingers", json::object()}};
  for (int f = 0; f < kNumFingers; ++f)
    report["fingers"][finger_name(f)] = {{"unfiltered", stats_json(angle_stats(all[f]))},
                                         {"filtered", stats_json(angle_stats(kept[f]))}};
  std::cout << report.dump(2) << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

int cmd_eval(const EvalArgs& args) {
  HandModel model = load_or_build_model(args.model);
  FitsFile pred = read_fits(args.pred);
  GtFile gt = read_gt(args.gt);
  if (pred.frames.size() != gt.frames.size())
    throw std::runtime_error("prediction and ground truth frame counts differ");
  const int n = int(pred.frames.size());
  if (n == 0) throw std::runtime_error("no frames to evaluate");

  std::vector<Eigen::MatrixXd> pj(n), gj(n);
  auto pose_range = [&](int lo, int hi) {
    for (int k = lo; k < hi; ++k) {
      pj[k] = pose_hand(model, pred.frames[k].params).joints;
      gj[k] = pose_hand(model, gt.frames[k]).joints;
    }
  };
  int jobs = std::max(1, args.jobs);
  if (jobs == 1) {
    pose_range(0, n);
  } else {
    std::vector<std::thread> pool;
    int chunk = (n + jobs - 1) / jobs;
    for (int j = 0; j < jobs; ++j)
      pool.emplace_back(pose_range, j * chunk, std::min(n, (j + 1) * chunk));
    for (auto& t : pool) t.join();
  }

  Eigen::MatrixXd all_p(n * kNumJoints, 3), all_g(n * kNumJoints, 3);
  json per_frame = json::array();
  for (int k = 0; k < n; ++k) {
    per_frame.push_back(mepe_mm(pj[k], gj[k]));
    all_p.middleRows(k * kNumJoints, kNumJoints) = pj[k];
    all_g.middleRows(k * kNumJoints, kNumJoints) = gj[k];
  }

  json out{{"frames", n}, {"mepe_mm", mepe_mm(all_p, all_g)}, {"mepe_mm_per_frame", per_frame}};
  json pcks = json::object();
  for (double tol : args.pck_tols) pcks[tol_key(tol)] = pck(all_p, all_g, tol);
  out["pck"] = pcks;
  std::cout << out.dump(2) << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// calibrate-uncertainty
// ---------------------------------------------------------------------------

int cmd_calibrate(const Config& cfg, const CalibArgs& args) {
  HandModel model = load_or_build_model(args.model);
  CalibrationResult r = calibrate_uncertainty(model, args.seed, args.probe_frames);

  json out{{"eps_2d", r.params.eps_2d},
           {"eps_3d", r.params.eps_3d},
           {"tau_v", r.params.tau_v},
           {"clean_2d_high", r.clean_2d_high},
           {"corrupt_2d_low", r.corrupt_2d_low},
           {"clean_3d_high", r.clean_3d_high},
           {"corrupt_3d_low", r.corrupt_3d_low}};
  std::cout << out.dump(2) << "\n";

  if (!args.out.empty()) {
    Config tuned = cfg;
    tuned.uncertainty = r.params;
    dump_json(args.out, config_to_json(tuned));
  }
  return 0;
}

}  // namespace handfit
