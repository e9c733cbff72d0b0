#include "handfit/serialize.hpp"

#include <fstream>
#include <stdexcept>

namespace handfit {

using json = nlohmann::json;

namespace {

json vec_to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Eigen::VectorXd vec_from_json(const json& j, int expected, const char* what) {
  if (!j.is_array() || int(j.size()) != expected)
    throw std::runtime_error(std::string(what) + ": expected an array of " +
                             std::to_string(expected) + " numbers");
  Eigen::VectorXd v(expected);
  for (int i = 0; i < expected; ++i) v[i] = j[i].get<double>();
  return v;
}

}  // namespace

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
  return j;
}

void dump_json(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << "\n";
}

json to_json(const HandParams& p) {
  json j;
  j["rot"] = vec_to_json(p.rot);
  j["trans"] = vec_to_json(p.trans);
  j["theta"] = vec_to_json(p.theta);
  j["beta"] = vec_to_json(p.beta);
  return j;
}

HandParams params_from_json(const json& j) {
  HandParams p;
  p.rot = vec_from_json(j.at("rot"), 3, "rot");
  p.trans = vec_from_json(j.at("trans"), 3, "trans");
  p.theta = vec_from_json(j.at("theta"), kNumPoseDof, "theta");
  p.beta = vec_from_json(j.at("beta"), kNumShape, "beta");
  return p;
}

json to_json(const PinholeCamera& cam) {
  json j;
  j["fx"] = cam.fx;
  j["fy"] = cam.fy;
  j["cx"] = cam.cx;
  j["cy"] = cam.cy;
  j["width"] = cam.width;
  j["height"] = cam.height;
  return j;
}

PinholeCamera camera_from_json(const json& j) {
  PinholeCamera cam;
  cam.fx = j.at("fx").get<double>();
  cam.fy = j.at("fy").get<double>();
  cam.cx = j.at("cx").get<double>();
  cam.cy = j.at("cy").get<double>();
  cam.width = j.at("width").get<int>();
  cam.height = j.at("height").get<int>();
  return cam;
}

json to_json(const EnergyBreakdown& bd) {
  json j;
  j["total"] = bd.total;
  j["e3d"] = bd.e3d;
  j["e2d"] = bd.e2d;
  j["e_shape"] = bd.e_shape;
  j["e_pose"] = bd.e_pose;
  j["e_temp"] = bd.e_temp;
  j["lambda"] = bd.lambda;
  j["jaccard"] = bd.jaccard;
  j["pairs"] = bd.pairs;
  return j;
}

// ---------------------------------------------------------------------------
// fits.json
// ---------------------------------------------------------------------------

void write_fits(const std::string& path, const FitsFile& fits) {
  json j;
  j["schema_version"] = 1;
  j["camera"] = to_json(fits.camera);
  json frames = json::array();
  for (size_t k = 0; k < fits.frames.size(); ++k) {
    const FitFrame& f = fits.frames[k];
    json jf;
    jf["frame"] = int(k);
    jf["lost"] = f.lost;
    jf["cold"] = f.cold;
    jf["iterations"] = f.iterations;
    jf["params"] = to_json(f.params);
    jf["energy"] = to_json(f.energy);
    frames.push_back(jf);
  }
  j["frames"] = frames;
  dump_json(path, j);
}

FitsFile read_fits(const std::string& path) {
  json j = load_json(path);
  FitsFile fits;
  fits.camera = camera_from_json(j.at("camera"));
  for (const json& jf : j.at("frames")) {
    FitFrame f;
    f.params = params_from_json(jf.at("params"));
    f.lost = jf.at("lost").get<bool>();
    f.cold = jf.value("cold", false);
    f.iterations = jf.value("iterations", 0);
    fits.frames.push_back(f);
  }
  return fits;
}

// ---------------------------------------------------------------------------
// gt.json
// ---------------------------------------------------------------------------

void write_gt(const std::string& path, const GtFile& gt) {
  json j;
  j["schema_version"] = 1;
  j["camera"] = to_json(gt.camera);
  j["script"] = gt.script;
  j["seed"] = gt.seed;
  j["amplitude"] = gt.amplitude;
  json frames = json::array();
  for (const HandParams& p : gt.frames) frames.push_back(to_json(p));
  j["frames"] = frames;
  dump_json(path, j);
}

GtFile read_gt(const std::string& path) {
  json j = load_json(path);
  GtFile gt;
  gt.camera = camera_from_json(j.at("camera"));
  gt.script = j.at("script").get<std::string>();
  gt.seed = j.at("seed").get<std::uint64_t>();
  gt.amplitude = j.value("amplitude", 0.0);
  for (const json& jf : j.at("frames")) gt.frames.push_back(params_from_json(jf));
  return gt;
}

// ---------------------------------------------------------------------------
// unc.json
// ---------------------------------------------------------------------------

void write_unc(const std::string& path, const std::vector<UncertaintyReport>& frames) {
  json j;
  j["schema_version"] = 1;
  json jframes = json::array();
  for (size_t k = 0; k < frames.size(); ++k) {
    json jf;
    jf["frame"] = int(k);
    json segs = json::array();
    for (const SegmentReport& s : frames[k].segments) {
      json js;
      js["id"] = s.segment;
      js["u"] = s.u;
      js["reason"] = to_string(s.status);
      js["visibility"] = s.visibility;
      js["r2d"] = s.r2d;
      js["r3d"] = s.r3d;
      segs.push_back(js);
    }
    jf["segments"] = segs;
    jframes.push_back(jf);
  }
  j["frames"] = jframes;
  dump_json(path, j);
}

std::vector<UncertaintyReport> read_unc(const std::string& path) {
  json j = load_json(path);
  std::vector<UncertaintyReport> out;
  for (const json& jf : j.at("frames")) {
    UncertaintyReport rep;
    const json& segs = jf.at("segments");
    if (int(segs.size()) != kNumSegments)
      throw std::runtime_error(path + ": expected " + std::to_string(kNumSegments) +
                               " segments per frame");
    for (int i = 0; i < kNumSegments; ++i) {
      SegmentReport& s = rep.segments[i];
      s.segment = segs[i].at("id").get<int>();
      s.u = segs[i].at("u").get<int>();
      s.status = segment_status_from_string(segs[i].at("reason").get<std::string>());
      s.visibility = segs[i].at("visibility").get<double>();
      s.r2d = segs[i].at("r2d").get<double>();
      s.r3d = segs[i].at("r3d").get<double>();
    }
    out.push_back(rep);
  }
  return out;
}

}  // namespace handfit
