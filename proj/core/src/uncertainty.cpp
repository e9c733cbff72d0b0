#include "handfit/uncertainty.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "handfit/raster.hpp"
#include "handfit/synth.hpp"

namespace handfit {

namespace {

// depth of a pair's anchor point under the fitted pose
double anchor_z(const PosedHand& posed, const HandModel& model, const CorrPair& pr) {
  if (pr.tri < 0) return posed.vertices(pr.vertex, 2);
  double z = 0;
  for (int k = 0; k < 3; ++k) z += pr.bary[k] * posed.vertices(model.triangles(pr.tri, k), 2);
  return z;
}

}  // namespace

const char* to_string(SegmentStatus s) {
  switch (s) {
    case SegmentStatus::kUnobserved:
      return "unobserved";
    case SegmentStatus::kErrorProne2d:
      return "error-prone-2d";
    case SegmentStatus::kErrorProne3d:
      return "error-prone-3d";
    case SegmentStatus::kObservedOk:
      break;
  }
  return "observed-ok";
}

SegmentStatus segment_status_from_string(const std::string& s) {
  if (s == "observed-ok") return SegmentStatus::kObservedOk;
  if (s == "unobserved") return SegmentStatus::kUnobserved;
  if (s == "error-prone-2d") return SegmentStatus::kErrorProne2d;
  if (s == "error-prone-3d") return SegmentStatus::kErrorProne3d;
  throw std::runtime_error("unknown segment status '" + s + "'");
}

UncertaintyReport assess_uncertainty(const HandModel& model, const CorrSpace& cs,
                                     const Observation& obs, const HandParams& params,
                                     const Matches& matches, const UncertaintyParams& up) {
  PosedHand posed = pose_hand(model, params);
  RasterBundle rb = rasterize(posed.vertices, model.triangles, cs.vertex_coords, obs.cam);

  // which vertices got matched, and how far off in depth their points sit
  std::vector<char> matched(model.num_vertices(), 0);
  std::vector<double> zerr(model.num_vertices(), 0);
  std::vector<int> zcnt(model.num_vertices(), 0);
  for (const CorrPair& pr : matches) {
    matched[pr.vertex] = 1;
    zerr[pr.vertex] += std::abs(pr.p.z() - anchor_z(posed, model, pr));
    zcnt[pr.vertex] += 1;
  }

  // observed pixels per segment, and how many disagree with the re-rendered
  // correspondence image
  std::array<int, kNumSegments + 1> pix_total{}, pix_err{};
  for (size_t i = 0; i < obs.labels.size(); ++i) {
    int lab = obs.labels.data[i];
    if (lab == 0) continue;
    ++pix_total[lab];
    if (rb.mask.data[i] &&
        (obs.corr.data[i] - rb.corr.data[i]).cast<double>().squaredNorm() > up.eps_2d)
      ++pix_err[lab];
  }

  UncertaintyReport rep;
  for (int seg = 1; seg <= kNumSegments; ++seg) {
    SegmentReport& r = rep.segments[seg - 1];
    r.segment = seg;
    const std::vector<int>& verts = cs.segment_verts[seg];
    if (verts.empty()) throw std::runtime_error("segment holds no vertices");

    int vis = 0, bad = 0;
    for (int v : verts) {
      if (matched[v]) ++vis;
      if (zcnt[v] > 0 && zerr[v] / zcnt[v] > up.eps_3d) ++bad;
    }
    r.visibility = double(vis) / double(verts.size());
    r.r3d = double(bad) / double(verts.size());
    r.r2d = pix_total[seg] ? double(pix_err[seg]) / double(pix_total[seg]) : 0.0;

    if (r.visibility < up.tau_v) {
      r.status = SegmentStatus::kUnobserved;
    } else if (r.r2d > up.tau_2d) {
      r.status = SegmentStatus::kErrorProne2d;
    } else if (r.r3d > up.tau_3d) {
      r.status = SegmentStatus::kErrorProne3d;
    } else {
      r.status = SegmentStatus::kObservedOk;
    }
    r.u = r.status == SegmentStatus::kObservedOk ? 0 : 1;
  }
  return rep;
}

Eigen::VectorXf vertex_uncertainty(const CorrSpace& cs, const UncertaintyReport& rep) {
  Eigen::VectorXf u(cs.vertex_label.size());
  for (size_t v = 0; v < cs.vertex_label.size(); ++v)
    u[int(v)] = float(rep.segments[cs.vertex_label[v] - 1].u);
  return u;
}

// ---------------------------------------------------------------------------
// threshold calibration
// ---------------------------------------------------------------------------

namespace {

double quantile(std::vector<double>& v, double q) {
  if (v.empty()) throw std::runtime_error("calibration: empty residual population");
  size_t k = size_t(q * double(v.size() - 1) + 0.5);
  std::nth_element(v.begin(), v.begin() + k, v.end());
  return v[k];
}

}  // namespace

CalibrationResult calibrate_uncertainty(const HandModel& model, std::uint64_t seed,
                                        int probe_frames) {
  if (probe_frames < 1) throw std::runtime_error("calibration needs at least one probe frame");
  CorrSpace cs = build_corr_space(model);
  SegmentIndex index(cs);
  PinholeCamera cam = default_camera();
  MatchParams mp;

  // mild sensor noise so the clean envelope is not just rasterizer exactness
  SynthOptions clean;
  clean.script = "abduction_adduction";
  clean.frames = probe_frames;
  clean.seed = seed;
  clean.amplitude = 0.15;
  clean.depth_noise = 0.002;
  clean.corr_noise = 0.005;

  const double kShift = 0.06;  // the in-band hue slip the thresholds must catch

  std::vector<double> clean_2d, clean_3d, corrupt_2d, corrupt_3d;
  double vis_clean_min = 1.0, vis_occluded_max = 0.0;

  for (int k = 0; k < probe_frames; ++k) {
    int probe_finger = k % kNumFingers;
    int probe_segment = finger_segment(probe_finger, 0);

    // clean pass: residuals under honest matching at the true pose
    SynthFrame sf = synth_frame(model, cs, cam, clean, k);
    Observation obs = Observation::build(sf.depth, sf.corr, cam, cs);
    PosedHand posed = pose_hand(model, sf.gt);
    Matches m = match(obs, index, mp, &posed);
    refine_anchors(m, model, cs, obs.corr, mp.t_corr);
    RasterBundle rb = rasterize(posed.vertices, model.triangles, cs.vertex_coords, cam);

    std::vector<double> zerr(model.num_vertices(), 0);
    std::vector<int> zcnt(model.num_vertices(), 0);
    for (const CorrPair& pr : m) {
      zerr[pr.vertex] += std::abs(pr.p.z() - anchor_z(posed, model, pr));
      zcnt[pr.vertex] += 1;
    }
    for (int v = 0; v < model.num_vertices(); ++v)
      if (zcnt[v]) clean_3d.push_back(zerr[v] / zcnt[v]);
    for (size_t i = 0; i < obs.labels.size(); ++i)
      if (obs.labels.data[i] && rb.mask.data[i])
        clean_2d.push_back((obs.corr.data[i] - rb.corr.data[i]).cast<double>().squaredNorm());
    for (int seg = 1; seg <= kNumSegments; ++seg) {
      int vis = 0;
      for (int v : cs.segment_verts[seg])
        if (zcnt[v]) ++vis;
      vis_clean_min = std::min(vis_clean_min, double(vis) / cs.segment_verts[seg].size());
    }

    // corrupted pass: one proximal segment slips in hue
    SynthOptions corrupt = clean;
    corrupt.corruptions.push_back({probe_segment, kShift, 0, clean.frames});
    SynthFrame sfc = synth_frame(model, cs, cam, corrupt, k);
    Observation obsc = Observation::build(sfc.depth, sfc.corr, cam, cs);
    Matches mc = match(obsc, index, mp, &posed);
    refine_anchors(mc, model, cs, obsc.corr, mp.t_corr);

    for (size_t i = 0; i < obsc.labels.size(); ++i)
      if (obsc.labels.data[i] == probe_segment && rb.mask.data[i])
        corrupt_2d.push_back((obsc.corr.data[i] - rb.corr.data[i]).cast<double>().squaredNorm());

    std::vector<double> zerrc(model.num_vertices(), 0);
    std::vector<int> zcntc(model.num_vertices(), 0);
    for (const CorrPair& pr : mc) {
      zerrc[pr.vertex] += std::abs(pr.p.z() - anchor_z(posed, model, pr));
      zcntc[pr.vertex] += 1;
    }
    for (int v : cs.segment_verts[probe_segment])
      if (zcntc[v]) corrupt_3d.push_back(zerrc[v] / zcntc[v]);

    // occluded pass: how visible does a hidden finger still look
    SynthOptions occl = clean;
    occl.occlude_fingers.push_back(finger_name(probe_finger));
    SynthFrame sfo = synth_frame(model, cs, cam, occl, k);
    Observation obso = Observation::build(sfo.depth, sfo.corr, cam, cs);
    Matches mo = match(obso, index, mp, &posed);
    std::vector<char> seen(model.num_vertices(), 0);
    for (const CorrPair& pr : mo) seen[pr.vertex] = 1;
    for (int j = 0; j < 3; ++j) {
      int seg = finger_segment(probe_finger, j);
      int vis = 0;
      for (int v : cs.segment_verts[seg])
        if (seen[v]) ++vis;
      vis_occluded_max =
          std::max(vis_occluded_max, double(vis) / cs.segment_verts[seg].size());
    }
  }

  CalibrationResult out;
  out.clean_2d_high = quantile(clean_2d, 0.999);
  out.corrupt_2d_low = quantile(corrupt_2d, 0.5);
  out.clean_3d_high = quantile(clean_3d, 0.999);
  out.corrupt_3d_low = quantile(corrupt_3d, 0.5);

  if (out.corrupt_2d_low <= out.clean_2d_high)
    throw std::runtime_error("calibration: correspondence residuals do not separate");
  if (out.corrupt_3d_low <= out.clean_3d_high)
    throw std::runtime_error("calibration: depth residuals do not separate");

  out.params.eps_2d = std::sqrt(std::max(out.clean_2d_high, 1e-8) * out.corrupt_2d_low);
  out.params.eps_3d = std::sqrt(std::max(out.clean_3d_high, 1e-8) * out.corrupt_3d_low);
  if (vis_occluded_max >= out.params.tau_v || vis_clean_min <= out.params.tau_v)
    out.params.tau_v = 0.5 * (vis_occluded_max + vis_clean_min);
  return out;
}

}  // namespace handfit
