#include "handfit/config.hpp"

#include <fstream>

namespace handfit {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError("config: " + path + ": " + what);
}

template <typename T>
void take(json& j, const std::string& path, const char* key, T& out) {
  auto it = j.find(key);
  if (it == j.end()) return;
  try {
    out = it->get<T>();
  } catch (const json::exception&) {
    fail(path + "." + key, "wrong type");
  }
  j.erase(it);
}

// consumes j[key] as a sub-object, or an empty object when absent
json take_section(json& j, const std::string& path, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) return json::object();
  if (!it->is_object()) fail(path + "." + key, "expected an object");
  json sub = std::move(*it);
  j.erase(it);
  return sub;
}

void finish(const json& j, const std::string& path) {
  if (!j.empty()) fail(path, "unknown key '" + j.begin().key() + "'");
}

}  // namespace

Config config_from_json(const nlohmann::json& in) {
  if (!in.is_object()) throw ConfigError("config: expected a json object");
  json j = in;
  Config c;

  json cam = take_section(j, "", "camera");
  take(cam, "camera", "fx", c.camera.fx);
  take(cam, "camera", "fy", c.camera.fy);
  take(cam, "camera", "cx", c.camera.cx);
  take(cam, "camera", "cy", c.camera.cy);
  take(cam, "camera", "width", c.camera.width);
  take(cam, "camera", "height", c.camera.height);
  finish(cam, "camera");

  json mt = take_section(j, "", "matching");
  take(mt, "matching", "t_d", c.tracker.match.t_d);
  take(mt, "matching", "t_n", c.tracker.match.t_n);
  take(mt, "matching", "t_3d", c.tracker.match.t_3d);
  take(mt, "matching", "min_normal_dot", c.tracker.match.min_normal_dot);
  take(mt, "matching", "t_corr", c.tracker.match.t_corr);
  take(mt, "matching", "pixel_stride", c.tracker.match.pixel_stride);
  finish(mt, "matching");

  json en = take_section(j, "", "energy");
  take(en, "energy", "w_3d", c.tracker.weights.w_3d);
  take(en, "energy", "w_2d", c.tracker.weights.w_2d);
  take(en, "energy", "w_shape", c.tracker.weights.w_shape);
  take(en, "energy", "w_pose", c.tracker.weights.w_pose);
  take(en, "energy", "w_temp", c.tracker.weights.w_temp);
  take(en, "energy", "lambda_pt", c.tracker.weights.lambda_pt);
  take(en, "energy", "raster_scale", c.tracker.weights.raster_scale);
  take(en, "energy", "fd_step", c.tracker.weights.fd_step);
  take(en, "energy", "grad_2d", c.tracker.weights.grad_2d);
  finish(en, "energy");

  json op = take_section(j, "", "optimizer");
  json li = take_section(op, "optimizer", "init");
  take(li, "optimizer.init", "max_iters", c.tracker.init.max_iters);
  take(li, "optimizer.init", "history", c.tracker.init.history);
  take(li, "optimizer.init", "grad_tol", c.tracker.init.grad_tol);
  take(li, "optimizer.init", "armijo_c1", c.tracker.init.armijo_c1);
  take(li, "optimizer.init", "max_backtracks", c.tracker.init.max_backtracks);
  finish(li, "optimizer.init");
  json rf = take_section(op, "optimizer", "refine");
  take(rf, "optimizer.refine", "max_iters", c.tracker.refine.max_iters);
  take(rf, "optimizer.refine", "lr", c.tracker.refine.lr);
  take(rf, "optimizer.refine", "stop_dx", c.tracker.refine.stop_dx);
  take(rf, "optimizer.refine", "rematch_every", c.tracker.refine.rematch_every);
  take(rf, "optimizer.refine", "patience", c.tracker.refine.patience);
  take(rf, "optimizer.refine", "beta1", c.tracker.refine.beta1);
  take(rf, "optimizer.refine", "beta2", c.tracker.refine.beta2);
  take(rf, "optimizer.refine", "eps", c.tracker.refine.eps);
  finish(rf, "optimizer.refine");
  take(op, "optimizer", "pca_components", c.tracker.pca_components);
  take(op, "optimizer", "corpus_size", c.tracker.corpus_size);
  take(op, "optimizer", "corpus_seed", c.tracker.corpus_seed);
  take(op, "optimizer", "lost_energy_factor", c.tracker.lost_energy_factor);
  take(op, "optimizer", "lost_energy_abs", c.tracker.lost_energy_abs);
  take(op, "optimizer", "lost_window", c.tracker.lost_window);
  take(op, "optimizer", "lost_jaccard", c.tracker.lost_jaccard);
  take(op, "optimizer", "lost_min_pairs", c.tracker.lost_min_pairs);
  finish(op, "optimizer");

  json un = take_section(j, "", "uncertainty");
  take(un, "uncertainty", "tau_v", c.uncertainty.tau_v);
  take(un, "uncertainty", "tau_2d", c.uncertainty.tau_2d);
  take(un, "uncertainty", "tau_3d", c.uncertainty.tau_3d);
  take(un, "uncertainty", "eps_2d", c.uncertainty.eps_2d);
  take(un, "uncertainty", "eps_3d", c.uncertainty.eps_3d);
  finish(un, "uncertainty");

  json sy = take_section(j, "", "synth");
  take(sy, "synth", "amplitude", c.synth_amplitude);
  finish(sy, "synth");

  finish(j, "top level");
  return c;
}

Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config: " + path + ": " + e.what());
  }
  return config_from_json(j);
}

nlohmann::json config_to_json(const Config& c) {
  json j;
  j["camera"] = {{"fx", c.camera.fx},       {"fy", c.camera.fy},
                 {"cx", c.camera.cx},       {"cy", c.camera.cy},
                 {"width", c.camera.width}, {"height", c.camera.height}};
  j["matching"] = {{"t_d", c.tracker.match.t_d},
                   {"t_n", c.tracker.match.t_n},
                   {"t_3d", c.tracker.match.t_3d},
                   {"min_normal_dot", c.tracker.match.min_normal_dot},
                   {"t_corr", c.tracker.match.t_corr},
                   {"pixel_stride", c.tracker.match.pixel_stride}};
  j["energy"] = {{"w_3d", c.tracker.weights.w_3d},
                 {"w_2d", c.tracker.weights.w_2d},
                 {"w_shape", c.tracker.weights.w_shape},
                 {"w_pose", c.tracker.weights.w_pose},
                 {"w_temp", c.tracker.weights.w_temp},
                 {"lambda_pt", c.tracker.weights.lambda_pt},
                 {"raster_scale", c.tracker.weights.raster_scale},
                 {"fd_step", c.tracker.weights.fd_step},
                 {"grad_2d", c.tracker.weights.grad_2d}};
  j["optimizer"] = {{"init",
                     {{"max_iters", c.tracker.init.max_iters},
                      {"history", c.tracker.init.history},
                      {"grad_tol", c.tracker.init.grad_tol},
                      {"armijo_c1", c.tracker.init.armijo_c1},
                      {"max_backtracks", c.tracker.init.max_backtracks}}},
                    {"refine",
                     {{"max_iters", c.tracker.refine.max_iters},
                      {"lr", c.tracker.refine.lr},
                      {"stop_dx", c.tracker.refine.stop_dx},
                      {"rematch_every", c.tracker.refine.rematch_every},
                      {"patience", c.tracker.refine.patience},
                      {"beta1", c.tracker.refine.beta1},
                      {"beta2", c.tracker.refine.beta2},
                      {"eps", c.tracker.refine.eps}}},
                    {"pca_components", c.tracker.pca_components},
                    {"corpus_size", c.tracker.corpus_size},
                    {"corpus_seed", c.tracker.corpus_seed},
                    {"lost_energy_factor", c.tracker.lost_energy_factor},
                    {"lost_energy_abs", c.tracker.lost_energy_abs},
                    {"lost_window", c.tracker.lost_window},
                    {"lost_jaccard", c.tracker.lost_jaccard},
                    {"lost_min_pairs", c.tracker.lost_min_pairs}};
  j["uncertainty"] = {{"tau_v", c.uncertainty.tau_v},
                      {"tau_2d", c.uncertainty.tau_2d},
                      {"tau_3d", c.uncertainty.tau_3d},
                      {"eps_2d", c.uncertainty.eps_2d},
                      {"eps_3d", c.uncertainty.eps_3d}};
  j["synth"] = {{"amplitude", c.synth_amplitude}};
  return j;
}

}  // namespace handfit
