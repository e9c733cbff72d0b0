#ifndef HANDFIT_SERIALIZE_HPP
#define HANDFIT_SERIALIZE_HPP

#include <json.hpp>
#include <string>
#include <vector>

#include "handfit/camera.hpp"
#include "handfit/energy.hpp"
#include "handfit/hand_model.hpp"
#include "handfit/uncertainty.hpp"

namespace handfit {

// whole-file json helpers; errors name the offending path
nlohmann::json load_json(const std::string& path);
void dump_json(const std::string& path, const nlohmann::json& j);

// json fragments shared by the file formats below
nlohmann::json to_json(const HandParams& p);
HandParams params_from_json(const nlohmann::json& j);
nlohmann::json to_json(const PinholeCamera& cam);
PinholeCamera camera_from_json(const nlohmann::json& j);
nlohmann::json to_json(const EnergyBreakdown& bd);

// ---------------------------------------------------------------------------
// fits.json: per-frame fitted parameters and energy
// ---------------------------------------------------------------------------

struct FitFrame {
  HandParams params;
  EnergyBreakdown energy;
  int iterations = 0;
  bool lost = false;
  bool cold = false;
};

struct FitsFile {
  PinholeCamera camera;
  std::vector<FitFrame> frames;
};

void write_fits(const std::string& path, const FitsFile& fits);
FitsFile read_fits(const std::string& path);

// ---------------------------------------------------------------------------
// gt.json: scripted ground truth written next to synthesized frames
// ---------------------------------------------------------------------------

struct GtFile {
  PinholeCamera camera;
  std::string script;
  std::uint64_t seed = 0;
  double amplitude = 0;
  std::vector<HandParams> frames;
};

void write_gt(const std::string& path, const GtFile& gt);
GtFile read_gt(const std::string& path);

// ---------------------------------------------------------------------------
// unc.json: per-frame, per-segment trust reports
// ---------------------------------------------------------------------------

void write_unc(const std::string& path, const std::vector<UncertaintyReport>& frames);
std::vector<UncertaintyReport> read_unc(const std::string& path);

}  // namespace handfit

#endif
