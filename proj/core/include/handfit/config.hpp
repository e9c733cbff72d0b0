#ifndef HANDFIT_CONFIG_HPP
#define HANDFIT_CONFIG_HPP

#include <json.hpp>
#include <stdexcept>
#include <string>

#include "handfit/camera.hpp"
#include "handfit/optimizer.hpp"
#include "handfit/uncertainty.hpp"

namespace handfit {

// bad config file contents (unknown key, wrong type); distinct from runtime
// failures so the CLI can report it as a usage error
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Config {
  PinholeCamera camera = default_camera();
  TrackerOptions tracker;
  UncertaintyParams uncertainty;
  double synth_amplitude = 0.2;
};

// Every key is optional and defaults to the built-in value; unknown keys are
// rejected (recursively) rather than ignored, so typos fail loudly.
Config config_from_json(const nlohmann::json& j);
Config load_config(const std::string& path);

// full round-trip: every known key with its current value
nlohmann::json config_to_json(const Config& c);

}  // namespace handfit

#endif
