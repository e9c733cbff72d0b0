#include <filesystem>
#include <iostream>
#include <string>

#include "handfit/config.hpp"
#include "handfit/model_builder.hpp"
#include "handfit/serialize.hpp"

// Regenerates the bundled assets: the procedural hand model and a config
// file holding every default. Usage: genassets [dir]
int main(int argc, char** argv) {
  try {
    std::string dir = argc > 1 ? argv[1] : "assets";
    std::filesystem::create_directories(dir);
    handfit::save_model(dir + "/simplehand.json", handfit::build_simple_hand());
    handfit::dump_json(dir + "/default_config.json", handfit::config_to_json(handfit::Config{}));
    std::cout << "wrote " << dir << "/simplehand.json and " << dir << "/default_config.json\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
