#ifndef HANDFIT_MODEL_BUILDER_HPP
#define HANDFIT_MODEL_BUILDER_HPP

#include "handfit/hand_model.hpp"

namespace handfit {

// Procedural right hand used by the synthesizer, the tests, and the bundled
// asset: tapered capsule fingers off a trapezoid palm slab, fingers pointing
// roughly +z, palm facing -y, wrist at the origin. Skinning blends are
// centered exactly on the joint stations the correspondence space cuts at,
// so every vertex's dominant bone agrees with its segment label.
HandModel build_simple_hand();

}  // namespace handfit

#endif
