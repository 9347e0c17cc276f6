#pragma once

#include <cstdint>
#include <vector>

#include "racer/image.hpp"
#include "racer/sim.hpp"
#include "racer/vision.hpp"

namespace racer::harness {

// Descriptor used for cone/background discrimination: orientation histograms
// over the value channel of the patch.
std::vector<double> conePatchDescriptor(const ImagePatch& patch);

struct ClassifierBundle {
  LinearSvmModel model;
  double train_accuracy = 0.0;
};

// Train the cone/background discriminator on freshly rendered synthetic
// patches (colors and ranges cycled deterministically from the seed).
ClassifierBundle trainConeClassifier(const CameraConfig& camera, int positives, int negatives,
                                     int epochs, std::uint64_t seed);

}  // namespace racer::harness
