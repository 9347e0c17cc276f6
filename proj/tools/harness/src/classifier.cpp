#include "harness/classifier.hpp"

#include "racer/errors.hpp"
#include "racer/random.hpp"

namespace racer::harness {

std::vector<double> conePatchDescriptor(const ImagePatch& patch) {
  const ImagePatch gray = patch.mode == ImagePatch::Mode::Grayscale ? patch : patch.toGray();
  return hogFeatures(gray, HogConfig{});
}

ClassifierBundle trainConeClassifier(const CameraConfig& camera, int positives, int negatives,
                                     int epochs, std::uint64_t seed) {
  if (positives < 1 || negatives < 1) {
    throw InvalidInput("trainConeClassifier: need positive sample counts");
  }
  Rng rng(seed);
  const ConeColor colors[3] = {ConeColor::Red, ConeColor::Yellow, ConeColor::Blue};

  std::vector<std::vector<double>> pos, neg;
  pos.reserve(positives);
  neg.reserve(negatives);
  for (int i = 0; i < positives; ++i) {
    const double range = 2.0 + 14.0 * rng.uniform();
    pos.push_back(conePatchDescriptor(renderConePatch(colors[i % 3], range, camera, rng)));
  }
  for (int i = 0; i < negatives; ++i) {
    neg.push_back(conePatchDescriptor(renderNegativePatch(camera, rng)));
  }

  SvmTrainConfig train_cfg;
  train_cfg.epochs = epochs;
  const SvmTrainResult res = svmTrain(pos, neg, train_cfg, rng.next());

  ClassifierBundle bundle;
  bundle.model = res.model;
  bundle.model.patch_width = camera.patch_size;
  bundle.model.patch_height = camera.patch_size;
  bundle.train_accuracy = res.train_accuracy;
  return bundle;
}

}  // namespace racer::harness
