#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "racer/geometry.hpp"
#include "racer/image.hpp"

namespace racer {

/// 3x3 perspective map in row-vector convention: (x', y', w') = (x, y, 1) M,
/// normalized so m[2][2] = 1.
struct PerspectiveMatrix {
  double m[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
};

/// Exact perspective transform through 4 source/destination pairs.
/// Throws DegenerateError when any 3 sources (or destinations) are
/// collinear, which leaves the 8x8 system singular.
PerspectiveMatrix solvePerspective(const std::array<std::pair<Vec2, Vec2>, 4>& pairs);

/// Apply the map; throws DegenerateError when the point lands on the line
/// at infinity (w' ~ 0).
Vec2 projectPoint(const Vec2& p, const PerspectiveMatrix& m);

struct HogConfig {
  int cell = 8;   // pixels per cell side
  int bins = 9;   // unsigned orientation bins over [0, 180)
  int block = 2;  // cells per block side, L2-normalized per block
};

/// Histogram-of-oriented-gradients descriptor of a grayscale patch.
/// Central-difference gradients (clamped at borders), hard bin assignment,
/// overlapping blocks stepping one cell. Patch dimensions must be cell
/// multiples and fit at least one block.
std::vector<double> hogFeatures(const ImagePatch& gray, const HogConfig& cfg = {});

std::size_t hogDescriptorLength(int width, int height, const HogConfig& cfg = {});

struct LinearSvmModel {
  std::vector<double> w;
  double bias = 0.0;
  int patch_width = 0;   // descriptor geometry, recorded for the file format
  int patch_height = 0;
  HogConfig hog;
};

struct SvmTrainConfig {
  int epochs = 200;
  double rate = 1.0;            // initial step; backtracking halves as needed
  double regularization = 1e-3; // L2 coefficient
};

struct SvmTrainResult {
  LinearSvmModel model;
  double train_accuracy = 0.0;
  std::vector<double> epoch_loss;  // monotone non-increasing by construction
};

/// Full-batch subgradient descent on the L2-regularized hinge loss, with a
/// backtracking step so the recorded loss never increases. Seed controls
/// the (tiny) random weight initialization only.
SvmTrainResult svmTrain(const std::vector<std::vector<double>>& positives,
                        const std::vector<std::vector<double>>& negatives,
                        const SvmTrainConfig& cfg, std::uint64_t seed);

/// (label, margin); margin exactly 0 classifies negative.
std::pair<bool, double> svmPredict(const LinearSvmModel& model,
                                   const std::vector<double>& descriptor);

void saveSvmModel(const std::string& path, const LinearSvmModel& model);
LinearSvmModel loadSvmModel(const std::string& path);

enum class ConeColor { Red, Blue, Yellow, Unknown };

const char* toString(ConeColor c);
ConeColor coneColorFromString(const std::string& s);

struct ColorConfig {
  double red_hue = 0.0;
  double yellow_hue = 60.0;
  double blue_hue = 240.0;
  double hue_tolerance = 40.0;   // degrees around each nominal hue
  double min_saturation = 0.15;  // below this the "cone" cluster is colorless
  int kmeans_iters = 50;
};

/// Two-cluster k-means on pixel hue with the circular metric; the cluster
/// with higher mean saturation is taken as the cone, its circular mean hue
/// matched against the nominal cone hues. Deterministic: centroids start
/// at the most circularly distant pair of observed hues.
ConeColor classifyColor(const ImagePatch& hsv_patch, std::uint64_t seed,
                        const ColorConfig& cfg = {});

}  // namespace racer
