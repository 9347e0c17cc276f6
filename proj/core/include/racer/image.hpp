#pragma once

#include <string>
#include <vector>

#include "racer/geometry.hpp"

namespace racer {

/// Dense patch, row-major. Grayscale stores one value per pixel in [0, 1];
/// HSV stores (hue degrees in [0, 360), saturation, value) triples.
struct ImagePatch {
  enum class Mode { Grayscale, Hsv };

  int width = 0;
  int height = 0;
  Mode mode = Mode::Grayscale;
  std::vector<double> data;

  static ImagePatch gray(int w, int h, double fill = 0.0);
  static ImagePatch hsv(int w, int h);

  double& g(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
  double g(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
  double* px(int x, int y) { return &data[(static_cast<std::size_t>(y) * width + x) * 3]; }
  const double* px(int x, int y) const {
    return &data[(static_cast<std::size_t>(y) * width + x) * 3];
  }

  /// Luminance view of an HSV patch (the value channel); identity on gray.
  ImagePatch toGray() const;
};

void rgbToHsv(double r, double g, double b, double& h, double& s, double& v);
void hsvToRgb(double h, double s, double v, double& r, double& g, double& b);

/// Portable pixmap text formats: P2 for grayscale, P3 for HSV (stored as
/// RGB), both tagged with a "# racer-patch v1" comment line.
void savePatch(const std::string& path, const ImagePatch& patch);
ImagePatch loadPatch(const std::string& path);

}  // namespace racer
