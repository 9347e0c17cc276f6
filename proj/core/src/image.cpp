#include "racer/image.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "racer/errors.hpp"

namespace racer {

ImagePatch ImagePatch::gray(int w, int h, double fill) {
  ImagePatch p;
  p.width = w;
  p.height = h;
  p.mode = Mode::Grayscale;
  p.data.assign(static_cast<std::size_t>(w) * h, fill);
  return p;
}

ImagePatch ImagePatch::hsv(int w, int h) {
  ImagePatch p;
  p.width = w;
  p.height = h;
  p.mode = Mode::Hsv;
  p.data.assign(static_cast<std::size_t>(w) * h * 3, 0.0);
  return p;
}

ImagePatch ImagePatch::toGray() const {
  if (mode == Mode::Grayscale) return *this;
  ImagePatch g = ImagePatch::gray(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      g.g(x, y) = px(x, y)[2];
    }
  }
  return g;
}

void rgbToHsv(double r, double g, double b, double& h, double& s, double& v) {
  const double mx = std::max({r, g, b});
  const double mn = std::min({r, g, b});
  const double d = mx - mn;
  v = mx;
  s = mx > 0.0 ? d / mx : 0.0;
  if (d <= 0.0) {
    h = 0.0;
    return;
  }
  if (mx == r) {
    h = 60.0 * std::fmod((g - b) / d, 6.0);
  } else if (mx == g) {
    h = 60.0 * ((b - r) / d + 2.0);
  } else {
    h = 60.0 * ((r - g) / d + 4.0);
  }
  if (h < 0.0) h += 360.0;
}

void hsvToRgb(double h, double s, double v, double& r, double& g, double& b) {
  h = std::fmod(h, 360.0);
  if (h < 0.0) h += 360.0;
  const double c = v * s;
  const double x = c * (1.0 - std::abs(std::fmod(h / 60.0, 2.0) - 1.0));
  const double m = v - c;
  double rp = 0, gp = 0, bp = 0;
  if (h < 60) {
    rp = c; gp = x;
  } else if (h < 120) {
    rp = x; gp = c;
  } else if (h < 180) {
    gp = c; bp = x;
  } else if (h < 240) {
    gp = x; bp = c;
  } else if (h < 300) {
    rp = x; bp = c;
  } else {
    rp = c; bp = x;
  }
  r = rp + m;
  g = gp + m;
  b = bp + m;
}

namespace {
int to255(double v) { return std::clamp(static_cast<int>(std::lround(v * 255.0)), 0, 255); }
}  // namespace

void savePatch(const std::string& path, const ImagePatch& patch) {
  std::ofstream f(path);
  if (!f) throw IoError("savePatch: cannot open " + path);
  const bool gray = patch.mode == ImagePatch::Mode::Grayscale;
  f << (gray ? "P2" : "P3") << "\n# racer-patch v1 " << (gray ? "gray" : "hsv") << "\n"
    << patch.width << " " << patch.height << "\n255\n";
  for (int y = 0; y < patch.height; ++y) {
    for (int x = 0; x < patch.width; ++x) {
      if (gray) {
        f << to255(patch.g(x, y)) << "\n";
      } else {
        const double* p = patch.px(x, y);
        double r, g, b;
        hsvToRgb(p[0], p[1], p[2], r, g, b);
        f << to255(r) << " " << to255(g) << " " << to255(b) << "\n";
      }
    }
  }
  if (!f) throw IoError("savePatch: write failed for " + path);
}

ImagePatch loadPatch(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("loadPatch: cannot open " + path);
  // Header: magic, then the comment line "# racer-patch v1 <gray|hsv>".
  std::string magic, hash, tag, version, mode_word;
  f >> magic >> hash >> tag >> version >> mode_word;
  if (magic != "P2" && magic != "P3") throw IoError("loadPatch: unsupported magic in " + path);
  if (hash != "#" || tag != "racer-patch" || version != "v1") {
    throw IoError("loadPatch: missing format header in " + path);
  }
  int w = 0, h = 0, maxv = 0;
  f >> w >> h >> maxv;
  if (!f || w <= 0 || h <= 0 || maxv != 255) throw IoError("loadPatch: bad dimensions in " + path);

  if (magic == "P2") {
    ImagePatch p = ImagePatch::gray(w, h);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        int v;
        f >> v;
        p.g(x, y) = v / 255.0;
      }
    }
    if (!f) throw IoError("loadPatch: truncated pixel data in " + path);
    return p;
  }
  ImagePatch p = ImagePatch::hsv(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      int r, g, b;
      f >> r >> g >> b;
      double* q = p.px(x, y);
      rgbToHsv(r / 255.0, g / 255.0, b / 255.0, q[0], q[1], q[2]);
    }
  }
  if (!f) throw IoError("loadPatch: truncated pixel data in " + path);
  return p;
}

}  // namespace racer
