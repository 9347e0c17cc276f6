#include "racer/vision.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "racer/errors.hpp"
#include "racer/random.hpp"

namespace racer {

PerspectiveMatrix solvePerspective(const std::array<std::pair<Vec2, Vec2>, 4>& pairs) {
  // Unknowns: (m00, m10, m20, m01, m11, m21, m02, m12); m22 = 1.
  Eigen::Matrix<double, 8, 8> a = Eigen::Matrix<double, 8, 8>::Zero();
  Eigen::Matrix<double, 8, 1> rhs;
  for (int i = 0; i < 4; ++i) {
    const Vec2& s = pairs[i].first;
    const Vec2& d = pairs[i].second;
    a(2 * i, 0) = s.x;
    a(2 * i, 1) = s.y;
    a(2 * i, 2) = 1.0;
    a(2 * i, 6) = -d.x * s.x;
    a(2 * i, 7) = -d.x * s.y;
    rhs(2 * i) = d.x;
    a(2 * i + 1, 3) = s.x;
    a(2 * i + 1, 4) = s.y;
    a(2 * i + 1, 5) = 1.0;
    a(2 * i + 1, 6) = -d.y * s.x;
    a(2 * i + 1, 7) = -d.y * s.y;
    rhs(2 * i + 1) = d.y;
  }
  Eigen::FullPivLU<Eigen::Matrix<double, 8, 8>> lu(a);
  lu.setThreshold(1e-10);
  if (!lu.isInvertible()) {
    throw DegenerateError("solvePerspective: degenerate configuration (collinear points?)");
  }
  const Eigen::Matrix<double, 8, 1> x = lu.solve(rhs);
  PerspectiveMatrix m;
  m.m[0][0] = x(0);
  m.m[1][0] = x(1);
  m.m[2][0] = x(2);
  m.m[0][1] = x(3);
  m.m[1][1] = x(4);
  m.m[2][1] = x(5);
  m.m[0][2] = x(6);
  m.m[1][2] = x(7);
  m.m[2][2] = 1.0;
  return m;
}

Vec2 projectPoint(const Vec2& p, const PerspectiveMatrix& m) {
  const double xp = p.x * m.m[0][0] + p.y * m.m[1][0] + m.m[2][0];
  const double yp = p.x * m.m[0][1] + p.y * m.m[1][1] + m.m[2][1];
  const double wp = p.x * m.m[0][2] + p.y * m.m[1][2] + m.m[2][2];
  if (std::abs(wp) < 1e-12) {
    throw DegenerateError("projectPoint: point maps to infinity");
  }
  return {xp / wp, yp / wp};
}

std::size_t hogDescriptorLength(int width, int height, const HogConfig& cfg) {
  const int cx = width / cfg.cell;
  const int cy = height / cfg.cell;
  const int bx = cx - cfg.block + 1;
  const int by = cy - cfg.block + 1;
  if (bx <= 0 || by <= 0) return 0;
  return static_cast<std::size_t>(bx) * by * cfg.block * cfg.block * cfg.bins;
}

std::vector<double> hogFeatures(const ImagePatch& gray, const HogConfig& cfg) {
  if (gray.mode != ImagePatch::Mode::Grayscale) {
    throw InvalidInput("hogFeatures: expects a grayscale patch");
  }
  const int w = gray.width, h = gray.height;
  if (w <= 0 || h <= 0 || w % cfg.cell != 0 || h % cfg.cell != 0) {
    throw InvalidInput("hogFeatures: patch dimensions must be positive cell multiples");
  }
  const int cx = w / cfg.cell, cy = h / cfg.cell;
  if (cx < cfg.block || cy < cfg.block) {
    throw InvalidInput("hogFeatures: patch smaller than one block");
  }

  // Per-cell orientation histograms; hard assignment, magnitude weighted.
  std::vector<double> hist(static_cast<std::size_t>(cx) * cy * cfg.bins, 0.0);
  const double bin_width = M_PI / cfg.bins;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int xl = std::max(x - 1, 0), xr = std::min(x + 1, w - 1);
      const int yu = std::max(y - 1, 0), yd = std::min(y + 1, h - 1);
      const double gx = (gray.g(xr, y) - gray.g(xl, y)) * 0.5;
      const double gy = (gray.g(x, yd) - gray.g(x, yu)) * 0.5;
      const double mag = std::hypot(gx, gy);
      if (mag <= 0.0) continue;
      double theta = std::atan2(gy, gx);
      if (theta < 0.0) theta += M_PI;  // unsigned orientation
      if (theta >= M_PI) theta -= M_PI;
      int bin = std::min(static_cast<int>(theta / bin_width), cfg.bins - 1);
      const std::size_t cell = static_cast<std::size_t>(y / cfg.cell) * cx + (x / cfg.cell);
      hist[cell * cfg.bins + bin] += mag;
    }
  }

  // Overlapping blocks, one cell stride, L2 normalization per block.
  std::vector<double> out;
  out.reserve(hogDescriptorLength(w, h, cfg));
  const double eps2 = 1e-12;
  std::vector<double> block(static_cast<std::size_t>(cfg.block) * cfg.block * cfg.bins);
  for (int by = 0; by + cfg.block <= cy; ++by) {
    for (int bx = 0; bx + cfg.block <= cx; ++bx) {
      std::size_t k = 0;
      double norm2 = 0.0;
      for (int dy = 0; dy < cfg.block; ++dy) {
        for (int dx = 0; dx < cfg.block; ++dx) {
          const std::size_t cell = static_cast<std::size_t>(by + dy) * cx + (bx + dx);
          for (int b = 0; b < cfg.bins; ++b, ++k) {
            block[k] = hist[cell * cfg.bins + b];
            norm2 += block[k] * block[k];
          }
        }
      }
      const double inv = 1.0 / std::sqrt(norm2 + eps2);
      for (double v : block) out.push_back(v * inv);
    }
  }
  return out;
}

namespace {

double svmLoss(const std::vector<std::vector<double>>& xs, const std::vector<int>& ys,
               const std::vector<double>& w, double b, double lambda) {
  double loss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double s = b;
    const auto& x = xs[i];
    for (std::size_t d = 0; d < w.size(); ++d) s += w[d] * x[d];
    loss += std::max(0.0, 1.0 - ys[i] * s);
  }
  loss /= static_cast<double>(xs.size());
  double wn = 0.0;
  for (double v : w) wn += v * v;
  return loss + 0.5 * lambda * wn;
}

}  // namespace

SvmTrainResult svmTrain(const std::vector<std::vector<double>>& positives,
                        const std::vector<std::vector<double>>& negatives,
                        const SvmTrainConfig& cfg, std::uint64_t seed) {
  if (positives.empty() || negatives.empty()) {
    throw InsufficientData("svmTrain: need at least one sample of each class");
  }
  const std::size_t dim = positives.front().size();
  if (dim == 0) throw InvalidInput("svmTrain: empty descriptors");

  std::vector<std::vector<double>> xs;
  std::vector<int> ys;
  xs.reserve(positives.size() + negatives.size());
  for (const auto& x : positives) {
    if (x.size() != dim) throw InvalidInput("svmTrain: inconsistent descriptor lengths");
    xs.push_back(x);
    ys.push_back(1);
  }
  for (const auto& x : negatives) {
    if (x.size() != dim) throw InvalidInput("svmTrain: inconsistent descriptor lengths");
    xs.push_back(x);
    ys.push_back(-1);
  }
  const double n = static_cast<double>(xs.size());

  Rng rng(seed);
  std::vector<double> w(dim);
  for (auto& v : w) v = 1e-4 * (rng.uniform() - 0.5);
  double b = 0.0;

  SvmTrainResult res;
  res.epoch_loss.reserve(cfg.epochs);
  double loss = svmLoss(xs, ys, w, b, cfg.regularization);
  double step0 = cfg.rate;

  std::vector<double> gw(dim), wc(dim);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::fill(gw.begin(), gw.end(), 0.0);
    double gb = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      double s = b;
      const auto& x = xs[i];
      for (std::size_t d = 0; d < dim; ++d) s += w[d] * x[d];
      if (ys[i] * s < 1.0) {
        for (std::size_t d = 0; d < dim; ++d) gw[d] -= ys[i] * x[d];
        gb -= ys[i];
      }
    }
    for (std::size_t d = 0; d < dim; ++d) gw[d] = gw[d] / n + cfg.regularization * w[d];
    gb /= n;

    // Backtracking keeps the recorded loss monotone non-increasing.
    double step = step0;
    double cand_loss = loss;
    double bc = b;
    bool improved = false;
    while (step > 1e-12) {
      for (std::size_t d = 0; d < dim; ++d) wc[d] = w[d] - step * gw[d];
      bc = b - step * gb;
      cand_loss = svmLoss(xs, ys, wc, bc, cfg.regularization);
      if (cand_loss <= loss) {
        improved = true;
        break;
      }
      step *= 0.5;
    }
    if (improved) {
      w.swap(wc);
      b = bc;
      loss = cand_loss;
      step0 = std::min(step * 2.0, cfg.rate);
    }
    res.epoch_loss.push_back(loss);
  }

  res.model.w = std::move(w);
  res.model.bias = b;
  int correct = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const auto pred = svmPredict(res.model, xs[i]);
    if (pred.first == (ys[i] > 0)) ++correct;
  }
  res.train_accuracy = correct / n;
  return res;
}

std::pair<bool, double> svmPredict(const LinearSvmModel& model,
                                   const std::vector<double>& descriptor) {
  if (descriptor.size() != model.w.size()) {
    throw InvalidInput("svmPredict: descriptor length does not match model");
  }
  double s = model.bias;
  for (std::size_t d = 0; d < model.w.size(); ++d) s += model.w[d] * descriptor[d];
  return {s > 0.0, s};
}

void saveSvmModel(const std::string& path, const LinearSvmModel& model) {
  std::ofstream f(path);
  if (!f) throw IoError("saveSvmModel: cannot open " + path);
  f << "# racer-svm v1\n";
  f << "patch " << model.patch_width << " " << model.patch_height << "\n";
  f << "hog " << model.hog.cell << " " << model.hog.bins << " " << model.hog.block << "\n";
  f << "dim " << model.w.size() << "\n";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "bias %.12g\n", model.bias);
  f << buf;
  for (double v : model.w) {
    std::snprintf(buf, sizeof(buf), "%.12g\n", v);
    f << buf;
  }
  if (!f) throw IoError("saveSvmModel: write failed for " + path);
}

LinearSvmModel loadSvmModel(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("loadSvmModel: cannot open " + path);
  std::string line;
  if (!std::getline(f, line) || line != "# racer-svm v1") {
    throw IoError("loadSvmModel: missing format header in " + path);
  }
  LinearSvmModel m;
  std::string key;
  std::size_t dim = 0;
  f >> key >> m.patch_width >> m.patch_height;
  if (key != "patch") throw IoError("loadSvmModel: expected patch geometry in " + path);
  f >> key >> m.hog.cell >> m.hog.bins >> m.hog.block;
  if (key != "hog") throw IoError("loadSvmModel: expected hog geometry in " + path);
  f >> key >> dim;
  if (key != "dim") throw IoError("loadSvmModel: expected dimension in " + path);
  f >> key >> m.bias;
  if (key != "bias") throw IoError("loadSvmModel: expected bias in " + path);
  m.w.resize(dim);
  for (std::size_t i = 0; i < dim; ++i) f >> m.w[i];
  if (!f) throw IoError("loadSvmModel: truncated weights in " + path);
  return m;
}

const char* toString(ConeColor c) {
  switch (c) {
    case ConeColor::Red: return "red";
    case ConeColor::Blue: return "blue";
    case ConeColor::Yellow: return "yellow";
    default: return "unknown";
  }
}

ConeColor coneColorFromString(const std::string& s) {
  if (s == "red") return ConeColor::Red;
  if (s == "blue") return ConeColor::Blue;
  if (s == "yellow") return ConeColor::Yellow;
  if (s == "unknown") return ConeColor::Unknown;
  throw InvalidInput("coneColorFromString: unknown color '" + s + "'");
}

namespace {

double circDist(double a, double b) {
  double d = std::abs(a - b);
  d = std::fmod(d, 360.0);
  return std::min(d, 360.0 - d);
}

double circMean(const std::vector<double>& hues, const std::vector<int>& assign, int cluster,
                double fallback) {
  double sx = 0.0, sy = 0.0;
  int count = 0;
  for (std::size_t i = 0; i < hues.size(); ++i) {
    if (assign[i] != cluster) continue;
    const double rad = hues[i] * M_PI / 180.0;
    sx += std::cos(rad);
    sy += std::sin(rad);
    ++count;
  }
  if (count == 0 || (sx == 0.0 && sy == 0.0)) return fallback;
  double deg = std::atan2(sy, sx) * 180.0 / M_PI;
  if (deg < 0.0) deg += 360.0;
  return deg;
}

}  // namespace

ConeColor classifyColor(const ImagePatch& hsv_patch, std::uint64_t seed, const ColorConfig& cfg) {
  (void)seed;  // initialization is deterministic; seed kept for interface stability
  if (hsv_patch.mode != ImagePatch::Mode::Hsv) {
    throw InvalidInput("classifyColor: expects an HSV patch");
  }
  const std::size_t n = static_cast<std::size_t>(hsv_patch.width) * hsv_patch.height;
  if (n == 0) throw InsufficientData("classifyColor: empty patch");

  std::vector<double> hue(n), sat(n);
  for (int y = 0; y < hsv_patch.height; ++y) {
    for (int x = 0; x < hsv_patch.width; ++x) {
      const double* p = hsv_patch.px(x, y);
      const std::size_t i = static_cast<std::size_t>(y) * hsv_patch.width + x;
      hue[i] = p[0];
      sat[i] = p[1];
    }
  }

  // Initial centroids: the most circularly distant pair of occupied 1-degree
  // hue bins (deterministic regardless of pixel order).
  bool occupied[360] = {};
  for (double h : hue) {
    int b = static_cast<int>(h) % 360;
    if (b < 0) b += 360;
    occupied[b] = true;
  }
  int best_a = -1, best_b = -1;
  double best_d = -1.0;
  for (int a = 0; a < 360; ++a) {
    if (!occupied[a]) continue;
    for (int b = a; b < 360; ++b) {
      if (!occupied[b]) continue;
      const double d = circDist(a, b);
      if (d > best_d) {
        best_d = d;
        best_a = a;
        best_b = b;
      }
    }
  }

  std::vector<int> assign(n, 0);
  double c0 = best_a + 0.5, c1 = best_b + 0.5;
  if (best_d <= 1e-9) {
    // Effectively one hue: single cluster holds every pixel.
    std::fill(assign.begin(), assign.end(), 0);
    c1 = c0;
  } else {
    for (int it = 0; it < cfg.kmeans_iters; ++it) {
      bool changed = false;
      for (std::size_t i = 0; i < n; ++i) {
        const int a = circDist(hue[i], c0) <= circDist(hue[i], c1) ? 0 : 1;
        if (a != assign[i]) {
          assign[i] = a;
          changed = true;
        }
      }
      const double n0 = circMean(hue, assign, 0, c0);
      const double n1 = circMean(hue, assign, 1, c1);
      if (!changed && n0 == c0 && n1 == c1) break;
      c0 = n0;
      c1 = n1;
    }
  }

  double sat_mean[2] = {0.0, 0.0};
  int count[2] = {0, 0};
  for (std::size_t i = 0; i < n; ++i) {
    sat_mean[assign[i]] += sat[i];
    ++count[assign[i]];
  }
  for (int k = 0; k < 2; ++k) {
    if (count[k] > 0) sat_mean[k] /= count[k];
  }
  const int cone = sat_mean[1] > sat_mean[0] ? 1 : 0;
  if (count[cone] == 0 || sat_mean[cone] < cfg.min_saturation) return ConeColor::Unknown;

  const double cone_hue = circMean(hue, assign, cone, cone == 0 ? c0 : c1);
  struct {
    double hue;
    ConeColor color;
  } nominal[3] = {{cfg.red_hue, ConeColor::Red},
                  {cfg.yellow_hue, ConeColor::Yellow},
                  {cfg.blue_hue, ConeColor::Blue}};
  ConeColor best = ConeColor::Unknown;
  double best_hue_d = cfg.hue_tolerance;
  for (const auto& nom : nominal) {
    const double d = circDist(cone_hue, nom.hue);
    if (d < best_hue_d) {
      best_hue_d = d;
      best = nom.color;
    }
  }
  return best;
}

}  // namespace racer
