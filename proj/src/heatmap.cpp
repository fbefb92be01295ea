#include "mvpal/heatmap.hpp"

#include <algorithm>
#include <cmath>

#include "mvpal/error.hpp"

namespace mvpal {

namespace {

// The isotropic Gaussian is separable; one exp per row and column.
std::vector<double> gaussian_profile(double center, double sigma, int n) {
  std::vector<double> profile(static_cast<std::size_t>(n));
  const double denom = 2.0 * sigma * sigma;
  for (int i = 0; i < n; ++i) {
    const double d = i - center;
    profile[static_cast<std::size_t>(i)] = std::exp(-d * d / denom);
  }
  return profile;
}

}  // namespace

double Heatmap::max() const {
  return values.empty() ? 0.0 : *std::max_element(values.begin(), values.end());
}

Heatmap render_gaussian(const Point2& center, double sigma_px, int width, int height) {
  Heatmap h(width, height);
  add_gaussian(h, center, sigma_px, 1.0);
  return h;
}

void add_gaussian(Heatmap& h, const Point2& center, double sigma_px, double amplitude) {
  if (!(sigma_px > 0.0)) throw Error(ErrorCode::InvariantViolation, "sigma must be positive");
  const auto gu = gaussian_profile(center.x(), sigma_px, h.width);
  const auto gv = gaussian_profile(center.y(), sigma_px, h.height);
  for (int v = 0; v < h.height; ++v) {
    const double row = amplitude * gv[static_cast<std::size_t>(v)];
    if (row == 0.0) continue;
    for (int u = 0; u < h.width; ++u) h.at(u, v) += row * gu[static_cast<std::size_t>(u)];
  }
}

PeakList local_peaks(const Heatmap& h, const PeakParams& params) {
  if (params.window < 3 || params.window % 2 == 0)
    throw Error(ErrorCode::InvariantViolation, "peak window must be odd and >= 3");
  if (!(params.min_frac >= 0.0 && params.min_frac < 1.0))
    throw Error(ErrorCode::InvariantViolation, "min_frac must lie in [0, 1)");
  if (params.max_peaks < 1) throw Error(ErrorCode::InvariantViolation, "max_peaks must be >= 1");

  std::size_t argmax = 0;
  for (std::size_t i = 1; i < h.values.size(); ++i)
    if (h.values[i] > h.values[argmax]) argmax = i;
  if (h.values.empty() || !(h.values[argmax] > 0.0))
    throw Error(ErrorCode::EmptyHeatmap, "heatmap has no positive value");
  const double floor = params.min_frac * h.values[argmax];
  const int r = params.window / 2;

  PeakList peaks;
  peaks.push_back({static_cast<int>(argmax % h.width), static_cast<int>(argmax / h.width), h.values[argmax]});
  for (int v = 0; v < h.height; ++v) {
    for (int u = 0; u < h.width; ++u) {
      const double value = h.at(u, v);
      if (value < floor || !(value > 0.0)) continue;
      if (static_cast<std::size_t>(v) * h.width + u == argmax) continue;
      bool strict_max = true;
      for (int dv = -r; dv <= r && strict_max; ++dv) {
        const int y = v + dv;
        if (y < 0 || y >= h.height) continue;
        for (int du = -r; du <= r; ++du) {
          const int x = u + du;
          if ((du == 0 && dv == 0) || x < 0 || x >= h.width) continue;
          if (h.at(x, y) >= value) {
            strict_max = false;
            break;
          }
        }
      }
      if (strict_max) peaks.push_back({u, v, value});
    }
  }
  // Row-major scan order breaks value ties; the global argmax stays first.
  std::stable_sort(peaks.begin() + 1, peaks.end(),
                   [](const Peak& a, const Peak& b) { return a.value > b.value; });
  if (peaks.size() > static_cast<std::size_t>(params.max_peaks)) peaks.resize(params.max_peaks);
  return peaks;
}

double bsb_margin(const PeakList& peaks) {
  if (peaks.empty()) throw Error(ErrorCode::EmptyHeatmap, "no peaks");
  const double second = peaks.size() > 1 ? peaks[1].value / peaks[0].value : 0.0;
  return 1.0 - second;
}

double mpe_entropy(const PeakList& peaks) {
  if (peaks.empty()) throw Error(ErrorCode::EmptyHeatmap, "no peaks");
  if (peaks.size() == 1) return 0.0;
  // Softmax over raw peak values, shifted by the max for stability.
  const double top = peaks.front().value;
  double z = 0.0;
  for (const auto& p : peaks) z += std::exp(p.value - top);
  double entropy = 0.0;
  for (const auto& p : peaks) {
    const double prob = std::exp(p.value - top) / z;
    if (prob > 0.0) entropy -= prob * std::log(prob);
  }
  return entropy;
}

double bsb_view(const std::vector<Heatmap>& heatmaps, const PeakParams& params) {
  if (heatmaps.empty()) throw Error(ErrorCode::EmptyHeatmap, "no keypoint heatmaps");
  double sum = 0.0;
  for (const auto& h : heatmaps) sum += bsb_margin(local_peaks(h, params));
  return sum / static_cast<double>(heatmaps.size());
}

double mpe_view(const std::vector<Heatmap>& heatmaps, const PeakParams& params) {
  if (heatmaps.empty()) throw Error(ErrorCode::EmptyHeatmap, "no keypoint heatmaps");
  double sum = 0.0;
  for (const auto& h : heatmaps) sum += mpe_entropy(local_peaks(h, params));
  return sum / static_cast<double>(heatmaps.size());
}

}  // namespace mvpal
