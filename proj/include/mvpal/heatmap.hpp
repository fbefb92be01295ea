#pragma once

#include <vector>

#include "mvpal/geometry.hpp"

namespace mvpal {

// Row-major grid of non-negative confidences for one keypoint in one view.
struct Heatmap {
  int width = 0;
  int height = 0;
  std::vector<double> values;

  Heatmap() = default;
  Heatmap(int w, int h) : width(w), height(h), values(static_cast<std::size_t>(w) * h, 0.0) {}

  double& at(int u, int v) { return values[static_cast<std::size_t>(v) * width + u]; }
  double at(int u, int v) const { return values[static_cast<std::size_t>(v) * width + u]; }
  double max() const;
};

struct Peak {
  int u = 0;
  int v = 0;
  double value = 0.0;
};

using PeakList = std::vector<Peak>;

struct PeakParams {
  int window = 3;
  double min_frac = 0.1;
  int max_peaks = 5;
};

Heatmap render_gaussian(const Point2& center, double sigma_px, int width, int height);

// Adds amplitude * gaussian(center, sigma) into an existing heatmap.
void add_gaussian(Heatmap& h, const Point2& center, double sigma_px, double amplitude);

PeakList local_peaks(const Heatmap& h, const PeakParams& params = {});

double bsb_view(const std::vector<Heatmap>& heatmaps, const PeakParams& params = {});
double mpe_view(const std::vector<Heatmap>& heatmaps, const PeakParams& params = {});

// Per-keypoint contributions, exposed for the frame-level metrics.
double bsb_margin(const PeakList& peaks);
double mpe_entropy(const PeakList& peaks);

}  // namespace mvpal
