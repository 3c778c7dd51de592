//
// Copyright 2026 The dpgen Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "dpgen/svg.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_replace.h"
#include "fmt/format.h"

namespace dpgen {
namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 60.0;
constexpr double kRight = 170.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;
constexpr int kTicks = 5;
constexpr std::array<const char*, 6> kColors = {
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

std::string Escape(const std::string& text) {
  return absl::StrReplaceAll(text, {{"&", "&amp;"},
                                    {"<", "&lt;"},
                                    {">", "&gt;"},
                                    {"\"", "&quot;"}});
}

}  // namespace

absl::StatusOr<std::string> RenderSvg(const LinePlot& plot) {
  if (plot.series.empty()) {
    return absl::InvalidArgumentError("plot has no series");
  }
  double x_min = std::numeric_limits<double>::infinity();
  double x_max = -x_min;
  for (const PlotSeries& series : plot.series) {
    if (series.points.empty()) {
      return absl::InvalidArgumentError(
          absl::StrCat("series '", series.name, "' is empty"));
    }
    for (const auto& [x, y] : series.points) {
      if (!std::isfinite(x) || !std::isfinite(y)) {
        return absl::InvalidArgumentError(
            absl::StrCat("series '", series.name, "' has a non-finite point"));
      }
      x_min = std::min(x_min, x);
      x_max = std::max(x_max, x);
    }
  }
  if (x_max == x_min) x_max = x_min + 1.0;

  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  const auto sx = [&](double x) {
    return kLeft + (x - x_min) / (x_max - x_min) * plot_w;
  };
  const auto sy = [&](double y) {
    return kTop + (1.0 - std::clamp(y, 0.0, 1.0)) * plot_h;
  };

  std::string out = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" "
      "viewBox=\"0 0 {} {}\" font-family=\"sans-serif\" font-size=\"12\">\n",
      kWidth, kHeight, kWidth, kHeight);
  out += fmt::format(
      "<rect width=\"{}\" height=\"{}\" fill=\"white\"/>\n", kWidth, kHeight);
  out += fmt::format(
      "<text x=\"{:.2f}\" y=\"24\" text-anchor=\"middle\" "
      "font-size=\"14\">{}</text>\n",
      kLeft + plot_w / 2, Escape(plot.title));

  // Axes and ticks.
  out += fmt::format(
      "<g class=\"axes\" stroke=\"black\" fill=\"none\">\n"
      "<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{2:.2f}\" y2=\"{1:.2f}\"/>\n"
      "<line x1=\"{0:.2f}\" y1=\"{3:.2f}\" x2=\"{0:.2f}\" y2=\"{1:.2f}\"/>\n"
      "</g>\n",
      kLeft, kTop + plot_h, kLeft + plot_w, kTop);
  for (int i = 0; i <= kTicks; ++i) {
    const double fraction = static_cast<double>(i) / kTicks;
    const double x = x_min + fraction * (x_max - x_min);
    out += fmt::format(
        "<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{0:.2f}\" y2=\"{2:.2f}\" "
        "stroke=\"black\"/>\n"
        "<text x=\"{0:.2f}\" y=\"{3:.2f}\" text-anchor=\"middle\">{4:g}</text>\n",
        sx(x), kTop + plot_h, kTop + plot_h + 5, kTop + plot_h + 18, x);
    out += fmt::format(
        "<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{2:.2f}\" y2=\"{1:.2f}\" "
        "stroke=\"black\"/>\n"
        "<text x=\"{3:.2f}\" y=\"{4:.2f}\" text-anchor=\"end\">{5:.1f}</text>\n",
        kLeft - 5, sy(fraction), kLeft, kLeft - 8, sy(fraction) + 4, fraction);
  }
  out += fmt::format(
      "<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\">{}</text>\n",
      kLeft + plot_w / 2, kHeight - 12, Escape(plot.x_label));
  out += fmt::format(
      "<text x=\"16\" y=\"{0:.2f}\" text-anchor=\"middle\" "
      "transform=\"rotate(-90 16 {0:.2f})\">{1}</text>\n",
      kTop + plot_h / 2, Escape(plot.y_label));

  for (std::size_t s = 0; s < plot.series.size(); ++s) {
    const PlotSeries& series = plot.series[s];
    const char* color = kColors[s % kColors.size()];
    std::string points;
    for (const auto& [x, y] : series.points) {
      if (!points.empty()) points += ' ';
      points += fmt::format("{:.2f},{:.2f}", sx(x), sy(y));
    }
    out += fmt::format(
        "<polyline class=\"series\" fill=\"none\" stroke=\"{}\" "
        "stroke-width=\"1.5\" points=\"{}\"/>\n",
        color, points);
    const double legend_y = kTop + 10 + 18 * static_cast<double>(s);
    out += fmt::format(
        "<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{2:.2f}\" y2=\"{1:.2f}\" "
        "stroke=\"{3}\" stroke-width=\"2\"/>\n"
        "<text x=\"{4:.2f}\" y=\"{5:.2f}\">{6}</text>\n",
        kWidth - kRight + 15, legend_y, kWidth - kRight + 40, color,
        kWidth - kRight + 46, legend_y + 4, Escape(series.name));
  }
  out += "</svg>\n";
  return out;
}

absl::Status WriteSvg(const LinePlot& plot, const std::string& path) {
  absl::StatusOr<std::string> svg = RenderSvg(plot);
  if (!svg.ok()) return svg.status();
  std::ofstream out(path, std::ios::binary);
  if (!out) return absl::UnavailableError(absl::StrCat("cannot open ", path));
  out << *svg;
  out.flush();
  if (!out) return absl::DataLossError(absl::StrCat("write failed for ", path));
  return absl::OkStatus();
}

}  // namespace dpgen
