#pragma once

#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "capsim/analysis.hpp"

namespace capsim::io {

struct PlotSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    std::string color;
};

// Quick-look plots only: fixed 800x480 canvas, linear axes, no interactivity.
void write_line_plot(std::ostream& out, const std::string& title, std::span<const PlotSeries> series);

void write_histogram(std::ostream& out, const std::string& title, std::span<const HistogramBin> bins);

/// P0, P1 and J / peak J against time.
void write_weights_plot(std::ostream& out, const ComponentWeights& weights);

}  // namespace capsim::io
