#pragma once

#include <string>
#include <utility>
#include <vector>

namespace fedcontrib::svg {

// Static figure emitters. Bars and scatters are the only primitives the
// report figures need; output is plain deterministic SVG markup.

struct BarChart {
    std::string title;
    std::string y_label;
    std::vector<std::string> labels;
    std::vector<double> values;
    int width = 720;
    int height = 420;

    std::string render() const;
};

struct ScatterPlot {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<std::pair<double, double>> points;
    int width = 720;
    int height = 420;

    std::string render() const;
};

} // namespace fedcontrib::svg
