#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

// Minimal deterministic SVG line/scatter plots.
namespace fcb::svg {

using Point = std::pair<double, double>;

struct Series {
    std::string label;
    std::vector<Point> line;
    std::vector<Point> scatter;
    /// Drawn as rhombi (min/max highlights).
    std::vector<Point> rhombi;
};

struct Figure {
    std::string title;
    std::string x_label;
    std::string y_label;
    /// Tick positions with their labels; the x axis runs high to low.
    std::vector<std::pair<double, std::string>> x_ticks;
    std::optional<std::pair<double, double>> y_range;
    std::vector<Series> series;
};

std::string render(const Figure& figure);

}  // namespace fcb::svg
