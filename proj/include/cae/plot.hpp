#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace cae {

// Minimal RGB raster with a PNG writer (zlib stored blocks, no external
// compression dependency).
class Canvas {
public:
    Canvas(int width, int height, uint8_t r = 255, uint8_t g = 255, uint8_t b = 255);

    int width() const { return w_; }
    int height() const { return h_; }

    void set(int x, int y, uint8_t r, uint8_t g, uint8_t b);
    void line(int x0, int y0, int x1, int y1, uint8_t r, uint8_t g, uint8_t b);
    void fill_rect(int x0, int y0, int x1, int y1, uint8_t r, uint8_t g, uint8_t b);
    // 3x5 bitmap glyphs: digits, '.', '-', 'e'. scale >= 1.
    void text(int x, int y, const std::string& s, uint8_t r, uint8_t g, uint8_t b, int scale = 1);

    void save_png(const std::string& path) const;

private:
    int w_, h_;
    std::vector<uint8_t> pixels_;  // RGB rows
};

struct Series {
    std::string label;
    std::vector<double> values;
    uint8_t r, g, b;
};

// Line chart over epoch index; axes with min/max tick labels.
void plot_lines(const std::string& path, const std::vector<Series>& series, const std::string& title);

// Bar chart of per-category values in [0, 1].
void plot_bars(const std::string& path, const std::vector<double>& values,
               const std::vector<std::string>& labels, const std::string& title);

}  // namespace cae
