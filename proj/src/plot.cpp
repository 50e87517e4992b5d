#include "cae/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>

#include "cae/common.hpp"

namespace cae {

namespace {

uint32_t crc32_of(const uint8_t* data, size_t len, uint32_t crc = 0xFFFFFFFFu) {
    static uint32_t table[256];
    static bool init = false;
    if (!init) {
        for (uint32_t i = 0; i < 256; ++i) {
            uint32_t c = i;
            for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
            table[i] = c;
        }
        init = true;
    }
    for (size_t i = 0; i < len; ++i) crc = table[(crc ^ data[i]) & 0xFF] ^ (crc >> 8);
    return crc;
}

uint32_t adler32_of(const uint8_t* data, size_t len) {
    uint32_t a = 1, b = 0;
    for (size_t i = 0; i < len; ++i) {
        a = (a + data[i]) % 65521;
        b = (b + a) % 65521;
    }
    return (b << 16) | a;
}

void push_be32(std::vector<uint8_t>& v, uint32_t x) {
    v.push_back(uint8_t(x >> 24));
    v.push_back(uint8_t(x >> 16));
    v.push_back(uint8_t(x >> 8));
    v.push_back(uint8_t(x));
}

void write_chunk(std::ofstream& os, const char type[4], const std::vector<uint8_t>& payload) {
    std::vector<uint8_t> head;
    push_be32(head, uint32_t(payload.size()));
    os.write(reinterpret_cast<const char*>(head.data()), 4);
    std::vector<uint8_t> body(type, type + 4);
    body.insert(body.end(), payload.begin(), payload.end());
    os.write(reinterpret_cast<const char*>(body.data()), std::streamsize(body.size()));
    std::vector<uint8_t> crc;
    push_be32(crc, crc32_of(body.data(), body.size()) ^ 0xFFFFFFFFu);
    os.write(reinterpret_cast<const char*>(crc.data()), 4);
}

// 3x5 glyphs, row-major bits.
const std::map<char, std::array<uint8_t, 5>>& glyphs() {
    static const std::map<char, std::array<uint8_t, 5>> g = {
        {'0', {0b111, 0b101, 0b101, 0b101, 0b111}}, {'1', {0b010, 0b110, 0b010, 0b010, 0b111}},
        {'2', {0b111, 0b001, 0b111, 0b100, 0b111}}, {'3', {0b111, 0b001, 0b111, 0b001, 0b111}},
        {'4', {0b101, 0b101, 0b111, 0b001, 0b001}}, {'5', {0b111, 0b100, 0b111, 0b001, 0b111}},
        {'6', {0b111, 0b100, 0b111, 0b101, 0b111}}, {'7', {0b111, 0b001, 0b010, 0b010, 0b010}},
        {'8', {0b111, 0b101, 0b111, 0b101, 0b111}}, {'9', {0b111, 0b101, 0b111, 0b001, 0b111}},
        {'.', {0b000, 0b000, 0b000, 0b000, 0b010}}, {'-', {0b000, 0b000, 0b111, 0b000, 0b000}},
        {'e', {0b000, 0b111, 0b110, 0b100, 0b111}}, {' ', {0b000, 0b000, 0b000, 0b000, 0b000}},
    };
    return g;
}

std::string short_num(double v) {
    char buf[32];
    if (v == 0.0)
        std::snprintf(buf, sizeof buf, "0");
    else if (std::abs(v) >= 0.01 && std::abs(v) < 10000.0)
        std::snprintf(buf, sizeof buf, "%.3g", v);
    else
        std::snprintf(buf, sizeof buf, "%.1e", v);
    std::string s = buf;
    std::string out;
    for (char c : s) {
        if (glyphs().count(c))
            out.push_back(c);
        else if (c == '+')
            continue;  // 1e+05 -> 1e05
        else
            out.push_back(' ');
    }
    return out;
}

}  // namespace

Canvas::Canvas(int width, int height, uint8_t r, uint8_t g, uint8_t b) : w_(width), h_(height) {
    pixels_.resize(size_t(w_) * h_ * 3);
    for (int y = 0; y < h_; ++y)
        for (int x = 0; x < w_; ++x) set(x, y, r, g, b);
}

void Canvas::set(int x, int y, uint8_t r, uint8_t g, uint8_t b) {
    if (x < 0 || x >= w_ || y < 0 || y >= h_) return;
    uint8_t* p = pixels_.data() + (size_t(y) * w_ + x) * 3;
    p[0] = r;
    p[1] = g;
    p[2] = b;
}

void Canvas::line(int x0, int y0, int x1, int y1, uint8_t r, uint8_t g, uint8_t b) {
    const int dx = std::abs(x1 - x0), dy = -std::abs(y1 - y0);
    const int sx = x0 < x1 ? 1 : -1, sy = y0 < y1 ? 1 : -1;
    int err = dx + dy;
    while (true) {
        set(x0, y0, r, g, b);
        if (x0 == x1 && y0 == y1) break;
        const int e2 = 2 * err;
        if (e2 >= dy) {
            err += dy;
            x0 += sx;
        }
        if (e2 <= dx) {
            err += dx;
            y0 += sy;
        }
    }
}

void Canvas::fill_rect(int x0, int y0, int x1, int y1, uint8_t r, uint8_t g, uint8_t b) {
    for (int y = std::min(y0, y1); y <= std::max(y0, y1); ++y)
        for (int x = std::min(x0, x1); x <= std::max(x0, x1); ++x) set(x, y, r, g, b);
}

void Canvas::text(int x, int y, const std::string& s, uint8_t r, uint8_t g, uint8_t b, int scale) {
    int cx = x;
    for (char c : s) {
        auto it = glyphs().find(c);
        if (it != glyphs().end()) {
            for (int row = 0; row < 5; ++row)
                for (int col = 0; col < 3; ++col)
                    if (it->second[size_t(row)] & (1 << (2 - col)))
                        fill_rect(cx + col * scale, y + row * scale, cx + col * scale + scale - 1,
                                  y + row * scale + scale - 1, r, g, b);
        }
        cx += 4 * scale;
    }
}

void Canvas::save_png(const std::string& path) const {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open plot file for writing: " + path);
    static const uint8_t sig[8] = {137, 80, 78, 71, 13, 10, 26, 10};
    os.write(reinterpret_cast<const char*>(sig), 8);

    std::vector<uint8_t> ihdr;
    push_be32(ihdr, uint32_t(w_));
    push_be32(ihdr, uint32_t(h_));
    ihdr.push_back(8);   // bit depth
    ihdr.push_back(2);   // RGB
    ihdr.push_back(0);
    ihdr.push_back(0);
    ihdr.push_back(0);
    write_chunk(os, "IHDR", ihdr);

    // filter byte 0 per row
    std::vector<uint8_t> raw;
    raw.reserve(size_t(h_) * (size_t(w_) * 3 + 1));
    for (int y = 0; y < h_; ++y) {
        raw.push_back(0);
        const uint8_t* row = pixels_.data() + size_t(y) * w_ * 3;
        raw.insert(raw.end(), row, row + size_t(w_) * 3);
    }

    // zlib stream with stored deflate blocks
    std::vector<uint8_t> z;
    z.push_back(0x78);
    z.push_back(0x01);
    size_t off = 0;
    while (off < raw.size()) {
        const size_t n = std::min<size_t>(65535, raw.size() - off);
        const bool last = off + n == raw.size();
        z.push_back(last ? 1 : 0);
        z.push_back(uint8_t(n & 0xFF));
        z.push_back(uint8_t(n >> 8));
        z.push_back(uint8_t(~n & 0xFF));
        z.push_back(uint8_t((~n >> 8) & 0xFF));
        z.insert(z.end(), raw.begin() + std::ptrdiff_t(off), raw.begin() + std::ptrdiff_t(off + n));
        off += n;
    }
    std::vector<uint8_t> adler;
    push_be32(adler, adler32_of(raw.data(), raw.size()));
    z.insert(z.end(), adler.begin(), adler.end());
    write_chunk(os, "IDAT", z);
    write_chunk(os, "IEND", {});
    if (!os) throw IoError("failed writing plot: " + path);
}

void plot_lines(const std::string& path, const std::vector<Series>& series,
                const std::string& title) {
    (void)title;
    const int W = 640, H = 400, ML = 52, MR = 12, MT = 16, MB = 28;
    Canvas c(W, H);
    c.line(ML, H - MB, W - MR, H - MB, 0, 0, 0);
    c.line(ML, MT, ML, H - MB, 0, 0, 0);

    double lo = 0.0, hi = 1e-9;
    size_t n = 0;
    for (const auto& s : series) {
        n = std::max(n, s.values.size());
        for (double v : s.values) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    if (n < 2) n = 2;
    if (hi <= lo) hi = lo + 1.0;
    const auto xof = [&](size_t i) {
        return ML + int(double(W - ML - MR - 1) * double(i) / double(n - 1));
    };
    const auto yof = [&](double v) {
        return H - MB - int(double(H - MT - MB - 1) * (v - lo) / (hi - lo));
    };
    for (const auto& s : series) {
        for (size_t i = 1; i < s.values.size(); ++i)
            c.line(xof(i - 1), yof(s.values[i - 1]), xof(i), yof(s.values[i]), s.r, s.g, s.b);
    }
    // legend swatches, tick labels
    int ly = MT + 4;
    for (const auto& s : series) {
        c.fill_rect(W - MR - 90, ly, W - MR - 78, ly + 8, s.r, s.g, s.b);
        ly += 14;
    }
    c.text(4, MT - 2, short_num(hi), 0, 0, 0);
    c.text(4, H - MB - 5, short_num(lo), 0, 0, 0);
    c.text(ML - 4, H - MB + 8, "0", 0, 0, 0);
    c.text(W - MR - 24, H - MB + 8, short_num(double(n - 1)), 0, 0, 0);
    c.save_png(path);
}

void plot_bars(const std::string& path, const std::vector<double>& values,
               const std::vector<std::string>& labels, const std::string& title) {
    (void)title;
    (void)labels;
    const int W = 640, H = 400, ML = 52, MR = 12, MT = 16, MB = 28;
    Canvas c(W, H);
    c.line(ML, H - MB, W - MR, H - MB, 0, 0, 0);
    c.line(ML, MT, ML, H - MB, 0, 0, 0);
    const int k = int(values.size());
    if (k > 0) {
        const int span = (W - ML - MR) / k;
        for (int i = 0; i < k; ++i) {
            const double v = std::clamp(values[size_t(i)], 0.0, 1.0);
            const int x0 = ML + i * span + span / 6;
            const int x1 = ML + (i + 1) * span - span / 6;
            const int y = H - MB - int(v * (H - MT - MB - 1));
            c.fill_rect(x0, y, x1, H - MB - 1, 70, 110, 190);
            c.text((x0 + x1) / 2 - 3, H - MB + 8, std::to_string(i), 0, 0, 0);
        }
    }
    c.text(4, MT - 2, "1", 0, 0, 0);
    c.text(4, H - MB - 5, "0", 0, 0, 0);
    c.save_png(path);
}

}  // namespace cae
