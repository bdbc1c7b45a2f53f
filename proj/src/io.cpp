#include "segsolve/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace segsolve {

void write_fields(const Grid& g, const State& s, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw IoError("cannot open for writing: " + path);
    std::fputs("x,y", f);
    for (int i = 0; i < s.k(); ++i) std::fprintf(f, ",u_%d", i + 1);
    std::fputc('\n', f);
    for (int q = 0; q < g.num_nodes(); ++q) {
        std::fprintf(f, "%.17g,%.17g", g.x(q), g.y(q));
        for (int i = 0; i < s.k(); ++i) std::fprintf(f, ",%.17g", s.u[i][q]);
        std::fputc('\n', f);
    }
    if (std::fclose(f) != 0) throw IoError("write failed: " + path);
}

State read_fields(const Grid& g, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open: " + path);
    std::string header;
    if (!std::getline(in, header)) throw IoError("empty fields file: " + path);

    int k = 0;
    {
        std::istringstream hs(header);
        std::string col;
        std::vector<std::string> cols;
        while (std::getline(hs, col, ',')) cols.push_back(col);
        if (cols.size() < 3 || cols[0] != "x" || cols[1] != "y")
            throw IoError(path + ": malformed header '" + header + "'");
        for (size_t c = 2; c < cols.size(); ++c) {
            const std::string expect = "u_" + std::to_string(c - 1);
            if (cols[c] != expect) throw IoError(path + ": expected column " + expect);
        }
        k = static_cast<int>(cols.size()) - 2;
    }

    State s;
    s.u.assign(k, Field(g, 0.0));
    std::string line;
    for (int q = 0; q < g.num_nodes(); ++q) {
        if (!std::getline(in, line))
            throw IoError(path + ": truncated after " + std::to_string(q) + " rows");
        const char* ptr = line.c_str();
        char* end = nullptr;
        const double x = std::strtod(ptr, &end);
        if (*end != ',') throw IoError(path + ": malformed row " + std::to_string(q + 2));
        ptr = end + 1;
        const double y = std::strtod(ptr, &end);
        if (x != g.x(q) || y != g.y(q))
            throw IoError(path + ": node coordinates do not match the grid at row " +
                          std::to_string(q + 2));
        for (int i = 0; i < k; ++i) {
            if (*end != ',') throw IoError(path + ": malformed row " + std::to_string(q + 2));
            ptr = end + 1;
            s.u[i][q] = std::strtod(ptr, &end);
        }
    }
    return s;
}

void write_ppm(const RasterImage& img, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw IoError("cannot open for writing: " + path);
    std::fprintf(f, "P6\n%d %d\n255\n", img.w, img.h);
    std::fwrite(img.rgb.data(), 1, img.rgb.size(), f);
    if (std::fclose(f) != 0) throw IoError("write failed: " + path);
}

RasterImage read_ppm(const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "rb");
    if (!f) throw IoError("cannot open: " + path);
    RasterImage img;
    int maxval = 0;
    if (std::fscanf(f, "P6 %d %d %d", &img.w, &img.h, &maxval) != 3 || maxval != 255) {
        std::fclose(f);
        throw IoError("not a P6/255 raster: " + path);
    }
    std::fgetc(f);  // single whitespace after the header
    img.rgb.resize(static_cast<size_t>(img.w) * img.h * 3);
    const size_t got = std::fread(img.rgb.data(), 1, img.rgb.size(), f);
    std::fclose(f);
    if (got != img.rgb.size()) throw IoError("truncated raster: " + path);
    return img;
}

std::array<std::uint8_t, 3> density_color(int i) {
    static const std::array<std::uint8_t, 3> palette[] = {
        {220, 60, 60}, {60, 90, 220}, {60, 185, 90}, {230, 160, 40}, {160, 70, 200}, {60, 190, 190},
    };
    return palette[i % 6];
}

RasterImage render_partition(const Grid& g, const State& s, const NodalReport& report) {
    RasterImage img;
    img.w = g.nx();
    img.h = g.ny();
    img.rgb.assign(static_cast<size_t>(img.w) * img.h * 3, 0);

    double umax = 0;
    for (int i = 0; i < s.k(); ++i)
        for (int q = 0; q < g.num_nodes(); ++q)
            if (g.masked_in(q)) umax = std::max(umax, s.u[i][q]);
    if (umax <= 0) umax = 1;

    for (int q = 0; q < g.num_nodes(); ++q) {
        const int px_x = g.node_i(q);
        const int px_y = g.ny() - 1 - g.node_j(q);  // top image row = largest y
        std::uint8_t* px = img.px(px_x, px_y);
        if (!g.masked_in(q)) {
            px[0] = px[1] = px[2] = 90;
            continue;
        }
        int best = -1;
        double top = 1e-12;
        for (int i = 0; i < s.k(); ++i)
            if (s.u[i][q] > top) {
                top = s.u[i][q];
                best = i;
            }
        if (best < 0) {
            px[0] = px[1] = px[2] = 25;
            continue;
        }
        const auto c = density_color(best);
        const double scale = 0.35 + 0.65 * std::min(top / umax, 1.0);
        px[0] = static_cast<std::uint8_t>(c[0] * scale);
        px[1] = static_cast<std::uint8_t>(c[1] * scale);
        px[2] = static_cast<std::uint8_t>(c[2] * scale);
    }

    auto put = [&](double x, double y, std::uint8_t r, std::uint8_t gg, std::uint8_t b) {
        const int i = static_cast<int>(std::lround(x / g.h()));
        const int j = static_cast<int>(std::lround(y / g.h()));
        if (i < 0 || i >= g.nx() || j < 0 || j >= g.ny()) return;
        std::uint8_t* px = img.px(i, g.ny() - 1 - j);
        px[0] = r;
        px[1] = gg;
        px[2] = b;
    };

    for (const Polyline& pl : report.interfaces)
        for (const auto& pt : pl.points) put(pt[0], pt[1], 255, 255, 255);

    for (const MultiplePoint& mp : report.multiple_points) {
        put(mp.x, mp.y, 255, 255, 0);
        for (int d = 1; d <= 2; ++d) {
            put(mp.x + d * g.h(), mp.y, 255, 255, 0);
            put(mp.x - d * g.h(), mp.y, 255, 255, 0);
            put(mp.x, mp.y + d * g.h(), 255, 255, 0);
            put(mp.x, mp.y - d * g.h(), 255, 255, 0);
        }
    }
    return img;
}

}  // namespace segsolve
