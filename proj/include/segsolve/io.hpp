#ifndef SEGSOLVE_IO_HPP
#define SEGSOLVE_IO_HPP

#include <string>
#include <vector>

#include "segsolve/nodal.hpp"
#include "segsolve/segregation.hpp"

namespace segsolve {

class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Plain-text field table. Header "x,y,u_1,...,u_k", one row per node in
/// row-major order, full decimal precision.
void write_fields(const Grid& g, const State& s, const std::string& path);
State read_fields(const Grid& g, const std::string& path);

/// Binary PPM (P6): "P6\n<w> <h>\n255\n" then rows of RGB bytes, top row first.
/// The top image row is the grid's largest-y node row.
struct RasterImage {
    int w = 0, h = 0;
    std::vector<std::uint8_t> rgb;  // 3 bytes per pixel, row-major
    std::uint8_t* px(int x, int y) { return rgb.data() + 3 * (static_cast<size_t>(y) * w + x); }
    const std::uint8_t* px(int x, int y) const {
        return rgb.data() + 3 * (static_cast<size_t>(y) * w + x);
    }
};

void write_ppm(const RasterImage& img, const std::string& path);
RasterImage read_ppm(const std::string& path);

/// One pixel per node: densities colored by a fixed palette scaled with intensity,
/// interfaces overdrawn in white, multiple points marked, masked-out nodes gray.
RasterImage render_partition(const Grid& g, const State& s, const NodalReport& report);

/// Fixed palette color of a density (0-based), full intensity.
std::array<std::uint8_t, 3> density_color(int i);

}  // namespace segsolve

#endif
