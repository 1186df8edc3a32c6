#include "lqg/field.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>

namespace lqg {

GridSpec Field::valid_window() const { return shrink_window(grid, valid_margin); }

Field constant_field(const GridSpec& g, double c) { return Field(g, c); }

Field add(const Field& a, const Field& b) {
    if (!(a.grid == b.grid)) throw std::invalid_argument("add: grid mismatch");
    Field out = a;
    for (size_t k = 0; k < out.values.size(); ++k) out.values[k] += b.values[k];
    out.valid_margin = std::max(a.valid_margin, b.valid_margin);
    return out;
}

Field add_constant(const Field& a, double c) {
    Field out = a;
    for (auto& v : out.values) v += c;
    return out;
}

double interp_bilinear(const Field& f, Complex z) {
    const GridSpec& g = f.grid;
    if (!g.contains(z)) throw std::invalid_argument("interp_bilinear: point outside window");
    double fx = (z.real() - g.xmin()) / g.spacing;
    double fy = (z.imag() - g.ymin()) / g.spacing;
    int i0 = std::min(static_cast<int>(std::floor(fx)), g.nx - 2);
    int j0 = std::min(static_cast<int>(std::floor(fy)), g.ny - 2);
    double tx = fx - i0;
    double ty = fy - j0;
    double v00 = f.at(i0, j0), v10 = f.at(i0 + 1, j0);
    double v01 = f.at(i0, j0 + 1), v11 = f.at(i0 + 1, j0 + 1);
    return (1 - tx) * (1 - ty) * v00 + tx * (1 - ty) * v10 + (1 - tx) * ty * v01 + tx * ty * v11;
}

namespace {

inline void catmull_rom_weights(double t, double w[4]) {
    double t2 = t * t, t3 = t2 * t;
    w[0] = 0.5 * (-t3 + 2 * t2 - t);
    w[1] = 0.5 * (3 * t3 - 5 * t2 + 2);
    w[2] = 0.5 * (-3 * t3 + 4 * t2 + t);
    w[3] = 0.5 * (t3 - t2);
}

}  // namespace

double bicubic_margin(const GridSpec& g) { return 1.000001 * g.spacing; }

double interp_bicubic(const Field& f, Complex z) {
    const GridSpec& g = f.grid;
    double fx = (z.real() - g.xmin()) / g.spacing;
    double fy = (z.imag() - g.ymin()) / g.spacing;
    int i0 = static_cast<int>(std::floor(fx));
    int j0 = static_cast<int>(std::floor(fy));
    // clamp so points on the inner boundary of the allowed region still work
    i0 = std::min(std::max(i0, 1), g.nx - 3);
    j0 = std::min(std::max(j0, 1), g.ny - 3);
    double tx = fx - i0;
    double ty = fy - j0;
    if (tx < -1e-9 || tx > 1.0 + 1e-9 || ty < -1e-9 || ty > 1.0 + 1e-9)
        throw std::invalid_argument("interp_bicubic: point too close to window boundary");
    double wx[4], wy[4];
    catmull_rom_weights(tx, wx);
    catmull_rom_weights(ty, wy);
    double acc = 0.0;
    for (int dj = -1; dj <= 2; ++dj) {
        double row = 0.0;
        for (int di = -1; di <= 2; ++di) row += wx[di + 1] * f.at(i0 + di, j0 + dj);
        acc += wy[dj + 1] * row;
    }
    return acc;
}

namespace {

constexpr char kMagic[4] = {'L', 'Q', 'G', 'F'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ofstream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::ifstream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw std::runtime_error("field read: truncated file");
    return v;
}

}  // namespace

void write_field(const std::string& path, const Field& f) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("write_field: cannot open " + path);
    os.write(kMagic, 4);
    put(os, kVersion);
    put(os, static_cast<std::uint32_t>(f.grid.nx));
    put(os, static_cast<std::uint32_t>(f.grid.ny));
    put(os, f.grid.spacing);
    put(os, f.grid.origin.real());
    put(os, f.grid.origin.imag());
    put(os, f.valid_margin);
    os.write(reinterpret_cast<const char*>(f.values.data()),
             static_cast<std::streamsize>(f.values.size() * sizeof(double)));
    if (!os) throw std::runtime_error("write_field: write failed for " + path);
}

Field read_field(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("read_field: cannot open " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0)
        throw std::runtime_error("read_field: bad magic in " + path);
    auto version = get<std::uint32_t>(is);
    if (version != kVersion) throw std::runtime_error("read_field: unsupported version");
    auto nx = get<std::uint32_t>(is);
    auto ny = get<std::uint32_t>(is);
    double spacing = get<double>(is);
    double ox = get<double>(is);
    double oy = get<double>(is);
    double margin = get<double>(is);
    Field f(GridSpec({ox, oy}, spacing, static_cast<int>(nx), static_cast<int>(ny)));
    f.valid_margin = margin;
    is.read(reinterpret_cast<char*>(f.values.data()),
            static_cast<std::streamsize>(f.values.size() * sizeof(double)));
    if (!is) throw std::runtime_error("read_field: truncated payload in " + path);
    return f;
}

void write_field_csv(const std::string& path, const Field& f) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw std::runtime_error("write_field_csv: cannot open " + path);
    os << "x,y,value\n";
    char buf[96];
    for (int j = 0; j < f.grid.ny; ++j)
        for (int i = 0; i < f.grid.nx; ++i) {
            Complex z = f.grid.vertex(i, j);
            std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", z.real(), z.imag(), f.at(i, j));
            os << buf;
        }
}

}  // namespace lqg
