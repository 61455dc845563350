#include "hopper/terrain.hpp"

#include "hopper/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <tuple>

namespace hopper {

TerrainSpec default_terrain_spec()
{
    TerrainSpec s;
    s.craters.push_back(Crater{Vec2(5.0, 6.0), 1.5, 0.12, 0.03});
    return s;
}

TerrainSpec flat_terrain_spec()
{
    TerrainSpec s;
    s.base_noise_amplitude = 0.0;
    return s;
}

ValidationReport validate_terrain_spec(const TerrainSpec& s)
{
    ValidationReport r;
    if (s.grid_size < 2) r.fail("terrain grid_size must be >= 2");
    if (!(s.extent > 0.0)) r.fail("terrain extent must be positive");
    if (!(s.base_noise_amplitude >= 0.0)) r.fail("terrain noise amplitude must be non-negative");
    if (!(s.noise_cell > 0.0)) r.fail("terrain noise cell must be positive");
    for (std::size_t i = 0; i < s.craters.size(); ++i) {
        const Crater& c = s.craters[i];
        if (!(c.radius > 0.0)) r.fail("crater " + std::to_string(i) + ": radius must be positive");
        if (!(c.depth >= 0.0)) r.fail("crater " + std::to_string(i) + ": depth must be non-negative");
        if (!(c.rim_height >= 0.0)) r.fail("crater " + std::to_string(i) + ": rim height must be non-negative");
    }
    return r;
}

double crater_profile(const Crater& c, double r)
{
    double h = 0.0;
    if (r < c.radius) {
        const double s = std::cos(kPi * r / (2.0 * c.radius));
        h -= c.depth * s * s;
    }
    const double band = kRimBandFraction * c.radius;
    const double off = r - c.radius;
    if (std::abs(off) < band) {
        const double s = std::cos(kPi * off / (2.0 * band));
        h += c.rim_height * s * s;
    }
    return h;
}

Heightfield::Heightfield(int size, double extent, std::vector<double> elevations)
    : size_(size), extent_(extent), grid_(std::move(elevations))
{
    if (size_ < 2 || grid_.size() != static_cast<std::size_t>(size_) * size_)
        throw Error("heightfield: grid does not match size");
    const auto [lo, hi] = std::minmax_element(grid_.begin(), grid_.end());
    min_ = *lo;
    max_ = *hi;
}

namespace {

// Uniform double in [0, 1) from the top 53 bits; avoids the
// implementation-defined std::uniform_real_distribution.
double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

class ValueNoise {
public:
    ValueNoise(double extent, double cell, double amplitude, std::uint64_t seed) : cell_(cell)
    {
        cells_ = static_cast<int>(std::ceil(extent / cell)) + 2;
        std::mt19937_64 rng(seed);
        lattice_.resize(static_cast<std::size_t>(cells_) * cells_);
        for (double& v : lattice_) v = amplitude * (2.0 * unit_uniform(rng) - 1.0);
    }

    double operator()(double x, double y) const
    {
        const double fx = x / cell_;
        const double fy = y / cell_;
        const int ix = std::clamp(static_cast<int>(std::floor(fx)), 0, cells_ - 2);
        const int iy = std::clamp(static_cast<int>(std::floor(fy)), 0, cells_ - 2);
        const double tx = fx - ix;
        const double ty = fy - iy;
        const double a = node(ix, iy) * (1 - tx) + node(ix + 1, iy) * tx;
        const double b = node(ix, iy + 1) * (1 - tx) + node(ix + 1, iy + 1) * tx;
        return a * (1 - ty) + b * ty;
    }

private:
    double node(int ix, int iy) const { return lattice_[static_cast<std::size_t>(iy) * cells_ + ix]; }

    double cell_;
    int cells_ = 0;
    std::vector<double> lattice_;
};

}  // namespace

Heightfield generate_heightfield(const TerrainSpec& spec)
{
    const ValidationReport report = validate_terrain_spec(spec);
    if (!report.passed()) throw Error("invalid terrain spec: " + report.to_string());

    // Canonical crater order so the floating-point sum does not depend on listing order.
    std::vector<Crater> craters = spec.craters;
    std::sort(craters.begin(), craters.end(), [](const Crater& a, const Crater& b) {
        return std::tie(a.center.x(), a.center.y(), a.radius, a.depth, a.rim_height) <
               std::tie(b.center.x(), b.center.y(), b.radius, b.depth, b.rim_height);
    });

    const int n = spec.grid_size;
    const double step = spec.extent / (n - 1);
    std::vector<double> grid(static_cast<std::size_t>(n) * n, 0.0);
    const bool noisy = spec.base_noise_amplitude > 0.0;
    const ValueNoise noise(spec.extent, spec.noise_cell, spec.base_noise_amplitude, spec.rng_seed);

    for (int iy = 0; iy < n; ++iy) {
        for (int ix = 0; ix < n; ++ix) {
            const double x = ix * step;
            const double y = iy * step;
            double h = noisy ? noise(x, y) : 0.0;
            for (const Crater& c : craters) h += crater_profile(c, std::hypot(x - c.center.x(), y - c.center.y()));
            grid[static_cast<std::size_t>(iy) * n + ix] = h;
        }
    }
    return Heightfield(n, spec.extent, std::move(grid));
}

std::vector<std::uint8_t> encode_pgm16(const Heightfield& hf)
{
    const std::string header = "P5\n" + std::to_string(hf.size()) + " " + std::to_string(hf.size()) + "\n65535\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.reserve(out.size() + hf.data().size() * 2);
    const double lo = hf.min_elevation();
    const double span = hf.max_elevation() - lo;
    for (double h : hf.data()) {
        std::uint16_t v = 32768;
        if (span > 0.0) v = static_cast<std::uint16_t>(std::lround((h - lo) / span * 65535.0));
        out.push_back(static_cast<std::uint8_t>(v >> 8));
        out.push_back(static_cast<std::uint8_t>(v & 0xff));
    }
    return out;
}

void export_grayscale(const Heightfield& hf, const std::filesystem::path& path)
{
    const std::vector<std::uint8_t> bytes = encode_pgm16(hf);
    io::write_file_atomic(path, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

Pgm16 read_pgm16(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path.string() + "'");
    std::string magic;
    int maxval = 0;
    Pgm16 img;
    in >> magic >> img.width >> img.height >> maxval;
    if (magic != "P5" || maxval != 65535 || img.width <= 0 || img.height <= 0)
        throw Error("'" + path.string() + "' is not a 16-bit binary PGM");
    in.get();  // single whitespace after maxval
    img.pixels.resize(static_cast<std::size_t>(img.width) * img.height);
    for (auto& px : img.pixels) {
        const int hi = in.get();
        const int lo = in.get();
        if (!in) throw Error("'" + path.string() + "': truncated pixel data");
        px = static_cast<std::uint16_t>((hi << 8) | lo);
    }
    return img;
}

TerrainProfile::TerrainProfile(double spacing, std::vector<double> samples)
    : spacing_(spacing), samples_(std::move(samples))
{
    if (samples_.size() < 2 || !(spacing_ > 0.0)) throw Error("terrain profile needs >= 2 samples and positive spacing");
    const std::size_t n = samples_.size();
    slopes_.resize(n);
    slopes_[0] = (samples_[1] - samples_[0]) / spacing_;
    slopes_[n - 1] = (samples_[n - 1] - samples_[n - 2]) / spacing_;
    for (std::size_t i = 1; i + 1 < n; ++i) slopes_[i] = (samples_[i + 1] - samples_[i - 1]) / (2.0 * spacing_);
}

TerrainProfile TerrainProfile::flat(double length, double height)
{
    return TerrainProfile(length, std::vector<double>{height, height});
}

namespace {

double interpolate(const std::vector<double>& v, double spacing, double x)
{
    const double f = x / spacing;
    if (f <= 0.0) return v.front();
    const auto last = static_cast<double>(v.size() - 1);
    if (f >= last) return v.back();
    const auto i = static_cast<std::size_t>(f);
    const double t = f - static_cast<double>(i);
    return v[i] * (1.0 - t) + v[i + 1] * t;
}

}  // namespace

double TerrainProfile::height(double x) const { return interpolate(samples_, spacing_, x); }

double TerrainProfile::slope(double x) const
{
    if (x < 0.0 || x > length()) return 0.0;
    return interpolate(slopes_, spacing_, x);
}

TerrainProfile profile_slice(const Heightfield& hf, double y)
{
    if (!(y >= 0.0 && y <= hf.extent())) {
        std::ostringstream os;
        os << "profile slice y = " << y << " outside terrain extent [0, " << hf.extent() << "]";
        throw Error(os.str());
    }
    const int n = hf.size();
    const double f = y / hf.spacing();
    const int iy = std::min(static_cast<int>(f), n - 2);
    const double t = f - iy;
    std::vector<double> samples(n);
    for (int ix = 0; ix < n; ++ix) samples[ix] = hf.at(ix, iy) * (1.0 - t) + hf.at(ix, iy + 1) * t;
    return TerrainProfile(hf.spacing(), std::move(samples));
}

}  // namespace hopper
