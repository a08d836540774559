#include "flocksim/brownian.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>

#include "flocksim/errors.hpp"
#include "flocksim/rng.hpp"

namespace flocksim {

namespace {

std::uint64_t interval_id(double t0, double t1) {
    const auto a = std::bit_cast<std::uint64_t>(t0);
    const auto b = std::bit_cast<std::uint64_t>(t1);
    return a ^ std::rotl(b, 31);
}

std::size_t lookup(const std::vector<double>& times, double t) {
    auto it = std::lower_bound(times.begin(), times.end(), t);
    if (it == times.end() || *it != t)
        throw GridError("time is not a grid node");
    return static_cast<std::size_t>(it - times.begin());
}

} // namespace

BrownianPath BrownianPath::sample(double horizon, double dt, std::uint64_t seed) {
    if (!(horizon > 0.0) || !(dt > 0.0) || dt > horizon)
        throw ConfigError("sample_path: need 0 < dt <= horizon");
    std::vector<double> grid;
    grid.reserve(static_cast<std::size_t>(horizon / dt) + 2);
    grid.push_back(0.0);
    for (std::size_t k = 1;; ++k) {
        const double t = static_cast<double>(k) * dt;
        if (t >= horizon) break;
        grid.push_back(t);
    }
    grid.push_back(horizon);
    return sample_on(std::move(grid), seed);
}

BrownianPath BrownianPath::sample_on(std::vector<double> grid, std::uint64_t seed) {
    if (grid.empty() || grid[0] != 0.0)
        throw ConfigError("sample_on: grid must start at 0");
    for (std::size_t k = 1; k < grid.size(); ++k)
        if (!(grid[k] > grid[k - 1]))
            throw ConfigError("sample_on: grid must be strictly increasing");
    BrownianPath p;
    p.seed = seed;
    p.times = std::move(grid);
    p.values.resize(p.times.size());
    p.values[0] = 0.0;
    double w = 0.0;
    for (std::size_t k = 1; k < p.times.size(); ++k) {
        const double h = p.times[k] - p.times[k - 1];
        w += std::sqrt(h) * rng::gaussian(rng::hash2(seed, k - 1));
        p.values[k] = w;
    }
    return p;
}

void BrownianPath::refine(double t0, double t1, int parts) {
    if (parts < 2) throw GridError("refine: parts must be >= 2");
    const std::size_t i0 = lookup(times, t0);
    if (i0 + 1 >= times.size() || times[i0 + 1] != t1)
        throw GridError("refine: nodes are not adjacent");
    const double a = values[i0];
    const double b = values[i0 + 1];
    const std::uint64_t id = interval_id(t0, t1);
    const double span = t1 - t0;

    std::vector<double> nt(static_cast<std::size_t>(parts) - 1);
    std::vector<double> nv(nt.size());
    double s_prev = t0;
    double w_prev = a;
    for (int j = 1; j < parts; ++j) {
        const double s = t0 + span * (static_cast<double>(j) / parts);
        // Conditional law of W(s) given W(s_prev) = w_prev and W(t1) = b.
        const double rem = t1 - s_prev;
        const double frac = (s - s_prev) / rem;
        const double mean = w_prev + frac * (b - w_prev);
        const double var = (t1 - s) * (s - s_prev) / rem;
        const double z = rng::gaussian(rng::hash3(seed, id, static_cast<std::uint64_t>(j)));
        const double w = mean + std::sqrt(var) * z;
        nt[static_cast<std::size_t>(j) - 1] = s;
        nv[static_cast<std::size_t>(j) - 1] = w;
        s_prev = s;
        w_prev = w;
    }
    times.insert(times.begin() + static_cast<std::ptrdiff_t>(i0) + 1, nt.begin(), nt.end());
    values.insert(values.begin() + static_cast<std::ptrdiff_t>(i0) + 1, nv.begin(), nv.end());
}

std::size_t BrownianPath::find_node(double t) const { return lookup(times, t); }

BrownianPath refine(const BrownianPath& path, double t0, double t1, int parts) {
    BrownianPath copy = path;
    copy.refine(t0, t1, parts);
    return copy;
}

void BrownianPath::dump(std::ostream& os) const {
    auto put_u64 = [&os](std::uint64_t v) {
        unsigned char buf[8];
        for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
        os.write(reinterpret_cast<const char*>(buf), 8);
    };
    put_u64(seed);
    put_u64(static_cast<std::uint64_t>(times.size()));
    for (std::size_t k = 0; k < times.size(); ++k) {
        put_u64(std::bit_cast<std::uint64_t>(times[k]));
        put_u64(std::bit_cast<std::uint64_t>(values[k]));
    }
    if (!os) throw IoError("path dump failed");
}

BrownianPath BrownianPath::load(std::istream& is) {
    auto get_u64 = [&is]() {
        unsigned char buf[8];
        is.read(reinterpret_cast<char*>(buf), 8);
        if (!is) throw IoError("path load: truncated stream");
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
        return v;
    };
    BrownianPath p;
    p.seed = get_u64();
    const std::uint64_t n = get_u64();
    p.times.resize(n);
    p.values.resize(n);
    for (std::uint64_t k = 0; k < n; ++k) {
        p.times[k] = std::bit_cast<double>(get_u64());
        p.values[k] = std::bit_cast<double>(get_u64());
    }
    return p;
}

std::size_t MartingaleTrack::find_node(double t) const { return lookup(times, t); }

MartingaleTrack stochastic_integral(const BrownianPath& path, const NoiseIntensity& noise) {
    if (path.times.empty()) throw GridError("stochastic_integral: empty path");
    MartingaleTrack tr;
    tr.times = path.times;
    tr.m_values.resize(path.times.size());
    tr.qv_values.resize(path.times.size());
    tr.m_values[0] = 0.0;
    tr.qv_values[0] = noise.quad_variation(path.times[0]);
    double m = 0.0;
    for (std::size_t k = 1; k < path.times.size(); ++k) {
        m += noise.at(path.times[k - 1]) * (path.values[k] - path.values[k - 1]);
        tr.m_values[k] = m;
        tr.qv_values[k] = noise.quad_variation(path.times[k]);
    }
    return tr;
}

} // namespace flocksim
