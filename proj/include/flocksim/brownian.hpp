#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "flocksim/noise.hpp"

namespace flocksim {

// One scalar Brownian path W(t) on a strictly increasing grid with W(0) = 0.
// A single path drives all N particles of one trajectory and the dominating
// comparison process evaluated against it, so pathwise bounds are checked
// against the same realization. Owned by exactly one worker while simulating.
//
// Draws are counter-based: the initial grid consumes one counter per
// increment, and each bridge refinement draw is keyed by (seed, interval id,
// sub-index) where the interval id hashes the endpoint times. Refining never
// perturbs existing node values and never depends on when the refinement
// happens.
struct BrownianPath {
    std::vector<double> times;  // strictly increasing, times[0] = 0
    std::vector<double> values; // values[0] = 0
    std::uint64_t seed = 0;

    // Uniform grid of step dt over [0, horizon], last step possibly shorter.
    static BrownianPath sample(double horizon, double dt, std::uint64_t seed);

    // Arbitrary strictly increasing grid starting at 0.
    static BrownianPath sample_on(std::vector<double> grid, std::uint64_t seed);

    // Brownian-bridge refinement of the interval between two adjacent nodes
    // t0 < t1 into `parts` equal sub-steps (parts-1 inserted nodes).
    // GridError if t0, t1 are not adjacent nodes.
    void refine(double t0, double t1, int parts);

    std::size_t node_count() const { return times.size(); }

    // Index of the node with time exactly t; GridError if absent.
    std::size_t find_node(double t) const;
    double value_at(double t) const { return values[find_node(t)]; }

    // Little-endian binary image: u64 seed, u64 node count, then f64
    // time/value pairs. For replay debugging.
    void dump(std::ostream& os) const;
    static BrownianPath load(std::istream& is);
};

// Value-returning refinement; the input path is untouched.
BrownianPath refine(const BrownianPath& path, double t0, double t1, int parts);

// M_t = int_0^t D dW accumulated by left-endpoint Ito sums at the path grid
// nodes; [M]_t from the noise closed form at the same nodes.
struct MartingaleTrack {
    std::vector<double> times;
    std::vector<double> m_values;
    std::vector<double> qv_values;

    std::size_t find_node(double t) const;
};

MartingaleTrack stochastic_integral(const BrownianPath& path, const NoiseIntensity& noise);

} // namespace flocksim
