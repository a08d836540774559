#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "flocksim/brownian.hpp"
#include "flocksim/kernels.hpp"
#include "flocksim/noise.hpp"

namespace flocksim {

// Initial-data samplers. All of them re-center positions and velocities so
// that the particle sums vanish; the pre-centering means are reported back as
// the macro state. Parameter meaning per kind:
//   uniform_gauss:R:SV  x ~ Uniform[-R,R]^d, v ~ Normal(0, SV^2)^d
//   gauss:SX:SV         x ~ Normal(0, SX^2)^d, v ~ Normal(0, SV^2)^d
//   lattice:R:V         x equally spaced on the first axis in [-R,R],
//                       v alternating +-V on the first axis (diagnostics)
//   crossing:R:V        x as lattice, v = -(V/R) x (adversarial head-on data)
//   two_particle:X0:V0  N=2, d=1, relative state (x1-x2, v1-v2) = (X0, V0)
//   zero                all zeros; N=1 only (the trivial centered orbit)
struct InitialSampler {
    enum class Kind { UniformGauss, Gauss, Lattice, Crossing, TwoParticle, Zero };

    Kind kind = Kind::UniformGauss;
    double p1 = 1.0;
    double p2 = 1.0;

    // Raw draw, before centering. x and v are resized to n*d, row-major.
    void sample(std::uint64_t key, int n, int d,
                std::vector<double>& x, std::vector<double>& v) const;

    std::string config_string() const;
};

InitialSampler parse_sampler(const std::string& spec);

struct SystemConfig {
    int n = 2;
    int d = 1;
    double lambda = 1.0;
    Kernel kernel;
    NoiseIntensity noise;
    InitialSampler sampler;
};

struct SystemState {
    double t = 0.0;
    std::vector<double> x, v; // n*d, row-major
    double w_now = 0.0;       // W(t)
    double m_now = 0.0;       // M_t, left-endpoint Ito sum
    double qv_now = 0.0;      // [M]_t, closed form
    double min_dist = std::numeric_limits<double>::infinity();
    double vnorm2 = 0.0;      // cached l2 norm of v
};

// Step-size and cutoff policy. The cutoff radii decrease strictly from a1
// down to collision_threshold; the active radius is always strictly below the
// current minimum separation, so clamping never changes an evaluated kernel
// value. Its role is to keep the drift total if a step lands closer than the
// distance it was chosen for.
struct StepController {
    double dt_base = 1e-3;
    double dt_min = 1e-8;
    double c_cfl = 0.1; // dt_eff = min(dt_base, c_cfl * min_dist / (1 + |v|_2))
    double cutoff_a1 = 1e-2;
    double cutoff_ratio = 0.5;
    double collision_threshold = 1e-6;

    std::vector<double> cutoff_sequence() const;
    double dt_eff(double min_dist, double vnorm2) const;
};

enum class PathStatus { Completed, Collided };
enum class EventClass { InA, NotInA, Indeterminate };

struct CollisionRecord {
    double time = 0.0; // first output time at which min_dist is below threshold
    int i = 0, j = 0;  // offending pair
};

// Relative state of the two-particle scalar system, recorded on the output
// grid (N=2, d=1 runs only).
struct RelativeSeries {
    std::vector<double> x; // x1 - x2
    std::vector<double> v; // v1 - v2
};

struct PathResult {
    std::uint64_t seed = 0; // per-path seed token
    PathStatus status = PathStatus::Completed;
    std::vector<double> sample_times;
    std::vector<double> p_list;

    // Series indexed [p][time].
    std::vector<std::vector<double>> xnorm, vnorm;
    std::vector<std::vector<double>> vint; // running sum of |v|_p * dt over steps
    std::vector<double> min_dist;
    std::vector<double> m_values, qv_values;
    double max_vsum = 0.0; // largest |sum_i v_i|_2 seen at output times; stays near 0

    std::vector<double> macro_x0, macro_v0; // pre-centering means, d each
    std::optional<CollisionRecord> collision;
    std::optional<RelativeSeries> relative;

    // Filled by ensemble-level analysis passes.
    std::optional<EventClass> event_class;
    double event_integral = 0.0;
    double event_tail = 0.0;
    double event_g_low = 0.0;
};

// Alignment drift b_i = (lambda/N) sum_j psi^n(|x_i-x_j|)(v_j-v_i) under the
// active cutoff kernel. Pairwise contributions are accumulated antisymmetrically,
// so the particle sum of the result vanishes up to rounding.
std::vector<double> drift(const SystemState& state, const SystemConfig& cfg,
                          const CutoffKernel& active);
void drift_into(const SystemState& state, const SystemConfig& cfg,
                const CutoffKernel& active, std::vector<double>& out);

// One explicit Euler-Maruyama step:
//   x+ = x + v dt,  v+ = v + b dt + D(t) v dW,  t+ = t + dt.
// Caches (min_dist, vnorm2, m_now, qv_now, w_now) are refreshed.
// NumericalError if any coordinate is non-finite afterwards.
SystemState em_step(const SystemState& state, double dt, double dW,
                    const SystemConfig& cfg, const CutoffKernel& active);
void em_step_inplace(SystemState& state, double dt, double dW,
                     const SystemConfig& cfg, const CutoffKernel& active);

// Centered integration of one trajectory along `path`, which must cover
// [0, horizon]; the path is refined in place wherever the controller shrinks
// below its grid. Outputs are recorded at the first node reaching each output
//-grid time. On the first step with min_dist below the collision threshold
// the state freezes and the remaining outputs repeat it (status Collided).
PathResult simulate_on_path(const SystemConfig& cfg, const StepController& ctrl,
                            double horizon, BrownianPath& path, std::uint64_t path_seed,
                            const std::vector<double>& output_grid,
                            const std::vector<double>& p_list);

// Convenience wrapper: samples a fresh path on the uniform dt_base grid.
PathResult simulate_path(const SystemConfig& cfg, const StepController& ctrl,
                         double horizon, std::uint64_t path_seed,
                         const std::vector<double>& output_grid,
                         const std::vector<double>& p_list);

// Center-of-mass split: mean = (1/n) sum of rows, centered = input - mean.
void decompose(const std::vector<double>& raw, int n, int d,
               std::vector<double>& mean, std::vector<double>& centered);

// Exact macro dynamics: xbar(t) = xbar0 + vbar0 t, vbar(t) = vbar0.
void macro_evolution(const std::vector<double>& xbar0, const std::vector<double>& vbar0,
                     double t, std::vector<double>& xbar, std::vector<double>& vbar);

// Outer l^p over particles of inner Euclidean norms; p in [2, inf].
double lp_norm(const std::vector<double>& y, int n, int d, double p);

// Pairwise minimum separation; +inf for n < 2.
double min_pair_distance(const std::vector<double>& x, int n, int d);

} // namespace flocksim
