#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "flocksim/analysis.hpp"
#include "flocksim/integrator.hpp"

namespace flocksim {

// PathsOnly runs sample the driving noise and its martingale track without
// integrating particles (distribution studies of W-functionals).
enum class RunMode { Full, PathsOnly };

struct Scenario {
    std::string name = "scenario";
    SystemConfig cfg;
    StepController ctrl;
    double horizon = 5.0;
    double output_dt = 0.5;
    long n_paths = 1000;
    std::uint64_t master_seed = 1;
    std::vector<double> p_list{2.0};
    RunMode mode = RunMode::Full;

    // Initial-data/noise event classification (constant intensity only).
    bool event_enabled = false;
    double event_beta = 4.0;
    double event_q = 2.0;
    double event_t_trunc = 0.0; // <= 0: 50 / drift
    double event_c_lil = 0.0;
    double event_const = 0.0; // <= 0: built-in constant
    double tail_dt = 0.0;     // W step past the horizon for the event integral; 0 = dt_base

    enum class FitModel { None, Exponential, Algebraic };
    FitModel fit_model = FitModel::None;
    double fit_lo = 0.0, fit_hi = 0.0; // both 0: window [0.2 horizon, horizon]

    std::vector<double> output_grid() const; // multiples of output_dt, horizon last
    EventAParams event_params() const;
    void fit_window(double& lo, double& hi) const;
    void validate() const;
    std::string serialize() const;
};

// Line-oriented key=value text with [system], [controller], [analysis]
// sections; '#' starts a comment line. Unknown sections or keys are errors;
// missing keys keep their defaults, so serialize(parse(text)) is canonical.
Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::string& file_path); // IoError on read failure

// The eight standing scenarios, in suite order.
std::vector<Scenario> builtin_scenarios();
Scenario builtin_scenario(const std::string& name); // ConfigError if unknown

} // namespace flocksim
