#include "flocksim/scenario.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "flocksim/errors.hpp"
#include "flocksim/numfmt.hpp"

namespace flocksim {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::uint64_t parse_u64(const std::string& s) {
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        throw ConfigError("scenario: bad unsigned integer '" + s + "'");
    return v;
}

std::string p_list_string(const std::vector<double>& ps) {
    std::string out;
    for (std::size_t i = 0; i < ps.size(); ++i) {
        if (i) out += ',';
        out += num_to_string(ps[i]);
    }
    return out;
}

std::vector<double> parse_p_list(const std::string& s) {
    std::vector<double> out;
    std::string cur;
    std::stringstream ss(s);
    while (std::getline(ss, cur, ',')) {
        cur = trim(cur);
        if (!cur.empty()) out.push_back(parse_double(cur, "p_list"));
    }
    return out;
}

} // namespace

std::vector<double> Scenario::output_grid() const {
    std::vector<double> grid{0.0};
    for (long k = 1;; ++k) {
        double t = static_cast<double>(k) * output_dt;
        if (t >= horizon * (1.0 - 1e-12)) break;
        grid.push_back(t);
    }
    grid.push_back(horizon);
    return grid;
}

EventAParams Scenario::event_params() const {
    EventAParams p;
    p.beta = event_beta;
    p.q = event_q;
    p.lambda = cfg.lambda;
    p.D = cfg.noise.d0();
    p.t_trunc = event_t_trunc;
    p.c_lil = event_c_lil;
    p.const_factor = event_const;
    return p;
}

void Scenario::fit_window(double& lo, double& hi) const {
    if (fit_lo < fit_hi) {
        lo = fit_lo;
        hi = fit_hi;
    } else {
        lo = 0.2 * horizon;
        hi = horizon;
    }
}

void Scenario::validate() const {
    if (name.empty()) throw ConfigError("scenario: empty name");
    if (cfg.n < 1 || cfg.d < 1) throw ConfigError("scenario: need n >= 1 and d >= 1");
    if (!(cfg.lambda >= 0.0)) throw ConfigError("scenario: lambda must be nonnegative");
    if (!(horizon > 0.0)) throw ConfigError("scenario: horizon must be positive");
    if (!(output_dt > 0.0) || output_dt > horizon)
        throw ConfigError("scenario: output_dt must lie in (0, horizon]");
    if (n_paths < 0) throw ConfigError("scenario: negative path count");
    if (!(ctrl.dt_base > 0.0) || !(ctrl.dt_min > 0.0) || ctrl.dt_min > ctrl.dt_base)
        throw ConfigError("scenario: need 0 < dt_min <= dt_base");
    if (!(ctrl.c_cfl > 0.0)) throw ConfigError("scenario: c_cfl must be positive");
    if (mode == RunMode::Full && p_list.empty())
        throw ConfigError("scenario: full runs need at least one norm");
    for (double p : p_list)
        if (!(p >= 2.0)) throw ConfigError("scenario: norms require p >= 2");
    if (cfg.sampler.kind == InitialSampler::Kind::TwoParticle && (cfg.n != 2 || cfg.d != 1))
        throw ConfigError("scenario: two_particle initial data needs n=2, d=1");
    if (cfg.sampler.kind == InitialSampler::Kind::Zero && cfg.n != 1)
        throw ConfigError("scenario: zero initial data needs n=1");
    if (tail_dt < 0.0) throw ConfigError("scenario: tail_dt must be nonnegative");
    if (event_enabled) {
        if (cfg.noise.family() != NoiseFamily::Constant)
            throw ConfigError("scenario: event classification needs constant intensity");
        try {
            event_params().validate();
        } catch (const DomainError& e) {
            throw ConfigError(std::string("scenario: ") + e.what());
        }
        if (mode == RunMode::Full) {
            bool found = false;
            for (double p : p_list)
                if (p == event_q) found = true;
            if (!found)
                throw ConfigError("scenario: event norm q must appear in p_list");
        }
    }
}

std::string Scenario::serialize() const {
    std::string out;
    out += "[system]\n";
    out += "n = " + std::to_string(cfg.n) + "\n";
    out += "d = " + std::to_string(cfg.d) + "\n";
    out += "lambda = " + num_to_string(cfg.lambda) + "\n";
    out += "kernel = " + cfg.kernel.config_string() + "\n";
    out += "noise = " + cfg.noise.config_string() + "\n";
    out += "init = " + cfg.sampler.config_string() + "\n";
    out += "\n[controller]\n";
    out += "dt_base = " + num_to_string(ctrl.dt_base) + "\n";
    out += "dt_min = " + num_to_string(ctrl.dt_min) + "\n";
    out += "c_cfl = " + num_to_string(ctrl.c_cfl) + "\n";
    out += "cutoff_a1 = " + num_to_string(ctrl.cutoff_a1) + "\n";
    out += "cutoff_ratio = " + num_to_string(ctrl.cutoff_ratio) + "\n";
    out += "collision_threshold = " + num_to_string(ctrl.collision_threshold) + "\n";
    out += "\n[analysis]\n";
    out += "name = " + name + "\n";
    out += "horizon = " + num_to_string(horizon) + "\n";
    out += "output_dt = " + num_to_string(output_dt) + "\n";
    out += "paths = " + std::to_string(n_paths) + "\n";
    out += "seed = " + std::to_string(master_seed) + "\n";
    out += "p_list = " + p_list_string(p_list) + "\n";
    out += std::string("mode = ") + (mode == RunMode::Full ? "full" : "paths_only") + "\n";
    out += std::string("event = ") + (event_enabled ? "1" : "0") + "\n";
    out += "event_beta = " + num_to_string(event_beta) + "\n";
    out += "event_q = " + num_to_string(event_q) + "\n";
    out += "event_t_trunc = " + num_to_string(event_t_trunc) + "\n";
    out += "event_c_lil = " + num_to_string(event_c_lil) + "\n";
    out += "event_const = " + num_to_string(event_const) + "\n";
    out += "tail_dt = " + num_to_string(tail_dt) + "\n";
    out += std::string("fit = ") +
           (fit_model == FitModel::None ? "none"
            : fit_model == FitModel::Exponential ? "exp"
                                                 : "alg") +
           "\n";
    out += "fit_lo = " + num_to_string(fit_lo) + "\n";
    out += "fit_hi = " + num_to_string(fit_hi) + "\n";
    return out;
}

Scenario parse_scenario(const std::string& text) {
    Scenario sc;
    std::string section;
    std::stringstream ss(text);
    std::string raw;
    while (std::getline(ss, raw)) {
        std::string line = trim(raw);
        if (line.empty() || line[0] == '#') continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError("scenario: malformed section '" + line + "'");
            section = line.substr(1, line.size() - 2);
            if (section != "system" && section != "controller" && section != "analysis")
                throw ConfigError("scenario: unknown section [" + section + "]");
            continue;
        }
        std::size_t eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("scenario: expected key=value, got '" + line + "'");
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (section.empty()) throw ConfigError("scenario: key '" + key + "' before any section");

        if (section == "system") {
            if (key == "n")
                sc.cfg.n = static_cast<int>(parse_long(val, key.c_str()));
            else if (key == "d")
                sc.cfg.d = static_cast<int>(parse_long(val, key.c_str()));
            else if (key == "lambda")
                sc.cfg.lambda = parse_double(val, key.c_str());
            else if (key == "kernel")
                sc.cfg.kernel = parse_kernel(val);
            else if (key == "noise")
                sc.cfg.noise = parse_noise(val);
            else if (key == "init")
                sc.cfg.sampler = parse_sampler(val);
            else
                throw ConfigError("scenario: unknown key '" + key + "' in [system]");
        } else if (section == "controller") {
            if (key == "dt_base")
                sc.ctrl.dt_base = parse_double(val, key.c_str());
            else if (key == "dt_min")
                sc.ctrl.dt_min = parse_double(val, key.c_str());
            else if (key == "c_cfl")
                sc.ctrl.c_cfl = parse_double(val, key.c_str());
            else if (key == "cutoff_a1")
                sc.ctrl.cutoff_a1 = parse_double(val, key.c_str());
            else if (key == "cutoff_ratio")
                sc.ctrl.cutoff_ratio = parse_double(val, key.c_str());
            else if (key == "collision_threshold")
                sc.ctrl.collision_threshold = parse_double(val, key.c_str());
            else
                throw ConfigError("scenario: unknown key '" + key + "' in [controller]");
        } else {
            if (key == "name")
                sc.name = val;
            else if (key == "horizon")
                sc.horizon = parse_double(val, key.c_str());
            else if (key == "output_dt")
                sc.output_dt = parse_double(val, key.c_str());
            else if (key == "paths")
                sc.n_paths = parse_long(val, key.c_str());
            else if (key == "seed")
                sc.master_seed = parse_u64(val);
            else if (key == "p_list")
                sc.p_list = parse_p_list(val);
            else if (key == "mode") {
                if (val == "full")
                    sc.mode = RunMode::Full;
                else if (val == "paths_only")
                    sc.mode = RunMode::PathsOnly;
                else
                    throw ConfigError("scenario: mode must be full or paths_only");
            } else if (key == "event")
                sc.event_enabled = parse_long(val, key.c_str()) != 0;
            else if (key == "event_beta")
                sc.event_beta = parse_double(val, key.c_str());
            else if (key == "event_q")
                sc.event_q = parse_double(val, key.c_str());
            else if (key == "event_t_trunc")
                sc.event_t_trunc = parse_double(val, key.c_str());
            else if (key == "event_c_lil")
                sc.event_c_lil = parse_double(val, key.c_str());
            else if (key == "event_const")
                sc.event_const = parse_double(val, key.c_str());
            else if (key == "tail_dt")
                sc.tail_dt = parse_double(val, key.c_str());
            else if (key == "fit") {
                if (val == "none")
                    sc.fit_model = Scenario::FitModel::None;
                else if (val == "exp")
                    sc.fit_model = Scenario::FitModel::Exponential;
                else if (val == "alg")
                    sc.fit_model = Scenario::FitModel::Algebraic;
                else
                    throw ConfigError("scenario: fit must be none, exp, or alg");
            } else if (key == "fit_lo")
                sc.fit_lo = parse_double(val, key.c_str());
            else if (key == "fit_hi")
                sc.fit_hi = parse_double(val, key.c_str());
            else
                throw ConfigError("scenario: unknown key '" + key + "' in [analysis]");
        }
    }
    sc.validate();
    return sc;
}

Scenario load_scenario(const std::string& file_path) {
    std::ifstream in(file_path, std::ios::binary);
    if (!in) throw IoError("cannot open scenario file '" + file_path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw IoError("failed reading scenario file '" + file_path + "'");
    return parse_scenario(buf.str());
}

namespace {

Scenario s1_exp_flock() {
    Scenario s;
    s.name = "S1-exp-flock";
    s.cfg.n = 4;
    s.cfg.d = 2;
    s.cfg.lambda = 1.0;
    s.cfg.kernel = Kernel::constant(1.0);
    s.cfg.noise = NoiseIntensity::constant(0.5);
    s.cfg.sampler = parse_sampler("gauss:1:1");
    s.ctrl.dt_base = 1e-3;
    s.horizon = 5.0;
    s.output_dt = 0.25;
    s.n_paths = 20000;
    s.master_seed = 101;
    s.p_list = {2.0};
    s.fit_model = Scenario::FitModel::Exponential;
    return s;
}

Scenario s2_comparison() {
    Scenario s;
    s.name = "S2-comparison";
    s.cfg.n = 5;
    s.cfg.d = 2;
    s.cfg.lambda = 1.0;
    s.cfg.kernel = Kernel::power_law(1.2);
    s.cfg.noise = NoiseIntensity::constant(0.4);
    s.cfg.sampler = parse_sampler("uniform_gauss:1:1");
    s.ctrl.dt_base = 1e-3;
    s.horizon = 2.0;
    s.output_dt = 0.1;
    s.n_paths = 1000;
    s.master_seed = 202;
    s.p_list = {2.0};
    return s;
}

Scenario s3_martingale() {
    Scenario s;
    s.name = "S3-martingale";
    s.cfg.n = 1;
    s.cfg.d = 1;
    s.cfg.lambda = 1.0;
    s.cfg.kernel = Kernel::constant(1.0);
    s.cfg.noise = NoiseIntensity::constant(0.5);
    s.cfg.sampler = parse_sampler("zero");
    s.ctrl.dt_base = 1e-2;
    s.horizon = 5.0;
    s.output_dt = 0.5;
    s.n_paths = 100000;
    s.master_seed = 303;
    s.p_list = {};
    s.mode = RunMode::PathsOnly;
    return s;
}

Scenario s4_collision_avoid() {
    Scenario s;
    s.name = "S4-collision-avoid";
    s.cfg.n = 5;
    s.cfg.d = 1;
    s.cfg.lambda = 1.0;
    s.cfg.kernel = Kernel::power_law(1.5);
    s.cfg.noise = NoiseIntensity::constant(0.3);
    s.cfg.sampler = parse_sampler("crossing:2:2");
    s.ctrl.dt_base = 1e-3;
    s.horizon = 10.0;
    s.output_dt = 0.5;
    s.n_paths = 2000;
    s.master_seed = 404;
    s.p_list = {2.0};
    return s;
}

Scenario s5_event_a() {
    Scenario s;
    s.name = "S5-event-A";
    s.cfg.n = 4;
    s.cfg.d = 2;
    s.cfg.lambda = 1.0;
    s.cfg.kernel = Kernel::regularized(1.0);
    s.cfg.noise = NoiseIntensity::constant(0.5);
    s.cfg.sampler = parse_sampler("gauss:0.08:0.08");
    s.ctrl.dt_base = 1e-2;
    s.horizon = 20.0;
    s.output_dt = 0.5;
    s.n_paths = 10000;
    s.master_seed = 505;
    s.p_list = {2.0};
    s.event_enabled = true;
    s.event_beta = 4.0;
    s.event_q = 2.0;
    s.tail_dt = 0.02;
    s.fit_model = Scenario::FitModel::Algebraic;
    return s;
}

Scenario s6_strong_order() {
    Scenario s;
    s.name = "S6-strong-order";
    s.cfg.n = 2;
    s.cfg.d = 1;
    s.cfg.lambda = 1.0;
    s.cfg.kernel = Kernel::constant(1.0);
    s.cfg.noise = NoiseIntensity::constant(0.5);
    s.cfg.sampler = parse_sampler("two_particle:1:2");
    s.ctrl.dt_base = 1e-3;
    s.ctrl.c_cfl = 1e6; // fixed-step run; the dt sweep must not be reshaped
    s.horizon = 1.0;
    s.output_dt = 0.5;
    s.n_paths = 256;
    s.master_seed = 606;
    s.p_list = {2.0};
    return s;
}

Scenario s7_appendix_a() {
    Scenario s;
    s.name = "S7-appendixA";
    s.cfg.n = 2;
    s.cfg.d = 1;
    s.cfg.lambda = 1.0;
    s.cfg.kernel = Kernel::power_law(2.0);
    s.cfg.noise = NoiseIntensity::constant(0.3);
    s.cfg.sampler = parse_sampler("two_particle:1:2");
    s.ctrl.dt_base = 1e-3;
    s.horizon = 5.0;
    s.output_dt = 0.25;
    s.n_paths = 10000;
    s.master_seed = 707;
    s.p_list = {2.0};
    return s;
}

Scenario s8_dufresne() {
    Scenario s;
    s.name = "S8-dufresne";
    s.cfg.n = 1;
    s.cfg.d = 1;
    s.cfg.lambda = 1.0;
    s.cfg.kernel = Kernel::constant(1.0);
    s.cfg.noise = NoiseIntensity::constant(0.5);
    s.cfg.sampler = parse_sampler("zero");
    s.ctrl.dt_base = 5e-3;
    s.horizon = 5.0;
    s.output_dt = 1.0;
    s.n_paths = 10000;
    s.master_seed = 808;
    s.p_list = {};
    s.mode = RunMode::PathsOnly;
    s.event_enabled = true;
    s.event_beta = 4.0;
    s.event_q = 2.0;
    s.event_t_trunc = 200.0;
    s.tail_dt = 0.02;
    return s;
}

} // namespace

std::vector<Scenario> builtin_scenarios() {
    return {s1_exp_flock(), s2_comparison(),  s3_martingale(), s4_collision_avoid(),
            s5_event_a(),   s6_strong_order(), s7_appendix_a(), s8_dufresne()};
}

Scenario builtin_scenario(const std::string& name) {
    for (Scenario& s : builtin_scenarios())
        if (s.name == name) return s;
    throw ConfigError("unknown scenario '" + name + "'");
}

} // namespace flocksim
