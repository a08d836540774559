#include "flocksim/noise.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "flocksim/errors.hpp"
#include "flocksim/numfmt.hpp"

namespace flocksim {

NoiseIntensity::NoiseIntensity() = default;

NoiseIntensity NoiseIntensity::constant(double d0) {
    NoiseIntensity n;
    n.family_ = NoiseFamily::Constant;
    n.d0_ = d0;
    return n;
}

NoiseIntensity NoiseIntensity::power_decay(double d0, double gamma) {
    if (!(gamma > 0.0))
        throw ConfigError("powdec requires a positive decay exponent");
    NoiseIntensity n;
    n.family_ = NoiseFamily::PowerDecay;
    n.d0_ = d0;
    n.gamma_ = gamma;
    return n;
}

bool NoiseIntensity::square_integrable() const {
    return family_ == NoiseFamily::PowerDecay && gamma_ > 0.5;
}

double NoiseIntensity::at(double t) const {
    if (t < 0.0) throw DomainError("noise intensity: negative time");
    if (family_ == NoiseFamily::Constant) return d0_;
    return d0_ * std::pow(1.0 + t, -gamma_);
}

double NoiseIntensity::quad_variation(double t) const {
    if (t < 0.0) throw DomainError("quad_variation: negative time");
    const double d2 = d0_ * d0_;
    if (std::isinf(t)) {
        if (!square_integrable())
            throw DomainError("quad_variation at t=inf: intensity is not square integrable");
        return d2 / (2.0 * gamma_ - 1.0);
    }
    if (family_ == NoiseFamily::Constant) return d2 * t;
    if (gamma_ == 0.5) return d2 * std::log1p(t);
    const double e = 1.0 - 2.0 * gamma_;
    return d2 * (std::pow(1.0 + t, e) - 1.0) / e;
}

std::string NoiseIntensity::config_string() const {
    if (family_ == NoiseFamily::Constant) return "const:" + num_to_string(d0_);
    return "powdec:" + num_to_string(d0_) + ":" + num_to_string(gamma_);
}

NoiseIntensity parse_noise(const std::string& spec) {
    std::vector<std::string> parts;
    std::string cur;
    for (char ch : spec) {
        if (ch == ':') {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    parts.push_back(cur);
    if (parts[0] == "const" && parts.size() == 2)
        return NoiseIntensity::constant(parse_double(parts[1], "noise intensity"));
    if (parts[0] == "powdec" && parts.size() == 3)
        return NoiseIntensity::power_decay(parse_double(parts[1], "noise intensity"),
                                           parse_double(parts[2], "noise decay exponent"));
    throw ConfigError("unknown noise spec '" + spec + "'");
}

} // namespace flocksim
