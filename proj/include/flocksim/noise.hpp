#pragma once

#include <string>

namespace flocksim {

enum class NoiseFamily { Constant, PowerDecay };

// Deterministic noise intensity D(t) with closed-form running quadratic
// variation of the driven martingale, [M]_t = int_0^t D^2(s) ds.
// Immutable after construction; freely shared.
//
//   Constant(D0)          D(t) = D0
//   PowerDecay(D0, gamma) D(t) = D0 (1+t)^{-gamma}, gamma > 0; square
//                         integrable on [0,inf) exactly when gamma > 1/2.
class NoiseIntensity {
public:
    NoiseIntensity(); // Constant(0)

    static NoiseIntensity constant(double d0);
    static NoiseIntensity power_decay(double d0, double gamma);

    double at(double t) const;             // D(t); DomainError if t < 0
    double quad_variation(double t) const; // [M]_t; t = inf allowed iff square integrable
    bool square_integrable() const;

    NoiseFamily family() const { return family_; }
    double d0() const { return d0_; }
    double gamma() const { return gamma_; }

    std::string config_string() const;

private:
    NoiseFamily family_ = NoiseFamily::Constant;
    double d0_ = 0.0;
    double gamma_ = 0.0;
};

// Config strings: "const:0.5", "powdec:1.0:0.75". ConfigError otherwise.
NoiseIntensity parse_noise(const std::string& spec);

} // namespace flocksim
