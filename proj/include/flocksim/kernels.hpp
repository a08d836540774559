#pragma once

#include <memory>
#include <string>

namespace flocksim {

enum class KernelFamily { PowerLaw, Regularized, LogPower, Constant, Shifted };

// Communication weight psi(r): pairwise interaction strength as a function of
// distance. Immutable after construction; safe to evaluate from any number of
// workers concurrently.
//
// Built-in families (alpha > 0, c real):
//   PowerLaw(alpha)     r^{-alpha}            singular at 0
//   Regularized(alpha)  (1+r^2)^{-alpha/2}    finite at 0
//   LogPower(alpha)     |log(1+r)|^{-alpha}   singular at 0
//   Constant(c)         c
//   Shifted(base, c)    base(r) + c
class Kernel {
public:
    Kernel(); // Constant(1)

    static Kernel power_law(double alpha);
    static Kernel regularized(double alpha);
    static Kernel log_power(double alpha);
    static Kernel constant(double c);
    static Kernel shifted(const Kernel& base, double offset);

    // psi(r). DomainError for r < 0, and for r = 0 on singular families:
    // the integrator never evaluates below its active cutoff, so a zero
    // argument signals a caller bug and fails fast.
    double eval(double r) const;

    // Running infimum psi_*(r) = inf over [0, r]. Built-in families are
    // non-increasing so this is eval(r); at r = 0 singular families report
    // +infinity. Shifted kernels are minimized numerically.
    double running_inf(double r) const;

    // Antiderivative Psi(r) with integration constant 0. Closed form exists
    // for PowerLaw (log r when alpha = 1, r^{1-alpha}/(1-alpha) otherwise)
    // and for Shifted(PowerLaw, c); Unsupported for the rest.
    double primitive(double r) const;

    // L(r) = sup of |psi(r1)-psi(r2)|/|r1-r2| over r <= r1 < r2; the slope
    // bound on [r, infinity). Non-increasing in r.
    double lipschitz_const(double r) const;

    KernelFamily family() const { return family_; }
    double alpha() const { return alpha_; }
    double psi_star() const { return psi_star_; } // global infimum over [0, inf)
    bool singular_at_zero() const { return singular_; }
    double offset() const { return offset_; }
    const Kernel& base() const; // Shifted only

    std::string config_string() const;

private:
    KernelFamily family_ = KernelFamily::Constant;
    double alpha_ = 1.0;   // exponent, or the constant for Constant
    double offset_ = 0.0;  // Shifted only
    double psi_star_ = 1.0;
    bool singular_ = false;
    std::shared_ptr<const Kernel> base_; // Shifted only
};

// Construction from config strings: "power:1.5", "reg:0.5", "log:0.8",
// "const:1.0", "shift:power:1.5:+0.2". ConfigError on anything else.
Kernel parse_kernel(const std::string& spec);

// psi clamped to its value at radius a_n; regularizes the singularity below
// the current safe distance. Total on [0, inf).
struct CutoffKernel {
    const Kernel* base = nullptr;
    double a_n = 0.0;

    double eval(double r) const { return base->eval(r < a_n ? a_n : r); }
};

} // namespace flocksim
