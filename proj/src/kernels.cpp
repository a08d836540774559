#include "flocksim/kernels.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "flocksim/errors.hpp"
#include "flocksim/numfmt.hpp"

namespace flocksim {

namespace {

void require_positive(double alpha, const char* name) {
    if (!(alpha > 0.0))
        throw ConfigError(std::string(name) + " requires a positive exponent");
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        if (ch == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

} // namespace

Kernel::Kernel() = default;

Kernel Kernel::power_law(double alpha) {
    require_positive(alpha, "power");
    Kernel k;
    k.family_ = KernelFamily::PowerLaw;
    k.alpha_ = alpha;
    k.psi_star_ = 0.0;
    k.singular_ = true;
    return k;
}

Kernel Kernel::regularized(double alpha) {
    require_positive(alpha, "reg");
    Kernel k;
    k.family_ = KernelFamily::Regularized;
    k.alpha_ = alpha;
    k.psi_star_ = 0.0;
    k.singular_ = false;
    return k;
}

Kernel Kernel::log_power(double alpha) {
    require_positive(alpha, "log");
    Kernel k;
    k.family_ = KernelFamily::LogPower;
    k.alpha_ = alpha;
    k.psi_star_ = 0.0;
    k.singular_ = true;
    return k;
}

Kernel Kernel::constant(double c) {
    Kernel k;
    k.family_ = KernelFamily::Constant;
    k.alpha_ = c;
    k.psi_star_ = c;
    k.singular_ = false;
    return k;
}

Kernel Kernel::shifted(const Kernel& base, double offset) {
    if (base.family_ == KernelFamily::Shifted)
        throw ConfigError("shift of a shifted kernel is not supported");
    Kernel k;
    k.family_ = KernelFamily::Shifted;
    k.offset_ = offset;
    k.psi_star_ = base.psi_star_ + offset;
    k.singular_ = base.singular_;
    k.base_ = std::make_shared<Kernel>(base);
    return k;
}

const Kernel& Kernel::base() const {
    if (!base_) throw DomainError("base(): kernel is not Shifted");
    return *base_;
}

double Kernel::eval(double r) const {
    if (r < 0.0) throw DomainError("kernel eval: negative distance");
    switch (family_) {
    case KernelFamily::PowerLaw:
        if (r == 0.0) throw DomainError("kernel eval: r=0 on singular family");
        return std::pow(r, -alpha_);
    case KernelFamily::Regularized:
        return std::pow(1.0 + r * r, -0.5 * alpha_);
    case KernelFamily::LogPower:
        if (r == 0.0) throw DomainError("kernel eval: r=0 on singular family");
        return std::pow(std::log1p(r), -alpha_);
    case KernelFamily::Constant:
        return alpha_;
    case KernelFamily::Shifted:
        return base_->eval(r) + offset_;
    }
    throw DomainError("kernel eval: bad family");
}

double Kernel::running_inf(double r) const {
    if (r < 0.0) throw DomainError("running_inf: negative distance");
    if (r == 0.0) {
        if (singular_) return std::numeric_limits<double>::infinity();
        return eval(0.0);
    }
    if (family_ != KernelFamily::Shifted) return eval(r); // non-increasing
    // Shifted kernels may be handed arbitrary bases later; minimize over
    // [lo, r] by golden section and guard with the endpoint values.
    const double lo = std::min(1e-8, r);
    double a = lo, b = r;
    const double gr = 0.6180339887498949;
    double c = b - gr * (b - a);
    double d = a + gr * (b - a);
    double fc = eval(c), fd = eval(d);
    while (b - a > 1e-10 * (1.0 + b)) {
        if (fc < fd) {
            b = d; d = c; fd = fc;
            c = b - gr * (b - a);
            fc = eval(c);
        } else {
            a = c; c = d; fc = fd;
            d = a + gr * (b - a);
            fd = eval(d);
        }
    }
    double best = std::min(fc, fd);
    best = std::min(best, eval(r));
    if (!singular_) best = std::min(best, eval(lo));
    return best;
}

double Kernel::primitive(double r) const {
    if (!(r > 0.0)) throw DomainError("primitive: r must be positive");
    switch (family_) {
    case KernelFamily::PowerLaw:
        if (alpha_ == 1.0) return std::log(r);
        return std::pow(r, 1.0 - alpha_) / (1.0 - alpha_);
    case KernelFamily::Shifted:
        if (base_->family_ == KernelFamily::PowerLaw)
            return base_->primitive(r) + offset_ * r;
        throw Unsupported("primitive: shifted base has no closed form");
    default:
        throw Unsupported("primitive: no closed form for this family");
    }
}

double Kernel::lipschitz_const(double r) const {
    if (!(r > 0.0)) throw DomainError("lipschitz_const: r must be positive");
    switch (family_) {
    case KernelFamily::PowerLaw:
        return alpha_ * std::pow(r, -alpha_ - 1.0);
    case KernelFamily::Regularized: {
        // |psi'(s)| = alpha s (1+s^2)^{-(alpha+2)/2}, unimodal with peak at
        // s* = 1/sqrt(alpha+1); the sup over [r, inf) sits at max(r, s*).
        const double s_peak = 1.0 / std::sqrt(alpha_ + 1.0);
        const double s = std::max(r, s_peak);
        return alpha_ * s * std::pow(1.0 + s * s, -0.5 * (alpha_ + 2.0));
    }
    case KernelFamily::LogPower: {
        const double u = std::log1p(r);
        return alpha_ / ((1.0 + r) * std::pow(u, alpha_ + 1.0));
    }
    case KernelFamily::Constant:
        return 0.0;
    case KernelFamily::Shifted:
        return base_->lipschitz_const(r);
    }
    throw DomainError("lipschitz_const: bad family");
}

std::string Kernel::config_string() const {
    switch (family_) {
    case KernelFamily::PowerLaw:
        return "power:" + num_to_string(alpha_);
    case KernelFamily::Regularized:
        return "reg:" + num_to_string(alpha_);
    case KernelFamily::LogPower:
        return "log:" + num_to_string(alpha_);
    case KernelFamily::Constant:
        return "const:" + num_to_string(alpha_);
    case KernelFamily::Shifted:
        return "shift:" + base_->config_string() + ":" + num_to_string(offset_);
    }
    return "";
}

Kernel parse_kernel(const std::string& spec) {
    const auto parts = split(spec, ':');
    const std::string& fam = parts[0];
    if (fam == "power" || fam == "reg" || fam == "log" || fam == "const") {
        if (parts.size() != 2)
            throw ConfigError("kernel spec '" + spec + "': expected one parameter");
        const double p = parse_double(parts[1], "kernel parameter");
        if (fam == "power") return Kernel::power_law(p);
        if (fam == "reg") return Kernel::regularized(p);
        if (fam == "log") return Kernel::log_power(p);
        return Kernel::constant(p);
    }
    if (fam == "shift") {
        if (parts.size() != 4)
            throw ConfigError("kernel spec '" + spec + "': expected shift:<family>:<param>:<offset>");
        const Kernel base = parse_kernel(parts[1] + ":" + parts[2]);
        return Kernel::shifted(base, parse_double(parts[3], "shift offset"));
    }
    throw ConfigError("unknown kernel family '" + fam + "'");
}

} // namespace flocksim
