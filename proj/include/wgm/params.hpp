#pragma once

// Physical parameters of the Lambda-atom / two-mode-pair resonator system.
// Every rate, detuning and drive is a dimensionless multiple of the atomic
// decay rate gamma, which sets the unit (gamma_1 = gamma_2 = 1 in the presets).

#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include "wgm/errors.hpp"

namespace wgm {

using cplx = std::complex<double>;

struct PhysicalParams {
    double g0_1 = 0.0, g0_2 = 0.0;                 // atom-cavity coupling prefactors
    double h1 = 0.0, h2 = 0.0;                     // intra-pair backscattering
    double kappa_in_1 = 1.0, kappa_in_2 = 1.0;     // intrinsic cavity loss
    double kappa_ex_1 = 1.0, kappa_ex_2 = 1.0;     // fiber coupling
    double gamma_1 = 1.0, gamma_2 = 1.0;           // decay |3> -> |1>, |3> -> |2>
    double p = 0.0, q = 0.0;                       // inter-pair scattering
    double epsilon = 0.0;                          // probe frequency difference
    double delta_ground = 0.0;                     // ground-state splitting (bookkeeping only)
    double Delta_1 = 0.0, Delta_2 = 0.0;           // atom-probe detunings
    double delta_c_1 = 0.0, delta_c_2 = 0.0;       // cavity-probe detunings
    cplx E_1{0.1, 0.0}, E_2{0.1, 0.0};             // drive amplitudes
    double phase_1 = std::numbers::pi / 2;         // k_1 x
    double phase_2 = std::numbers::pi / 2;         // k_2 x
    double radial_factor = 1.0;                    // f(r, z)
    // When set, validation overwrites delta_c_i with Delta_i (cavity pair i
    // resonant with the atomic transition it couples to).
    bool slave_cavity_detuning = true;

    bool operator==(const PhysicalParams&) const = default;
};

/// Per-transition view with the pair index resolved.
struct PairParams {
    double g0, h, kappa_in, kappa_ex, kappa, gamma, Delta, delta_c, phase;
    cplx E;
};

struct Violation {
    ErrorCode code;
    std::string field;
    std::string message;
};

class ValidationError : public Error {
public:
    explicit ValidationError(std::vector<Violation> violations)
        : Error(violations.empty() ? ErrorCode::BadValue : violations.front().code,
                summarize(violations)),
          violations_(std::move(violations)) {}

    const std::vector<Violation>& violations() const noexcept { return violations_; }

private:
    static std::string summarize(const std::vector<Violation>& vs) {
        std::string s;
        for (const auto& v : vs) {
            if (!s.empty()) s += "; ";
            s += std::string(to_string(v.code)) + " (" + v.field + "): " + v.message;
        }
        return s;
    }
    std::vector<Violation> violations_;
};

class ValidatedParams;
ValidatedParams validate(const PhysicalParams& params);

// Parameters that passed validate(); immutable and shareable across threads.
class ValidatedParams {
public:
    const PhysicalParams& params() const noexcept { return p_; }
    operator const PhysicalParams&() const noexcept { return p_; }

    double kappa_1() const noexcept { return p_.kappa_in_1 + p_.kappa_ex_1; }
    double kappa_2() const noexcept { return p_.kappa_in_2 + p_.kappa_ex_2; }

    PairParams pair(int i) const {
        if (i == 1)
            return {p_.g0_1, p_.h1, p_.kappa_in_1, p_.kappa_ex_1, kappa_1(), p_.gamma_1,
                    p_.Delta_1, p_.delta_c_1, p_.phase_1, p_.E_1};
        if (i == 2)
            return {p_.g0_2, p_.h2, p_.kappa_in_2, p_.kappa_ex_2, kappa_2(), p_.gamma_2,
                    p_.Delta_2, p_.delta_c_2, p_.phase_2, p_.E_2};
        throw Error(ErrorCode::IndexOutOfRange, "pair index must be 1 or 2");
    }

    bool has_inter_pair_scattering() const noexcept { return p_.p != 0.0 || p_.q != 0.0; }

    bool operator==(const ValidatedParams&) const = default;

private:
    friend ValidatedParams validate(const PhysicalParams&);
    explicit ValidatedParams(PhysicalParams p) : p_(std::move(p)) {}
    PhysicalParams p_;
};

/// Constraint check without throwing; empty result means the parameters are valid.
inline std::vector<Violation> check(const PhysicalParams& p) {
    std::vector<Violation> out;
    auto finite = [&](double v, const char* name) {
        if (!std::isfinite(v)) out.push_back({ErrorCode::NonFinite, name, "value is not finite"});
    };
    auto rate = [&](double v, const char* name) {
        finite(v, name);
        if (v < 0.0) out.push_back({ErrorCode::NegativeRate, name, "rate must be >= 0"});
    };
    rate(p.g0_1, "g0_1");
    rate(p.g0_2, "g0_2");
    rate(p.h1, "h1");
    rate(p.h2, "h2");
    rate(p.kappa_in_1, "kappa_in_1");
    rate(p.kappa_in_2, "kappa_in_2");
    rate(p.kappa_ex_1, "kappa_ex_1");
    rate(p.kappa_ex_2, "kappa_ex_2");
    rate(p.gamma_1, "gamma_1");
    rate(p.gamma_2, "gamma_2");
    rate(p.p, "p");
    rate(p.q, "q");
    for (auto [v, name] : {std::pair{p.epsilon, "epsilon"}, {p.delta_ground, "delta_ground"},
                           {p.Delta_1, "Delta_1"}, {p.Delta_2, "Delta_2"},
                           {p.delta_c_1, "delta_c_1"}, {p.delta_c_2, "delta_c_2"},
                           {p.phase_1, "phase_1"}, {p.phase_2, "phase_2"},
                           {p.E_1.real(), "E_1"}, {p.E_1.imag(), "E_1"},
                           {p.E_2.real(), "E_2"}, {p.E_2.imag(), "E_2"}})
        finite(v, name);
    finite(p.radial_factor, "radial_factor");
    if (!(p.radial_factor >= 0.0 && p.radial_factor <= 1.0))
        out.push_back({ErrorCode::RadialFactorOutOfRange, "radial_factor", "must lie in [0, 1]"});
    if (!(p.kappa_in_1 + p.kappa_ex_1 > 0.0))
        out.push_back({ErrorCode::ZeroTotalKappa, "kappa_1", "kappa_in_1 + kappa_ex_1 must be > 0"});
    if (!(p.kappa_in_2 + p.kappa_ex_2 > 0.0))
        out.push_back({ErrorCode::ZeroTotalKappa, "kappa_2", "kappa_in_2 + kappa_ex_2 must be > 0"});
    if (p.epsilon != 0.0 && (p.p != 0.0 || p.q != 0.0))
        out.push_back({ErrorCode::EpsilonWithScattering, "epsilon",
                       "epsilon != 0 requires p = q = 0 (no stationary frame otherwise)"});
    return out;
}

inline ValidatedParams validate(const PhysicalParams& params) {
    auto violations = check(params);
    if (!violations.empty()) throw ValidationError(std::move(violations));
    PhysicalParams p = params;
    if (p.slave_cavity_detuning) {
        p.delta_c_1 = p.Delta_1;
        p.delta_c_2 = p.Delta_2;
    }
    return ValidatedParams(std::move(p));
}

/// Fiber coupling at which on-resonance transmission vanishes.
inline double critical_kappa_ex(double h, double kappa_in) {
    return std::hypot(h, kappa_in);
}

struct ModeCouplings {
    double gA_1 = 0.0, gA_2 = 0.0, gB_1 = 0.0, gB_2 = 0.0;

    double gA(int i) const { return i == 1 ? gA_1 : gA_2; }
    double gB(int i) const { return i == 1 ? gB_1 : gB_2; }
};

/// Couplings to the normal modes A_i = (a_i + b_i)/sqrt2, B_i = (a_i - b_i)/sqrt2.
inline ModeCouplings mode_couplings(const ValidatedParams& vp) {
    const auto& p = vp.params();
    const double g1 = p.g0_1 * p.radial_factor;
    const double g2 = p.g0_2 * p.radial_factor;
    return {g1 * std::cos(p.phase_1), g2 * std::cos(p.phase_2),
            g1 * std::sin(p.phase_1), g2 * std::sin(p.phase_2)};
}

namespace presets {

// Strong coupling: kappa << g, critical fiber coupling.
inline PhysicalParams strong() {
    PhysicalParams p;
    p.g0_1 = p.g0_2 = 100.0;
    p.h1 = p.h2 = 15.0;
    p.kappa_in_1 = p.kappa_in_2 = 1.0;
    p.kappa_ex_1 = p.kappa_ex_2 = std::sqrt(226.0);
    return p;
}

// Bad cavity: g << kappa, critical fiber coupling.
inline PhysicalParams bad_cavity() {
    PhysicalParams p;
    p.g0_1 = p.g0_2 = 70.0;
    p.h1 = p.h2 = 250.0;
    p.kappa_in_1 = p.kappa_in_2 = 1.0;
    p.kappa_ex_1 = p.kappa_ex_2 = std::sqrt(62501.0);
    return p;
}

} // namespace presets

} // namespace wgm
