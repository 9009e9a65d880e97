#pragma once

// Input-output relations: normalized transmission/reflection fluxes and
// equal-time second-order correlations of the fiber output fields.

#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "wgm/ae_solver.hpp"
#include "wgm/errors.hpp"
#include "wgm/mode_response.hpp"
#include "wgm/params.hpp"
#include "wgm/th_solver.hpp"

namespace wgm {

/// Fiber output channel: a_i is transmission, b_i reflection.
enum class OutputMode : int { a1 = 0, b1 = 1, a2 = 2, b2 = 3 };

inline constexpr std::array<OutputMode, 4> kAllOutputs{OutputMode::a1, OutputMode::b1, OutputMode::a2,
                                                      OutputMode::b2};

inline const char* output_name(OutputMode m) {
    switch (m) {
    case OutputMode::a1: return "a1";
    case OutputMode::b1: return "b1";
    case OutputMode::a2: return "a2";
    case OutputMode::b2: return "b2";
    }
    return "?";
}

inline OutputMode parse_output(std::string_view s) {
    for (OutputMode m : kAllOutputs)
        if (s == output_name(m)) return m;
    throw Error(ErrorCode::BadValue, "unknown output mode '" + std::string(s) + "'");
}

inline int pair_of(OutputMode m) { return static_cast<int>(m) / 2 + 1; }
inline bool is_transmission(OutputMode m) { return static_cast<int>(m) % 2 == 0; }

/// <a_in> = -i E / sqrt(2 kappa_ex).
inline cplx input_amplitude(const ValidatedParams& vp, int i) {
    using namespace std::complex_literals;
    const auto pp = vp.pair(i);
    if (!(pp.kappa_ex > 0.0))
        throw Error(ErrorCode::ZeroKappaEx, "kappa_ex_" + std::to_string(i) + " must be > 0");
    return -1i * pp.E / std::sqrt(2.0 * pp.kappa_ex);
}

/// a_i,out = alpha[i][0] + alpha[i][1] S_1^- + alpha[i][2] S_2^-, same for b with beta.
struct OutputCoefficients {
    std::array<std::array<cplx, 3>, 2> alpha{};
    std::array<std::array<cplx, 3>, 2> beta{};

    const std::array<cplx, 3>& of(OutputMode m) const {
        const int i = pair_of(m) - 1;
        return is_transmission(m) ? alpha[i] : beta[i];
    }
};

inline OutputCoefficients output_coefficients(const ValidatedParams& vp, const ModeCouplings& g) {
    const auto forms = steady_mode_forms(vp, g);
    OutputCoefficients c;
    for (int i = 0; i < 2; ++i) {
        const double s = std::sqrt(vp.pair(i + 1).kappa_ex);
        const cplx a_in = input_amplitude(vp, i + 1);
        const LinearForm& A = forms[2 * i];
        const LinearForm& B = forms[2 * i + 1];
        for (int k = 0; k < 3; ++k) {
            c.alpha[i][k] = s * (A(k) + B(k));
            c.beta[i][k] = s * (A(k) - B(k));
        }
        c.alpha[i][0] -= a_in;
    }
    return c;
}

inline double input_flux(const ValidatedParams& vp, int i) { return std::norm(input_amplitude(vp, i)); }

namespace detail {

// <m^dag m> for m = c0 + c1 S_1^- + c2 S_2^- on an atomic state.
inline double linear_form_moment(const std::array<cplx, 3>& c, const Eigen::Matrix3cd& rho) {
    // <S_j^-> = rho_{3j}, S_j^+ S_k^- = delta_jk |3><3|
    const cplx cross = c[1] * rho(2, 0) + c[2] * rho(2, 1);
    const double p3 = rho(2, 2).real();
    return std::norm(c[0]) + 2.0 * std::real(std::conj(c[0]) * cross) +
           (std::norm(c[1]) + std::norm(c[2])) * p3;
}

} // namespace detail

/// Unnormalized <m_out^dag m_out> from an AE state.
inline double output_moment_ae(const AtomicDM& dm, const OutputCoefficients& c, OutputMode m) {
    return detail::linear_form_moment(c.of(m), dm.rho);
}

inline double flux_ae(const AtomicDM& dm, const OutputCoefficients& c, const ValidatedParams& vp,
                      OutputMode m) {
    return output_moment_ae(dm, c, m) / input_flux(vp, pair_of(m));
}

/// Normalized flux from a TH steady state (vacuum input in b_i).
inline double flux_th(const ThResult& r, const ValidatedParams& vp, OutputMode m) {
    const int i = pair_of(m) - 1;
    const int A = 2 * i, B = 2 * i + 1;
    const double kex = vp.pair(i + 1).kappa_ex;
    const double sign = is_transmission(m) ? 1.0 : -1.0;
    const cplx mean = r.mean[A] + sign * r.mean[B];
    const double occ = std::real(r.moments(A, A) + r.moments(B, B) +
                                 sign * (r.moments(A, B) + r.moments(B, A)));
    double n_out = kex * occ;
    if (is_transmission(m)) {
        const cplx a_in = input_amplitude(vp, i + 1);
        n_out += std::norm(a_in) - 2.0 * std::sqrt(kex) * std::real(std::conj(a_in) * mean);
    }
    return n_out / input_flux(vp, i + 1);
}

/// Closed-form flux without the atom.
inline double flux_no_atom(const ValidatedParams& vp, OutputMode m) {
    const auto c = output_coefficients(vp, ModeCouplings{});
    return std::norm(c.of(m)[0]) / input_flux(vp, pair_of(m));
}

inline constexpr double kG2DenominatorFloor = 1e-14;

struct G2Value {
    double value = 0.0;            // +infinity when tagged
    double numerator = 0.0;        // <m_i^dag m_j^dag m_j m_i>
    double moment_i = 0.0;         // <m_i^dag m_i>
    double moment_j = 0.0;         // <m_j^dag m_j>
    std::optional<ErrorCode> tag;  // VanishingDenominator
};

/// Equal-time g2(m_i, m_j) on an AE state.
inline G2Value g2(const AtomicDM& dm, const OutputCoefficients& c, OutputMode mi, OutputMode mj) {
    const auto& ci = c.of(mi);
    const auto& cj = c.of(mj);
    // m_j m_i = e0 + e1 S_1^- + e2 S_2^-, since S_k^- S_l^- = 0
    std::array<cplx, 3> e{ci[0] * cj[0], cj[0] * ci[1] + ci[0] * cj[1], cj[0] * ci[2] + ci[0] * cj[2]};
    G2Value out;
    out.numerator = detail::linear_form_moment(e, dm.rho);
    out.moment_i = detail::linear_form_moment(ci, dm.rho);
    out.moment_j = detail::linear_form_moment(cj, dm.rho);
    if (!(out.moment_i > kG2DenominatorFloor) || !(out.moment_j > kG2DenominatorFloor)) {
        out.value = std::numeric_limits<double>::infinity();
        out.tag = ErrorCode::VanishingDenominator;
        return out;
    }
    out.value = out.numerator / (out.moment_i * out.moment_j);
    return out;
}

inline std::array<double, 3> populations(const AtomicDM& dm) { return dm.populations; }
inline std::array<double, 3> populations(const ThResult& r) { return r.populations; }

struct SpectrumPoint {
    double Delta_1 = 0.0, Delta_2 = 0.0;
    std::array<double, 4> flux{};   // indexed by OutputMode
    std::array<double, 3> population{};
    std::optional<double> g2_a1a1, g2_a2a2, g2_a1a2;
};

} // namespace wgm
