#pragma once

// Steady-state normal-mode operators expressed over the atomic basis
// {1, S_1^-, S_2^-}. Solves the linear mode equations of motion with the
// atomic lowering operators treated as sources:
//   0 = -(kappa_i + i(delta_i + h_i)) A_i - i E_i/sqrt2 - i gA_i S_i^- - i mu A_j
//   0 = -(kappa_i + i(delta_i - h_i)) B_i - i E_i/sqrt2 -   gB_i S_i^- - i nu B_j
// with mu = q + p, nu = p - q (evaluated in the stationary frame, t = 0).

#include <array>
#include <cmath>
#include <complex>

#include <Eigen/Dense>

#include "wgm/errors.hpp"
#include "wgm/fockspace.hpp"
#include "wgm/params.hpp"

namespace wgm {

/// Coefficients of {1, S_1^-, S_2^-}.
using LinearForm = Eigen::Vector3cd;

inline constexpr double kDegenerateTolerance = 1e-12;

/// Steady-state A1, B1, A2, B2 (indexed by Mode) as linear forms.
inline std::array<LinearForm, 4> steady_mode_forms(const ValidatedParams& vp,
                                                   const ModeCouplings& g) {
    using namespace std::complex_literals;
    const auto& p = vp.params();
    const auto p1 = vp.pair(1);
    const auto p2 = vp.pair(2);
    const double s2 = std::sqrt(2.0);
    const cplx mu = p.q + p.p;
    const cplx nu = p.p - p.q;

    auto solve_family = [&](cplx d1, cplx d2, cplx coupling, const LinearForm& r1,
                            const LinearForm& r2) {
        // [d1, i c; i c*, d2] [X1; X2] = [r1; r2]
        const cplx det = d1 * d2 - (1i * coupling) * (1i * std::conj(coupling));
        if (std::abs(det) < kDegenerateTolerance * std::max(1.0, std::abs(d1 * d2)))
            throw Error(ErrorCode::DegenerateResponse, "singular mode response");
        LinearForm x1 = (d2 * r1 - 1i * coupling * r2) / det;
        LinearForm x2 = (d1 * r2 - 1i * std::conj(coupling) * r1) / det;
        return std::pair{x1, x2};
    };

    auto source = [&](cplx drive, cplx atom_coeff, int transition) {
        LinearForm f = LinearForm::Zero();
        f(0) = -1i * drive / s2;
        f(transition) = atom_coeff;
        return f;
    };

    const cplx dA1 = p1.kappa + 1i * (p1.delta_c + p1.h);
    const cplx dA2 = p2.kappa + 1i * (p2.delta_c + p2.h);
    const cplx dB1 = p1.kappa + 1i * (p1.delta_c - p1.h);
    const cplx dB2 = p2.kappa + 1i * (p2.delta_c - p2.h);

    auto [A1, A2] = solve_family(dA1, dA2, mu, source(p1.E, -1i * g.gA_1, 1),
                                 source(p2.E, -1i * g.gA_2, 2));
    auto [B1, B2] = solve_family(dB1, dB2, nu, source(p1.E, -g.gB_1, 1),
                                 source(p2.E, -g.gB_2, 2));
    return {A1, B1, A2, B2};
}

} // namespace wgm
