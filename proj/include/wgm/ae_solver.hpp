#pragma once

// Adiabatic elimination of the cavity modes: effective constants for the
// atomic master equation, the 3x3 model built from them and its steady state.

#include <array>
#include <cmath>
#include <complex>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "wgm/errors.hpp"
#include "wgm/params.hpp"

namespace wgm {

struct EffectiveConstants {
    cplx f_A1, f_B1, f_A2, f_B2;
    cplx mu, nu;
    cplx lambda_A, lambda_B, xi_A, xi_B, F_A, F_B;
    cplx Omega_A1, Omega_A2, Omega_B1, Omega_B2;
    cplx Omega_1, Omega_2;
    double Delta_11 = 0.0, Delta_22 = 0.0, Delta_12 = 0.0, Delta_21 = 0.0;
    double Gamma_11 = 0.0, Gamma_22 = 0.0;
    cplx Gamma_12, Gamma_21;
    std::vector<std::string> warnings;
};

inline constexpr double kDenominatorTolerance = 1e-12;
inline constexpr double kBadCavityRatio = 0.5;

inline EffectiveConstants effective_constants(const ValidatedParams& vp, const ModeCouplings& g) {
    using namespace std::complex_literals;
    const auto& p = vp.params();
    const auto p1 = vp.pair(1);
    const auto p2 = vp.pair(2);
    const double s2 = std::sqrt(2.0);
    EffectiveConstants c;

    c.f_A1 = 1i / (p1.kappa - 1i * (p1.delta_c + p1.h));
    c.f_B1 = 1i / (p1.kappa - 1i * (p1.delta_c - p1.h));
    c.f_A2 = 1i / (p2.kappa - 1i * (p2.delta_c + p2.h));
    c.f_B2 = 1i / (p2.kappa - 1i * (p2.delta_c - p2.h));
    c.mu = p.q + p.p;
    c.nu = p.p - p.q;

    const cplx den_A = 1.0 - c.f_A1 * c.f_A2 * std::norm(c.mu);
    const cplx den_B = 1.0 - c.f_B1 * c.f_B2 * std::norm(c.nu);
    if (std::abs(den_A) < kDenominatorTolerance || std::abs(den_B) < kDenominatorTolerance)
        throw Error(ErrorCode::DegenerateResponse, "vanishing 1 - f f |mu|^2 denominator");

    c.lambda_A = c.f_A1 / den_A;
    c.lambda_B = c.f_B1 / den_B;
    c.xi_A = c.f_A2 / den_A;
    c.xi_B = c.f_B2 / den_B;
    c.F_A = c.f_A1 * c.f_A2 / den_A;
    c.F_B = c.f_B1 * c.f_B2 / den_B;

    const double gA1 = g.gA_1, gA2 = g.gA_2, gB1 = g.gB_1, gB2 = g.gB_2;
    const cplx e1 = p1.E / s2, e2 = p2.E / s2;

    c.Delta_11 = gA1 * gA1 * c.lambda_A.real() + gB1 * gB1 * c.lambda_B.real();
    c.Delta_22 = gA2 * gA2 * c.xi_A.real() + gB2 * gB2 * c.xi_B.real();

    c.Omega_A1 = std::conj(c.lambda_A) * gA1 * e1 + std::conj(c.F_A) * c.mu * gA1 * e2;
    c.Omega_A2 = std::conj(c.xi_A) * gA2 * e2 + std::conj(c.F_A) * std::conj(c.mu) * gA2 * e1;
    c.Omega_B1 = 1i * std::conj(c.lambda_B) * gB1 * e1 + 1i * std::conj(c.F_B) * c.nu * gB1 * e2;
    c.Omega_B2 = 1i * std::conj(c.xi_B) * gB2 * e2 + 1i * std::conj(c.F_B) * std::conj(c.nu) * gB2 * e1;
    c.Omega_1 = c.Omega_A1 + c.Omega_B1;
    c.Omega_2 = c.Omega_A2 + c.Omega_B2;

    c.Gamma_11 = 2.0 * (gA1 * gA1 * c.lambda_A.imag() + gB1 * gB1 * c.lambda_B.imag()) + p1.gamma;
    c.Gamma_22 = 2.0 * (gA2 * gA2 * c.xi_A.imag() + gB2 * gB2 * c.xi_B.imag()) + p2.gamma;
    c.Gamma_12 = 2.0 * (gA1 * gA2 * c.mu * c.F_A.imag() + gB1 * gB2 * c.nu * c.F_B.imag());
    c.Gamma_21 = std::conj(c.Gamma_12);

    for (int i = 1; i <= 2; ++i) {
        const auto pp = vp.pair(i);
        if (pp.g0 / pp.kappa > kBadCavityRatio)
            c.warnings.push_back("g0_" + std::to_string(i) + "/kappa_" + std::to_string(i) + " = " +
                                 std::to_string(pp.g0 / pp.kappa) +
                                 " exceeds 0.5; adiabatic elimination may be invalid");
    }
    return c;
}

inline nlohmann::json to_json(const EffectiveConstants& c) {
    auto z = [](cplx v) { return nlohmann::json::array({v.real(), v.imag()}); };
    return {
        {"f_A1", z(c.f_A1)},         {"f_B1", z(c.f_B1)},         {"f_A2", z(c.f_A2)},
        {"f_B2", z(c.f_B2)},         {"mu", z(c.mu)},             {"nu", z(c.nu)},
        {"lambda_A", z(c.lambda_A)}, {"lambda_B", z(c.lambda_B)}, {"xi_A", z(c.xi_A)},
        {"xi_B", z(c.xi_B)},         {"F_A", z(c.F_A)},           {"F_B", z(c.F_B)},
        {"Omega_A1", z(c.Omega_A1)}, {"Omega_A2", z(c.Omega_A2)}, {"Omega_B1", z(c.Omega_B1)},
        {"Omega_B2", z(c.Omega_B2)}, {"Omega_1", z(c.Omega_1)},   {"Omega_2", z(c.Omega_2)},
        {"Delta_11", c.Delta_11},    {"Delta_22", c.Delta_22},    {"Delta_12", c.Delta_12},
        {"Delta_21", c.Delta_21},    {"Gamma_11", c.Gamma_11},    {"Gamma_22", c.Gamma_22},
        {"Gamma_12", z(c.Gamma_12)}, {"Gamma_21", z(c.Gamma_21)},
    };
}

/// Labeled dump for regression snapshots.
inline void dump_constants(std::ostream& os, const EffectiveConstants& c) {
    os << to_json(c).dump(2) << '\n';
}

struct EffectiveAtomModel {
    Eigen::Matrix3cd H;        // basis |1>, |2>, |3>
    Eigen::Matrix2cd Gamma;    // rate matrix Gamma_ij
};

namespace detail {

// |i><j| on the atomic basis, levels 1..3.
inline Eigen::Matrix3cd atom_unit(int i, int j) {
    Eigen::Matrix3cd m = Eigen::Matrix3cd::Zero();
    m(i - 1, j - 1) = 1.0;
    return m;
}

inline Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
    Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

} // namespace detail

inline constexpr double kAtomHermiticityTolerance = 1e-12;

inline EffectiveAtomModel build_effective_model(const EffectiveConstants& c, const ValidatedParams& vp) {
    const auto& p = vp.params();
    const std::array<cplx, 2> omega{c.Omega_1, c.Omega_2};
    for (cplx v : {c.Omega_1, c.Omega_2, c.Gamma_12, c.Gamma_21})
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw Error(ErrorCode::NonFinite, "effective constants are not finite");

    EffectiveAtomModel m;
    m.H = Eigen::Matrix3cd::Zero();
    // S_i^+ S_j^- = delta_ij |3><3|
    m.H(2, 2) = c.Delta_11 + c.Delta_22;
    m.H(0, 0) = -p.Delta_1;
    m.H(1, 1) = -p.Delta_2;
    for (int i = 0; i < 2; ++i) {
        m.H(2, i) += omega[i];
        m.H(i, 2) += std::conj(omega[i]);
    }
    m.Gamma << c.Gamma_11, c.Gamma_12, c.Gamma_21, c.Gamma_22;
    if ((m.H - m.H.adjoint()).cwiseAbs().maxCoeff() > kAtomHermiticityTolerance)
        throw Error(ErrorCode::NonHermitianConstruction, "effective Hamiltonian is not Hermitian");
    return m;
}

/// 9x9 generator on column-major vec(rho).
inline Eigen::MatrixXcd atomic_generator(const EffectiveAtomModel& m) {
    using namespace std::complex_literals;
    const Eigen::Matrix3cd I = Eigen::Matrix3cd::Identity();
    Eigen::MatrixXcd L = -1i * detail::kron(I, m.H) + 1i * detail::kron(m.H.transpose(), I);
    for (int i = 1; i <= 2; ++i)
        for (int j = 1; j <= 2; ++j) {
            const cplx rate = m.Gamma(i - 1, j - 1) / 2.0;
            if (rate == cplx(0.0)) continue;
            const Eigen::Matrix3cd sj = detail::atom_unit(j, 3);   // S_j^-
            const Eigen::Matrix3cd si_dag = detail::atom_unit(3, i); // S_i^+
            const Eigen::Matrix3cd prod = si_dag * sj;
            L += rate * (2.0 * detail::kron(si_dag.transpose(), sj) - detail::kron(I, prod) -
                         detail::kron(prod.transpose(), I));
        }
    return L;
}

struct AtomicDM {
    Eigen::Matrix3cd rho;
    std::array<double, 3> populations{};
    double residual = 0.0;
    double hermiticity_error = 0.0;
    double trace_error = 0.0;
    double min_eigenvalue = 0.0;
    double rcond = 0.0;
    bool used_fallback = false;
    std::vector<std::string> warnings;
};

inline constexpr double kAtomTolerance = 1e-10;
inline constexpr double kAtomMinRcond = 1e-13;

namespace detail {

inline Eigen::Matrix3cd atomic_long_time_limit(const Eigen::MatrixXcd& L) {
    const double shift = 1e-9 * std::max(1.0, L.cwiseAbs().maxCoeff());
    const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(L - shift * Eigen::MatrixXcd::Identity(9, 9));
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(9);
    v(0) = v(4) = v(8) = 1.0 / 3.0;
    for (int it = 0; it < 3; ++it) {
        v = lu.solve(v);
        v /= v(0) + v(4) + v(8);
    }
    const Eigen::Matrix3cd rho = Eigen::Map<Eigen::Matrix3cd>(v.data());
    return 0.5 * (rho + rho.adjoint());
}

} // namespace detail

/// Steady state with Tr rho = 1 replacing the rho_33 equation. A singular
/// reduced system falls back to the long-time limit from the maximally mixed state.
inline AtomicDM solve_atomic_steady_state(const EffectiveAtomModel& m) {
    const Eigen::MatrixXcd L = atomic_generator(m);
    constexpr int e = 8;   // vec index of rho_33
    Eigen::MatrixXcd G(8, 8);
    Eigen::VectorXcd K(8);
    for (int r = 0; r < 8; ++r) {
        K(r) = L(r, e);
        for (int c = 0; c < 8; ++c) G(r, c) = L(r, c) - ((c == 0 || c == 4) ? L(r, e) : cplx(0.0));
    }

    AtomicDM out;
    const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(G);
    out.rcond = lu.rcond();
    if (out.rcond > kAtomMinRcond) {
        const Eigen::VectorXcd x = lu.solve(-K);
        Eigen::VectorXcd v(9);
        v.head(8) = x;
        v(8) = 1.0 - x(0) - x(4);
        out.rho = Eigen::Map<Eigen::Matrix3cd>(v.data());
    } else {
        out.rho = detail::atomic_long_time_limit(L);
        out.used_fallback = true;
        out.warnings.push_back("effective generator singular (rcond " + std::to_string(out.rcond) +
                               "); returned the long-time limit from the maximally mixed state");
    }

    const Eigen::Map<const Eigen::VectorXcd> v(out.rho.data(), 9);
    out.residual = (L * v).cwiseAbs().maxCoeff();
    out.hermiticity_error = (out.rho - out.rho.adjoint()).cwiseAbs().maxCoeff();
    out.trace_error = std::abs(out.rho.trace() - 1.0);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3cd> es(0.5 * (out.rho + out.rho.adjoint()),
                                                       Eigen::EigenvaluesOnly);
    out.min_eigenvalue = es.eigenvalues().minCoeff();
    if (!out.rho.allFinite()) throw Error(ErrorCode::SingularGenerator, "non-finite atomic steady state");
    if (out.hermiticity_error > kAtomTolerance || out.trace_error > kAtomTolerance ||
        out.min_eigenvalue < -kAtomTolerance)
        throw Error(ErrorCode::NonPhysicalResult,
                    "atomic state: hermiticity " + std::to_string(out.hermiticity_error) +
                        ", trace error " + std::to_string(out.trace_error) + ", min eigenvalue " +
                        std::to_string(out.min_eigenvalue));
    for (int i = 0; i < 3; ++i) out.populations[i] = out.rho(i, i).real();
    return out;
}

struct AeResult {
    EffectiveConstants constants;
    EffectiveAtomModel model;
    AtomicDM state;
};

inline AeResult solve_ae(const ValidatedParams& vp) {
    AeResult r;
    r.constants = effective_constants(vp, mode_couplings(vp));
    r.model = build_effective_model(r.constants, vp);
    r.state = solve_atomic_steady_state(r.model);
    return r;
}

} // namespace wgm
