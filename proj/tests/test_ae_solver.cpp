#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include <Eigen/Dense>

#include "wgm/ae_solver.hpp"

using namespace wgm;

namespace {

EffectiveConstants constants_of(const PhysicalParams& p) {
    const auto vp = validate(p);
    return effective_constants(vp, mode_couplings(vp));
}

// Cavity-mediated shift and rate of a single node-coupled transition at zero detuning:
// f_B = i / (kappa + i h).
double shift_oracle(double g, double h, double kappa) { return g * g * h / (h * h + kappa * kappa); }
double rate_oracle(double g, double h, double kappa, double gamma) {
    return 2.0 * g * g * kappa / (h * h + kappa * kappa) + gamma;
}

} // namespace

TEST(EffectiveConstants, BadCavityShift) {
    const auto vp = validate(presets::bad_cavity());
    const auto c = constants_of(presets::bad_cavity());
    const double oracle = shift_oracle(70.0, 250.0, vp.kappa_1());
    EXPECT_NEAR(c.Delta_11, oracle, 1e-12 * oracle);
    EXPECT_NEAR(c.Delta_11, 9.761, 5e-4);
    EXPECT_NEAR(c.Delta_11 + c.Delta_22, 19.52, 5e-3);
}

TEST(EffectiveConstants, StrongPresetRate) {
    const auto vp = validate(presets::strong());
    const auto c = constants_of(presets::strong());
    const double oracle = rate_oracle(100.0, 15.0, vp.kappa_1(), 1.0);
    EXPECT_NEAR(c.Gamma_11, oracle, 1e-12 * oracle);
    EXPECT_NEAR(c.Gamma_22, oracle, 1e-12 * oracle);
}

TEST(EffectiveConstants, CollapseWithoutInterPairScattering) {
    const auto c = constants_of(presets::bad_cavity());
    EXPECT_EQ(c.lambda_A, c.f_A1);
    EXPECT_EQ(c.lambda_B, c.f_B1);
    EXPECT_EQ(c.xi_A, c.f_A2);
    EXPECT_EQ(c.xi_B, c.f_B2);
    EXPECT_EQ(c.F_A, c.f_A1 * c.f_A2);
    EXPECT_EQ(c.Gamma_12, cplx(0.0));
}

TEST(EffectiveConstants, CrossShiftIsZero) {
    PhysicalParams p = presets::strong();
    p.p = 1.5;
    p.q = 0.5;
    const auto c = constants_of(p);
    EXPECT_EQ(c.Delta_12, 0.0);
    EXPECT_EQ(c.Delta_21, 0.0);
}

TEST(EffectiveConstants, ScatteringGivesCrossRate) {
    PhysicalParams p = presets::strong();
    p.phase_1 = p.phase_2 = 0.6;
    p.p = 1.5;
    p.q = 0.5;
    const auto c = constants_of(p);
    EXPECT_GT(std::abs(c.Gamma_12), 1e-6);
    EXPECT_EQ(c.Gamma_21, std::conj(c.Gamma_12));
}

TEST(EffectiveConstants, ShiftScalesWithCouplingSquared) {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(1.0, 50.0), s(0.1, 3.0);
    for (int n = 0; n < 50; ++n) {
        PhysicalParams p = presets::bad_cavity();
        p.g0_1 = u(rng);
        p.Delta_1 = u(rng) - 25.0;
        const double k = s(rng);
        PhysicalParams q = p;
        q.g0_1 = k * p.g0_1;
        const double a = constants_of(p).Delta_11, b = constants_of(q).Delta_11;
        EXPECT_NEAR(b, k * k * a, 1e-10 * std::max(1.0, std::abs(b)));
    }
}

TEST(EffectiveConstants, BadCavityWarning) {
    EXPECT_TRUE(constants_of(presets::bad_cavity()).warnings.empty());
    EXPECT_EQ(constants_of(presets::strong()).warnings.size(), 2u);
}

TEST(EffectiveConstants, JsonHasAllKeys) {
    const auto j = to_json(constants_of(presets::strong()));
    for (const char* k : {"f_A1", "mu", "lambda_B", "xi_A", "F_B", "Omega_1", "Omega_2", "Delta_11", "Delta_12",
                          "Gamma_11", "Gamma_12", "Gamma_21"})
        EXPECT_TRUE(j.contains(k)) << k;
    EXPECT_EQ(j["Gamma_12"].size(), 2u);
}

TEST(EffectiveModel, HermitianWithShiftedExcitedLevel) {
    PhysicalParams p = presets::bad_cavity();
    p.E_1 = p.E_2 = 0.0;
    const auto vp = validate(p);
    const auto c = effective_constants(vp, mode_couplings(vp));
    const auto m = build_effective_model(c, vp);
    EXPECT_LT((m.H - m.H.adjoint()).cwiseAbs().maxCoeff(), 1e-15);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3cd> es(m.H);
    EXPECT_NEAR(es.eigenvalues()(0), 0.0, 1e-12);
    EXPECT_NEAR(es.eigenvalues()(1), 0.0, 1e-12);
    EXPECT_NEAR(es.eigenvalues()(2), 19.52, 5e-3);
}

TEST(EffectiveModel, DiagonalRatesWithoutScattering) {
    const auto vp = validate(presets::bad_cavity());
    const auto m = build_effective_model(effective_constants(vp, mode_couplings(vp)), vp);
    EXPECT_EQ(m.Gamma(0, 1), cplx(0.0));
    EXPECT_EQ(m.Gamma(1, 0), cplx(0.0));
    EXPECT_GT(m.Gamma(0, 0).real(), 1.0);
}

TEST(EffectiveModel, GeneratorPreservesTrace) {
    PhysicalParams p = presets::strong();
    p.phase_1 = 0.4;
    p.p = 0.7;
    p.q = 0.2;
    const auto vp = validate(p);
    const auto L = atomic_generator(build_effective_model(effective_constants(vp, mode_couplings(vp)), vp));
    for (int c = 0; c < 9; ++c) EXPECT_LT(std::abs(L(0, c) + L(4, c) + L(8, c)), 1e-12);
}

TEST(AtomicSteadyState, UndrivenFallsBackToGroundStates) {
    PhysicalParams p = presets::bad_cavity();
    p.E_1 = p.E_2 = 0.0;
    const auto r = solve_ae(validate(p));
    EXPECT_TRUE(r.state.used_fallback);
    EXPECT_FALSE(r.state.warnings.empty());
    EXPECT_NEAR(r.state.populations[2], 0.0, 1e-12);
    EXPECT_NEAR(r.state.populations[0] + r.state.populations[1], 1.0, 1e-12);
}

TEST(AtomicSteadyState, DarkStateSplitsGroundPopulation) {
    for (double d : {-60.0, -20.0, 0.0, 35.0}) {
        PhysicalParams p = presets::bad_cavity();
        p.Delta_1 = p.Delta_2 = d;
        const auto s = solve_ae(validate(p)).state;
        EXPECT_NEAR(s.populations[0], 0.5, 1e-9) << d;
        EXPECT_NEAR(s.populations[1], 0.5, 1e-9) << d;
        EXPECT_LT(s.populations[2], 1e-9) << d;
    }
}

TEST(AtomicSteadyState, OpticalPumpingIntoUndrivenGround) {
    PhysicalParams p = presets::bad_cavity();
    p.E_2 = 0.0;
    p.Delta_1 = -10.0;
    p.Delta_2 = 5.0;
    const auto s = solve_ae(validate(p)).state;
    EXPECT_GT(s.populations[1], 1.0 - 1e-9);
}

TEST(AtomicSteadyState, ExcitationPeaksNearShiftedResonance) {
    double best = -1.0, at = 0.0;
    for (int n = 0; n <= 160; ++n) {
        PhysicalParams p = presets::bad_cavity();
        p.Delta_2 = -22.0;
        p.Delta_1 = -60.0 + 0.5 * n;
        const double p3 = solve_ae(validate(p)).state.populations[2];
        if (p3 > best) {
            best = p3;
            at = p.Delta_1;
        }
    }
    EXPECT_GE(at, -22.0);
    EXPECT_LE(at, -16.0);
}

TEST(AtomicSteadyState, InvariantsForRandomParameters) {
    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int n = 0; n < 200; ++n) {
        PhysicalParams p = presets::bad_cavity();
        p.g0_1 = 80.0 * u(rng);
        p.g0_2 = 80.0 * u(rng);
        p.Delta_1 = 200.0 * u(rng) - 100.0;
        p.Delta_2 = 200.0 * u(rng) - 100.0;
        p.phase_1 = 3.0 * u(rng);
        p.phase_2 = 3.0 * u(rng);
        p.p = 2.0 * u(rng);
        p.q = 2.0 * u(rng);
        p.E_1 = cplx(u(rng), u(rng));
        p.E_2 = cplx(u(rng), u(rng));
        const auto s = solve_ae(validate(p)).state;
        EXPECT_LT(s.residual, 1e-10);
        EXPECT_LT(s.trace_error, 1e-12);
        EXPECT_GT(s.min_eigenvalue, -1e-10);
        for (double x : s.populations) {
            EXPECT_GE(x, -1e-10);
            EXPECT_LE(x, 1.0 + 1e-10);
        }
    }
}
