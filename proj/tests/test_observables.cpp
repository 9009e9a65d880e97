#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "wgm/observables.hpp"

using namespace wgm;
using enum OutputMode;

namespace {

struct Both {
    ValidatedParams vp;
    ThResult th;
    AeResult ae;
    OutputCoefficients coeffs;
};

Both solve_both(const PhysicalParams& p) {
    const auto vp = validate(p);
    return {vp, solve_th(vp), solve_ae(vp), output_coefficients(vp, mode_couplings(vp))};
}

struct AeOnly {
    ValidatedParams vp;
    AeResult ae;
    OutputCoefficients coeffs;
};

AeOnly solve_ae_only(const PhysicalParams& p) {
    const auto vp = validate(p);
    return {vp, solve_ae(vp), output_coefficients(vp, mode_couplings(vp))};
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

} // namespace

TEST(OutputModes, NamesRoundTrip) {
    for (OutputMode m : kAllOutputs) EXPECT_EQ(parse_output(output_name(m)), m);
    EXPECT_THROW(parse_output("c1"), Error);
    EXPECT_EQ(pair_of(b2), 2);
    EXPECT_TRUE(is_transmission(a2));
    EXPECT_FALSE(is_transmission(b1));
}

TEST(InputAmplitude, Examples) {
    const auto vp = validate(presets::strong());
    const cplx a = input_amplitude(vp, 1);
    EXPECT_NEAR(a.real(), 0.0, 1e-16);
    EXPECT_NEAR(a.imag(), -0.1 / std::sqrt(2.0 * std::sqrt(226.0)), 1e-15);
    EXPECT_NEAR(input_flux(vp, 2), 0.01 / (2.0 * std::sqrt(226.0)), 1e-15);
}

TEST(InputAmplitude, ZeroExternalCouplingRejected) {
    PhysicalParams p = presets::strong();
    p.kappa_ex_1 = 0.0;
    const auto vp = validate(p);
    try {
        input_amplitude(vp, 1);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ZeroKappaEx);
    }
    EXPECT_NO_THROW(input_amplitude(vp, 2));
}

TEST(OutputCoefficients, ReflectionHasNoDirectInput) {
    const auto vp = validate(presets::strong());
    const auto c = output_coefficients(vp, mode_couplings(vp));
    const auto f = steady_mode_forms(vp, mode_couplings(vp));
    const double s = std::sqrt(vp.pair(1).kappa_ex);
    EXPECT_LT(std::abs(c.beta[0][0] - s * (f[0](0) - f[1](0))), 1e-15);
    EXPECT_LT(std::abs(c.alpha[0][0] - s * (f[0](0) + f[1](0)) + input_amplitude(vp, 1)), 1e-15);
    EXPECT_EQ(c.alpha[0][2], cplx(0.0));
}

TEST(NoAtomFlux, CriticalCouplingExtinguishesTransmission) {
    const auto vp = validate(presets::strong());
    EXPECT_LT(flux_no_atom(vp, a1), 1e-12);
    EXPECT_LT(flux_no_atom(vp, a2), 1e-12);
}

TEST(NoAtomFlux, FarDetunedCavityTransmitsEverything) {
    PhysicalParams p = presets::strong();
    p.Delta_1 = p.Delta_2 = 2000.0;
    const auto vp = validate(p);
    EXPECT_GT(flux_no_atom(vp, a1), 0.99);
    EXPECT_LT(flux_no_atom(vp, b1), 0.01);
}

TEST(NoAtomFlux, LorentzianOracle) {
    PhysicalParams p;
    p.kappa_in_1 = 1.0;
    p.kappa_ex_1 = 3.0;
    p.Delta_1 = 2.5;
    const auto vp = validate(p);
    // t = 1 - 2 kappa_ex / (kappa + i Delta) for a single undisturbed mode
    const cplx t = 1.0 - 2.0 * 3.0 / cplx(4.0, 2.5);
    EXPECT_NEAR(flux_no_atom(vp, a1), std::norm(t), 1e-14);
    EXPECT_NEAR(flux_no_atom(vp, b1), 0.0, 1e-14);
}

TEST(Flux, DarkStateReproducesEmptyCavity) {
    for (double d : {-80.0, -22.0, 10.0}) {
        PhysicalParams p = presets::strong();
        p.Delta_1 = p.Delta_2 = d;
        const auto s = solve_both(p);
        for (OutputMode m : kAllOutputs) {
            const double ref = flux_no_atom(s.vp, m);
            EXPECT_NEAR(flux_th(s.th, s.vp, m), ref, 1e-6) << d;
            EXPECT_NEAR(flux_ae(s.ae.state, s.coeffs, s.vp, m), ref, 1e-9) << d;
        }
    }
}

TEST(Flux, EnergyBalance) {
    PhysicalParams p = presets::strong();
    p.Delta_1 = 30.0;
    p.Delta_2 = -20.0;
    p.phase_1 = 0.5;
    p.phase_2 = 1.2;
    p.kappa_in_1 = 2.0;
    p.E_2 = cplx(0.05, 0.03);
    const auto vp = validate(p);
    for (Frame f : {Frame::Displaced, Frame::Bare}) {
        ThOptions opts;
        opts.frame = f;
        const auto r = solve_th(vp, opts);
        double lost = 0.0, absorbed = 0.0;
        for (int i = 1; i <= 2; ++i) {
            const OutputMode t = i == 1 ? a1 : a2, b = i == 1 ? b1 : b2;
            lost += input_flux(vp, i) * (1.0 - flux_th(r, vp, t) - flux_th(r, vp, b));
            const int A = 2 * (i - 1);
            absorbed += 2.0 * vp.pair(i).kappa_in * std::real(r.moments(A, A) + r.moments(A + 1, A + 1));
        }
        absorbed += (p.gamma_1 + p.gamma_2) * r.populations[2];
        EXPECT_NEAR(lost, absorbed, 1e-5 * absorbed);
    }
}

TEST(Flux, NonNegativeForRandomParameters) {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int n = 0; n < 10; ++n) {
        PhysicalParams p = presets::strong();
        p.Delta_1 = 300.0 * u(rng) - 150.0;
        p.Delta_2 = 300.0 * u(rng) - 150.0;
        p.phase_1 = 3.0 * u(rng);
        p.phase_2 = 3.0 * u(rng);
        p.p = u(rng);
        const auto s = solve_both(p);
        for (OutputMode m : kAllOutputs) {
            EXPECT_GE(flux_th(s.th, s.vp, m), -1e-10);
            EXPECT_GE(flux_ae(s.ae.state, s.coeffs, s.vp, m), -1e-10);
        }
    }
}

TEST(Flux, MethodsAgreeNearAtomicResonance) {
    for (double d : {-40.0, -20.0, 0.0, 10.0}) {
        PhysicalParams p = presets::bad_cavity();
        p.Delta_1 = d;
        p.Delta_2 = -20.0;
        const auto s = solve_both(p);
        EXPECT_LT(rel(flux_ae(s.ae.state, s.coeffs, s.vp, a1), flux_th(s.th, s.vp, a1)), 0.05) << d;
    }
}

// Full-range agreement over Delta_1 in [-100, 100] at Delta_2 = -22. The effective-model rates are
// evaluated at the probe frame, which overestimates the wing response; this
// fails beyond roughly Delta_1 > 30.
TEST(Flux, MethodsAgreeAcrossFullRange) {
    double worst = 0.0, at = 0.0;
    for (int n = 0; n <= 40; ++n) {
        PhysicalParams p = presets::bad_cavity();
        p.Delta_2 = -22.0;
        p.Delta_1 = -100.0 + 5.0 * n;
        const auto s = solve_both(p);
        const double d = rel(flux_ae(s.ae.state, s.coeffs, s.vp, a1), flux_th(s.th, s.vp, a1));
        if (d > worst) {
            worst = d;
            at = p.Delta_1;
        }
    }
    EXPECT_LE(worst, 0.05) << "worst relative deviation at Delta_1=" << at;
}

TEST(Populations, SumToOne) {
    const auto s = solve_both(presets::bad_cavity());
    const auto th = populations(s.th), ae = populations(s.ae.state);
    EXPECT_NEAR(th[0] + th[1] + th[2], 1.0, 1e-10);
    EXPECT_NEAR(ae[0] + ae[1] + ae[2], 1.0, 1e-12);
}

TEST(G2, UncoupledAtomIsCoherent) {
    PhysicalParams p = presets::bad_cavity();
    p.g0_1 = p.g0_2 = 0.0;
    const auto s = solve_ae_only(p);
    for (OutputMode i : kAllOutputs)
        for (OutputMode j : kAllOutputs) {
            const auto v = g2(s.ae.state, s.coeffs, i, j);
            if (v.tag) continue;
            EXPECT_NEAR(v.value, 1.0, 1e-12);
        }
}

TEST(G2, DarkStateIsCoherent) {
    PhysicalParams p = presets::bad_cavity();
    p.Delta_1 = p.Delta_2 = -20.0;
    const auto s = solve_ae_only(p);
    EXPECT_NEAR(g2(s.ae.state, s.coeffs, a1, a1).value, 1.0, 1e-6);
    EXPECT_NEAR(g2(s.ae.state, s.coeffs, a1, a2).value, 1.0, 1e-6);
}

TEST(G2, SymmetricInModes) {
    PhysicalParams p = presets::bad_cavity();
    p.Delta_1 = -15.0;
    p.Delta_2 = 12.0;
    p.phase_1 = 0.8;
    const auto s = solve_ae_only(p);
    for (OutputMode i : kAllOutputs)
        for (OutputMode j : kAllOutputs) {
            const auto x = g2(s.ae.state, s.coeffs, i, j), y = g2(s.ae.state, s.coeffs, j, i);
            EXPECT_NEAR(x.value, y.value, 1e-10 * std::max(1.0, x.value));
        }
}

TEST(G2, NonNegative) {
    std::mt19937_64 rng(37);
    std::uniform_real_distribution<double> u(-150.0, 150.0);
    for (int n = 0; n < 200; ++n) {
        PhysicalParams p = presets::bad_cavity();
        p.Delta_1 = u(rng);
        p.Delta_2 = u(rng);
        const auto s = solve_ae_only(p);
        EXPECT_GE(g2(s.ae.state, s.coeffs, a1, a1).value, -1e-12);
        EXPECT_GE(g2(s.ae.state, s.coeffs, a1, a2).value, -1e-12);
    }
}

TEST(G2, AntibunchingNearShiftedResonance) {
    double min_aa = 1e300, min_ab = 1e300;
    for (int i = 0; i <= 24; ++i)
        for (int j = 0; j <= 24; ++j) {
            if (i == j) continue;
            PhysicalParams p = presets::bad_cavity();
            p.Delta_1 = -25.0 + 0.5 * i;
            p.Delta_2 = -25.0 + 0.5 * j;
            const auto vp = validate(p);
            const auto s = solve_ae(vp);
            const auto c = output_coefficients(vp, mode_couplings(vp));
            min_aa = std::min(min_aa, g2(s.state, c, a1, a1).value);
            min_ab = std::min(min_ab, g2(s.state, c, a1, a2).value);
        }
    EXPECT_LT(min_aa, 0.5);
    EXPECT_LT(min_ab, 0.5);
}

TEST(G2, VanishingDenominatorTagged) {
    PhysicalParams p = presets::bad_cavity();
    p.g0_1 = p.g0_2 = 0.0;
    const auto s = solve_ae_only(p);
    const auto v = g2(s.ae.state, s.coeffs, a1, a1);
    ASSERT_TRUE(v.tag.has_value());
    EXPECT_EQ(*v.tag, ErrorCode::VanishingDenominator);
    EXPECT_TRUE(std::isinf(v.value));
}
