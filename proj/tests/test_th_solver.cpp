#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include <Eigen/Dense>

#include "wgm/dressed.hpp"
#include "wgm/th_solver.hpp"

using namespace wgm;

namespace {

PhysicalParams drive_free(PhysicalParams p) {
    p.E_1 = p.E_2 = 0.0;
    return p;
}

ErrorCode error_code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "expected an error";
    return ErrorCode::BadValue;
}

// Amplitude of a driven, undamped-by-atom mode: (-i E/sqrt2) / (kappa + i (delta +- h)).
cplx driven_amplitude(cplx E, double kappa, double detuning) {
    return cplx(0, -1) * E / std::sqrt(2.0) / cplx(kappa, detuning);
}

PhysicalParams random_params(std::mt19937_64& rng) {
    auto u = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
    PhysicalParams p;
    p.g0_1 = u(5, 100);
    p.g0_2 = u(5, 100);
    p.h1 = u(0, 40);
    p.h2 = u(0, 40);
    p.kappa_in_1 = u(0.5, 3);
    p.kappa_in_2 = u(0.5, 3);
    p.kappa_ex_1 = u(1, 30);
    p.kappa_ex_2 = u(1, 30);
    p.p = u(0, 3);
    p.q = u(0, 3);
    p.Delta_1 = u(-150, 150);
    p.Delta_2 = u(-150, 150);
    p.E_1 = cplx(u(-0.2, 0.2), u(-0.2, 0.2));
    p.E_2 = cplx(u(-0.2, 0.2), u(-0.2, 0.2));
    p.phase_1 = u(0, std::numbers::pi);
    p.phase_2 = u(0, std::numbers::pi);
    return p;
}

} // namespace

TEST(Hamiltonian, SplitSinglePhotonBlock) {
    PhysicalParams p;
    p.E_1 = p.E_2 = 0.0;
    p.h1 = 15.0;
    const auto space = build_space(1);
    const auto H = build_hamiltonian(space, validate(p)).dense();
    const int a = space.index({1, {1, 0, 0, 0}}), b = space.index({1, {0, 1, 0, 0}});
    Eigen::Matrix2cd block;
    block << H(a, a), H(a, b), H(b, a), H(b, b);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(block);
    EXPECT_NEAR(es.eigenvalues()(0), -15.0, 1e-12);
    EXPECT_NEAR(es.eigenvalues()(1), 15.0, 1e-12);
}

TEST(Hamiltonian, ZeroParametersGiveZeroMatrix) {
    PhysicalParams p;
    p.E_1 = p.E_2 = 0.0;
    EXPECT_EQ(build_hamiltonian(build_space(1), validate(p)).max_abs(), 0.0);
}

TEST(Hamiltonian, StrongPresetContainsLowestDressedLevel) {
    PhysicalParams p = drive_free(presets::strong());
    const auto H = build_hamiltonian(build_space(1), validate(p)).dense();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
    const double e1 = 0.5 * (-15.0 - std::sqrt(8.0 * 100.0 * 100.0 + 15.0 * 15.0));
    EXPECT_NEAR(e1, -149.12, 5e-3);
    double best = 1e300;
    for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) best = std::min(best, std::abs(es.eigenvalues()(k) - e1));
    EXPECT_LT(best, 1e-10);
}

TEST(Hamiltonian, HermitianForRandomParameters) {
    std::mt19937_64 rng(3);
    const auto space = build_space(1);
    const SystemOperators ops(space);
    for (int n = 0; n < 20; ++n) {
        const auto vp = validate(random_params(rng));
        EXPECT_LT(build_hamiltonian(space, vp, ops, no_atom_reference(vp)).hermiticity_error(), 1e-12);
        EXPECT_LT(build_hamiltonian(space, vp).hermiticity_error(), 1e-12);
    }
}

TEST(Hamiltonian, ScatteringWithoutEpsilonAccepted) {
    PhysicalParams p = presets::strong();
    p.p = 1.0;
    const auto vp = validate(p);
    EXPECT_NO_THROW(build_hamiltonian(build_space(1), vp));
}

TEST(Hamiltonian, NoDirectModeExchangeWithoutScattering) {
    PhysicalParams p = presets::strong();
    p.phase_1 = 0.3;
    p.phase_2 = 1.1;
    const auto space = build_space(1);
    const auto H = build_hamiltonian(space, validate(p)).sparse();
    for (int k = 0; k < H.outerSize(); ++k)
        for (SparseMatrixC::InnerIterator it(H, k); it; ++it) {
            const auto r = space.state(static_cast<int>(it.row())), c = space.state(static_cast<int>(it.col()));
            if (r.level != c.level) continue;
            int changed = 0;
            for (int m = 0; m < 4; ++m) changed += r.n[m] != c.n[m];
            EXPECT_LE(changed, 1) << r.label() << " <- " << c.label();
        }
}

TEST(Liouvillian, TraceFunctionalAnnihilated) {
    std::mt19937_64 rng(5);
    const auto space = build_space(1);
    const SystemOperators ops(space);
    for (int n = 0; n < 5; ++n) {
        const auto vp = validate(random_params(rng));
        const auto sys = build_liouvillian(space, vp, ops, no_atom_reference(vp));
        EXPECT_LT(trace_functional_error(sys.full, space.dim()), 1e-12);
        EXPECT_EQ(sys.G.rows(), 48 * 48 - 1);
        EXPECT_EQ(sys.eliminated_index, 47 * 48 + 47);
    }
}

TEST(Liouvillian, DriveFreeHasZeroInhomogeneityWhenGroundStateEliminated) {
    const auto space = build_space(1);
    const auto vp = validate(drive_free(presets::strong()));
    const auto sys = build_liouvillian(space, vp, space.index({1, {0, 0, 0, 0}}));
    EXPECT_EQ(sys.K.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Liouvillian, GroundMixturesAreDriveFreeFixedPoints) {
    const auto space = build_space(1);
    const auto sys = build_liouvillian(space, validate(drive_free(presets::strong())));
    for (double w : {0.0, 0.3, 1.0}) {
        Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(space.dim(), space.dim());
        rho(space.index({1, {0, 0, 0, 0}}), space.index({1, {0, 0, 0, 0}})) = w;
        rho(space.index({2, {0, 0, 0, 0}}), space.index({2, {0, 0, 0, 0}})) = 1.0 - w;
        const Eigen::Map<const Eigen::VectorXcd> v(rho.data(), rho.size());
        EXPECT_LT((sys.full * v).cwiseAbs().maxCoeff(), 1e-14);
    }
}

TEST(Liouvillian, DumpListsTriplets) {
    const auto space = build_space(0);
    const auto sys = build_liouvillian(space, validate(presets::strong()));
    std::ostringstream os;
    dump_system(os, sys);
    EXPECT_EQ(os.str().rfind("# G 8 x 8 eliminated_index 8", 0), 0u);
    EXPECT_NE(os.str().find("# K"), std::string::npos);
}

TEST(SteadyState, DarkStateOnDiagonal) {
    PhysicalParams p = presets::strong();
    p.Delta_1 = p.Delta_2 = -22.0;
    const auto r = solve_th(validate(p));
    EXPECT_LT(r.populations[2], 1e-6);
}

TEST(SteadyState, FarDetuningPumpsIntoLevelOne) {
    PhysicalParams p = presets::strong();
    p.Delta_1 = -2000.0;
    p.Delta_2 = 0.0;
    EXPECT_GT(solve_th(validate(p)).populations[0], 0.99);
}

TEST(SteadyState, UncoupledAtomMatchesNoAtomAmplitudes) {
    PhysicalParams p = presets::strong();
    p.g0_1 = p.g0_2 = 0.0;
    p.Delta_1 = p.Delta_2 = 0.0;
    const auto vp = validate(p);
    ThOptions opts;
    opts.solve.nullspace_fallback = true;
    const auto r = solve_th(vp, opts);
    EXPECT_TRUE(r.state.used_fallback);
    const std::array<cplx, 4> oracle{driven_amplitude(p.E_1, vp.kappa_1(), 15.0),
                                     driven_amplitude(p.E_1, vp.kappa_1(), -15.0),
                                     driven_amplitude(p.E_2, vp.kappa_2(), 15.0),
                                     driven_amplitude(p.E_2, vp.kappa_2(), -15.0)};
    for (int m = 0; m < 4; ++m) {
        EXPECT_LT(std::abs(r.mean[m] - oracle[m]), 1e-8);
        EXPECT_LT(std::real(r.moments(m, m)), 1e-2);
    }
}

TEST(SteadyState, UncoupledAtomIsSingularWithoutFallback) {
    PhysicalParams p = presets::strong();
    p.g0_1 = p.g0_2 = 0.0;
    const auto vp = validate(p);
    EXPECT_EQ(error_code_of([&] { solve_th(vp); }), ErrorCode::SingularGenerator);
}

TEST(SteadyState, DarkStateModesMatchNoAtomReference) {
    for (double d : {-120.0, -22.0, 0.0, 75.0}) {
        PhysicalParams p = presets::strong();
        p.Delta_1 = p.Delta_2 = d;
        const auto vp = validate(p);
        const auto r = solve_th(vp);
        const auto ref = no_atom_reference(vp);
        for (int m = 0; m < 4; ++m) EXPECT_LT(std::abs(r.mean[m] - ref[m]), 1e-6) << d;
    }
}

TEST(SteadyState, InvariantsForRandomParameters) {
    std::mt19937_64 rng(17);
    for (int n = 0; n < 8; ++n) {
        const auto vp = validate(random_params(rng));
        const auto st = solve_th(vp).state;
        EXPECT_LT(st.residual, 1e-10);
        EXPECT_LT(st.hermiticity_error, 1e-10);
        EXPECT_LT(st.trace_error, 1e-12);
        EXPECT_GT(st.min_eigenvalue, -1e-8);
    }
}

TEST(SteadyState, BackendsAgree) {
    PhysicalParams p = presets::strong();
    p.Delta_1 = 30.0;
    p.Delta_2 = -60.0;
    const auto vp = validate(p);
    ThOptions opts;
    const auto ref = solve_th(vp, opts);
    for (LinearBackend b : {LinearBackend::SparseLU, LinearBackend::DenseLU}) {
        opts.solve.backend = b;
        const auto r = solve_th(vp, opts);
        EXPECT_LT((r.state.rho - ref.state.rho).cwiseAbs().maxCoeff(), 1e-11);
    }
}

TEST(SteadyState, FramesAgreeAtWeakDrive) {
    PhysicalParams p = presets::strong();
    p.E_1 = p.E_2 = 1e-3;
    p.Delta_1 = 40.0;
    p.Delta_2 = -10.0;
    p.phase_1 = p.phase_2 = 1.0;
    const auto vp = validate(p);
    ThOptions bare;
    bare.frame = Frame::Bare;
    const auto a = solve_th(vp);
    const auto b = solve_th(vp, bare);
    EXPECT_EQ(a.space.dim(), 48);
    for (int m = 0; m < 4; ++m) EXPECT_LT(std::abs(a.mean[m] - b.mean[m]), 1e-9);
    // Populations differ at order |alpha|^2 through the two-photon states the bare frame drops.
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(a.populations[i], b.populations[i], 1e-7);
}

TEST(SteadyState, InertModesPruned) {
    const auto vp = validate(presets::strong());
    const auto inert = inert_modes(vp);
    EXPECT_TRUE(inert[0]);
    EXPECT_FALSE(inert[1]);
    EXPECT_TRUE(inert[2]);
    EXPECT_FALSE(inert[3]);
    EXPECT_EQ(solve_th(vp).space.dim(), 12);
    ThOptions full;
    full.prune_inert_modes = false;
    const auto a = solve_th(vp), b = solve_th(vp, full);
    for (int m = 0; m < 4; ++m) EXPECT_LT(std::abs(a.mean[m] - b.mean[m]), 1e-12);
}

TEST(SteadyState, ScatteringConnectsFamilies) {
    PhysicalParams p = presets::strong();
    p.phase_1 = 0.0;
    const auto direct = inert_modes(validate(p));
    EXPECT_FALSE(direct[0]);
    EXPECT_TRUE(direct[1]);
    EXPECT_TRUE(direct[2]);
    EXPECT_FALSE(direct[3]);
    p.q = 2.0;
    p.p = 1.0;
    const auto linked = inert_modes(validate(p));
    for (bool b : linked) EXPECT_FALSE(b);
}

TEST(SteadyState, OccupationWarning) {
    PhysicalParams p = presets::strong();
    p.E_1 = p.E_2 = 20.0;
    ThOptions bare;
    bare.frame = Frame::Bare;
    const auto st = solve_th(validate(p), bare).state;
    bool warned = false;
    for (const auto& w : st.warnings) warned = warned || w.find("occupation") != std::string::npos;
    EXPECT_TRUE(warned);
}

TEST(SteadyState, PopulationsSumToOne) {
    PhysicalParams p = presets::bad_cavity();
    p.Delta_1 = -15.0;
    p.Delta_2 = 10.0;
    const auto r = solve_th(validate(p));
    EXPECT_NEAR(r.populations[0] + r.populations[1] + r.populations[2], 1.0, 1e-10);
}

TEST(NoAtomReference, ZeroDriveGivesZeroAmplitudes) {
    PhysicalParams p = drive_free(presets::strong());
    for (cplx a : no_atom_reference(validate(p))) EXPECT_EQ(a, cplx(0.0));
}

TEST(NoAtomReference, ClosedForm) {
    PhysicalParams p = presets::strong();
    p.Delta_1 = 7.0;
    p.E_1 = cplx(0.1, 0.05);
    const auto vp = validate(p);
    const auto ref = no_atom_reference(vp);
    EXPECT_LT(std::abs(ref[0] - driven_amplitude(p.E_1, vp.kappa_1(), 7.0 + 15.0)), 1e-15);
    EXPECT_LT(std::abs(ref[1] - driven_amplitude(p.E_1, vp.kappa_1(), 7.0 - 15.0)), 1e-15);
}
