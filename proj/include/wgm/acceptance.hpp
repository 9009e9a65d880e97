#pragma once

// Acceptance suite: eight end-to-end checks with measured values and runtimes.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "wgm/ae_solver.hpp"
#include "wgm/config.hpp"
#include "wgm/dressed.hpp"
#include "wgm/errors.hpp"
#include "wgm/observables.hpp"
#include "wgm/params.hpp"
#include "wgm/th_solver.hpp"

namespace wgm {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
    double budget_seconds = 0.0;
};

inline nlohmann::json to_json(const CriterionResult& r) {
    return {{"id", r.id},         {"name", r.name},       {"passed", r.passed},
            {"detail", r.detail}, {"seconds", r.seconds}, {"budget_seconds", r.budget_seconds}};
}

/// "key=value" assignments applied to the extinction check's parameter set.
using Overrides = std::vector<std::pair<std::string, std::string>>;

namespace acceptance {

struct Check {
    bool ok = true;
    std::ostringstream detail;

    void require(bool cond, const std::string& what) {
        if (!cond) ok = false;
        detail << (detail.tellp() > 0 ? "; " : "") << what << (cond ? "" : " [fail]");
    }
};

inline std::string num(double v, int precision = 4) {
    std::ostringstream os;
    os.precision(precision);
    os << v;
    return os.str();
}

inline CriterionResult timed(int id, std::string name, double budget, const std::function<void(Check&)>& body) {
    CriterionResult r{id, std::move(name), false, {}, 0.0, budget};
    Check c;
    const auto start = std::chrono::steady_clock::now();
    try {
        body(c);
    } catch (const std::exception& e) {
        c.require(false, std::string("exception: ") + e.what());
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    c.require(r.seconds < budget, "runtime " + num(r.seconds, 3) + " s < " + num(budget) + " s");
    r.passed = c.ok;
    r.detail = c.detail.str();
    return r;
}

inline double nearest(const Eigen::VectorXd& values, double target) {
    double best = values(0);
    for (Eigen::Index k = 1; k < values.size(); ++k)
        if (std::abs(values(k) - target) < std::abs(best - target)) best = values(k);
    return best;
}

inline CriterionResult dressed_eigenvalues() {
    return timed(1, "dressed eigenvalues", 1.0, [](Check& c) {
        const auto vp = validate(presets::strong());
        const auto closed = closed_form_eigenvalues(100.0, 15.0);
        const auto s1 = numeric_dressed(vp, 1);
        const auto s2 = numeric_dressed(vp, 2);
        const std::array<double, 5> rounded{-149.0, -15.0, 134.0, 77.0, -122.0};
        double worst_rel = 0.0, worst_rounded = 0.0;
        for (int k = 0; k < 5; ++k) {
            const double numeric = nearest(k < 3 ? s1.eigenvalues : s2.eigenvalues, closed[k]);
            worst_rel = std::max(worst_rel, std::abs(numeric - closed[k]) / std::abs(closed[k]));
            worst_rounded = std::max(worst_rounded, std::abs(closed[k] - rounded[k]));
        }
        c.require(worst_rel <= 1e-10, "max relative deviation numeric vs closed form " + num(worst_rel));
        c.require(worst_rounded <= 1.0, "max deviation from rounded values " + num(worst_rounded));
    });
}

inline PhysicalParams extinction_params(const Overrides& overrides) {
    PhysicalParams p = presets::strong();
    p.g0_1 = p.g0_2 = 0.0;
    p.Delta_1 = p.Delta_2 = 0.0;
    for (const auto& [k, v] : overrides) set_field(p, k, v);
    return p;
}

inline CriterionResult critical_extinction(const Overrides& overrides) {
    return timed(2, "critical-coupling extinction", 1.0, [&](Check& c) {
        const auto vp = validate(extinction_params(overrides));
        ThOptions opts;
        opts.solve.nullspace_fallback = true;
        const ThResult th = solve_th(vp, opts);
        double worst_flux = 0.0, worst_gap = 0.0;
        for (OutputMode m : {OutputMode::a1, OutputMode::a2}) {
            const double analytic = flux_no_atom(vp, m);
            worst_flux = std::max({worst_flux, analytic, flux_th(th, vp, m)});
            worst_gap = std::max(worst_gap, std::abs(analytic - flux_th(th, vp, m)));
        }
        c.require(worst_flux < 1e-10, "max transmission " + num(worst_flux));
        c.require(worst_gap <= 1e-8, "analytic vs TH " + num(worst_gap));

        PhysicalParams weak = vp.params();
        weak.E_1 = weak.E_2 = 1e-4;
        ThOptions bare = opts;
        bare.frame = Frame::Bare;
        const auto wv = validate(weak);
        const ThResult b = solve_th(wv, bare);
        c.detail << "; bare-frame transmission at E=1e-4 " << num(flux_th(b, wv, OutputMode::a1));
    });
}

inline CriterionResult dark_state_decoupling() {
    return timed(3, "dark-state decoupling", 30.0, [](Check& c) {
        double worst_p3 = 0.0, worst_flux = 0.0;
        for (int k = 0; k < 20; ++k) {
            PhysicalParams p = presets::strong();
            p.E_1 = p.E_2 = 0.1;
            p.Delta_1 = p.Delta_2 = -200.0 + 400.0 * k / 19.0;
            const auto vp = validate(p);
            const ThResult r = solve_th(vp);
            worst_p3 = std::max(worst_p3, r.populations[2]);
            for (OutputMode m : kAllOutputs)
                worst_flux = std::max(worst_flux, std::abs(flux_th(r, vp, m) - flux_no_atom(vp, m)));
        }
        c.require(worst_p3 < 1e-6, "max P3 " + num(worst_p3));
        c.require(worst_flux < 1e-6, "max |F - F_no_atom| " + num(worst_flux));
    });
}

inline CriterionResult method_agreement() {
    return timed(4, "TH/AE agreement", 120.0, [](Check& c) {
        double worst = 0.0, at = 0.0;
        for (int d = -100; d <= 100; ++d) {
            PhysicalParams p = presets::bad_cavity();
            p.E_1 = p.E_2 = 0.1;
            p.Delta_2 = -22.0;
            p.Delta_1 = d;
            const auto vp = validate(p);
            const double th = flux_th(solve_th(vp), vp, OutputMode::a1);
            const AeResult ae = solve_ae(vp);
            const double fa = flux_ae(ae.state, output_coefficients(vp, mode_couplings(vp)), vp, OutputMode::a1);
            const double rel = std::abs(th - fa) / std::abs(th);
            if (rel > worst) {
                worst = rel;
                at = d;
            }
        }
        c.require(worst <= 0.05, "max relative deviation of F(a1) " + num(worst) + " at Delta_1=" + num(at));
    });
}

inline CriterionResult ae_resonance() {
    return timed(5, "AE resonance position", 10.0, [](Check& c) {
        const auto vp = validate(presets::bad_cavity());
        const auto k = effective_constants(vp, mode_couplings(vp));
        const double shift = k.Delta_11 + k.Delta_22;
        c.require(std::abs(shift - 19.5) <= 0.1, "Delta_11 + Delta_22 = " + num(shift, 6));
        double best = -1.0, at = 0.0;
        for (int n = 0; n <= 400; ++n) {
            PhysicalParams p = presets::bad_cavity();
            p.Delta_2 = -22.0;
            p.Delta_1 = -100.0 + 0.5 * n;
            const double p3 = solve_ae(validate(p)).state.populations[2];
            if (p3 > best) {
                best = p3;
                at = p.Delta_1;
            }
        }
        c.require(at >= -22.0 && at <= -16.0, "P3 maximum at Delta_1=" + num(at) + " (P3=" + num(best) + ")");
    });
}

inline G2Value ae_g2(const PhysicalParams& p, OutputMode mi, OutputMode mj) {
    const auto vp = validate(p);
    const AeResult r = solve_ae(vp);
    return g2(r.state, output_coefficients(vp, mode_couplings(vp)), mi, mj);
}

inline CriterionResult photon_statistics() {
    return timed(6, "photon statistics", 60.0, [](Check& c) {
        using enum OutputMode;
        PhysicalParams free = presets::bad_cavity();
        free.g0_1 = free.g0_2 = 0.0;
        free.Delta_1 = free.Delta_2 = -20.0;
        double worst_free = 0.0;
        for (auto [i, j] : {std::pair{a1, a1}, {a2, a2}, {a1, a2}, {b1, b2}})
            worst_free = std::max(worst_free, std::abs(ae_g2(free, i, j).value - 1.0));
        c.require(worst_free <= 1e-12, "g=0: max |g2 - 1| " + num(worst_free));

        PhysicalParams dark = presets::bad_cavity();
        dark.Delta_1 = dark.Delta_2 = -20.0;
        const double dark_dev = std::abs(ae_g2(dark, a1, a1).value - 1.0);
        c.require(dark_dev <= 1e-6, "dark diagonal: |g2(a1,a1) - 1| " + num(dark_dev));

        double min11 = 1e300, min12 = 1e300;
        for (int i = 0; i <= 24; ++i)
            for (int j = 0; j <= 24; ++j) {
                if (i == j) continue;
                PhysicalParams p = presets::bad_cavity();
                p.Delta_1 = -25.0 + 0.5 * i;
                p.Delta_2 = -25.0 + 0.5 * j;
                min11 = std::min(min11, ae_g2(p, a1, a1).value);
                min12 = std::min(min12, ae_g2(p, a1, a2).value);
            }
        c.require(min11 < 0.5, "min g2(a1,a1) off diagonal " + num(min11));
        c.require(min12 < 0.5, "min g2(a1,a2) off diagonal " + num(min12));

        double high = 0.0, hx = 0.0, hy = 0.0;
        for (int d1 = 100; d1 <= 160; ++d1)
            for (int d2 = -45; d2 <= -15; ++d2) {
                PhysicalParams p = presets::bad_cavity();
                p.Delta_1 = d1;
                p.Delta_2 = d2;
                const G2Value v = ae_g2(p, a1, a1);
                if (!v.tag && v.value > high) {
                    high = v.value;
                    hx = d1;
                    hy = d2;
                }
            }
        c.require(high > 5.0, "max g2(a1,a1) " + num(high) + " at (" + num(hx) + ", " + num(hy) + ")");
    });
}

inline PhysicalParams random_params(std::mt19937_64& rng) {
    auto u = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
    PhysicalParams p;
    p.g0_1 = u(5, 100);
    p.g0_2 = u(5, 100);
    p.h1 = u(0, 50);
    p.h2 = u(0, 50);
    p.kappa_in_1 = u(0.5, 5);
    p.kappa_in_2 = u(0.5, 5);
    p.kappa_ex_1 = u(1, 40);
    p.kappa_ex_2 = u(1, 40);
    p.gamma_1 = u(0.5, 2);
    p.gamma_2 = u(0.5, 2);
    p.p = u(0, 5);
    p.q = u(0, 5);
    p.Delta_1 = u(-200, 200);
    p.Delta_2 = u(-200, 200);
    p.E_1 = cplx(u(-0.2, 0.2), u(-0.2, 0.2));
    p.E_2 = cplx(u(-0.2, 0.2), u(-0.2, 0.2));
    p.phase_1 = u(0, std::numbers::pi);
    p.phase_2 = u(0, std::numbers::pi);
    p.radial_factor = u(0.3, 1.0);
    return p;
}

inline CriterionResult property_suite(std::uint64_t seed = 20240601) {
    return timed(7, "property suite", 120.0, [seed](Check& c) {
        std::mt19937_64 rng(seed);
        double herm = 0.0, trace = 0.0, min_eig = 0.0, residual = 0.0, collapse = 0.0, sym = 0.0, pyth = 0.0;
        for (int n = 0; n < 100; ++n) {
            const PhysicalParams p = random_params(rng);
            const auto vp = validate(p);
            const ThResult th = solve_th(vp);
            herm = std::max(herm, th.state.hermiticity_error);
            trace = std::max(trace, th.state.trace_error);
            min_eig = std::min(min_eig, th.state.min_eigenvalue);
            residual = std::max(residual, th.state.residual);

            const AeResult ae = solve_ae(vp);
            herm = std::max(herm, ae.state.hermiticity_error);
            trace = std::max(trace, ae.state.trace_error);
            min_eig = std::min(min_eig, ae.state.min_eigenvalue);
            residual = std::max(residual, ae.state.residual);

            const auto coeff = output_coefficients(vp, mode_couplings(vp));
            for (OutputMode i : kAllOutputs)
                for (OutputMode j : kAllOutputs) {
                    const G2Value gij = g2(ae.state, coeff, i, j), gji = g2(ae.state, coeff, j, i);
                    if (!gij.tag) sym = std::max(sym, std::abs(gij.value - gji.value) / std::max(1.0, gij.value));
                }

            const auto g = mode_couplings(vp);
            for (int i = 1; i <= 2; ++i) {
                const double g0 = vp.pair(i).g0 * p.radial_factor;
                pyth = std::max(pyth, std::abs(g.gA(i) * g.gA(i) + g.gB(i) * g.gB(i) - g0 * g0) / (g0 * g0));
            }

            PhysicalParams flat = p;
            flat.p = flat.q = 0.0;
            const auto fv = validate(flat);
            const auto k = effective_constants(fv, mode_couplings(fv));
            const double e = std::abs(p.E_1) / std::sqrt(2.0);
            collapse = std::max({collapse, std::abs(k.lambda_A - k.f_A1), std::abs(k.lambda_B - k.f_B1),
                                 std::abs(k.xi_A - k.f_A2), std::abs(k.xi_B - k.f_B2), std::abs(k.Gamma_12),
                                 std::abs(k.Omega_A1 - std::conj(k.f_A1) * mode_couplings(fv).gA_1 * p.E_1 /
                                                           std::sqrt(2.0)) / std::max(1.0, e)});
        }
        c.require(herm <= 1e-10, "max hermiticity error " + num(herm));
        c.require(trace <= 1e-10, "max trace error " + num(trace));
        c.require(min_eig >= -1e-8, "min eigenvalue " + num(min_eig));
        c.require(residual < 1e-10, "max residual " + num(residual));
        c.require(collapse <= 1e-12, "p=q=0 collapse deviation " + num(collapse));
        c.require(sym <= 1e-12, "g2 symmetry deviation " + num(sym));
        c.require(pyth <= 1e-12, "gA^2 + gB^2 = g^2 deviation " + num(pyth));
    });
}

inline std::vector<double> reflection_curve(double phase, const std::vector<double>& detunings) {
    std::vector<double> out;
    for (double d : detunings) {
        PhysicalParams p = presets::strong();
        p.phase_1 = p.phase_2 = phase;
        p.Delta_2 = 0.0;
        p.Delta_1 = d;
        const auto vp = validate(p);
        out.push_back(flux_th(solve_th(vp), vp, OutputMode::b1));
    }
    return out;
}

struct Peak {
    double position = 0.0, height = 0.0, prominence = 0.0;
};

/// Highest interior local maximum and its prominence within the samples; zero prominence if none.
inline Peak highest_peak(const std::vector<double>& x, const std::vector<double>& y) {
    Peak best;
    for (std::size_t k = 1; k + 1 < y.size(); ++k) {
        if (!(y[k] > y[k - 1] && y[k] >= y[k + 1])) continue;
        if (best.prominence > 0.0 && y[k] <= best.height) continue;
        double left = y[k], right = y[k];
        for (std::size_t j = k; j-- > 0;) {
            if (y[j] > y[k]) break;
            left = std::min(left, y[j]);
        }
        for (std::size_t j = k + 1; j < y.size(); ++j) {
            if (y[j] > y[k]) break;
            right = std::min(right, y[j]);
        }
        best = {x[k], y[k], y[k] - std::max(left, right)};
    }
    return best;
}

inline std::vector<double> grid(double lo, double hi, double step) {
    std::vector<double> v;
    for (int k = 0; lo + k * step <= hi + 1e-9; ++k) v.push_back(lo + k * step);
    return v;
}

inline CriterionResult position_dependence() {
    return timed(8, "position dependence", 60.0, [](Check& c) {
        constexpr double kCentral = 60.0;
        const double half_pi = std::numbers::pi / 2;
        auto sidebands = [&](double phase) {
            std::array<Peak, 2> out;
            for (int side = 0; side < 2; ++side) {
                const auto x = side == 0 ? grid(-250.0, -kCentral, 1.0) : grid(kCentral, 250.0, 1.0);
                out[side] = highest_peak(x, reflection_curve(phase, x));
            }
            return out;
        };
        const auto node = sidebands(half_pi);
        const auto antinode = sidebands(0.0);
        std::array<double, 2> hn{node[0].height, node[1].height}, ha{antinode[0].height, antinode[1].height};
        std::sort(hn.begin(), hn.end());
        std::sort(ha.begin(), ha.end());
        double worst = 0.0;
        for (int k = 0; k < 2; ++k) worst = std::max(worst, std::abs(hn[k] - ha[k]) / hn[k]);
        c.require(node[0].prominence > 0.0 && node[1].prominence > 0.0,
                  "kx=pi/2 sidebands at " + num(node[0].position) + " (" + num(node[0].height) + "), " +
                      num(node[1].position) + " (" + num(node[1].height) + ")");
        c.require(worst <= 0.02, "kx=0 vs kx=pi/2 peak height deviation " + num(worst));

        double ratio = 0.0;
        for (const Peak& pk : node) {
            const auto x = grid(pk.position - 20.0, pk.position + 20.0, 2.0);
            const Peak quarter = highest_peak(x, reflection_curve(std::numbers::pi / 4, x));
            ratio = std::max(ratio, quarter.prominence / pk.prominence);
        }
        c.require(ratio < 0.05, "kx=pi/4 prominence relative to kx=pi/2 " + num(ratio));
    });
}

} // namespace acceptance

inline std::vector<CriterionResult> run_acceptance(const Overrides& extinction_overrides = {}) {
    return {acceptance::dressed_eigenvalues(),    acceptance::critical_extinction(extinction_overrides),
            acceptance::dark_state_decoupling(),  acceptance::method_agreement(),
            acceptance::ae_resonance(),           acceptance::photon_statistics(),
            acceptance::property_suite(),         acceptance::position_dependence()};
}

} // namespace wgm
