#pragma once

// Dressed states of the drive-free atom-cavity Hamiltonian, one excitation
// sector at a time, and the closed-form eigenvalues of the symmetric
// configuration (phases pi/2, equal g and h, zero detunings).

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "wgm/errors.hpp"
#include "wgm/fockspace.hpp"
#include "wgm/params.hpp"
#include "wgm/th_solver.hpp"

namespace wgm {

/// (E_e1, E_e2, E_e3, E_e4, E_e5); e1..e3 lie in the one-excitation sector, e4, e5 in the two-excitation sector.
inline std::array<double, 5> closed_form_eigenvalues(double g_B, double h) {
    const double r1 = std::sqrt(8.0 * g_B * g_B + h * h);
    const double r2 = std::sqrt(4.0 * g_B * g_B + h * h);
    return {0.5 * (-h - r1), -h, 0.5 * (-h + r1), 0.5 * (-3.0 * h + r2), 0.5 * (-3.0 * h - r2)};
}

struct DressedSpectrum {
    int sector = 0;
    std::vector<BasisState> basis;
    std::vector<std::string> labels;
    Eigen::VectorXd eigenvalues;     // ascending
    Eigen::MatrixXcd eigenvectors;   // columns over `basis`
};

struct DressedOptions {
    // Canonical comparison: Delta_i = delta_i = 0.
    bool zero_detunings = true;
    int photon_cap = 1;
};

inline constexpr int kMaxDressedSector = 2;

/// Eigenanalysis of the drive-free Hamiltonian restricted to `sector` total
/// excitations (atomic |3> plus photons). Modes without any atom coupling are left out.
inline DressedSpectrum numeric_dressed(const ValidatedParams& vp, int sector, const DressedOptions& opts = {}) {
    if (sector < 0 || sector > kMaxDressedSector)
        throw Error(ErrorCode::IndexOutOfRange, "sector must be 0, 1 or 2");
    PhysicalParams p = vp.params();
    p.E_1 = p.E_2 = 0.0;
    if (opts.zero_detunings) p.Delta_1 = p.Delta_2 = p.delta_c_1 = p.delta_c_2 = 0.0;
    const ValidatedParams drive_free = validate(p);

    std::array<int, 4> caps{};
    const auto inert = inert_modes(drive_free);
    for (int m = 0; m < 4; ++m) caps[m] = inert[m] ? 0 : opts.photon_cap;
    const HilbertSpace space = build_space(caps);
    const Eigen::MatrixXcd H = build_hamiltonian(space, drive_free).dense();

    DressedSpectrum out;
    out.sector = sector;
    std::vector<int> idx;
    for (int k = 0; k < space.dim(); ++k) {
        const BasisState s = space.state(k);
        if (s.excitations() != sector) continue;
        idx.push_back(k);
        out.basis.push_back(s);
        out.labels.push_back(s.label());
    }
    const int n = static_cast<int>(idx.size());
    Eigen::MatrixXcd block(n, n);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) block(r, c) = H(idx[r], idx[c]);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(block);
    out.eigenvalues = es.eigenvalues();
    out.eigenvectors = es.eigenvectors();
    return out;
}

/// Probe detunings at which the dressed levels are driven: Delta = -E.
inline std::vector<double> predicted_resonances(const DressedSpectrum& s) {
    std::vector<double> out;
    for (Eigen::Index k = 0; k < s.eigenvalues.size(); ++k) out.push_back(-s.eigenvalues(k));
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace wgm
