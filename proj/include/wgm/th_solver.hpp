#pragma once

// Truncated-Hilbert-space steady state: full master equation in the
// normal-mode basis on a photon-capped Fock space, vectorized column-major,
// one diagonal element eliminated through Tr rho = 1, and the remaining
// linear system G x + K = 0 solved directly.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "wgm/errors.hpp"
#include "wgm/fockspace.hpp"
#include "wgm/mode_response.hpp"
#include "wgm/params.hpp"
#include "wgm/umfpack_lu.hpp"

namespace wgm {

struct SystemOperators {
    std::array<OperatorMatrix, 4> a;        // annihilation, indexed by Mode
    std::array<OperatorMatrix, 2> sm;       // S_1^-, S_2^-
    std::array<OperatorMatrix, 3> proj;     // |1><1|, |2><2|, |3><3|

    explicit SystemOperators(const HilbertSpace& space) {
        for (Mode m : kAllModes) a[static_cast<int>(m)] = annihilation(space, m);
        for (int i = 1; i <= 2; ++i) sm[i - 1] = sigma_minus(space, i);
        for (int i = 1; i <= 3; ++i) proj[i - 1] = atomic_op(space, i, i);
    }
};

inline constexpr double kHermiticityTolerance = 1e-10;
inline constexpr double kPruneTolerance = 1e-14;

/// Coherent displacement of the four normal modes, indexed by Mode.
using Displacement = std::array<cplx, 4>;

/// Normal-mode Hamiltonian (rotating frame, units of gamma). With a nonzero
/// displacement alpha the mode operators are A = alpha + a, and the cavity
/// damping contributes i kappa (alpha^* a - alpha a^dag), so that the
/// dissipators keep their form in the shifted variables.
inline OperatorMatrix build_hamiltonian(const HilbertSpace& space, const ValidatedParams& vp,
                                        const SystemOperators& ops, const Displacement& alpha = {}) {
    using namespace std::complex_literals;
    const auto& p = vp.params();
    if (p.epsilon != 0.0 && vp.has_inter_pair_scattering())
        throw Error(ErrorCode::EpsilonWithScattering, "Hamiltonian has no stationary frame");
    const ModeCouplings g = mode_couplings(vp);
    const double s2 = std::sqrt(2.0);
    const int d = space.dim();
    const OperatorMatrix I = OperatorMatrix::identity(d);

    std::array<OperatorMatrix, 4> mode;
    std::array<OperatorMatrix, 4> mode_dag;
    for (int m = 0; m < 4; ++m) {
        mode[m] = ops.a[m] + alpha[m] * I;
        mode_dag[m] = mode[m].adjoint();
    }

    OperatorMatrix H(d);
    for (int i = 1; i <= 2; ++i) {
        const auto pp = vp.pair(i);
        const int a_idx = i == 1 ? 0 : 2;
        const int b_idx = a_idx + 1;
        const auto& A = mode[a_idx];
        const auto& B = mode[b_idx];
        const auto& Ad = mode_dag[a_idx];
        const auto& Bd = mode_dag[b_idx];
        const auto& S = ops.sm[i - 1];
        const OperatorMatrix Sd = S.adjoint();

        // -Delta_i S_i^- S_i^+ = -Delta_i |i><i|
        H += cplx(-pp.Delta) * ops.proj[i - 1];
        H += cplx(pp.delta_c + pp.h) * (Ad * A);
        H += cplx(pp.delta_c - pp.h) * (Bd * B);

        const cplx e = pp.E / s2;
        H += std::conj(e) * (A + B);
        H += e * (Ad + Bd);

        const double gA = g.gA(i);
        const double gB = g.gB(i);
        H += cplx(gA) * (Ad * S) + cplx(gA) * (Sd * A);
        H += cplx(-1i * gB) * (Bd * S) + cplx(1i * gB) * (Sd * B);

        for (int m : {a_idx, b_idx}) {
            if (alpha[m] == cplx(0.0)) continue;
            H += (1i * pp.kappa * std::conj(alpha[m])) * ops.a[m];
            H += (-1i * pp.kappa * alpha[m]) * ops.a[m].adjoint();
        }
    }
    if (vp.has_inter_pair_scattering()) {
        const cplx nu = p.p - p.q;
        const cplx mu = p.q + p.p;
        H += nu * (mode_dag[1] * mode[3]) + std::conj(nu) * (mode_dag[3] * mode[1]);
        H += mu * (mode_dag[0] * mode[2]) + std::conj(mu) * (mode_dag[2] * mode[0]);
    }
    if (H.hermiticity_error() > kHermiticityTolerance)
        throw Error(ErrorCode::NonHermitianConstruction, "Hamiltonian is not Hermitian");
    // Drive and displacement terms cancel up to rounding; drop the residue so
    // it does not add structural nonzeros to the generator.
    return H.pruned(kPruneTolerance * H.max_abs());
}

inline OperatorMatrix build_hamiltonian(const HilbertSpace& space, const ValidatedParams& vp) {
    return build_hamiltonian(space, vp, SystemOperators(space));
}

namespace detail {

// Triplets of kron(A, B) (A outer), scaled.
inline void kron_into(std::vector<Eigen::Triplet<cplx>>& out, const SparseMatrixC& A,
                      const SparseMatrixC& B, cplx scale) {
    const int nb = static_cast<int>(B.rows());
    for (int ka = 0; ka < A.outerSize(); ++ka)
        for (SparseMatrixC::InnerIterator ia(A, ka); ia; ++ia)
            for (int kb = 0; kb < B.outerSize(); ++kb)
                for (SparseMatrixC::InnerIterator ib(B, kb); ib; ++ib)
                    out.emplace_back(static_cast<int>(ia.row()) * nb + static_cast<int>(ib.row()),
                                     static_cast<int>(ia.col()) * nb + static_cast<int>(ib.col()),
                                     scale * ia.value() * ib.value());
}

} // namespace detail

/// Full generator L with d vec(rho)/dt = L vec(rho), column-major vec.
inline SparseMatrixC build_generator(const HilbertSpace& space, const OperatorMatrix& H,
                                     const std::vector<std::pair<double, OperatorMatrix>>& channels) {
    using namespace std::complex_literals;
    const int d = space.dim();
    const SparseMatrixC I = OperatorMatrix::identity(d).sparse();
    std::vector<Eigen::Triplet<cplx>> t;
    // -i[H, rho] -> -i (I (x) H - H^T (x) I)
    detail::kron_into(t, I, H.sparse(), -1i);
    detail::kron_into(t, SparseMatrixC(H.sparse().transpose()), I, 1i);
    // rate (2 C rho C^dag - C^dag C rho - rho C^dag C)
    for (const auto& [rate, C] : channels) {
        const SparseMatrixC c = C.sparse();
        const SparseMatrixC cdc = SparseMatrixC(c.adjoint()) * c;
        detail::kron_into(t, SparseMatrixC(c.conjugate()), c, 2.0 * rate);
        detail::kron_into(t, I, cdc, -rate);
        detail::kron_into(t, SparseMatrixC(cdc.transpose()), I, -rate);
    }
    SparseMatrixC L(d * d, d * d);
    L.setFromTriplets(t.begin(), t.end());
    L.makeCompressed();
    return L;
}

struct LiouvillianSystem {
    HilbertSpace space;
    SparseMatrixC full;         // d^2 x d^2 generator before elimination
    SparseMatrixC G;            // (d^2 - 1) x (d^2 - 1)
    Eigen::VectorXcd K;         // d^2 - 1
    int eliminated_state = 0;   // basis index k of the eliminated rho_kk
    int eliminated_index = 0;   // vec index k*d + k
    Displacement displacement{};
};

/// Largest |sum_k L(kk, col)| over all columns: zero for a trace-preserving generator.
inline double trace_functional_error(const SparseMatrixC& L, int dim) {
    Eigen::VectorXd colsum_re = Eigen::VectorXd::Zero(L.cols());
    Eigen::VectorXd colsum_im = Eigen::VectorXd::Zero(L.cols());
    for (int k = 0; k < L.outerSize(); ++k)
        for (SparseMatrixC::InnerIterator it(L, k); it; ++it) {
            const int r = static_cast<int>(it.row());
            if (r % dim == r / dim) {
                colsum_re(k) += it.value().real();
                colsum_im(k) += it.value().imag();
            }
        }
    double worst = 0.0;
    for (int k = 0; k < L.cols(); ++k) worst = std::max(worst, std::hypot(colsum_re(k), colsum_im(k)));
    return worst;
}

/// Replace rho_ee by 1 - sum of the other populations and drop its row.
inline LiouvillianSystem eliminate_trace(const HilbertSpace& space, SparseMatrixC L,
                                         int eliminated_state) {
    const int d = space.dim();
    if (eliminated_state < 0 || eliminated_state >= d)
        throw Error(ErrorCode::IndexOutOfRange, "eliminated state index");
    const int e = eliminated_state * d + eliminated_state;
    const int n = d * d - 1;
    auto reduce = [e](int k) { return k < e ? k : k - 1; };

    LiouvillianSystem sys;
    sys.space = space;
    sys.eliminated_state = eliminated_state;
    sys.eliminated_index = e;
    sys.K = Eigen::VectorXcd::Zero(n);

    std::vector<Eigen::Triplet<cplx>> t;
    t.reserve(static_cast<std::size_t>(L.nonZeros()) * 2);
    for (int col = 0; col < L.outerSize(); ++col)
        for (SparseMatrixC::InnerIterator it(L, col); it; ++it) {
            const int r = static_cast<int>(it.row());
            if (r == e) continue;
            if (col != e) {
                t.emplace_back(reduce(r), reduce(col), it.value());
            } else {
                sys.K(reduce(r)) += it.value();
                for (int k = 0; k < d; ++k) {
                    const int j = k * d + k;
                    if (j != e) t.emplace_back(reduce(r), reduce(j), -it.value());
                }
            }
        }
    sys.G.resize(n, n);
    sys.G.setFromTriplets(t.begin(), t.end());
    sys.G.makeCompressed();
    sys.full = std::move(L);
    return sys;
}

/// Dissipation channels of the cavity (rate kappa, no 1/2) and atom (rate gamma/2).
inline std::vector<std::pair<double, OperatorMatrix>> dissipation_channels(
    const ValidatedParams& vp, const SystemOperators& ops) {
    std::vector<std::pair<double, OperatorMatrix>> ch;
    const double k1 = vp.kappa_1(), k2 = vp.kappa_2();
    ch.emplace_back(k1, ops.a[0]);
    ch.emplace_back(k1, ops.a[1]);
    ch.emplace_back(k2, ops.a[2]);
    ch.emplace_back(k2, ops.a[3]);
    ch.emplace_back(vp.params().gamma_1 / 2.0, ops.sm[0]);
    ch.emplace_back(vp.params().gamma_2 / 2.0, ops.sm[1]);
    return ch;
}

/// Generator plus trace elimination. By default the last diagonal element is removed.
inline LiouvillianSystem build_liouvillian(const HilbertSpace& space, const ValidatedParams& vp,
                                           const SystemOperators& ops, const Displacement& alpha = {},
                                           int eliminated_state = -1) {
    const OperatorMatrix H = build_hamiltonian(space, vp, ops, alpha);
    SparseMatrixC L = build_generator(space, H, dissipation_channels(vp, ops));
    LiouvillianSystem sys =
        eliminate_trace(space, std::move(L), eliminated_state < 0 ? space.dim() - 1 : eliminated_state);
    sys.displacement = alpha;
    return sys;
}

inline LiouvillianSystem build_liouvillian(const HilbertSpace& space, const ValidatedParams& vp,
                                           int eliminated_state = -1) {
    return build_liouvillian(space, vp, SystemOperators(space), Displacement{}, eliminated_state);
}

enum class LinearBackend { Umfpack, SparseLU, DenseLU };

struct SolveOptions {
    LinearBackend backend = LinearBackend::Umfpack;
    double min_rcond = 1e-14;
    // On a singular generator return the long-time limit reached from the
    // maximally mixed state instead of raising SingularGenerator.
    bool nullspace_fallback = false;
};

struct SteadyStateDM {
    Eigen::MatrixXcd rho;
    double residual = 0.0;            // ||L vec(rho)||_inf
    double hermiticity_error = 0.0;
    double trace_error = 0.0;
    double min_eigenvalue = 0.0;
    double rcond = 0.0;               // reciprocal condition estimate of G
    bool used_fallback = false;
    std::array<double, 4> occupations{};  // <n> per Mode
    std::vector<std::string> warnings;
};

inline constexpr double kTraceTolerance = 1e-12;
inline constexpr double kPsdTolerance = 1e-8;
inline constexpr double kOccupationWarning = 0.1;

/// Unpack x (all vec entries but the eliminated one) into rho.
inline Eigen::MatrixXcd unpack_density(const LiouvillianSystem& sys, const Eigen::VectorXcd& x) {
    const int d = sys.space.dim();
    const int e = sys.eliminated_index;
    Eigen::VectorXcd v(d * d);
    v.head(e) = x.head(e);
    v.tail(d * d - 1 - e) = x.tail(d * d - 1 - e);
    cplx others = 0.0;
    for (int k = 0; k < d; ++k)
        if (k != sys.eliminated_state) others += v(k * d + k);
    v(e) = 1.0 - others;
    return Eigen::Map<Eigen::MatrixXcd>(v.data(), d, d);
}

inline double expectation_real(const Eigen::MatrixXcd& rho, const OperatorMatrix& op) {
    cplx acc = 0.0;
    const auto& m = op.sparse();
    for (int k = 0; k < m.outerSize(); ++k)
        for (SparseMatrixC::InnerIterator it(m, k); it; ++it) acc += it.value() * rho(it.col(), it.row());
    return acc.real();
}

inline cplx expectation(const Eigen::MatrixXcd& rho, const OperatorMatrix& op) {
    cplx acc = 0.0;
    const auto& m = op.sparse();
    for (int k = 0; k < m.outerSize(); ++k)
        for (SparseMatrixC::InnerIterator it(m, k); it; ++it) acc += it.value() * rho(it.col(), it.row());
    return acc;
}

/// Diagnostics and physicality checks; throws NonPhysicalResult on violation.
inline SteadyStateDM finalize_state(const LiouvillianSystem& sys, Eigen::MatrixXcd rho,
                                    const SystemOperators* ops = nullptr) {
    const int d = sys.space.dim();
    if (!rho.allFinite()) throw Error(ErrorCode::SingularGenerator, "non-finite steady state");
    SteadyStateDM out;
    Eigen::Map<const Eigen::VectorXcd> v(rho.data(), d * d);
    out.residual = (sys.full * v).cwiseAbs().maxCoeff();
    out.hermiticity_error = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
    out.trace_error = std::abs(rho.trace() - 1.0);
    const Eigen::MatrixXcd herm = 0.5 * (rho + rho.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(herm, Eigen::EigenvaluesOnly);
    out.min_eigenvalue = es.eigenvalues().minCoeff();
    if (out.hermiticity_error > kHermiticityTolerance || out.trace_error > kTraceTolerance ||
        out.min_eigenvalue < -kPsdTolerance)
        throw Error(ErrorCode::NonPhysicalResult,
                    "hermiticity " + std::to_string(out.hermiticity_error) + ", trace error " +
                        std::to_string(out.trace_error) + ", min eigenvalue " +
                        std::to_string(out.min_eigenvalue));
    if (ops) {
        for (Mode m : kAllModes) {
            const auto& a = ops->a[static_cast<int>(m)];
            out.occupations[static_cast<int>(m)] = expectation_real(rho, a.adjoint() * a);
            if (out.occupations[static_cast<int>(m)] > kOccupationWarning)
                out.warnings.push_back(std::string("mean occupation of ") + mode_name(m) +
                                       " exceeds 0.1; photon truncation may be invalid");
        }
    }
    out.rho = std::move(rho);
    return out;
}

/// Long-time limit of exp(L t) applied to the maximally mixed state, by
/// inverse iteration with a small negative shift on the full generator.
inline Eigen::MatrixXcd long_time_limit(const LiouvillianSystem& sys, int iterations = 3) {
    const int d = sys.space.dim();
    double scale = 0.0;
    for (int k = 0; k < sys.full.outerSize(); ++k)
        for (SparseMatrixC::InnerIterator it(sys.full, k); it; ++it)
            scale = std::max(scale, std::abs(it.value()));
    SparseMatrixC shifted = sys.full;
    for (int k = 0; k < d * d; ++k) shifted.coeffRef(k, k) -= 1e-9 * std::max(scale, 1.0);
    const UmfpackLU lu(std::move(shifted));
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(d * d);
    for (int k = 0; k < d; ++k) v(k * d + k) = 1.0 / d;
    for (int it = 0; it < iterations; ++it) {
        v = lu.solve(v);
        cplx tr = 0.0;
        for (int k = 0; k < d; ++k) tr += v(k * d + k);
        if (std::abs(tr) == 0.0 || !v.allFinite())
            throw Error(ErrorCode::SingularGenerator, "null-space iteration lost the trace");
        v /= tr;
    }
    Eigen::MatrixXcd rho = Eigen::Map<Eigen::MatrixXcd>(v.data(), d, d);
    return 0.5 * (rho + rho.adjoint());
}

/// Solve G x = -K. A singular G raises SingularGenerator unless the
/// null-space fallback is enabled.
inline SteadyStateDM solve_steady_state(const LiouvillianSystem& sys, const SolveOptions& opts = {},
                                        const SystemOperators* ops = nullptr) {
    auto singular = [&](double rcond) {
        if (opts.nullspace_fallback) {
            SteadyStateDM st = finalize_state(sys, long_time_limit(sys), ops);
            st.rcond = rcond;
            st.used_fallback = true;
            st.warnings.push_back("generator singular (rcond " + std::to_string(rcond) +
                                  "); returned the long-time limit from the maximally mixed state");
            return st;
        }
        throw Error(ErrorCode::SingularGenerator,
                    "reciprocal condition " + std::to_string(rcond) +
                        "; the steady state is not unique, enable the null-space fallback");
    };

    Eigen::VectorXcd x;
    double rcond = 0.0;
    const Eigen::VectorXcd rhs = -sys.K;
    switch (opts.backend) {
    case LinearBackend::Umfpack: {
        const UmfpackLU lu(sys.G);
        rcond = lu.rcond();
        if (!(rcond > opts.min_rcond)) return singular(rcond);
        x = lu.solve(rhs);
        break;
    }
    case LinearBackend::SparseLU: {
        Eigen::SparseLU<SparseMatrixC, Eigen::COLAMDOrdering<int>> lu;
        lu.compute(sys.G);
        if (lu.info() != Eigen::Success) return singular(0.0);
        // No condition estimate is available from SparseLU.
        rcond = std::numeric_limits<double>::quiet_NaN();
        x = lu.solve(rhs);
        break;
    }
    case LinearBackend::DenseLU: {
        Eigen::PartialPivLU<Eigen::MatrixXcd> lu(Eigen::MatrixXcd(sys.G));
        rcond = lu.rcond();
        if (!(rcond > opts.min_rcond)) return singular(rcond);
        x = lu.solve(rhs);
        break;
    }
    }
    if (!x.allFinite()) return singular(rcond);
    SteadyStateDM st = finalize_state(sys, unpack_density(sys, x), ops);
    st.rcond = rcond;
    return st;
}

/// Analytic driven-mode amplitudes without the atom, indexed by Mode.
inline std::array<cplx, 4> no_atom_reference(const ValidatedParams& vp) {
    const auto forms = steady_mode_forms(vp, ModeCouplings{});
    return {forms[0](0), forms[1](0), forms[2](0), forms[3](0)};
}

// Displaced: expand around the driven no-atom amplitudes, truncating only the
// fluctuation field. Bare: truncate the mode operators themselves.
enum class Frame { Displaced, Bare };

struct ThOptions {
    std::array<int, 4> caps{1, 1, 1, 1};
    Frame frame = Frame::Displaced;
    // In the displaced frame a mode family that no path connects to the atom
    // stays in its vacuum exactly, so its cap is lowered to 0.
    bool prune_inert_modes = true;
    SolveOptions solve;
    int eliminated_state = -1;
};

struct ThResult {
    HilbertSpace space;
    Displacement displacement{};
    SteadyStateDM state;
    std::array<cplx, 4> mean{};               // <m>
    Eigen::Matrix4cd moments;                 // (m, n) -> <m^dag n>
    std::array<double, 3> populations{};      // P1, P2, P3
};

inline constexpr double kInertCouplingTolerance = 1e-12;

/// Modes with no atom coupling anywhere in their scattering-connected family.
inline std::array<bool, 4> inert_modes(const ValidatedParams& vp) {
    const ModeCouplings g = mode_couplings(vp);
    const auto& p = vp.params();
    const double scale = std::max({1.0, p.g0_1, p.g0_2});
    auto coupled = [&](double x) { return std::abs(x) > kInertCouplingTolerance * scale; };
    const bool a1 = coupled(g.gA_1), a2 = coupled(g.gA_2);
    const bool b1 = coupled(g.gB_1), b2 = coupled(g.gB_2);
    const bool mu = p.q + p.p != 0.0;
    const bool nu = p.p - p.q != 0.0;
    return {!(a1 || (mu && a2)), !(b1 || (nu && b2)), !(a2 || (mu && a1)), !(b2 || (nu && b1))};
}

inline ThResult solve_th(const ValidatedParams& vp, const ThOptions& opts = {}) {
    ThResult out;
    std::array<int, 4> caps = opts.caps;
    if (opts.frame == Frame::Displaced) {
        out.displacement = no_atom_reference(vp);
        if (opts.prune_inert_modes) {
            const auto inert = inert_modes(vp);
            for (int m = 0; m < 4; ++m)
                if (inert[m]) caps[m] = 0;
        }
    }
    out.space = build_space(caps);
    const SystemOperators ops(out.space);
    const LiouvillianSystem sys =
        build_liouvillian(out.space, vp, ops, out.displacement, opts.eliminated_state);
    out.state = solve_steady_state(sys, opts.solve, &ops);

    const auto& rho = out.state.rho;
    std::array<cplx, 4> fluct{};
    for (int m = 0; m < 4; ++m) fluct[m] = expectation(rho, ops.a[m]);
    for (int m = 0; m < 4; ++m) {
        out.mean[m] = out.displacement[m] + fluct[m];
        for (int n = 0; n < 4; ++n) {
            const cplx am = out.displacement[m], an = out.displacement[n];
            out.moments(m, n) = std::conj(am) * an + std::conj(am) * fluct[n] +
                                an * std::conj(fluct[m]) +
                                expectation(rho, ops.a[m].adjoint() * ops.a[n]);
        }
    }
    for (int i = 0; i < 3; ++i) out.populations[i] = expectation_real(rho, ops.proj[i]);
    return out;
}

/// Coordinate-triplet text dump of (G, K).
inline void dump_system(std::ostream& os, const LiouvillianSystem& sys) {
    os << "# G " << sys.G.rows() << " x " << sys.G.cols() << " eliminated_index "
       << sys.eliminated_index << '\n';
    os << std::setprecision(17);
    for (int k = 0; k < sys.G.outerSize(); ++k)
        for (SparseMatrixC::InnerIterator it(sys.G, k); it; ++it)
            os << it.row() << ' ' << it.col() << ' ' << it.value().real() << ' ' << it.value().imag()
               << '\n';
    os << "# K\n";
    for (int k = 0; k < sys.K.size(); ++k)
        if (sys.K(k) != cplx(0.0))
            os << k << ' ' << sys.K(k).real() << ' ' << sys.K(k).imag() << '\n';
}

} // namespace wgm
