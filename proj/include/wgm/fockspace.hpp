#pragma once

// Truncated tensor-product basis |atom, n(A1), n(B1), n(A2), n(B2)> and sparse
// complex operators acting on it. Basis order: atom level slowest (1, 2, 3),
// then A1, B1, A2, B2 with B2 fastest. Ladder operators are hard-truncated at
// the per-mode cap.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <iomanip>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "wgm/errors.hpp"

namespace wgm {

using cplx = std::complex<double>;
using SparseMatrixC = Eigen::SparseMatrix<cplx, Eigen::ColMajor, int>;

enum class Mode : int { A1 = 0, B1 = 1, A2 = 2, B2 = 3 };

inline constexpr std::array<Mode, 4> kAllModes{Mode::A1, Mode::B1, Mode::A2, Mode::B2};

inline const char* mode_name(Mode m) {
    switch (m) {
    case Mode::A1: return "A1";
    case Mode::B1: return "B1";
    case Mode::A2: return "A2";
    case Mode::B2: return "B2";
    }
    return "?";
}

struct BasisState {
    int level;                // 1, 2 or 3
    std::array<int, 4> n;     // photon numbers in A1, B1, A2, B2

    int excitations() const { return (level == 3 ? 1 : 0) + n[0] + n[1] + n[2] + n[3]; }
    std::string label() const {
        std::string s = "|" + std::to_string(level);
        for (int k : n) s += "," + std::to_string(k);
        return s + ">";
    }
    bool operator==(const BasisState&) const = default;
};

inline constexpr int kAtomLevels = 3;
inline constexpr int kDefaultMaxDim = 10000;

class HilbertSpace {
public:
    HilbertSpace() = default;

    const std::array<int, 4>& mode_caps() const noexcept { return caps_; }
    int atom_levels() const noexcept { return kAtomLevels; }
    int dim() const noexcept { return dim_; }
    int cap(Mode m) const noexcept { return caps_[static_cast<int>(m)]; }

    int index(const BasisState& s) const {
        if (s.level < 1 || s.level > kAtomLevels)
            throw Error(ErrorCode::IndexOutOfRange, "atom level " + std::to_string(s.level));
        int idx = s.level - 1;
        for (int m = 0; m < 4; ++m) {
            if (s.n[m] < 0 || s.n[m] > caps_[m])
                throw Error(ErrorCode::IndexOutOfRange, "photon number outside cap");
            idx = idx * (caps_[m] + 1) + s.n[m];
        }
        return idx;
    }

    BasisState state(int idx) const {
        if (idx < 0 || idx >= dim_)
            throw Error(ErrorCode::IndexOutOfRange, "basis index " + std::to_string(idx));
        BasisState s{};
        for (int m = 3; m >= 0; --m) {
            s.n[m] = idx % (caps_[m] + 1);
            idx /= caps_[m] + 1;
        }
        s.level = idx + 1;
        return s;
    }

    bool operator==(const HilbertSpace&) const = default;

private:
    friend HilbertSpace build_space(const std::array<int, 4>&, int);
    std::array<int, 4> caps_{0, 0, 0, 0};
    int dim_ = kAtomLevels;
};

inline HilbertSpace build_space(const std::array<int, 4>& mode_caps, int max_dim = kDefaultMaxDim) {
    std::int64_t dim = kAtomLevels;
    for (int c : mode_caps) {
        if (c < 0) throw Error(ErrorCode::IndexOutOfRange, "photon cap must be >= 0");
        dim *= c + 1;
        if (dim > max_dim)
            throw Error(ErrorCode::DimensionOverflow,
                        "dimension exceeds bound " + std::to_string(max_dim));
    }
    HilbertSpace space;
    space.caps_ = mode_caps;
    space.dim_ = static_cast<int>(dim);
    return space;
}

inline HilbertSpace build_space(int uniform_cap, int max_dim = kDefaultMaxDim) {
    return build_space({uniform_cap, uniform_cap, uniform_cap, uniform_cap}, max_dim);
}

// Sparse operator on a HilbertSpace. Duplicate triplets are summed on construction.
class OperatorMatrix {
public:
    OperatorMatrix() = default;
    explicit OperatorMatrix(int dim) : m_(dim, dim) {}
    explicit OperatorMatrix(SparseMatrixC m) : m_(std::move(m)) { m_.makeCompressed(); }

    static OperatorMatrix from_triplets(int dim, const std::vector<Eigen::Triplet<cplx>>& t) {
        SparseMatrixC m(dim, dim);
        m.setFromTriplets(t.begin(), t.end());
        return OperatorMatrix(std::move(m));
    }

    static OperatorMatrix identity(int dim) {
        SparseMatrixC m(dim, dim);
        m.setIdentity();
        return OperatorMatrix(std::move(m));
    }

    int dim() const noexcept { return static_cast<int>(m_.rows()); }
    const SparseMatrixC& sparse() const noexcept { return m_; }
    Eigen::MatrixXcd dense() const { return Eigen::MatrixXcd(m_); }
    cplx coeff(int i, int j) const { return m_.coeff(i, j); }

    OperatorMatrix adjoint() const { return OperatorMatrix(SparseMatrixC(m_.adjoint())); }

    OperatorMatrix operator*(const OperatorMatrix& o) const {
        return OperatorMatrix(SparseMatrixC(m_ * o.m_));
    }
    OperatorMatrix operator+(const OperatorMatrix& o) const {
        return OperatorMatrix(SparseMatrixC(m_ + o.m_));
    }
    OperatorMatrix operator-(const OperatorMatrix& o) const {
        return OperatorMatrix(SparseMatrixC(m_ - o.m_));
    }
    OperatorMatrix& operator+=(const OperatorMatrix& o) {
        m_ += o.m_;
        return *this;
    }
    friend OperatorMatrix operator*(cplx s, const OperatorMatrix& o) {
        return OperatorMatrix(SparseMatrixC(s * o.m_));
    }

    /// Copy without entries of magnitude <= tol.
    OperatorMatrix pruned(double tol) const {
        SparseMatrixC m = m_;
        m.prune([tol](Eigen::Index, Eigen::Index, const cplx& v) { return std::abs(v) > tol; });
        return OperatorMatrix(std::move(m));
    }

    double max_abs() const {
        double r = 0.0;
        for (int k = 0; k < m_.outerSize(); ++k)
            for (SparseMatrixC::InnerIterator it(m_, k); it; ++it) r = std::max(r, std::abs(it.value()));
        return r;
    }

    /// Largest entry magnitude of (M - M^dagger).
    double hermiticity_error() const {
        Eigen::MatrixXcd d = dense();
        return (d - d.adjoint()).cwiseAbs().maxCoeff();
    }

    /// Coordinate-triplet text dump: "row col re im" per nonzero, column-major order.
    void dump(std::ostream& os) const {
        os << "# " << dim() << " x " << dim() << " nnz=" << m_.nonZeros() << '\n';
        os << std::setprecision(17);
        for (int k = 0; k < m_.outerSize(); ++k)
            for (SparseMatrixC::InnerIterator it(m_, k); it; ++it)
                os << it.row() << ' ' << it.col() << ' ' << it.value().real() << ' '
                   << it.value().imag() << '\n';
    }

private:
    SparseMatrixC m_;
};

/// Annihilation operator of `mode`: n -> n-1 with amplitude sqrt(n).
inline OperatorMatrix annihilation(const HilbertSpace& space, Mode mode) {
    const int m = static_cast<int>(mode);
    if (m < 0 || m > 3) throw Error(ErrorCode::IndexOutOfRange, "mode index");
    std::vector<Eigen::Triplet<cplx>> t;
    for (int col = 0; col < space.dim(); ++col) {
        BasisState s = space.state(col);
        if (s.n[m] == 0) continue;
        const double amp = std::sqrt(static_cast<double>(s.n[m]));
        s.n[m] -= 1;
        t.emplace_back(space.index(s), col, amp);
    }
    return OperatorMatrix::from_triplets(space.dim(), t);
}

/// Creation operator; the amplitude leaving the cap state is dropped.
inline OperatorMatrix creation(const HilbertSpace& space, Mode mode) {
    return annihilation(space, mode).adjoint();
}

/// Embedded atomic operator |i><j|, levels numbered 1..3.
inline OperatorMatrix atomic_op(const HilbertSpace& space, int i, int j) {
    if (i < 1 || i > kAtomLevels || j < 1 || j > kAtomLevels)
        throw Error(ErrorCode::IndexOutOfRange, "atomic level must be 1, 2 or 3");
    std::vector<Eigen::Triplet<cplx>> t;
    for (int col = 0; col < space.dim(); ++col) {
        BasisState s = space.state(col);
        if (s.level != j) continue;
        s.level = i;
        t.emplace_back(space.index(s), col, 1.0);
    }
    return OperatorMatrix::from_triplets(space.dim(), t);
}

/// S_i^- = |i><3|
inline OperatorMatrix sigma_minus(const HilbertSpace& space, int i) { return atomic_op(space, i, 3); }
/// S_i^+ = |3><i|
inline OperatorMatrix sigma_plus(const HilbertSpace& space, int i) { return atomic_op(space, 3, i); }

} // namespace wgm
