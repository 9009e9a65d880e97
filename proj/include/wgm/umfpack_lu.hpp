#pragma once

// Thin RAII wrapper over UMFPACK's complex (zi, packed storage) LU with the
// reciprocal condition estimate exposed.

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <utility>

#include <umfpack.h>
#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "wgm/errors.hpp"

namespace wgm {

class UmfpackLU {
public:
    using Matrix = Eigen::SparseMatrix<std::complex<double>, Eigen::ColMajor, int>;

    explicit UmfpackLU(Matrix a) : a_(std::move(a)) {
        a_.makeCompressed();
        umfpack_zi_defaults(control_);
        const int n = static_cast<int>(a_.rows());
        status_ = umfpack_zi_symbolic(n, n, a_.outerIndexPtr(), a_.innerIndexPtr(), values(), nullptr,
                                      &symbolic_, control_, info_);
        if (status_ != UMFPACK_OK)
            throw Error(ErrorCode::SingularGenerator,
                        "UMFPACK symbolic analysis failed (status " + std::to_string(status_) + ")");
        status_ = umfpack_zi_numeric(a_.outerIndexPtr(), a_.innerIndexPtr(), values(), nullptr,
                                     symbolic_, &numeric_, control_, info_);
        if (status_ != UMFPACK_OK && status_ != UMFPACK_WARNING_singular_matrix) {
            release();
            throw Error(ErrorCode::SingularGenerator,
                        "UMFPACK factorization failed (status " + std::to_string(status_) + ")");
        }
    }

    UmfpackLU(const UmfpackLU&) = delete;
    UmfpackLU& operator=(const UmfpackLU&) = delete;

    ~UmfpackLU() { release(); }

    bool singular() const noexcept { return status_ == UMFPACK_WARNING_singular_matrix; }

    /// Reciprocal 1-norm condition number, with ||A^-1||_1 from Hager's estimator.
    double rcond() const {
        if (singular()) return 0.0;
        const Eigen::Index n = a_.rows();
        double norm_a = 0.0;
        for (Eigen::Index k = 0; k < a_.outerSize(); ++k) {
            double col = 0.0;
            for (Matrix::InnerIterator it(a_, k); it; ++it) col += std::abs(it.value());
            norm_a = std::max(norm_a, col);
        }
        Eigen::VectorXcd x = Eigen::VectorXcd::Constant(n, 1.0 / static_cast<double>(n));
        double est = 0.0;
        for (int iter = 0; iter < 5; ++iter) {
            const Eigen::VectorXcd y = solve(x, UMFPACK_A);
            const double norm_y = y.cwiseAbs().sum();
            if (!std::isfinite(norm_y)) return 0.0;
            if (iter > 0 && norm_y <= est) break;
            est = norm_y;
            Eigen::VectorXcd sgn(n);
            for (Eigen::Index i = 0; i < n; ++i)
                sgn(i) = std::abs(y(i)) > 0.0 ? y(i) / std::abs(y(i)) : std::complex<double>(1.0);
            const Eigen::VectorXcd z = solve(sgn, UMFPACK_At);
            Eigen::Index j = 0;
            z.cwiseAbs().maxCoeff(&j);
            x.setZero();
            x(j) = 1.0;
        }
        return est > 0.0 ? 1.0 / (norm_a * est) : 0.0;
    }

    Eigen::VectorXcd solve(const Eigen::VectorXcd& b) const { return solve(b, UMFPACK_A); }

private:
    Eigen::VectorXcd solve(const Eigen::VectorXcd& b, int sys) const {
        Eigen::VectorXcd x(b.size());
        double info[UMFPACK_INFO];
        const int st = umfpack_zi_solve(sys, a_.outerIndexPtr(), a_.innerIndexPtr(), values(),
                                        nullptr, reinterpret_cast<double*>(x.data()), nullptr,
                                        reinterpret_cast<const double*>(b.data()), nullptr, numeric_,
                                        control_, info);
        if (st != UMFPACK_OK && st != UMFPACK_WARNING_singular_matrix)
            throw Error(ErrorCode::SingularGenerator, "UMFPACK solve failed (status " + std::to_string(st) + ")");
        return x;
    }

    void release() noexcept {
        if (numeric_) umfpack_zi_free_numeric(&numeric_);
        if (symbolic_) umfpack_zi_free_symbolic(&symbolic_);
    }
    const double* values() const { return reinterpret_cast<const double*>(a_.valuePtr()); }

    Matrix a_;
    void* symbolic_ = nullptr;
    void* numeric_ = nullptr;
    double control_[UMFPACK_CONTROL];
    double info_[UMFPACK_INFO];
    int status_ = UMFPACK_OK;
};

} // namespace wgm
