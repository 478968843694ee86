#pragma once

#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "surfflow/core.hpp"

namespace surfflow {

// Triplet-accumulated square sparse system with right-hand side.
struct SparseSystem {
    int n = 0;
    std::vector<Eigen::Triplet<double>> entries;
    Eigen::VectorXd rhs;

    explicit SparseSystem(int n_) : n(n_), rhs(Eigen::VectorXd::Zero(n_)) {}

    void add(int i, int j, double v) {
        if (i < 0 || i >= n || j < 0 || j >= n)
            throw DimensionMismatch("matrix entry (" + std::to_string(i) + ", " + std::to_string(j) +
                                    ") outside system of size " + std::to_string(n));
        entries.emplace_back(i, j, v);
    }

    void add_rhs(int i, double v) {
        if (i < 0 || i >= n) throw DimensionMismatch("rhs entry " + std::to_string(i) + " out of range");
        rhs[i] += v;
    }

    Eigen::SparseMatrix<double> matrix() const {
        Eigen::SparseMatrix<double> A(n, n);
        A.setFromTriplets(entries.begin(), entries.end());
        return A;
    }
};

// Sparse LU factorization with fill-reducing column ordering; reusable for
// repeated solves against the same matrix.
class LuSolver {
  public:
    explicit LuSolver(Eigen::SparseMatrix<double> A) : A_(std::move(A)) {
        A_.makeCompressed();
        a_norm_ = std::sqrt(Eigen::Map<const Eigen::VectorXd>(A_.valuePtr(), A_.nonZeros()).squaredNorm());
        lu_.analyzePattern(A_);
        lu_.factorize(A_);
        if (lu_.info() != Eigen::Success)
            throw SingularMatrix("sparse LU factorization failed: " + std::string(lu_.lastErrorMessage()));
    }

    Eigen::VectorXd solve(const Eigen::VectorXd& b) const {
        if (b.size() != A_.rows())
            throw DimensionMismatch("rhs size " + std::to_string(b.size()) + " does not match system size " +
                                    std::to_string(A_.rows()));
        Eigen::VectorXd x = lu_.solve(b);
        if (!x.allFinite()) throw NonFiniteSolution("direct solve produced NaN or Inf");
        double resid = (A_ * x - b).norm();
        double bound = 1e-9 * (a_norm_ * x.norm() + b.norm());
        if (resid > bound)
            throw SingularMatrix("direct solve residual " + std::to_string(resid) +
                                 " exceeds tolerance " + std::to_string(bound));
        return x;
    }

  private:
    Eigen::SparseMatrix<double> A_;
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu_;
    double a_norm_ = 0;
};

inline Eigen::VectorXd solve_direct(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& b) {
    return LuSolver(A).solve(b);
}

inline Eigen::VectorXd solve_direct(const SparseSystem& sys) {
    return LuSolver(sys.matrix()).solve(sys.rhs);
}

}  // namespace surfflow
