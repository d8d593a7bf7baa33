#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "chains/types.hpp"

namespace chains {

struct EigenOptions {
    int nev = 3;      // eigenpairs that must converge
    int block = 4;    // working block size (>= nev)
    int max_iters = 80;
    double tol = 1e-9;       // residual tolerance for the first nev-1 pairs,
                             // relative to the operator scale
    double tol_last = 1e-9;  // residual tolerance for the nev-th pair (it only
                             // enters gap ratios, so scans may relax it)
    int refactor_every = 1;  // reuse the numeric factorization as a stale
                             // preconditioner for this many consecutive solves
    unsigned long long seed = 12345;  // deterministic start when no warm block
};

struct EigenResult {
    Eigen::VectorXd values;    // nev smallest Ritz values, ascending
    Eigen::MatrixXcd vectors;  // n x nev
    bool converged = false;
    int iterations = 0;
};

// Smallest eigenpairs of a sparse hermitian positive-semidefinite matrix by
// block inverse iteration at shift ~0 (sparse LDLT) with Rayleigh-Ritz
// extraction.  The symbolic factorization is reused across calls with the
// same sparsity pattern, and a warm-start block from a neighbouring
// parameter point cuts the iteration count.
class SmallestEigs {
public:
    explicit SmallestEigs(EigenOptions opts = {}) : opts_(opts) {}

    EigenResult solve(const Eigen::SparseMatrix<cplx>& m, double scale,
                      const Eigen::MatrixXcd* warm = nullptr);

    const EigenOptions& options() const { return opts_; }

private:
    EigenResult run(const Eigen::SparseMatrix<cplx>& m, double scale,
                    const Eigen::MatrixXcd* warm);
    void factorize(const Eigen::SparseMatrix<cplx>& m, double scale);

    EigenOptions opts_;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<cplx>, Eigen::Lower> ldlt_;
    bool analyzed_ = false;
    int solves_since_factor_ = -1;  // -1: no factorization yet
};

}  // namespace chains
