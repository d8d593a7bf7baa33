#include "chains/eigs.hpp"

#include <cmath>
#include <random>

namespace chains {

namespace {

// deterministic standard normals (Box-Muller on explicit 53-bit uniforms, so
// results do not depend on the standard library's distribution internals)
class NormalStream {
public:
    explicit NormalStream(unsigned long long seed) : rng_(seed) {}
    double operator()() {
        double u1 = next_uniform(), u2 = next_uniform();
        return std::sqrt(-2.0 * std::log(u1 + 1e-300)) * std::cos(2 * pi * u2);
    }

private:
    double next_uniform() { return double(rng_() >> 11) * 0x1.0p-53; }
    std::mt19937_64 rng_;
};

}  // namespace

void SmallestEigs::factorize(const Eigen::SparseMatrix<cplx>& m, double scale) {
    if (!analyzed_) {
        ldlt_.analyzePattern(m);
        analyzed_ = true;
    }
    double shift = 1e-12 * scale;
    for (int attempt = 0;; ++attempt) {
        ldlt_.setShift(shift);
        ldlt_.factorize(m);
        if (ldlt_.info() == Eigen::Success)
            break;
        if (attempt == 3)
            throw ChainError(ErrorKind::numerical_blowup, "sparse LDLT factorization failed");
        shift *= 100;
    }
    solves_since_factor_ = 0;
}

EigenResult SmallestEigs::solve(const Eigen::SparseMatrix<cplx>& m, double scale,
                                const Eigen::MatrixXcd* warm) {
    const bool fresh = solves_since_factor_ < 0 ||
                       solves_since_factor_ + 1 >= opts_.refactor_every ||
                       ldlt_.rows() != m.rows();
    if (fresh)
        factorize(m, scale);
    else
        ++solves_since_factor_;

    EigenResult res = run(m, scale, warm);
    if (!res.converged && !fresh) {
        // stale preconditioner was not good enough; refactor and retry
        factorize(m, scale);
        ++solves_since_factor_;
        res = run(m, scale, &res.vectors);
    }
    return res;
}

EigenResult SmallestEigs::run(const Eigen::SparseMatrix<cplx>& m, double scale,
                              const Eigen::MatrixXcd* warm) {
    const int n = static_cast<int>(m.rows());
    const int nev = opts_.nev;
    const int b = std::min(std::max(opts_.block, nev + 1), n);

    Eigen::MatrixXcd x(n, b);
    NormalStream rnd(opts_.seed);
    int have = 0;
    if (warm && warm->rows() == n) {
        have = std::min<int>(b, static_cast<int>(warm->cols()));
        x.leftCols(have) = warm->leftCols(have);
    }
    for (int c = have; c < b; ++c)
        for (int r = 0; r < n; ++r)
            x(r, c) = cplx(rnd(), rnd());

    EigenResult res;
    res.values = Eigen::VectorXd::Zero(nev);
    res.vectors = Eigen::MatrixXcd::Zero(n, nev);

    auto orth = [&](const Eigen::MatrixXcd& s) {
        Eigen::HouseholderQR<Eigen::MatrixXcd> qr(s);
        return Eigen::MatrixXcd(qr.householderQ() *
                                Eigen::MatrixXcd::Identity(n, s.cols()));
    };

    // One inverse-iteration sweep lands near the bottom of the spectrum;
    // locally-optimal iteration over [X, K^{-1}R, P] then resolves the
    // clustered part that plain inverse iteration crawls on.
    x = orth(ldlt_.solve(x));
    Eigen::MatrixXcd mx = m * x;
    {
        Eigen::MatrixXcd h = x.adjoint() * mx;
        h = 0.5 * (h + h.adjoint()).eval();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> small(h);
        x = (x * small.eigenvectors()).eval();
        mx = (mx * small.eigenvectors()).eval();
        res.values = small.eigenvalues().head(nev);
    }
    Eigen::VectorXd theta(b);
    Eigen::MatrixXcd r(n, b), p(n, 0);
    theta.head(nev) = res.values;
    for (int c = 0; c < b; ++c) {
        theta(c) = (x.col(c).adjoint() * mx.col(c))(0).real();
        r.col(c) = mx.col(c) - theta(c) * x.col(c);
    }

    for (int it = 1; it <= opts_.max_iters; ++it) {
        res.iterations = it;
        bool ok = true;
        for (int c = 0; c < nev; ++c) {
            const double lim = (c + 1 == nev ? opts_.tol_last : opts_.tol) * scale;
            if (r.col(c).norm() > lim)
                ok = false;
        }
        if (ok || it == opts_.max_iters) {
            res.values = theta.head(nev);
            res.vectors = x.leftCols(nev);
            res.converged = ok;
            break;
        }

        Eigen::MatrixXcd s(n, 2 * b + p.cols());
        s.leftCols(b) = x;
        s.middleCols(b, b) = ldlt_.solve(r);
        if (p.cols() > 0)
            s.rightCols(p.cols()) = p;
        s = orth(s);
        Eigen::MatrixXcd ms = m * s;
        Eigen::MatrixXcd hs = s.adjoint() * ms;
        hs = 0.5 * (hs + hs.adjoint()).eval();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> wide(hs);
        const Eigen::MatrixXcd cb = wide.eigenvectors().leftCols(b);
        Eigen::MatrixXcd xnew = s * cb;
        mx = ms * cb;
        // direction memory: the part of the update outside the old block span
        p = xnew - x * (x.adjoint() * xnew);
        x.swap(xnew);
        for (int c = 0; c < b; ++c) {
            theta(c) = wide.eigenvalues()(c);
            r.col(c) = mx.col(c) - theta(c) * x.col(c);
        }
    }
    return res;
}

}  // namespace chains
