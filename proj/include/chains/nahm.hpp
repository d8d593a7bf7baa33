#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "chains/eigs.hpp"
#include "chains/toda.hpp"
#include "chains/types.hpp"

namespace chains {

// Rectangular lattice of monopole-space points.  y1, y2 on [-extent, extent]
// with n_xy points per axis; y3 on [y3_min, y3_min + y3_span), periodic when
// the span is one full period (no duplicated endpoint).
struct YLattice {
    double extent = 1;
    int n_xy = 9;
    double y3_min = 0;
    double y3_span = 1;
    int n_y3 = 8;
    bool y3_periodic = true;

    double step_xy() const { return n_xy > 1 ? 2 * extent / (n_xy - 1) : 0.0; }
    double step_y3() const {
        return y3_periodic ? y3_span / n_y3 : y3_span / std::max(1, n_y3 - 1);
    }
    double y1(int i) const { return -extent + i * step_xy(); }
    double y2(int i) const { return -extent + i * step_xy(); }
    double y3(int t) const { return y3_min + t * step_y3(); }
    int points() const { return n_xy * n_xy * n_y3; }
    int index(int i1, int i2, int i3) const { return (i1 * n_xy + i2) * n_y3 + i3; }
};

// Discretized D_y D_y^dag on the spinor grid, with Dirichlet ends in x1 and
// the U-twisted periodic identification in x2.  Degrees of freedom are
// ordered node-major: dof = (i*n_t + t)*2k + sigma*k + j.
struct DiracOperator {
    Eigen::Vector3d y;
    int k = 1;
    int size = 0;  // 2k * n_r * n_t
    Eigen::SparseMatrix<cplx> matrix;
    Eigen::VectorXd quadrature;  // per-node weights of the discrete L^2 product
    double scale = 1;            // max |diagonal|, for tolerance scaling

    int dof(int i, int t, int sigma, int j, int n_t) const {
        return (i * n_t + t) * 2 * k + sigma * k + j;
    }
};

DiracOperator assemble_operator(const HitchinFields& fields, const Eigen::Vector3d& y);

struct ZeroModePair {
    Eigen::Vector3d y;
    Eigen::VectorXcd z1, z2;
    double lambda1 = 0, lambda2 = 0, lambda3 = 0;
    Eigen::Matrix2cd gram;
    bool gap_ok = false;     // max(l1,l2) < 0.01 * l3
    bool converged = false;  // eigensolver reached tolerance
    Eigen::MatrixXcd basis;  // raw eigenvector block, warm start for neighbours
};

ZeroModePair zero_modes(const DiracOperator& op, SmallestEigs& solver,
                        const Eigen::MatrixXcd* warm = nullptr);

// monopole Higgs field phi^hat_ab = i Int x1 Z_a^dag Z_b dx1 dx2
Eigen::Matrix2cd higgs_field(const ZeroModePair& pair, const CylinderGrid& grid);

inline double phihat_norm2(const Eigen::Matrix2cd& ph) {
    return 0.5 * (ph * ph.adjoint()).real().trace();
}

// per-point quality codes in MonopoleGrid
enum : std::uint8_t { point_ok = 0, point_gap_degraded = 1, point_interpolated = 2 };

struct MonopoleGrid {
    YLattice lattice;
    std::vector<double> norm2;       // ||phi^hat||^2 per point
    std::vector<double> energy;      // Ward Laplacian; NaN where undefined
    std::vector<std::uint8_t> quality;
    std::vector<double> lambda1, lambda2, lambda3;
    std::vector<double> tr_im;       // Im Tr phi^hat (diagnostic, not asserted)
    int flagged = 0;                 // eigensolver failures (interpolated)
    int gap_fail = 0;                // points missing the 1% gap criterion

    double gap_pass_fraction() const {
        return lattice.points() > 0
                   ? 1.0 - double(gap_fail + flagged) / lattice.points()
                   : 0.0;
    }
};

struct ScanOptions {
    EigenOptions eig;
    int threads = 0;  // 0: hardware concurrency
};

MonopoleGrid scan(const HitchinFields& fields, const YLattice& lat,
                  const ScanOptions& opts = {});

// ||phi^hat||^2 and friends at a single arbitrary y (used for symmetry and
// periodicity checks at off-lattice points)
ZeroModePair solve_point(const HitchinFields& fields, const Eigen::Vector3d& y,
                         SmallestEigs& solver, const Eigen::MatrixXcd* warm = nullptr);

}  // namespace chains
