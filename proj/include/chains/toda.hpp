#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "chains/ansatz.hpp"
#include "chains/types.hpp"

namespace chains {

// Solution of the affine Toda system on the truncated cylinder.  Fields are
// stored flattened as psi[(j*n_r + i)*n_t + t].  The x2 direction is
// periodic up to the square of the symmetry twist: crossing the seam maps
// field j to field j + 2l (mod k).
struct TodaSolution {
    ChainParams params;
    CylinderGrid grid;
    std::vector<double> psi;
    double residual_sup = 0;
    long flow_steps = 0;
    std::vector<double> ds_history;
    bool converged = false;

    int idx(int j, int i, int t) const { return (j * grid.n_r + i) * grid.n_t + t; }

    // psi_j(x1_i, x2 at global index t), unwinding the twisted wrap
    double sample(int j, int i, int t) const {
        int k = params.k, wrap = mod_k(2 * params.l, k);
        while (t >= grid.n_t) {
            t -= grid.n_t;
            j = (j + wrap) % k;
        }
        while (t < 0) {
            t += grid.n_t;
            j = mod_k(j - wrap, k);
        }
        return psi[idx(mod_k(j, k), i, t)];
    }
};

// sup over j and interior grid points of ||c|^{-2/k} lap(psi_j) - F_j| with
// F_j = |phi_{j+1}|^2 e^{psi_j - psi_{j+1}} - |phi_j|^2 e^{psi_{j-1} - psi_j}
double toda_residual(const ChainParams& p, const CylinderGrid& g, const std::vector<double>& psi);

// trapezoid-rule value of int sum_j ( |c|^{-2/k} |grad psi_j|^2 / 2
//                                     + |phi_{j+1}|^2 e^{psi_j - psi_{j+1}} )
double ds_functional(const ChainParams& p, const CylinderGrid& g, const std::vector<double>& psi);

struct HeatFlowOptions {
    double tol = 1e-8;
    long max_steps = 2000000;
    double newton_threshold = 1e-2;  // switch to Newton polish below this residual
    int check_every = 250;
    const std::vector<double>* init = nullptr;  // warm restart (checkpoint)
};

TodaSolution heat_flow(const ChainParams& p, const CylinderGrid& g, double tol, long max_steps);
TodaSolution heat_flow(const ChainParams& p, const CylinderGrid& g, const HeatFlowOptions& opts);

// max over the grid of |psi_j(x1, x2 + pi/beta) - psi_{j+l}(x1, x2)|
double symmetry_check(const ChainParams& p, const TodaSolution& sol);

// Unitary-gauge Hitchin data sampled on the grid.  phi has the
// shifted-diagonal pattern Sigma^{-1} diag(dphi_0..dphi_{k-1}); the
// connection is diagonal imaginary, A_1 = i diag(a1), A_2 = i diag(a2).
struct HitchinFields {
    ChainParams params;
    CylinderGrid grid;
    Eigen::MatrixXcd twist_U;
    std::vector<cplx> dphi;   // k per node
    std::vector<double> a1;   // k per node
    std::vector<double> a2;   // k per node

    int idx(int j, int i, int t) const { return (j * grid.n_r + i) * grid.n_t + t; }
    Eigen::MatrixXcd phi_matrix(int i, int t) const;
    Eigen::MatrixXcd a_matrix(int which, int i, int t) const;  // which: 1 or 2

    // field value at a global t index, unwinding the U-conjugation across
    // the seam
    cplx sample_dphi(int j, int i, int t) const;
    double sample_a(int which, int j, int i, int t) const;
};

HitchinFields assemble_hitchin(const ChainParams& p, const TodaSolution& sol);

// --- diagnostics ---

// sup-norm of d phi/dx1 + i d phi/dx2 + [A_1 + i A_2, phi] over interior
// nodes (central differences); O(h^2) for a converged solution
double hitchin_eq2_residual(const HitchinFields& f);

// sup-norm of F_12 - (i/2)[phi, phi^dag] with F_12 from central differences
// of A; O(h^2)
double curvature_identity_residual(const HitchinFields& f);

// sup over x2 of max_j |[phi,phi^dag]_jj| for each x1 column
std::vector<double> commutator_profile(const HitchinFields& f);

// consistency of the U-twisted continuation of the assembled fields across
// the x2 seam with the closed forms (machine-size for exact assembly)
double twisted_periodicity_residual(const HitchinFields& f);

// --- checkpoint io ---
void write_checkpoint(const std::string& path, const TodaSolution& sol);
std::vector<double> read_checkpoint(const std::string& path, const ChainParams& p,
                                    const CylinderGrid& g);

}  // namespace chains
