#pragma once

#include <vector>

#include <Eigen/Dense>

#include "chains/types.hpp"

namespace chains {

// mu_j(s) = exp(-beta*s/k) - omega^{2j+1} exp(beta*s/k); simple zeros exactly
// where exp(2*beta*s/k) = omega^{-(2j+1)}
cplx mu(const ChainParams& p, int j, cplx s);

// phi_j(s) = prod of mu_i(s) over i in Z_k with i*l = j (mod k); empty
// product is 1.  prod_j phi_j(s) = exp(-beta*s) + exp(beta*s).
cplx phi_component(const ChainParams& p, int j, cplx s);

// coefficient of |x1| in psi_j at infinity: (2*beta/k)*((m-1)/2 - (j mod m));
// sums to zero over j
double asymptotic_slope(const ChainParams& p, int j);

// cyclic shift: Sigma * e_j = e_{j+1 mod k}
Eigen::MatrixXcd shift_matrix(int k);

// constant twist U = Sigma^{2l} * diag(omega^{-3l - 2m*floor(j/m)}); the
// gauge transformation that makes the ansatz fields periodic up to U
Eigen::MatrixXcd twist_matrix(const ChainParams& p);

// the same gauge transformation evaluated from its defining product at a
// given s, with v(s) = exp(beta*l*s/k) and w(s) = exp(2*beta*l*s/k); equals
// twist_matrix for every s (checked by make_ansatz)
Eigen::MatrixXcd twist_matrix_at(const ChainParams& p, cplx s);

// holomorphic-gauge Higgs field c^{1/k} * Sigma^{-1} * diag(phi_0..phi_{k-1})
Eigen::MatrixXcd holomorphic_phi_matrix(const ChainParams& p, cplx s);

// Max deviation of the characteristic polynomial of the holomorphic-gauge
// matrix from zeta^k - c*(w + 1/w) over the samples; the coefficients of
// zeta^i for 0 < i < k all vanish for the symmetric ansatz.
double spectral_curve_check(const ChainParams& p, const std::vector<cplx>& samples);

// monic characteristic polynomial coefficients [c_0 .. c_{k-1}] of a k x k
// matrix (Faddeev-LeVerrier)
std::vector<cplx> char_poly_coeffs(const Eigen::MatrixXcd& m);

struct AnsatzFields {
    ChainParams params;
    Eigen::MatrixXcd twist_U;
    std::vector<double> slope;
    double twist_unitarity = 0;  // ||U^dag U - Id||_inf
    double twist_constancy = 0;  // max_s ||U(s) - U||_inf over probe points

    cplx mu(int j, cplx s) const { return chains::mu(params, j, s); }
    cplx phi(int j, cplx s) const { return phi_component(params, j, s); }
};

AnsatzFields make_ansatz(const ChainParams& p);

}  // namespace chains
