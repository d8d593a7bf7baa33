#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "chains/types.hpp"

namespace chains {

// Period-lattice data of the symmetric spectral curve c*w^2 + c - w*zeta^k = 0.
// rho is the (k-1)x(k-1) diagonal matrix of the order-2k action on the
// Jacobian, Gamma_i = rho^i * (1,...,1)^T and Pi_i = rho^i (1-rho) Gamma_0.
// fixed_points[l] = l * (1-rho)^{-1} * Gamma_0 represents the l-th fixed
// point of rho in the quotient C^{k-1} / <Pi_0..Pi_{2k-3}, Gamma_0>.
struct SpectralLattice {
    int k = 1;
    Eigen::MatrixXcd rho;                    // (k-1) x (k-1) diagonal
    std::vector<Eigen::VectorXcd> gamma;     // 2k vectors of dim k-1
    std::vector<Eigen::VectorXcd> pi;        // 2k vectors of dim k-1
    std::vector<Eigen::VectorXcd> fixed_points;  // k vectors of dim k-1

    int genus() const { return k - 1; }
};

SpectralLattice build_lattice(int k);

// |Gamma/Pi| via Smith normal form of the inclusion Pi c Gamma, computed on
// exact integer coordinates in the Pi-basis.  Equals k for every valid k.
std::int64_t group_order(const SpectralLattice& lat);

// sup-norm of rho*x - x + l*Gamma_0 after reduction modulo the lattice
// generated by {Pi_0..Pi_{2k-3}}, where x = fixed_points[l].
double verify_fixed_point(const SpectralLattice& lat, int l);

struct ClassificationEntry {
    int l = 0;
    int m = 1;              // split charge gcd(k,l)
    std::string group;      // "Z_{2k}^{(2l)}"
    Eigen::VectorXcd fixed_point;
};

struct ClassificationReport {
    int k = 1;
    std::int64_t order = 1;               // |Gamma/Pi|
    bool odd_groups_empty = true;         // no Z_{2k}^{(2l+1)}-invariant chains
    std::vector<ClassificationEntry> entries;  // one per l = 0..k-1
};

ClassificationReport classify(const ChainParams& params);

// --- integer-lattice helpers (shared with the test oracles) ---

// Real coordinates of v in the basis {Pi_0..Pi_{2k-3}} (complex vectors of
// dim k-1 flattened to R^{2k-2}); least squares via column-pivoted QR.
Eigen::VectorXd pi_basis_coordinates(const SpectralLattice& lat, const Eigen::VectorXcd& v);

// true if v lies in the lattice generated by {Pi_i}: integer coordinates
// after rounding, back-substitution residual below tol
bool in_pi_lattice(const SpectralLattice& lat, const Eigen::VectorXcd& v, double tol = 1e-8);

// Smith normal form diagonal of an integer matrix (row-generated lattice).
// Throws ill_conditioned_lattice on int64 overflow.
std::vector<std::int64_t> smith_diagonal(std::vector<std::vector<std::int64_t>> a);

}  // namespace chains
