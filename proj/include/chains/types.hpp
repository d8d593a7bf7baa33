#pragma once

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace chains {

using cplx = std::complex<double>;

inline constexpr double pi = std::numbers::pi;

enum class ErrorKind {
    invalid_parameter,
    ill_conditioned_lattice,
    incompatible_grid,
    numerical_blowup,
    scan_quality,
    io_error,
};

class ChainError : public std::runtime_error {
public:
    ChainError(ErrorKind kind, const std::string& msg)
        : std::runtime_error(msg), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

// Discrete and continuous inputs of a symmetric chain, plus the derived
// quantities m = gcd(k,l) and omega = exp(i*pi/k) used throughout.
struct ChainParams {
    int k = 1;         // charge
    int l = 0;         // symmetry label, reduced mod k
    double c_abs = 1;  // |c|
    double c_phase = 0;
    double beta = 1;   // circle circumference parameter
    int m = 1;         // gcd(k,l), with gcd(k,0) = k
    cplx omega;        // exp(i*pi/k)

    // principal k-th root of c = c_abs * exp(i*c_phase)
    cplx c() const { return std::polar(c_abs, c_phase); }
    cplx c_root() const { return std::polar(std::pow(c_abs, 1.0 / k), c_phase / k); }
    double abs_c_pow(double p) const { return std::pow(c_abs, p); }
};

ChainParams build_params(int k, int l, double c_abs, double c_phase, double beta);

// index reduced to [0, k)
inline int mod_k(int j, int k) {
    int r = j % k;
    return r < 0 ? r + k : r;
}

// Uniform grid on the truncated cylinder |x1| <= L, x2 in [0, 2*pi/beta).
// x1 includes both endpoints (n_r points, spacing 2L/(n_r-1)); x2 is
// periodic with no duplicated endpoint (n_t points, spacing (2*pi/beta)/n_t).
struct CylinderGrid {
    double L = 1;
    int n_r = 2;
    int n_t = 2;
    double h_r = 0;
    double h_t = 0;

    double x1(int i) const { return -L + i * h_r; }
    double x2(int t) const { return t * h_t; }
    int nodes() const { return n_r * n_t; }
    int node(int i, int t) const { return i * n_t + t; }
};

CylinderGrid make_cylinder_grid(double beta, double L, int n_r, int n_t);

// default truncation half-length: boundary commutator terms sit at
// ~exp(-12) of the interior scale
double default_domain_length(const ChainParams& p);

}  // namespace chains
