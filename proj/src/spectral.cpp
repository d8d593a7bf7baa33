#include "chains/spectral.hpp"

#include <cmath>
#include <numeric>

#include <Eigen/QR>

namespace chains {

ChainParams build_params(int k, int l, double c_abs, double c_phase, double beta) {
    if (k < 1)
        throw ChainError(ErrorKind::invalid_parameter, "k must be a positive integer");
    if (!(c_abs > 0))
        throw ChainError(ErrorKind::invalid_parameter, "|c| must be positive");
    if (!(beta > 0))
        throw ChainError(ErrorKind::invalid_parameter, "beta must be positive");
    ChainParams p;
    p.k = k;
    p.l = mod_k(l, k);
    p.c_abs = c_abs;
    p.c_phase = c_phase;
    p.beta = beta;
    p.m = p.l == 0 ? k : std::gcd(k, p.l);
    p.omega = std::polar(1.0, pi / k);
    return p;
}

CylinderGrid make_cylinder_grid(double beta, double L, int n_r, int n_t) {
    if (!(beta > 0) || !(L > 0))
        throw ChainError(ErrorKind::invalid_parameter, "beta and L must be positive");
    if (n_r < 2 || n_r % 2 != 0)
        throw ChainError(ErrorKind::incompatible_grid, "n_r must be even and >= 2");
    if (n_t < 2 || n_t % 2 != 0)
        throw ChainError(ErrorKind::incompatible_grid, "n_t must be even and >= 2");
    CylinderGrid g;
    g.L = L;
    g.n_r = n_r;
    g.n_t = n_t;
    g.h_r = 2 * L / (n_r - 1);
    g.h_t = (2 * pi / beta) / n_t;
    return g;
}

double default_domain_length(const ChainParams& p) {
    return std::max(6.0 / p.beta, 3.0 * p.k / p.beta);
}

SpectralLattice build_lattice(int k) {
    if (k < 1)
        throw ChainError(ErrorKind::invalid_parameter, "k must be a positive integer");
    SpectralLattice lat;
    lat.k = k;
    const int g = k - 1;
    lat.rho = Eigen::MatrixXcd::Zero(g, g);
    for (int j = 0; j < g; ++j)
        lat.rho(j, j) = -std::polar(1.0, -pi * (j + 1) / k);

    Eigen::VectorXcd ones = Eigen::VectorXcd::Ones(g);
    Eigen::VectorXcd gamma_i = ones;
    lat.gamma.resize(2 * k);
    lat.pi.resize(2 * k);
    for (int i = 0; i < 2 * k; ++i) {
        lat.gamma[i] = gamma_i;
        lat.pi[i] = gamma_i - lat.rho.diagonal().cwiseProduct(gamma_i);  // (1-rho)*Gamma_i
        gamma_i = lat.rho.diagonal().cwiseProduct(gamma_i);
    }

    lat.fixed_points.resize(k);
    Eigen::VectorXcd base(g);
    for (int j = 0; j < g; ++j)
        base(j) = 1.0 / (1.0 - lat.rho(j, j));  // (1-rho)^{-1} * Gamma_0
    for (int l = 0; l < k; ++l)
        lat.fixed_points[l] = double(l) * base;
    return lat;
}

namespace {

// {Pi_0..Pi_{2k-3}} as columns of a real 2(k-1) x (2k-2) matrix
Eigen::MatrixXd pi_basis_real(const SpectralLattice& lat) {
    const int g = lat.k - 1;
    Eigen::MatrixXd b(2 * g, 2 * lat.k - 2);
    for (int i = 0; i < 2 * lat.k - 2; ++i) {
        for (int j = 0; j < g; ++j) {
            b(j, i) = lat.pi[i](j).real();
            b(g + j, i) = lat.pi[i](j).imag();
        }
    }
    return b;
}

Eigen::VectorXd to_real(const Eigen::VectorXcd& v) {
    Eigen::VectorXd r(2 * v.size());
    for (int j = 0; j < v.size(); ++j) {
        r(j) = v(j).real();
        r(v.size() + j) = v(j).imag();
    }
    return r;
}

}  // namespace

Eigen::VectorXd pi_basis_coordinates(const SpectralLattice& lat, const Eigen::VectorXcd& v) {
    Eigen::MatrixXd b = pi_basis_real(lat);
    return b.colPivHouseholderQr().solve(to_real(v));
}

bool in_pi_lattice(const SpectralLattice& lat, const Eigen::VectorXcd& v, double tol) {
    if (lat.k == 1)
        return true;
    Eigen::MatrixXd b = pi_basis_real(lat);
    Eigen::VectorXd c = b.colPivHouseholderQr().solve(to_real(v));
    Eigen::VectorXd n = c.array().round();
    return (b * n - to_real(v)).lpNorm<Eigen::Infinity>() < tol;
}

std::vector<std::int64_t> smith_diagonal(std::vector<std::vector<std::int64_t>> a) {
    const int rows = static_cast<int>(a.size());
    const int cols = rows ? static_cast<int>(a[0].size()) : 0;
    auto mul_check = [](std::int64_t x, std::int64_t y) {
        std::int64_t r;
        if (__builtin_mul_overflow(x, y, &r))
            throw ChainError(ErrorKind::ill_conditioned_lattice, "integer overflow in Smith reduction");
        return r;
    };
    std::vector<std::int64_t> diag;
    int t = 0;
    while (t < rows && t < cols) {
        // pivot: smallest nonzero magnitude in the trailing submatrix
        int pr = -1, pc = -1;
        for (int i = t; i < rows; ++i)
            for (int j = t; j < cols; ++j)
                if (a[i][j] != 0 &&
                    (pr < 0 || std::llabs(a[i][j]) < std::llabs(a[pr][pc]))) {
                    pr = i;
                    pc = j;
                }
        if (pr < 0)
            break;  // trailing submatrix all zero
        std::swap(a[t], a[pr]);
        for (int i = t; i < rows; ++i)
            std::swap(a[i][t], a[i][pc]);

        bool clean = false;
        while (!clean) {
            clean = true;
            for (int i = t + 1; i < rows; ++i) {
                if (a[i][t] == 0)
                    continue;
                std::int64_t q = a[i][t] / a[t][t];
                for (int j = t; j < cols; ++j)
                    a[i][j] -= mul_check(q, a[t][j]);
                if (a[i][t] != 0) {  // remainder smaller than pivot: swap up
                    std::swap(a[t], a[i]);
                    clean = false;
                }
            }
            for (int j = t + 1; j < cols; ++j) {
                if (a[t][j] == 0)
                    continue;
                std::int64_t q = a[t][j] / a[t][t];
                for (int i = t; i < rows; ++i)
                    a[i][j] -= mul_check(q, a[i][t]);
                if (a[t][j] != 0) {
                    for (int i = t; i < rows; ++i)
                        std::swap(a[i][t], a[i][j]);
                    clean = false;
                }
            }
        }
        diag.push_back(std::llabs(a[t][t]));
        ++t;
    }
    return diag;
}

std::int64_t group_order(const SpectralLattice& lat) {
    const int k = lat.k;
    if (k < 1)
        throw ChainError(ErrorKind::invalid_parameter, "invalid lattice");
    if (k == 1)
        return 1;

    const int n = 2 * k - 2;
    Eigen::MatrixXd b = pi_basis_real(lat);
    Eigen::VectorXd g0 = to_real(lat.gamma[0]);
    Eigen::VectorXd c = b.colPivHouseholderQr().solve(g0);

    // exact integer coordinates of k*Gamma_0 in the Pi-basis
    std::vector<std::int64_t> gk(n);
    for (int i = 0; i < n; ++i) {
        double s = double(k) * c(i);
        gk[i] = std::llround(s);
        if (std::abs(s - double(gk[i])) > 1e-8 * k)
            throw ChainError(ErrorKind::ill_conditioned_lattice,
                             "rounding residual above threshold in Pi-basis coordinates");
    }
    if ((b * c - g0).lpNorm<Eigen::Infinity>() > 1e-8)
        throw ChainError(ErrorKind::ill_conditioned_lattice,
                         "Gamma_0 does not lie in the span of the Pi-basis");

    // rows generate k*Gamma in Pi-coordinates; index = k^n / prod(d)
    std::vector<std::vector<std::int64_t>> rows(n + 1, std::vector<std::int64_t>(n, 0));
    for (int i = 0; i < n; ++i)
        rows[i][i] = k;
    rows[n] = gk;
    std::vector<std::int64_t> d = smith_diagonal(std::move(rows));
    if (static_cast<int>(d.size()) != n)
        throw ChainError(ErrorKind::ill_conditioned_lattice, "degenerate lattice inclusion");

    // every invariant factor divides k, so accumulate exact quotients
    std::int64_t order = 1;
    for (std::int64_t di : d) {
        if (di == 0 || k % di != 0)
            throw ChainError(ErrorKind::ill_conditioned_lattice, "invariant factor does not divide k");
        order *= k / di;
    }
    return order;
}

double verify_fixed_point(const SpectralLattice& lat, int l) {
    if (l < 0 || l >= lat.k)
        throw ChainError(ErrorKind::invalid_parameter, "l must satisfy 0 <= l < k");
    if (lat.k == 1)
        return 0.0;
    const Eigen::VectorXcd& x = lat.fixed_points[l];
    Eigen::VectorXcd r = lat.rho.diagonal().cwiseProduct(x) - x + double(l) * lat.gamma[0];

    Eigen::MatrixXd b = pi_basis_real(lat);
    Eigen::VectorXd c = b.colPivHouseholderQr().solve(to_real(r));
    Eigen::VectorXd reduced = to_real(r) - b * c.array().round().matrix();
    return reduced.lpNorm<Eigen::Infinity>();
}

ClassificationReport classify(const ChainParams& params) {
    ClassificationReport rep;
    rep.k = params.k;
    SpectralLattice lat = build_lattice(params.k);
    rep.order = group_order(lat);
    rep.odd_groups_empty = true;
    rep.entries.reserve(params.k);
    for (int l = 0; l < params.k; ++l) {
        ClassificationEntry e;
        e.l = l;
        e.m = l == 0 ? params.k : std::gcd(params.k, l);
        e.group = "Z_" + std::to_string(2 * params.k) + "^(" + std::to_string(2 * l) + ")";
        e.fixed_point = lat.fixed_points[l];
        rep.entries.push_back(std::move(e));
    }
    return rep;
}

}  // namespace chains
