#include "chains/ansatz.hpp"

#include <cmath>

namespace chains {

cplx mu(const ChainParams& p, int j, cplx s) {
    const cplx bs = p.beta * s / double(p.k);
    const cplx w2j1 = std::polar(1.0, pi * (2 * j + 1) / p.k);
    return std::exp(-bs) - w2j1 * std::exp(bs);
}

cplx phi_component(const ChainParams& p, int j, cplx s) {
    const int jj = mod_k(j, p.k);
    cplx prod = 1.0;
    for (int i = 0; i < p.k; ++i)
        if (mod_k(i * p.l, p.k) == jj)
            prod *= mu(p, i, s);
    return prod;
}

double asymptotic_slope(const ChainParams& p, int j) {
    const int r = mod_k(j, p.k) % p.m;
    return (2.0 * p.beta / p.k) * (0.5 * (p.m - 1) - r);
}

Eigen::MatrixXcd shift_matrix(int k) {
    Eigen::MatrixXcd s = Eigen::MatrixXcd::Zero(k, k);
    for (int j = 0; j < k; ++j)
        s((j + 1) % k, j) = 1.0;
    return s;
}

Eigen::MatrixXcd twist_matrix(const ChainParams& p) {
    Eigen::MatrixXcd u = Eigen::MatrixXcd::Zero(p.k, p.k);
    for (int j = 0; j < p.k; ++j) {
        const int e = -3 * p.l - 2 * p.m * (j / p.m);
        u((j + 2 * p.l) % p.k, j) = std::polar(1.0, pi * e / p.k);
    }
    return u;
}

Eigen::MatrixXcd twist_matrix_at(const ChainParams& p, cplx s) {
    auto v = [&](cplx z) { return std::exp(p.beta * double(p.l) * z / double(p.k)); };
    auto w = [&](cplx z) { return std::exp(2.0 * p.beta * double(p.l) * z / double(p.k)); };
    const cplx shift(0.0, pi / p.beta);
    Eigen::MatrixXcd u = Eigen::MatrixXcd::Zero(p.k, p.k);
    for (int j = 0; j < p.k; ++j) {
        const cplx phase = std::polar(1.0, pi * (-4 * p.l - 2 * p.m * (j / p.m)) / p.k);
        u((j + 2 * p.l) % p.k, j) = v(s) * v(s + shift) / w(s) * phase;
    }
    return u;
}

Eigen::MatrixXcd holomorphic_phi_matrix(const ChainParams& p, cplx s) {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(p.k, p.k);
    const cplx cr = p.c_root();
    for (int j = 0; j < p.k; ++j)
        m((j - 1 + p.k) % p.k, j) = cr * phi_component(p, j, s);
    return m;
}

std::vector<cplx> char_poly_coeffs(const Eigen::MatrixXcd& m) {
    const int k = static_cast<int>(m.rows());
    std::vector<cplx> c(k + 1);
    c[k] = 1.0;
    Eigen::MatrixXcd mj = m;
    c[k - 1] = -mj.trace();
    for (int j = 2; j <= k; ++j) {
        mj = m * (mj + c[k - j + 1] * Eigen::MatrixXcd::Identity(k, k));
        c[k - j] = -mj.trace() / double(j);
    }
    c.pop_back();  // drop the leading 1; return [c_0 .. c_{k-1}]
    return c;
}

double spectral_curve_check(const ChainParams& p, const std::vector<cplx>& samples) {
    double worst = 0;
    for (cplx s : samples) {
        const cplx w = std::exp(p.beta * s);
        std::vector<cplx> coeff = char_poly_coeffs(holomorphic_phi_matrix(p, s));
        coeff[0] += p.c() * (w + 1.0 / w);  // target constant term is -c(w + 1/w)
        for (const cplx& ci : coeff)
            worst = std::max(worst, std::abs(ci));
    }
    return worst;
}

AnsatzFields make_ansatz(const ChainParams& p) {
    AnsatzFields f;
    f.params = p;
    f.twist_U = twist_matrix(p);
    f.slope.resize(p.k);
    for (int j = 0; j < p.k; ++j)
        f.slope[j] = asymptotic_slope(p, j);

    f.twist_unitarity = (f.twist_U.adjoint() * f.twist_U -
                         Eigen::MatrixXcd::Identity(p.k, p.k))
                            .cwiseAbs()
                            .maxCoeff();

    // probe the defining product at scattered s; it must be s-independent
    f.twist_constancy = 0;
    for (int i = 0; i < 8; ++i) {
        const cplx s(std::cos(1.7 * i + 0.3) * 2.0 / p.beta,
                     std::sin(2.3 * i + 0.7) * 2.0 / p.beta);
        f.twist_constancy = std::max(
            f.twist_constancy,
            (twist_matrix_at(p, s) - f.twist_U).cwiseAbs().maxCoeff());
    }
    return f;
}

}  // namespace chains
