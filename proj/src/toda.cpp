#include "chains/toda.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace chains {

namespace {

// x1-derivative of the algebraic profile psi^alg, the trace-free field that
// equalizes all potential terms |phi_{j+1}|^2 exp(psi_j - psi_{j+1}).  It
// approaches asymptotic_slope(j) as |x1| grows and carries the exponentially
// small corrections that keep the commutator from piling up at the
// truncation boundary.
std::vector<double> algebraic_slope(const ChainParams& p, double x1, double x2) {
    const int k = p.k;
    // d/dx1 of ln|phi_j|^2 from |mu_i|^2 = 2cosh(2 beta x1/k) - 2cos(theta_i)
    std::vector<double> cprime(k, 0.0);
    const double sh = std::sinh(2 * p.beta * x1 / k);
    const double ch = std::cosh(2 * p.beta * x1 / k);
    for (int i = 0; i < k; ++i) {
        const double mu2 =
            2 * ch - 2 * std::cos(pi * (2 * i + 1) / k + 2 * p.beta * x2 / k);
        cprime[mod_k(i * p.l, k)] += (4 * p.beta / k) * sh / mu2;
    }
    double dmean = 0;
    for (double c : cprime)
        dmean += c;
    dmean /= k;
    // psi_j - psi_{j+1} = mean(ln|phi|^2) - ln|phi_{j+1}|^2, differentiated
    std::vector<double> out(k, 0.0);
    double acc = 0, total = 0;
    for (int j = 1; j < k; ++j) {
        acc += dmean - cprime[j % k];
        out[j] = -acc;
        total += out[j];
    }
    const double shift = total / k;
    for (int j = 0; j < k; ++j)
        out[j] -= shift;
    return out;
}

struct Workspace {
    const ChainParams& p;
    const CylinderGrid& g;
    int k, nr, nt, nodes, wrap;
    double hr, ht, cfac, cinv;
    std::vector<double> absphi2;  // k per node
    std::vector<double> slope;
    std::vector<double> bcl, bcr;  // Neumann data d psi_j/dx1 at -L and +L, k x nt
    std::vector<double> ccl, ccr;  // ghost closure constants (include h^3 psi''' term)

    explicit Workspace(const ChainParams& p_, const CylinderGrid& g_) : p(p_), g(g_) {
        k = p.k;
        nr = g.n_r;
        nt = g.n_t;
        nodes = nr * nt;
        wrap = mod_k(2 * p.l, k);
        hr = g.h_r;
        ht = g.h_t;
        cfac = p.abs_c_pow(2.0 / k);
        cinv = 1.0 / cfac;
        slope.resize(k);
        for (int j = 0; j < k; ++j)
            slope[j] = asymptotic_slope(p, j);
        absphi2.resize(size_t(k) * nodes);
        for (int j = 0; j < k; ++j)
            for (int i = 0; i < nr; ++i)
                for (int t = 0; t < nt; ++t) {
                    cplx v = phi_component(p, j, cplx(g.x1(i), g.x2(t)));
                    absphi2[idx(j, i, t)] = std::norm(v);
                }
        bcl.resize(size_t(k) * nt);
        bcr.resize(size_t(k) * nt);
        ccl.resize(size_t(k) * nt);
        ccr.resize(size_t(k) * nt);
        const double d = 0.5 * hr;
        for (int t = 0; t < nt; ++t) {
            auto gl = algebraic_slope(p, -g.L, g.x2(t));
            auto gr = algebraic_slope(p, g.L, g.x2(t));
            // psi''' at the ends from the algebraic profile, for a
            // fourth-order ghost closure (the potential grows like
            // exp(2 beta L/k), so closure error is strongly amplified there)
            auto glm = algebraic_slope(p, -g.L - d, g.x2(t));
            auto glp = algebraic_slope(p, -g.L + d, g.x2(t));
            auto grm = algebraic_slope(p, g.L - d, g.x2(t));
            auto grp = algebraic_slope(p, g.L + d, g.x2(t));
            for (int j = 0; j < k; ++j) {
                bcl[j * nt + t] = gl[j];
                bcr[j * nt + t] = gr[j];
                const double ql = (glp[j] - 2 * gl[j] + glm[j]) / (d * d);
                const double qr = (grp[j] - 2 * gr[j] + grm[j]) / (d * d);
                ccl[j * nt + t] = -2 * hr * gl[j] - (hr * hr * hr / 3.0) * ql;
                ccr[j * nt + t] = 2 * hr * gr[j] + (hr * hr * hr / 3.0) * qr;
            }
        }
    }

    int idx(int j, int i, int t) const { return (j * nr + i) * nt + t; }

    int up(int j, int t) const {  // index of (j, t+1) with twisted wrap
        return t + 1 < nt ? idx(j, 0, t + 1) : idx((j + wrap) % k, 0, 0);
    }
    int down(int j, int t) const {
        return t > 0 ? idx(j, 0, t - 1) : idx(mod_k(j - wrap, k), 0, nt - 1);
    }

    // a_j = |phi_{j+1}|^2 exp(psi_j - psi_{j+1}); F_j = a_j - a_{j-1}
    void potentials(const std::vector<double>& psi, std::vector<double>& a) const {
        for (int j = 0; j < k; ++j) {
            const int jn = (j + 1) % k;
            const double* pj = &psi[idx(j, 0, 0)];
            const double* pn = &psi[idx(jn, 0, 0)];
            const double* w = &absphi2[idx(jn, 0, 0)];
            double* out = &a[idx(j, 0, 0)];
            for (int n = 0; n < nodes; ++n)
                out[n] = w[n] * std::exp(pj[n] - pn[n]);
        }
    }

    // 5-point Laplacian; Neumann ghost closure in x1 (second-order, slope
    // data scaled by `slope_on`), twisted periodic wrap in x2
    void laplacian(const std::vector<double>& psi, std::vector<double>& lap,
                   double slope_on) const {
        const double ir2 = 1.0 / (hr * hr), it2 = 1.0 / (ht * ht);
        for (int j = 0; j < k; ++j) {
            for (int i = 0; i < nr; ++i) {
                for (int t = 0; t < nt; ++t) {
                    const double c = psi[idx(j, i, t)];
                    double lx;
                    if (i == 0)
                        lx = (2.0 * psi[idx(j, 1, t)] - 2.0 * c +
                              ccl[j * nt + t] * slope_on) *
                             ir2;
                    else if (i == nr - 1)
                        lx = (2.0 * psi[idx(j, nr - 2, t)] - 2.0 * c +
                              ccr[j * nt + t] * slope_on) *
                             ir2;
                    else
                        lx = (psi[idx(j, i - 1, t)] - 2.0 * c + psi[idx(j, i + 1, t)]) * ir2;
                    const int off = i * nt;
                    const double lt =
                        (psi[up(j, t) + off] - 2.0 * c + psi[down(j, t) + off]) * it2;
                    lap[idx(j, i, t)] = lx + lt;
                }
            }
        }
    }

    void project_trace(std::vector<double>& psi) const {
        for (int n = 0; n < nodes; ++n) {
            double mean = 0;
            for (int j = 0; j < k; ++j)
                mean += psi[n + j * nodes];
            mean /= k;
            for (int j = 0; j < k; ++j)
                psi[n + j * nodes] -= mean;
        }
    }

    double node_weight(int i) const { return (i == 0 || i == nr - 1) ? 0.5 : 1.0; }
};

void check_finite(const std::vector<double>& v) {
    for (double x : v)
        if (!std::isfinite(x))
            throw ChainError(ErrorKind::numerical_blowup, "non-finite field value");
}

// residual of the printed equation, sup over j and x1-interior nodes
double residual_sup(const Workspace& ws, const std::vector<double>& lap,
                    const std::vector<double>& a) {
    double r = 0;
    for (int j = 0; j < ws.k; ++j) {
        const int jm = mod_k(j - 1, ws.k);
        for (int i = 1; i < ws.nr - 1; ++i)
            for (int t = 0; t < ws.nt; ++t) {
                const int n = ws.idx(j, i, t), nm = ws.idx(jm, i, t);
                r = std::max(r, std::abs(ws.cinv * lap[n] - (a[n] - a[nm])));
            }
    }
    if (!std::isfinite(r))
        throw ChainError(ErrorKind::numerical_blowup, "non-finite residual");
    return r;
}

// full Newton residual G = lap(psi) - cfac * F, all rows
void newton_residual(const Workspace& ws, const std::vector<double>& psi,
                     const std::vector<double>& a, std::vector<double>& lap,
                     std::vector<double>& gres) {
    ws.laplacian(psi, lap, 1.0);
    for (int j = 0; j < ws.k; ++j) {
        const int jm = mod_k(j - 1, ws.k);
        for (int n = 0; n < ws.nodes; ++n) {
            const int jj = j * ws.nodes + n;
            gres[jj] = lap[jj] - ws.cfac * (a[jj] - a[jm * ws.nodes + n]);
        }
    }
}

double sup_norm(const std::vector<double>& v) {
    double m = 0;
    for (double x : v)
        m = std::max(m, std::abs(x));
    return m;
}

// (-J) v = -lap_hom(v) + cfac * R(v), the linearization of -G around psi
void apply_newton_matrix(const Workspace& ws, const std::vector<double>& a,
                         const std::vector<double>& v, std::vector<double>& lap,
                         std::vector<double>& out) {
    ws.laplacian(v, lap, 0.0);
    for (int j = 0; j < ws.k; ++j) {
        const int jm = mod_k(j - 1, ws.k), jp = (j + 1) % ws.k;
        for (int n = 0; n < ws.nodes; ++n) {
            const double aj = a[j * ws.nodes + n], am = a[jm * ws.nodes + n];
            const double rv = (aj + am) * v[j * ws.nodes + n] - aj * v[jp * ws.nodes + n] -
                              am * v[jm * ws.nodes + n];
            out[j * ws.nodes + n] = -lap[j * ws.nodes + n] + ws.cfac * rv;
        }
    }
}

// PCG on the trapezoid-weighted symmetrization of (-J) delta = G
void newton_solve(const Workspace& ws, const std::vector<double>& a,
                  const std::vector<double>& gres, std::vector<double>& delta) {
    const int n = static_cast<int>(gres.size());
    std::vector<double> r = gres, z(n), pdir(n), q(n), lap(n), diag(n), wgt(n);
    for (int j = 0; j < ws.k; ++j) {
        const int jm = mod_k(j - 1, ws.k);
        for (int i = 0; i < ws.nr; ++i)
            for (int t = 0; t < ws.nt; ++t) {
                const int jj = ws.idx(j, i, t);
                diag[jj] = 2.0 / (ws.hr * ws.hr) + 2.0 / (ws.ht * ws.ht) +
                           ws.cfac * (a[jj] + a[ws.idx(jm, i, t)]);
                wgt[jj] = ws.node_weight(i);
            }
    }
    std::fill(delta.begin(), delta.end(), 0.0);
    auto wdot = [&](const std::vector<double>& u, const std::vector<double>& v) {
        double s = 0;
        for (int i = 0; i < n; ++i)
            s += wgt[i] * u[i] * v[i];
        return s;
    };
    for (int i = 0; i < n; ++i)
        z[i] = r[i] / diag[i];
    pdir = z;
    double rz = wdot(r, z);
    const double g0 = sup_norm(gres);
    const int maxit = 20 * static_cast<int>(std::sqrt(double(n))) + 200;
    for (int it = 0; it < maxit; ++it) {
        apply_newton_matrix(ws, a, pdir, lap, q);
        const double pq = wdot(pdir, q);
        if (pq <= 0)
            break;  // roundoff-degenerate direction
        const double alpha = rz / pq;
        double rmax = 0;
        for (int i = 0; i < n; ++i) {
            delta[i] += alpha * pdir[i];
            r[i] -= alpha * q[i];
            rmax = std::max(rmax, std::abs(r[i]));
        }
        if (rmax < 1e-10 * g0 || rmax < 1e-300)
            break;
        for (int i = 0; i < n; ++i)
            z[i] = r[i] / diag[i];
        const double rz_new = wdot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (int i = 0; i < n; ++i)
            pdir[i] = z[i] + beta * pdir[i];
    }
}

}  // namespace

double toda_residual(const ChainParams& p, const CylinderGrid& g,
                     const std::vector<double>& psi) {
    Workspace ws(p, g);
    if (psi.size() != size_t(ws.k) * ws.nodes)
        throw ChainError(ErrorKind::incompatible_grid, "psi size does not match grid");
    check_finite(psi);
    std::vector<double> a(psi.size()), lap(psi.size());
    ws.potentials(psi, a);
    ws.laplacian(psi, lap, 1.0);
    return residual_sup(ws, lap, a);
}

double ds_functional(const ChainParams& p, const CylinderGrid& g,
                     const std::vector<double>& psi) {
    Workspace ws(p, g);
    std::vector<double> a(psi.size());
    ws.potentials(psi, a);
    double total = 0;
    for (int j = 0; j < ws.k; ++j) {
        for (int i = 0; i < ws.nr; ++i) {
            const double w = ws.node_weight(i) * ws.hr * ws.ht;
            for (int t = 0; t < ws.nt; ++t) {
                const int n = ws.idx(j, i, t);
                double gx;
                if (i == 0)
                    gx = ws.bcl[j * ws.nt + t];  // ghost closure end derivative
                else if (i == ws.nr - 1)
                    gx = ws.bcr[j * ws.nt + t];
                else
                    gx = (psi[ws.idx(j, i + 1, t)] - psi[ws.idx(j, i - 1, t)]) / (2 * ws.hr);
                const int off = i * ws.nt;
                const double gt =
                    (psi[ws.up(j, t) + off] - psi[ws.down(j, t) + off]) / (2 * ws.ht);
                total += w * (0.5 * ws.cinv * (gx * gx + gt * gt) + a[n]);
            }
        }
    }
    return total;
}

TodaSolution heat_flow(const ChainParams& p, const CylinderGrid& g, double tol,
                       long max_steps) {
    HeatFlowOptions opts;
    opts.tol = tol;
    opts.max_steps = max_steps;
    return heat_flow(p, g, opts);
}

TodaSolution heat_flow(const ChainParams& p, const CylinderGrid& g,
                       const HeatFlowOptions& opts) {
    if (!(opts.tol > 0))
        throw ChainError(ErrorKind::invalid_parameter, "tol must be positive");
    Workspace ws(p, g);
    const int n = ws.k * ws.nodes;

    TodaSolution sol;
    sol.params = p;
    sol.grid = g;
    sol.psi.assign(n, 0.0);
    if (opts.init) {
        if (opts.init->size() != size_t(n))
            throw ChainError(ErrorKind::incompatible_grid, "warm-start field size mismatch");
        sol.psi = *opts.init;
        check_finite(sol.psi);
    } else {
        // smooth trace-free initial data matching the asymptotic slopes
        for (int j = 0; j < ws.k; ++j)
            for (int i = 0; i < ws.nr; ++i) {
                const double v = ws.slope[j] * std::sqrt(g.x1(i) * g.x1(i) + 1.0);
                for (int t = 0; t < ws.nt; ++t)
                    sol.psi[ws.idx(j, i, t)] = v;
            }
    }
    ws.project_trace(sol.psi);

    std::vector<double> a(n), lap(n);
    const double dt_diff = 0.2 / (1.0 / (ws.hr * ws.hr) + 1.0 / (ws.ht * ws.ht));

    auto record = [&](double value) {
        if (sol.ds_history.empty() || value != sol.ds_history.back())
            sol.ds_history.push_back(value);
    };

    ws.potentials(sol.psi, a);
    ws.laplacian(sol.psi, lap, 1.0);
    double res = residual_sup(ws, lap, a);
    record(ds_functional(p, g, sol.psi));

    // explicit descent until the Newton basin
    const double enter_newton = std::max(opts.tol, opts.newton_threshold);
    while (res > enter_newton && sol.flow_steps < opts.max_steps) {
        for (int step = 0; step < opts.check_every && sol.flow_steps < opts.max_steps;
             ++step) {
            ws.potentials(sol.psi, a);
            double lam = 0;
            for (int j = 0; j < ws.k; ++j) {
                const int jm = mod_k(j - 1, ws.k);
                for (int nn = 0; nn < ws.nodes; ++nn)
                    lam = std::max(lam, a[j * ws.nodes + nn] + a[jm * ws.nodes + nn]);
            }
            const double dt = std::min(dt_diff, 0.5 / (ws.cfac * lam));
            ws.laplacian(sol.psi, lap, 1.0);
            for (int j = 0; j < ws.k; ++j) {
                const int jm = mod_k(j - 1, ws.k);
                for (int nn = 0; nn < ws.nodes; ++nn) {
                    const int jj = j * ws.nodes + nn;
                    sol.psi[jj] += dt * (lap[jj] - ws.cfac * (a[jj] - a[jm * ws.nodes + nn]));
                }
            }
            ws.project_trace(sol.psi);
            ++sol.flow_steps;
        }
        check_finite(sol.psi);
        ws.potentials(sol.psi, a);
        ws.laplacian(sol.psi, lap, 1.0);
        res = residual_sup(ws, lap, a);
        record(ds_functional(p, g, sol.psi));
    }

    // Newton polish with backtracking on the full residual
    if (res > opts.tol && res <= enter_newton) {
        std::vector<double> gres(n), delta(n), trial(n), atrial(n);
        for (int it = 0; it < 60 && res > opts.tol; ++it) {
            ws.potentials(sol.psi, a);
            newton_residual(ws, sol.psi, a, lap, gres);
            const double g0 = sup_norm(gres);
            if (ws.cinv * g0 <= opts.tol) {
                res = toda_residual(p, g, sol.psi);
                break;
            }
            newton_solve(ws, a, gres, delta);
            double alpha = 1.0;
            double gtrial = g0;
            for (int ls = 0; ls < 40; ++ls) {
                for (int i = 0; i < n; ++i)
                    trial[i] = sol.psi[i] + alpha * delta[i];
                ws.potentials(trial, atrial);
                newton_residual(ws, trial, atrial, lap, gres);
                gtrial = sup_norm(gres);
                if (std::isfinite(gtrial) && gtrial < (1.0 - 1e-4 * alpha) * g0)
                    break;
                alpha *= 0.5;
            }
            if (!(gtrial < g0))
                break;  // stalled; report whatever residual we reached
            sol.psi.swap(trial);
            ws.project_trace(sol.psi);
            ws.potentials(sol.psi, a);
            ws.laplacian(sol.psi, lap, 1.0);
            res = residual_sup(ws, lap, a);
        }
        record(ds_functional(p, g, sol.psi));
    }

    sol.residual_sup = res;
    sol.converged = res <= opts.tol;
    return sol;
}

double symmetry_check(const ChainParams& p, const TodaSolution& sol) {
    const CylinderGrid& g = sol.grid;
    if (g.n_t % 2 != 0)
        throw ChainError(ErrorKind::incompatible_grid, "n_t must be even for the half-period shift");
    const int half = g.n_t / 2;
    double worst = 0;
    for (int j = 0; j < p.k; ++j)
        for (int i = 0; i < g.n_r; ++i)
            for (int t = 0; t < g.n_t; ++t) {
                const double lhs = sol.sample(j, i, t + half);
                const double rhs = sol.sample(j + p.l, i, t);
                worst = std::max(worst, std::abs(lhs - rhs));
            }
    return worst;
}

Eigen::MatrixXcd HitchinFields::phi_matrix(int i, int t) const {
    const int k = params.k;
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(k, k);
    for (int j = 0; j < k; ++j)
        m(mod_k(j - 1, k), j) = dphi[idx(j, i, t)];
    return m;
}

Eigen::MatrixXcd HitchinFields::a_matrix(int which, int i, int t) const {
    const int k = params.k;
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(k, k);
    const std::vector<double>& a = which == 1 ? a1 : a2;
    for (int j = 0; j < k; ++j)
        m(j, j) = cplx(0.0, a[idx(j, i, t)]);
    return m;
}

cplx HitchinFields::sample_dphi(int j, int i, int t) const {
    const int k = params.k, wrap = mod_k(2 * params.l, k);
    cplx factor = 1.0;
    auto u = [&](int jj) { return twist_U((jj + wrap) % k, jj); };
    while (t >= grid.n_t) {
        t -= grid.n_t;
        factor *= u(j) * std::conj(u(mod_k(j - 1, k)));
        j = (j + wrap) % k;
    }
    while (t < 0) {
        t += grid.n_t;
        const int jprev = mod_k(j - wrap, k);
        factor /= u(jprev) * std::conj(u(mod_k(jprev - 1, k)));
        j = jprev;
    }
    return factor * dphi[idx(j, i, t)];
}

double HitchinFields::sample_a(int which, int j, int i, int t) const {
    const int k = params.k, wrap = mod_k(2 * params.l, k);
    while (t >= grid.n_t) {
        t -= grid.n_t;
        j = (j + wrap) % k;
    }
    while (t < 0) {
        t += grid.n_t;
        j = mod_k(j - wrap, k);
    }
    return (which == 1 ? a1 : a2)[idx(j, i, t)];
}

HitchinFields assemble_hitchin(const ChainParams& p, const TodaSolution& sol) {
    const CylinderGrid& g = sol.grid;
    HitchinFields f;
    f.params = p;
    f.grid = g;
    f.twist_U = twist_matrix(p);
    const int nper = g.nodes();
    f.dphi.resize(size_t(p.k) * nper);
    f.a1.resize(f.dphi.size());
    f.a2.resize(f.dphi.size());
    const cplx cr = p.c_root();
    for (int t = 0; t < g.n_t; ++t) {
        const auto gl = algebraic_slope(p, -g.L, g.x2(t));
        const auto gr = algebraic_slope(p, g.L, g.x2(t));
        for (int j = 0; j < p.k; ++j) {
            const int jm = mod_k(j - 1, p.k);
            for (int i = 0; i < g.n_r; ++i) {
                const int n = f.idx(j, i, t);
                const cplx s(g.x1(i), g.x2(t));
                f.dphi[n] = cr *
                            std::exp(0.5 * (sol.psi[sol.idx(jm, i, t)] -
                                            sol.psi[sol.idx(j, i, t)])) *
                            phi_component(p, j, s);
                // A_1 = -(i/2) d2 psi, A_2 = (i/2) d1 psi
                f.a1[n] = -0.5 *
                          (sol.sample(j, i, t + 1) - sol.sample(j, i, t - 1)) / (2 * g.h_t);
                double d1;
                if (i == 0)
                    d1 = gl[j];  // ghost closure derivative
                else if (i == g.n_r - 1)
                    d1 = gr[j];
                else
                    d1 = (sol.psi[sol.idx(j, i + 1, t)] - sol.psi[sol.idx(j, i - 1, t)]) /
                         (2 * g.h_r);
                f.a2[n] = 0.5 * d1;
            }
        }
    }
    return f;
}

double hitchin_eq2_residual(const HitchinFields& f) {
    const CylinderGrid& g = f.grid;
    const int k = f.params.k;
    double worst = 0;
    for (int j = 0; j < k; ++j) {
        const int jm = mod_k(j - 1, k);
        for (int i = 1; i < g.n_r - 1; ++i)
            for (int t = 0; t < g.n_t; ++t) {
                const cplx d1 =
                    (f.dphi[f.idx(j, i + 1, t)] - f.dphi[f.idx(j, i - 1, t)]) / (2 * g.h_r);
                const cplx d2 =
                    (f.sample_dphi(j, i, t + 1) - f.sample_dphi(j, i, t - 1)) / (2 * g.h_t);
                const int n = f.idx(j, i, t), nm = f.idx(jm, i, t);
                const cplx Dj(-f.a2[n], f.a1[n]);      // (A1 + iA2)_jj
                const cplx Djm(-f.a2[nm], f.a1[nm]);
                const cplx r = d1 + cplx(0, 1) * d2 + (Djm - Dj) * f.dphi[n];
                worst = std::max(worst, std::abs(r));
            }
    }
    return worst;
}

double curvature_identity_residual(const HitchinFields& f) {
    const CylinderGrid& g = f.grid;
    const int k = f.params.k;
    double worst = 0;
    for (int j = 0; j < k; ++j) {
        const int jp = (j + 1) % k;
        for (int i = 1; i < g.n_r - 1; ++i)
            for (int t = 0; t < g.n_t; ++t) {
                const double d1a2 =
                    (f.a2[f.idx(j, i + 1, t)] - f.a2[f.idx(j, i - 1, t)]) / (2 * g.h_r);
                const double d2a1 =
                    (f.sample_a(1, j, i, t + 1) - f.sample_a(1, j, i, t - 1)) / (2 * g.h_t);
                const double comm = std::norm(f.dphi[f.idx(jp, i, t)]) -
                                    std::norm(f.dphi[f.idx(j, i, t)]);
                worst = std::max(worst, std::abs((d1a2 - d2a1) - 0.5 * comm));
            }
    }
    return worst;
}

std::vector<double> commutator_profile(const HitchinFields& f) {
    const CylinderGrid& g = f.grid;
    const int k = f.params.k;
    std::vector<double> prof(g.n_r, 0.0);
    for (int i = 0; i < g.n_r; ++i)
        for (int t = 0; t < g.n_t; ++t)
            for (int j = 0; j < k; ++j) {
                const double c = std::abs(std::norm(f.dphi[f.idx((j + 1) % k, i, t)]) -
                                          std::norm(f.dphi[f.idx(j, i, t)]));
                prof[i] = std::max(prof[i], c);
            }
    return prof;
}

double twisted_periodicity_residual(const HitchinFields& f) {
    const ChainParams& p = f.params;
    const int k = p.k, wrap = mod_k(2 * p.l, k);
    auto u = [&](int jj) { return f.twist_U((jj + wrap) % k, jj); };
    const cplx period(0.0, 2 * pi / p.beta);
    double worst = 0;
    for (int i = 0; i < f.grid.n_r; i += std::max(1, f.grid.n_r / 8))
        for (int t = 0; t < f.grid.n_t; t += std::max(1, f.grid.n_t / 8))
            for (int j = 0; j < k; ++j) {
                const cplx s(f.grid.x1(i), f.grid.x2(t));
                const cplx lhs = phi_component(p, j, s + period);
                const cplx rhs = u(j) * std::conj(u(mod_k(j - 1, k))) *
                                 phi_component(p, (j + wrap) % k, s);
                worst = std::max(worst, std::abs(lhs - rhs) / (1.0 + std::abs(rhs)));
            }
    return worst;
}

void write_checkpoint(const std::string& path, const TodaSolution& sol) {
    std::ofstream out(path);
    if (!out)
        throw ChainError(ErrorKind::io_error, "cannot open checkpoint file for writing: " + path);
    out.precision(17);
    out << "chains-psi-checkpoint v1\n";
    out << sol.params.k << " " << sol.params.l << " " << sol.params.beta << " "
        << sol.params.c_abs << " " << sol.params.c_phase << " " << sol.grid.L << " "
        << sol.grid.n_r << " " << sol.grid.n_t << "\n";
    for (size_t i = 0; i < sol.psi.size(); ++i)
        out << sol.psi[i] << (i + 1 == sol.psi.size() ? "\n" : " ");
    if (!out)
        throw ChainError(ErrorKind::io_error, "write failure on checkpoint: " + path);
}

std::vector<double> read_checkpoint(const std::string& path, const ChainParams& p,
                                    const CylinderGrid& g) {
    std::ifstream in(path);
    if (!in)
        throw ChainError(ErrorKind::io_error, "cannot open checkpoint file: " + path);
    std::string magic, version;
    in >> magic >> version;
    if (magic != "chains-psi-checkpoint" || version != "v1")
        throw ChainError(ErrorKind::io_error, "not a psi checkpoint file: " + path);
    int k, l, nr, nt;
    double beta, cabs, cphase, L;
    in >> k >> l >> beta >> cabs >> cphase >> L >> nr >> nt;
    if (k != p.k || l != p.l || nr != g.n_r || nt != g.n_t ||
        std::abs(beta - p.beta) > 1e-12 * p.beta || std::abs(L - g.L) > 1e-12 * g.L)
        throw ChainError(ErrorKind::incompatible_grid,
                         "checkpoint header does not match the requested run");
    std::vector<double> psi(size_t(k) * nr * nt);
    for (double& v : psi)
        in >> v;
    if (!in)
        throw ChainError(ErrorKind::io_error, "truncated checkpoint file: " + path);
    return psi;
}

}  // namespace chains
