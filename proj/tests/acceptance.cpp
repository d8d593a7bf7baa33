// Acceptance suite: runs every contract the library must meet, one line of
// output per criterion, nonzero exit when any fails.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "chains/export.hpp"
#include "chains/nahm.hpp"
#include "chains/spectral.hpp"
#include "chains/toda.hpp"

using namespace chains;
using clock_t_ = std::chrono::steady_clock;

namespace {

int g_failures = 0;

void report(int id, const char* name, bool pass, const std::string& detail, double secs) {
    std::printf("[%s] criterion %d %s: %s (%.1f s)\n", pass ? "PASS" : "FAIL", id, name,
                detail.c_str(), secs);
    std::fflush(stdout);
    if (!pass)
        ++g_failures;
}

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

bool in_gamma_lattice(const SpectralLattice& lat, const Eigen::VectorXcd& v) {
    for (int j = 0; j < lat.k; ++j)
        if (in_pi_lattice(lat, v - double(j) * lat.gamma[0]))
            return true;
    return false;
}

// ---------------------------------------------------------------- criterion 1
void criterion1() {
    auto t0 = clock_t_::now();
    bool pass = true;
    double worst = 0;
    for (int k = 2; k <= 8 && pass; ++k) {
        auto lat = build_lattice(k);
        if (group_order(lat) != k)
            pass = false;
        for (int l = 0; l < k; ++l) {
            const double r = verify_fixed_point(lat, l);
            worst = std::max(worst, r);
            if (r >= 1e-10)
                pass = false;
        }
        for (int a = 0; a < k && pass; ++a)
            for (int b = a + 1; b < k; ++b)
                if (in_gamma_lattice(lat, lat.fixed_points[a] - lat.fixed_points[b]))
                    pass = false;
    }
    const double secs = std::chrono::duration<double>(clock_t_::now() - t0).count();
    if (secs >= 1.0)
        pass = false;
    report(1, "spectral classification", pass,
           fmt("k=2..8 orders and fixed points, max residual %.2e", worst), secs);
}

// ---------------------------------------------------------------- criterion 2
void criterion2() {
    auto t0 = clock_t_::now();
    bool pass = true;
    double wprod = 0, wshift = 0, wzero = 0, wcurve = 0;
    std::mt19937_64 rng(2024);
    auto uni = [&](double lo, double hi) {
        return lo + (hi - lo) * (double(rng() >> 11) * 0x1.0p-53);
    };
    for (auto [k, l] : {std::pair{1, 0}, {2, 1}, {3, 1}, {4, 2}, {4, 0}}) {
        auto p = build_params(k, l, 1.0, 0.0, 1.7);
        std::vector<cplx> curve_samples;
        const cplx half(0.0, pi / p.beta);
        for (int i = 0; i < 100; ++i) {
            const cplx s(uni(-10 / p.beta, 10 / p.beta), uni(0, 2 * pi / p.beta));
            cplx prod = 1.0;
            for (int j = 0; j < k; ++j)
                prod *= phi_component(p, j, s);
            const cplx target = std::exp(p.beta * s) + std::exp(-p.beta * s);
            wprod = std::max(wprod, std::abs(prod - target) /
                                        std::exp(p.beta * std::abs(s.real())));
            for (int j = 0; j < k; ++j) {
                cplx lhs = phi_component(p, j, s + half);
                cplx rhs = phi_component(p, j + l, s);
                if (j % p.m == 0)
                    rhs *= std::pow(p.omega, -p.m);
                wshift = std::max(wshift, std::abs(lhs - rhs) / (1.0 + std::abs(rhs)));
            }
            curve_samples.push_back(cplx(s.real() * 0.2, s.imag()));
        }
        for (int q = 0; q < 2 * k; ++q) {
            const cplx sp(0.0, (2.0 * q - 1.0) * pi / (2.0 * p.beta));
            const int vanishing = mod_k(-l * q, k);
            for (int j = 0; j < k; ++j) {
                const double v = std::abs(phi_component(p, j, sp));
                if (j == vanishing)
                    wzero = std::max(wzero, v);
                else if (v < 0.05)
                    pass = false;
            }
        }
        wcurve = std::max(wcurve, spectral_curve_check(p, curve_samples));
    }
    if (wprod >= 1e-12 || wshift >= 1e-12 || wzero >= 1e-12 || wcurve >= 1e-10)
        pass = false;
    const double secs = std::chrono::duration<double>(clock_t_::now() - t0).count();
    if (secs >= 1.0)
        pass = false;
    report(2, "ansatz identities", pass,
           fmt("product %.1e shift %.1e zeros %.1e curve %.1e", wprod, wshift, wzero,
               wcurve),
           secs);
}

// ---------------------------------------------------------------- criterion 3
struct TodaCase {
    int k, l;
    double beta;
    TodaSolution sol;
    HitchinFields fields;
};

void criterion3(std::vector<TodaCase>& cases) {
    auto t0 = clock_t_::now();
    bool pass = true;
    std::string detail;

    {  // k=1 is exact
        auto p = build_params(1, 0, 1.0, 0.0, 2 * pi);
        auto g = make_cylinder_grid(p.beta, default_domain_length(p), 64, 64);
        auto sol = heat_flow(p, g, 1e-8, 10);
        if (!sol.converged || sol.residual_sup != 0.0)
            pass = false;
        for (double v : sol.psi)
            if (v != 0.0)
                pass = false;
    }

    for (auto [k, l, beta] :
         {std::tuple{2, 0, 2 * pi}, {2, 1, 2 * pi}, {4, 2, 2 * pi * 0.6}}) {
        auto tc0 = clock_t_::now();
        auto p = build_params(k, l, 1.0, 0.0, beta);
        const double L = default_domain_length(p);

        auto gc = make_cylinder_grid(p.beta, L, 32, 32);
        auto solc = heat_flow(p, gc, 1e-8, 2000000);
        const double res_c = hitchin_eq2_residual(assemble_hitchin(p, solc));

        auto g = make_cylinder_grid(p.beta, L, 64, 64);
        auto sol = heat_flow(p, g, 1e-8, 2000000);
        bool ok = sol.converged && sol.residual_sup < 1e-8;
        for (size_t i = 1; i < sol.ds_history.size(); ++i)
            if (sol.ds_history[i] > sol.ds_history[i - 1])
                ok = false;
        double trace = 0;
        for (int i = 0; i < g.n_r; ++i)
            for (int t = 0; t < g.n_t; ++t) {
                double sum = 0;
                for (int j = 0; j < k; ++j)
                    sum += sol.psi[sol.idx(j, i, t)];
                trace = std::max(trace, std::abs(sum));
            }
        if (trace >= 1e-10)
            ok = false;
        if (symmetry_check(p, sol) >= 10 * (g.h_r * g.h_r + g.h_t * g.h_t))
            ok = false;

        auto fields = assemble_hitchin(p, sol);
        const double res_f = hitchin_eq2_residual(fields);
        const double h_c = std::sqrt(gc.h_r * gc.h_r + gc.h_t * gc.h_t);
        const double h_f = std::sqrt(g.h_r * g.h_r + g.h_t * g.h_t);
        const double order = std::log(res_c / res_f) / std::log(h_c / h_f);
        if (order < 1.7 || order > 2.3)
            ok = false;
        const double case_secs = std::chrono::duration<double>(clock_t_::now() - tc0).count();
        if (case_secs >= 120.0)
            ok = false;
        detail += fmt("(%d,%d): res %.1e order %.2f %.0fs  ", k, l, sol.residual_sup,
                      order, case_secs);
        if (!ok)
            pass = false;
        cases.push_back({k, l, beta, std::move(sol), std::move(fields)});
    }
    report(3, "toda solver", pass, detail,
           std::chrono::duration<double>(clock_t_::now() - t0).count());
}

// ------------------------------------------------------- criteria 4, 5, 6
double norm2_at(const HitchinFields& f, const Eigen::Vector3d& y, SmallestEigs& solver,
                bool* ok = nullptr) {
    auto pair = solve_point(f, y, solver);
    if (ok)
        *ok = pair.converged;
    return phihat_norm2(higgs_field(pair, f.grid));
}

// radial log-slope of ||phihat|| over the ring 2k/beta < rho < 3k/beta,
// sampled directly at log-spaced radii and a few angles
double ring_slope(const HitchinFields& f, const ChainParams& p) {
    SmallestEigs solver;
    Eigen::MatrixXcd warm;
    bool have = false;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    const double r0 = 2.05 * p.k / p.beta, r1 = 2.95 * p.k / p.beta;
    for (int i = 0; i < 5; ++i) {
        const double rho = r0 * std::pow(r1 / r0, i / 4.0);
        for (double ang : {0.0, 0.4, 0.8}) {
            auto pair = solve_point(
                f, Eigen::Vector3d(rho * std::cos(ang), rho * std::sin(ang), 0.1),
                solver, have ? &warm : nullptr);
            warm = pair.basis;
            have = true;
            const double x = std::log(rho);
            const double y = std::sqrt(phihat_norm2(higgs_field(pair, f.grid)));
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
            ++n;
        }
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

void criteria456() {
    auto t0 = clock_t_::now();

    // criterion 4 configuration as pinned: k=2, l=1, beta=2pi, 48x48, 9x9x8
    auto p = build_params(2, 1, 1.0, 0.0, 2 * pi);
    auto g = make_cylinder_grid(p.beta, default_domain_length(p), 48, 48);
    auto sol = heat_flow(p, g, 1e-8, 2000000);
    auto fields = assemble_hitchin(p, sol);

    YLattice lat;
    lat.extent = 3.0 * p.k / p.beta;
    lat.n_xy = 9;
    lat.y3_span = p.beta;
    lat.n_y3 = 8;
    ScanOptions sopts;
    sopts.eig.tol_last = 1e-5;
    auto grid = scan(fields, lat, sopts);

    {  // criterion 4: kernel signature
        const double frac = grid.gap_pass_fraction();
        const double secs = std::chrono::duration<double>(clock_t_::now() - t0).count();
        report(4, "kernel signature", frac >= 0.95 && secs < 600.0,
               fmt("gap pass fraction %.4f on %d points", frac, lat.points()), secs);
    }

    {  // criterion 5: asymptotic log-slope for k=1 and k=2.  The window
       // 2k/beta < rho < 3k/beta is asymptotic only for well-separated
       // chains, so these fits run at small beta (long period).
        auto t5 = clock_t_::now();
        auto p1 = build_params(1, 0, 0.25, 0.0, 0.5);
        auto g1 = make_cylinder_grid(p1.beta, 9.0, 96, 64);
        auto f1 = assemble_hitchin(p1, heat_flow(p1, g1, 1e-8, 10));
        const double u1 = ring_slope(f1, p1);
        const double err1 = std::abs(u1 - p1.k / p1.beta) / (p1.k / p1.beta);

        auto p2 = build_params(2, 1, 1.0, 0.0, 0.5);
        auto g2 = make_cylinder_grid(p2.beta, 13.0, 144, 64);
        auto sol2 = heat_flow(p2, g2, 1e-8, 2000000);
        auto f2 = assemble_hitchin(p2, sol2);
        const double u2 = ring_slope(f2, p2);
        const double err2 = std::abs(u2 - p2.k / p2.beta) / (p2.k / p2.beta);

        report(5, "monopole asymptotics", err1 < 0.05 && err2 < 0.05,
               fmt("slope error k=1: %.4f, k=2: %.4f (u=k/beta)", err1, err2),
               std::chrono::duration<double>(clock_t_::now() - t5).count());
    }

    {  // criterion 6: y3-periodicity and Z_2k image symmetry
        auto t6 = clock_t_::now();
        bool pass = true;
        SmallestEigs checker(sopts.eig);
        double wper = 0;
        const int c = lat.n_xy / 2;
        for (auto [i1, i2] : {std::pair{c, c}, {c + 1, c}, {c, c - 1}, {c + 2, c + 1}}) {
            const double base = grid.norm2[lat.index(i1, i2, 0)];
            const Eigen::Vector3d y(lat.y1(i1), lat.y2(i2), p.beta);
            const double up = norm2_at(fields, y, checker);
            wper = std::max(wper, std::abs(up - base) / std::abs(base));
        }
        if (wper >= 1e-4)
            pass = false;

        // energy at the image point (rotate pi/k, shift l*beta/k), evaluated
        // directly with the same 7-point stencil
        const double dxy = lat.step_xy(), dz = lat.step_y3();
        double wsym = 0;
        int checked = 0;
        for (auto [i1, i2, i3] :
             {std::tuple{c + 1, c, 2}, {c + 1, c + 1, 5}, {c + 2, c, 0}}) {
            const double ebase = grid.energy[lat.index(i1, i2, i3)];
            if (std::isnan(ebase))
                continue;
            const cplx yh = p.omega * cplx(lat.y1(i1), lat.y2(i2));
            const Eigen::Vector3d yi(yh.real(), yh.imag(),
                                     lat.y3(i3) + p.l * p.beta / p.k);
            auto at = [&](double a, double b, double cc) {
                return norm2_at(fields, yi + Eigen::Vector3d(a, b, cc), checker);
            };
            const double n0 = at(0, 0, 0);
            const double eimg = (at(dxy, 0, 0) + at(-dxy, 0, 0) - 2 * n0) / (dxy * dxy) +
                                (at(0, dxy, 0) + at(0, -dxy, 0) - 2 * n0) / (dxy * dxy) +
                                (at(0, 0, dz) + at(0, 0, -dz) - 2 * n0) / (dz * dz);
            // grid-interpolation error estimate from local second differences
            auto d2 = [&](int a, int b, int cc, double step) {
                const int j0 = lat.index(i1, i2, i3);
                const int jp = lat.index(i1 + a, i2 + b, (i3 + cc + lat.n_y3) % lat.n_y3);
                const int jm = lat.index(i1 - a, i2 - b, (i3 - cc + lat.n_y3) % lat.n_y3);
                const double vp = grid.energy[jp], vm = grid.energy[jm];
                if (std::isnan(vp) || std::isnan(vm))
                    return std::abs(grid.energy[j0]);
                return std::abs(vp - 2 * grid.energy[j0] + vm);
            };
            const double est =
                0.125 * (d2(1, 0, 0, dxy) + d2(0, 1, 0, dxy) + d2(0, 0, 1, dz)) +
                1e-8 * std::abs(ebase);
            wsym = std::max(wsym, std::abs(eimg - ebase) / (3 * est));
            ++checked;
        }
        if (checked == 0 || wsym >= 1.0)
            pass = false;
        report(6, "periodicity and symmetry", pass,
               fmt("periodicity %.2e rel, image energy at %.2f of allowance (%d pts)",
                   wper, wsym, checked),
               std::chrono::duration<double>(clock_t_::now() - t6).count());
    }
}

// ---------------------------------------------------------------- criterion 7
void criterion7() {
    auto t0 = clock_t_::now();
    std::string detail;
    bool pass = true;
    struct Case {
        int k, l, expected, n_r, n_t;
        double beta;
    };
    for (const Case& c : {Case{4, 2, 2, 32, 16, 2 * pi * 0.6},
                          Case{4, 0, 1, 48, 16, 2 * pi * 0.28}}) {
        auto p = build_params(c.k, c.l, 1.0, 0.0, c.beta);
        auto g = make_cylinder_grid(p.beta, default_domain_length(p), c.n_r, c.n_t);
        auto sol = heat_flow(p, g, 1e-8, 2000000);
        if (!sol.converged) {
            pass = false;
            continue;
        }
        auto fields = assemble_hitchin(p, sol);
        YLattice lat;
        lat.extent = 2.0 * p.k / p.beta;
        lat.n_xy = 11;
        lat.y3_span = p.beta;
        lat.n_y3 = 12;
        ScanOptions sopts;
        sopts.eig.tol_last = 1e-4;
        auto grid = scan(fields, lat, sopts);
        auto summary = summarize_energy(grid);
        detail += fmt("Z_%d^(%d) at beta=%.3f: %d maxima/period (want %d)  ", 2 * c.k,
                      2 * c.l, c.beta, summary.maxima_per_period, c.expected);
        if (summary.maxima_per_period != c.expected)
            pass = false;
    }
    report(7, "qualitative structure", pass, detail,
           std::chrono::duration<double>(clock_t_::now() - t0).count());
}

// ---------------------------------------------------------------- criterion 8
void criterion8() {
    auto t0 = clock_t_::now();
    auto p = build_params(2, 1, 1.0, 0.0, 2 * pi);
    auto g = make_cylinder_grid(p.beta, default_domain_length(p), 16, 16);
    auto sol = heat_flow(p, g, 1e-8, 2000000);
    auto fields = assemble_hitchin(p, sol);

    bool pass = sol.converged;
    double weig = 0, wmix = 0;
    std::mt19937_64 rng(88);
    auto uni = [&](double lo, double hi) {
        return lo + (hi - lo) * (double(rng() >> 11) * 0x1.0p-53);
    };
    EigenOptions tight;  // oracle comparison needs the third pair sharp too
    tight.tol_last = 1e-9;
    tight.max_iters = 200;
    for (int trial = 0; trial < 5; ++trial) {
        const Eigen::Vector3d y(uni(-0.8, 0.8), uni(-0.8, 0.8), uni(0, p.beta));
        auto op = assemble_operator(fields, y);
        SmallestEigs solver(tight);
        auto pair = zero_modes(op, solver);
        if (!pair.converged)
            pass = false;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> dense{Eigen::MatrixXcd(op.matrix)};
        for (int i = 0; i < 3; ++i) {
            const double lam = i == 0   ? pair.lambda1
                               : i == 1 ? pair.lambda2
                                        : pair.lambda3;
            weig = std::max(weig, std::abs(lam - dense.eigenvalues()(i)) /
                                      std::abs(dense.eigenvalues()(i)));
        }

        // unitary remixing invariance of ||phihat||^2
        const double a = uni(0, 2 * pi), b = uni(0, 2 * pi), cph = uni(0, 2 * pi);
        Eigen::Matrix2cd w;
        w << std::cos(a) * std::polar(1.0, b), std::sin(a) * std::polar(1.0, cph),
            -std::sin(a) * std::polar(1.0, -cph), std::cos(a) * std::polar(1.0, -b);
        ZeroModePair mixed = pair;
        mixed.z1 = pair.z1 * w(0, 0) + pair.z2 * w(1, 0);
        mixed.z2 = pair.z1 * w(0, 1) + pair.z2 * w(1, 1);
        const double n0 = phihat_norm2(higgs_field(pair, fields.grid));
        const double n1 = phihat_norm2(higgs_field(mixed, fields.grid));
        wmix = std::max(wmix, std::abs(n1 - n0) / n0);
    }
    if (weig >= 1e-8 || wmix >= 1e-10)
        pass = false;
    report(8, "oracle equivalence", pass,
           fmt("eigenvalue rel err %.2e, remix invariance %.2e", weig, wmix),
           std::chrono::duration<double>(clock_t_::now() - t0).count());
}

}  // namespace

int main() {
    criterion1();
    criterion2();
    std::vector<TodaCase> cases;
    criterion3(cases);
    criteria456();
    criterion7();
    criterion8();
    std::printf("%s: %d criterion(s) failed\n", g_failures ? "FAILURE" : "SUCCESS",
                g_failures);
    return g_failures;
}
