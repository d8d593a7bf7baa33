#include "chains/nahm.hpp"

#include <atomic>
#include <cmath>
#include <thread>

namespace chains {

namespace {

std::vector<double> node_weights(const CylinderGrid& g) {
    std::vector<double> w(g.nodes());
    for (int i = 0; i < g.n_r; ++i) {
        const double wi = (i == 0 || i == g.n_r - 1) ? 0.5 : 1.0;
        for (int t = 0; t < g.n_t; ++t)
            w[g.node(i, t)] = wi * g.h_r * g.h_t;
    }
    return w;
}

}  // namespace

DiracOperator assemble_operator(const HitchinFields& f, const Eigen::Vector3d& y) {
    if (!y.allFinite())
        throw ChainError(ErrorKind::invalid_parameter, "y must be finite");
    const ChainParams& p = f.params;
    const CylinderGrid& g = f.grid;
    const int k = p.k, nr = g.n_r, nt = g.n_t;
    const int bs = 2 * k;  // per-node block
    const int n = bs * nr * nt;
    const int wrap = mod_k(2 * p.l, k);
    const cplx yh(y(0), y(1));
    const double y3 = y(2);
    const double ir2 = 1.0 / (g.h_r * g.h_r), it2 = 1.0 / (g.h_t * g.h_t);

    auto uphase = [&](int j) { return f.twist_U((j + wrap) % k, j); };

    std::vector<Eigen::Triplet<cplx>> trip;
    trip.reserve(size_t(n) * (2 * k + 4));

    Eigen::MatrixXcd phi(k, k), xblk(k, k), block(bs, bs);
    for (int i = 0; i < nr; ++i) {
        for (int t = 0; t < nt; ++t) {
            const int base = (i * nt + t) * bs;
            phi.setZero();
            xblk.setZero();
            for (int j = 0; j < k; ++j) {
                const int jm = mod_k(j - 1, k);
                const cplx dj = f.dphi[f.idx(j, i, t)];
                phi(jm, j) = dj;

                // X = -2 (d phi/ds + [A_s, phi]), same shifted-diagonal pattern
                cplx d1;
                if (i == 0)
                    d1 = (-3.0 * f.dphi[f.idx(j, 0, t)] + 4.0 * f.dphi[f.idx(j, 1, t)] -
                          f.dphi[f.idx(j, 2, t)]) /
                         (2 * g.h_r);
                else if (i == nr - 1)
                    d1 = (3.0 * f.dphi[f.idx(j, nr - 1, t)] -
                          4.0 * f.dphi[f.idx(j, nr - 2, t)] + f.dphi[f.idx(j, nr - 3, t)]) /
                         (2 * g.h_r);
                else
                    d1 = (f.dphi[f.idx(j, i + 1, t)] - f.dphi[f.idx(j, i - 1, t)]) /
                         (2 * g.h_r);
                const cplx d2 =
                    (f.sample_dphi(j, i, t + 1) - f.sample_dphi(j, i, t - 1)) / (2 * g.h_t);
                const cplx ds = 0.5 * (d1 - cplx(0, 1) * d2);
                const cplx as_jm = 0.5 * cplx(f.a2[f.idx(jm, i, t)], f.a1[f.idx(jm, i, t)]);
                const cplx as_j = 0.5 * cplx(f.a2[f.idx(j, i, t)], f.a1[f.idx(j, i, t)]);
                xblk(jm, j) = -2.0 * (ds + (as_jm - as_j) * dj);
            }

            const Eigen::MatrixXcd pp = phi * phi.adjoint();
            const Eigen::MatrixXcd qq = phi.adjoint() * phi;
            const Eigen::MatrixXcd comm = pp - qq;
            Eigen::MatrixXcd s = pp + qq - 2.0 * std::conj(yh) * phi -
                                 2.0 * yh * phi.adjoint();
            s.diagonal().array() += 2.0 * std::norm(yh);

            block.topLeftCorner(k, k) = comm + 0.5 * s;
            block.bottomRightCorner(k, k) = -comm + 0.5 * s;
            block.topLeftCorner(k, k).diagonal().array() += ir2 * 2 + it2 * 2;
            block.bottomRightCorner(k, k).diagonal().array() += ir2 * 2 + it2 * 2;
            block.topRightCorner(k, k) = xblk;
            block.bottomLeftCorner(k, k) = xblk.adjoint();
            block = 0.5 * (block + block.adjoint()).eval();

            // full structural pattern so the sparsity is y-independent
            for (int r = 0; r < bs; ++r)
                for (int c = 0; c < bs; ++c)
                    trip.emplace_back(base + r, base + c, block(r, c));

            // x1 hop (Dirichlet ends: simply absent)
            if (i + 1 < nr) {
                const int nbase = ((i + 1) * nt + t) * bs;
                for (int j = 0; j < k; ++j) {
                    const double mid =
                        0.5 * (f.a1[f.idx(j, i, t)] + f.a1[f.idx(j, i + 1, t)]);
                    const cplx v = -std::polar(ir2, g.h_r * mid);
                    for (int sig = 0; sig < 2; ++sig) {
                        trip.emplace_back(base + sig * k + j, nbase + sig * k + j, v);
                        trip.emplace_back(nbase + sig * k + j, base + sig * k + j,
                                          std::conj(v));
                    }
                }
            }

            // x2 hop; crossing the seam applies diag(U^{-1}, U^{-1})
            if (t + 1 < nt) {
                const int nbase = (i * nt + t + 1) * bs;
                for (int j = 0; j < k; ++j) {
                    const double mid =
                        0.5 * (f.a2[f.idx(j, i, t)] + f.a2[f.idx(j, i, t + 1)]);
                    const cplx v = -std::polar(it2, g.h_t * (mid + y3));
                    for (int sig = 0; sig < 2; ++sig) {
                        trip.emplace_back(base + sig * k + j, nbase + sig * k + j, v);
                        trip.emplace_back(nbase + sig * k + j, base + sig * k + j,
                                          std::conj(v));
                    }
                }
            } else {
                const int nbase = (i * nt + 0) * bs;
                for (int j = 0; j < k; ++j) {
                    const int c = (j + wrap) % k;
                    const double mid =
                        0.5 * (f.a2[f.idx(j, i, nt - 1)] + f.a2[f.idx(c, i, 0)]);
                    const cplx v = -std::polar(it2, g.h_t * (mid + y3)) * std::conj(uphase(j));
                    for (int sig = 0; sig < 2; ++sig) {
                        trip.emplace_back(base + sig * k + j, nbase + sig * k + c, v);
                        trip.emplace_back(nbase + sig * k + c, base + sig * k + j,
                                          std::conj(v));
                    }
                }
            }
        }
    }

    DiracOperator op;
    op.y = y;
    op.k = k;
    op.size = n;
    op.matrix.resize(n, n);
    op.matrix.setFromTriplets(trip.begin(), trip.end());
    op.matrix.makeCompressed();
    auto w = node_weights(g);
    op.quadrature = Eigen::Map<Eigen::VectorXd>(w.data(), w.size());
    double sc = 0;
    for (int d = 0; d < n; ++d)
        sc = std::max(sc, std::abs(op.matrix.coeff(d, d)));
    op.scale = sc;
    return op;
}

ZeroModePair zero_modes(const DiracOperator& op, SmallestEigs& solver,
                        const Eigen::MatrixXcd* warm) {
    EigenResult r = solver.solve(op.matrix, op.scale, warm);
    ZeroModePair pair;
    pair.y = op.y;
    pair.converged = r.converged;
    pair.lambda1 = r.values(0);
    pair.lambda2 = r.values(1);
    pair.lambda3 = r.values(2);
    pair.basis = r.vectors;
    pair.z1 = r.vectors.col(0);
    pair.z2 = r.vectors.col(1);

    const int bs = 2 * op.k;
    auto wdot = [&](const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
        cplx acc = 0;
        for (int d = 0; d < op.size; ++d)
            acc += op.quadrature(d / bs) * std::conj(a(d)) * b(d);
        return acc;
    };
    pair.z1 /= std::sqrt(wdot(pair.z1, pair.z1).real());
    pair.z2 -= wdot(pair.z1, pair.z2) * pair.z1;
    pair.z2 /= std::sqrt(wdot(pair.z2, pair.z2).real());
    pair.gram(0, 0) = wdot(pair.z1, pair.z1);
    pair.gram(0, 1) = wdot(pair.z1, pair.z2);
    pair.gram(1, 0) = std::conj(pair.gram(0, 1));
    pair.gram(1, 1) = wdot(pair.z2, pair.z2);
    pair.gap_ok = pair.lambda3 > 0 &&
                  std::max(std::abs(pair.lambda1), std::abs(pair.lambda2)) <
                      0.01 * pair.lambda3;
    return pair;
}

Eigen::Matrix2cd higgs_field(const ZeroModePair& pair, const CylinderGrid& grid) {
    const int n = static_cast<int>(pair.z1.size());
    const int bs = n / grid.nodes();
    auto w = node_weights(grid);
    double g11 = 0, g22 = 0;
    cplx g12 = 0;
    for (int i = 0; i < grid.n_r; ++i)
        for (int t = 0; t < grid.n_t; ++t) {
            const int node = grid.node(i, t);
            const double c = w[node] * grid.x1(i);
            for (int d = node * bs; d < (node + 1) * bs; ++d) {
                g11 += c * std::norm(pair.z1(d));
                g22 += c * std::norm(pair.z2(d));
                g12 += c * std::conj(pair.z1(d)) * pair.z2(d);
            }
        }
    Eigen::Matrix2cd ph;
    const cplx iu(0, 1);
    ph(0, 0) = iu * g11;
    ph(0, 1) = iu * g12;
    ph(1, 0) = iu * std::conj(g12);
    ph(1, 1) = iu * g22;
    return ph;
}

ZeroModePair solve_point(const HitchinFields& fields, const Eigen::Vector3d& y,
                         SmallestEigs& solver, const Eigen::MatrixXcd* warm) {
    DiracOperator op = assemble_operator(fields, y);
    return zero_modes(op, solver, warm);
}

MonopoleGrid scan(const HitchinFields& fields, const YLattice& lat,
                  const ScanOptions& opts) {
    const int npts = lat.points();
    if (lat.n_xy < 1 || lat.n_y3 < 1)
        throw ChainError(ErrorKind::invalid_parameter, "empty y-lattice");

    MonopoleGrid out;
    out.lattice = lat;
    out.norm2.assign(npts, 0.0);
    out.energy.assign(npts, std::nan(""));
    out.quality.assign(npts, point_ok);
    out.lambda1.assign(npts, 0.0);
    out.lambda2.assign(npts, 0.0);
    out.lambda3.assign(npts, 0.0);
    out.tr_im.assign(npts, 0.0);
    std::vector<std::uint8_t> failed(npts, 0);

    const int ncols = lat.n_xy * lat.n_xy;
    std::atomic<int> next{0};
    int nthreads = opts.threads > 0
                       ? opts.threads
                       : std::max(1u, std::thread::hardware_concurrency());
    nthreads = std::min(nthreads, ncols);

    auto worker = [&]() {
        SmallestEigs solver(opts.eig);
        Eigen::MatrixXcd warm;
        for (;;) {
            const int col = next.fetch_add(1);
            if (col >= ncols)
                return;
            const int i1 = col / lat.n_xy, i2 = col % lat.n_xy;
            bool have_warm = false;
            for (int i3 = 0; i3 < lat.n_y3; ++i3) {
                const Eigen::Vector3d y(lat.y1(i1), lat.y2(i2), lat.y3(i3));
                ZeroModePair pair =
                    solve_point(fields, y, solver, have_warm ? &warm : nullptr);
                const int id = lat.index(i1, i2, i3);
                out.lambda1[id] = pair.lambda1;
                out.lambda2[id] = pair.lambda2;
                out.lambda3[id] = pair.lambda3;
                if (!pair.converged) {
                    failed[id] = 1;
                    continue;
                }
                const Eigen::Matrix2cd ph = higgs_field(pair, fields.grid);
                out.norm2[id] = phihat_norm2(ph);
                out.tr_im[id] = ph.trace().imag();
                if (!pair.gap_ok)
                    out.quality[id] = point_gap_degraded;
                warm = pair.basis;
                have_warm = true;
            }
        }
    };
    if (nthreads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < nthreads; ++w)
            pool.emplace_back(worker);
        for (auto& th : pool)
            th.join();
    }

    // replace failed points by neighbour averages and mark them
    auto wrap3 = [&](int i3) {
        if (lat.y3_periodic)
            return (i3 % lat.n_y3 + lat.n_y3) % lat.n_y3;
        return i3;
    };
    for (int i1 = 0; i1 < lat.n_xy; ++i1)
        for (int i2 = 0; i2 < lat.n_xy; ++i2)
            for (int i3 = 0; i3 < lat.n_y3; ++i3) {
                const int id = lat.index(i1, i2, i3);
                if (!failed[id])
                    continue;
                ++out.flagged;
                out.quality[id] = point_interpolated;
                double acc = 0;
                int cnt = 0;
                auto add = [&](int a, int b, int c) {
                    if (a < 0 || a >= lat.n_xy || b < 0 || b >= lat.n_xy)
                        return;
                    c = wrap3(c);
                    if (c < 0 || c >= lat.n_y3)
                        return;
                    const int nid = lat.index(a, b, c);
                    if (!failed[nid]) {
                        acc += out.norm2[nid];
                        ++cnt;
                    }
                };
                add(i1 - 1, i2, i3);
                add(i1 + 1, i2, i3);
                add(i1, i2 - 1, i3);
                add(i1, i2 + 1, i3);
                add(i1, i2, i3 - 1);
                add(i1, i2, i3 + 1);
                if (cnt > 0)
                    out.norm2[id] = acc / cnt;
            }
    if (out.flagged > 0.05 * npts)
        throw ChainError(ErrorKind::scan_quality,
                         "more than 5% of scan points failed to converge");
    for (int id = 0; id < npts; ++id)
        if (!failed[id] && out.quality[id] == point_gap_degraded)
            ++out.gap_fail;

    // Ward's formula on interior points (y3 wraps when the span is a period);
    // failed points stay excluded from the energy grid
    const double dxy2 = lat.step_xy() * lat.step_xy();
    const double dz2 = lat.step_y3() * lat.step_y3();
    for (int i1 = 1; i1 + 1 < lat.n_xy; ++i1)
        for (int i2 = 1; i2 + 1 < lat.n_xy; ++i2)
            for (int i3 = 0; i3 < lat.n_y3; ++i3) {
                if (!lat.y3_periodic && (i3 == 0 || i3 + 1 == lat.n_y3))
                    continue;
                if (failed[lat.index(i1, i2, i3)])
                    continue;
                const double c = out.norm2[lat.index(i1, i2, i3)];
                const double lxy = (out.norm2[lat.index(i1 - 1, i2, i3)] - 2 * c +
                                    out.norm2[lat.index(i1 + 1, i2, i3)]) /
                                       dxy2 +
                                   (out.norm2[lat.index(i1, i2 - 1, i3)] - 2 * c +
                                    out.norm2[lat.index(i1, i2 + 1, i3)]) /
                                       dxy2;
                const double lz = (out.norm2[lat.index(i1, i2, wrap3(i3 - 1))] - 2 * c +
                                   out.norm2[lat.index(i1, i2, wrap3(i3 + 1))]) /
                                  dz2;
                out.energy[lat.index(i1, i2, i3)] = lxy + lz;
            }
    return out;
}

}  // namespace chains
