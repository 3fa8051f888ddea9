#include "qshadow/oracle.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <random>

#include <Eigen/QR>

#include "qshadow/errors.hpp"

namespace qshadow {

std::vector<Vec> bounded_orbit_closed_form(const AffineSequenceSystem& sys, const Splitting& sp) {
    const int N = sys.length();
    if (N == 0 || static_cast<int>(sys.r.size()) != N) {
        throw DimensionError("closed form: need one residual per matrix");
    }
    std::vector<Mat> U;
    std::vector<Mat> S;
    for (const auto& L : sys.L) {
        const BlockJacobian b = block_decompose(L, sp, sp);
        const double scale = std::max(1.0, L.norm());
        if (b.max_off_diagonal() > 1e-12 * scale) {
            throw DomainError("closed form: matrix is not block diagonal in the splitting");
        }
        if (!(min_norm(b.A) > 1.0) || !(op_norm(b.D) < 1.0)) {
            throw DomainError("closed form: blocks are not hyperbolic");
        }
        U.push_back(b.A);
        S.push_back(b.D);
    }
    const auto n1 = static_cast<std::size_t>(N + 1);
    std::vector<Vec> a(n1, Vec::Zero(sp.dim_u()));
    std::vector<Vec> b(n1, Vec::Zero(sp.dim_s()));
    // b_j = sum_{k<j} S_(j-1)..S_(k+1) r^s_k, a_j = -sum_{k>=j} U_j^-1..U_k^-1 r^u_k
    for (std::size_t j = 0; j < static_cast<std::size_t>(N); ++j) {
        b[j + 1] = S[j] * b[j] + sp.stable_coords(sys.r[j]);
    }
    for (std::size_t j = static_cast<std::size_t>(N); j-- > 0;) {
        a[j] = U[j].partialPivLu().solve(a[j + 1] - sp.unstable_coords(sys.r[j]));
    }
    std::vector<Vec> e(n1);
    for (std::size_t j = 0; j < n1; ++j) {
        e[j] = sp.compose(a[j], b[j]);
    }
    return e;
}

double affine_residual(const AffineSequenceSystem& sys, const std::vector<Vec>& e) {
    double r = 0.0;
    for (std::size_t j = 0; j < sys.L.size(); ++j) {
        r = std::max(r, (e[j + 1] - sys.L[j] * e[j] - sys.r[j]).norm());
    }
    return r;
}

namespace {

Mat random_orthogonal(int n, std::mt19937_64& rng) {
    std::normal_distribution<double> nd;
    Mat g(n, n);
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < n; ++k) {
            g(i, k) = nd(rng);
        }
    }
    return orthonormalize(g);
}

Mat random_with_singular_values(int n, double lo, double hi, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> ud(lo, hi);
    Vec s(n);
    for (int i = 0; i < n; ++i) {
        s[i] = ud(rng);
    }
    return random_orthogonal(n, rng) * s.asDiagonal() * random_orthogonal(n, rng).transpose();
}

} // namespace

AffineSequenceSystem random_affine_system(const Splitting& sp, int length, double expand, double contract,
                                          double amp, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    std::uniform_real_distribution<double> ud(0.0, 1.0);
    const int n = sp.dim();
    AffineSequenceSystem sys;
    for (int j = 0; j < length; ++j) {
        Mat blocks = Mat::Zero(n, n);
        if (sp.dim_u() > 0) {
            blocks.topLeftCorner(sp.dim_u(), sp.dim_u()) =
                random_with_singular_values(sp.dim_u(), expand, 1.8 * expand, rng);
        }
        if (sp.dim_s() > 0) {
            blocks.bottomRightCorner(sp.dim_s(), sp.dim_s()) =
                random_with_singular_values(sp.dim_s(), 0.3 * contract, contract, rng);
        }
        sys.L.push_back(sp.frame() * blocks * sp.frame_inverse());
        Vec r(n);
        for (int i = 0; i < n; ++i) {
            r[i] = nd(rng);
        }
        sys.r.push_back(r.normalized() * amp * ud(rng));
    }
    return sys;
}

GridShadow brute_force_shadow(const SmoothMap& g, const SegmentedPseudoOrbit& po, double radius, int grid_res) {
    const int N = po.total_length();
    if (N > 12 || grid_res > 61 || grid_res < 2 || !(radius > 0.0)) {
        throw DomainError("brute_force_shadow: need N <= 12, 2 <= grid_res <= 61 and radius > 0");
    }
    const Phase& ph = po.phase();
    const int n = ph.dim();
    const double step = 2.0 * radius / (grid_res - 1);
    GridShadow best{po.point(0), std::numeric_limits<double>::infinity(), step * std::sqrt(static_cast<double>(n))};
    std::vector<int> idx(static_cast<std::size_t>(n), 0);
    const Vec y0 = po.point(0).coords();
    while (true) {
        Vec off(n);
        for (int i = 0; i < n; ++i) {
            off[i] = -radius + step * idx[static_cast<std::size_t>(i)];
        }
        const Point x = ph.exp_at(po.point(0), off);
        Point p = x;
        double worst = 0.0;
        for (int j = 0; j <= N && worst < best.distance; ++j) {
            worst = std::max(worst, ph.distance(p, po.point(j)));
            if (j < N) {
                p = g.apply(p);
            }
        }
        if (worst < best.distance) {
            best.x = x;
            best.distance = worst;
        }
        int i = 0;
        while (i < n && ++idx[static_cast<std::size_t>(i)] == grid_res) {
            idx[static_cast<std::size_t>(i)] = 0;
            ++i;
        }
        if (i == n) {
            break;
        }
    }
    return best;
}

namespace {

using I64 = std::int64_t;
using IMat = std::array<std::array<I64, 2>, 2>;

IMat imul(const IMat& a, const IMat& b) {
    IMat c{};
    for (int i = 0; i < 2; ++i) {
        for (int k = 0; k < 2; ++k) {
            c[i][k] = a[i][0] * b[0][k] + a[i][1] * b[1][k];
        }
    }
    return c;
}

IMat cat_power(int p) {
    const IMat A{{{2, 1}, {1, 1}}};
    IMat r{{{1, 0}, {0, 1}}};
    for (int i = 0; i < p; ++i) {
        r = imul(r, A);
    }
    return r;
}

IMat cat_power_minus_identity(int p) {
    if (p < 1 || p > 12) {
        throw DomainError("cat map periodic points: period must lie in [1, 12]");
    }
    IMat m = cat_power(p);
    m[0][0] -= 1;
    m[1][1] -= 1;
    return m;
}

I64 pmod(I64 a, I64 m) {
    const I64 r = a % m;
    return r < 0 ? r + m : r;
}

} // namespace

std::int64_t cat_map_fixed_point_count(int period) {
    const IMat m = cat_power_minus_identity(period);
    return std::llabs(m[0][0] * m[1][1] - m[0][1] * m[1][0]);
}

bool is_cat_periodic_exact(std::int64_t num_x, std::int64_t num_y, std::int64_t den, int period) {
    const IMat m = cat_power_minus_identity(period);
    const __int128 ex = static_cast<__int128>(m[0][0]) * num_x + static_cast<__int128>(m[0][1]) * num_y;
    const __int128 ey = static_cast<__int128>(m[1][0]) * num_x + static_cast<__int128>(m[1][1]) * num_y;
    return ex % den == 0 && ey % den == 0;
}

std::vector<Point> cat_map_periodic_points(int period) {
    IMat m = cat_power_minus_identity(period);
    IMat V{{{1, 0}, {0, 1}}};
    auto swap_rows = [&](int a, int b) { std::swap(m[a], m[b]); };
    auto swap_cols = [&](int a, int b) {
        for (int i = 0; i < 2; ++i) {
            std::swap(m[i][a], m[i][b]);
            std::swap(V[i][a], V[i][b]);
        }
    };
    auto add_row = [&](int dst, int src, I64 k) {
        for (int c = 0; c < 2; ++c) {
            m[dst][c] += k * m[src][c];
        }
    };
    auto add_col = [&](int dst, int src, I64 k) {
        for (int i = 0; i < 2; ++i) {
            m[i][dst] += k * m[i][src];
            V[i][dst] += k * V[i][src];
        }
    };
    // Smith normal form: row operations are unimodular and drop out of the
    // solution set, column operations are recorded in V.
    while (true) {
        int pr = -1;
        int pc = -1;
        for (int i = 0; i < 2; ++i) {
            for (int k = 0; k < 2; ++k) {
                if (m[i][k] != 0 && (pr < 0 || std::llabs(m[i][k]) < std::llabs(m[pr][pc]))) {
                    pr = i;
                    pc = k;
                }
            }
        }
        if (pr < 0) {
            throw DomainError("cat map periodic points: A^p - I vanishes");
        }
        if (pr != 0) {
            swap_rows(0, pr);
        }
        if (pc != 0) {
            swap_cols(0, pc);
        }
        add_row(1, 0, -(m[1][0] / m[0][0]));
        add_col(1, 0, -(m[0][1] / m[0][0]));
        if (m[1][0] != 0 || m[0][1] != 0) {
            continue;
        }
        if (m[1][1] % m[0][0] != 0) {
            add_row(0, 1, 1);
            continue;
        }
        break;
    }
    const I64 d1 = std::llabs(m[0][0]);
    const I64 d2 = std::llabs(m[1][1]);
    if (d2 == 0) {
        throw DomainError("cat map periodic points: infinitely many solutions");
    }
    const I64 den = d1 * d2;
    std::vector<std::array<I64, 2>> nums;
    for (I64 a = 0; a < d1; ++a) {
        for (I64 b = 0; b < d2; ++b) {
            const I64 nx = pmod(V[0][0] * a * d2 + V[0][1] * b * d1, den);
            const I64 ny = pmod(V[1][0] * a * d2 + V[1][1] * b * d1, den);
            nums.push_back({nx, ny});
        }
    }
    std::sort(nums.begin(), nums.end());
    nums.erase(std::unique(nums.begin(), nums.end()), nums.end());
    const Phase ph = Phase::torus(2);
    std::vector<Point> out;
    out.reserve(nums.size());
    for (const auto& q : nums) {
        if (!is_cat_periodic_exact(q[0], q[1], den, period)) {
            throw DomainError("cat map periodic points: exact verification failed");
        }
        out.push_back(ph.point({static_cast<double>(q[0]) / static_cast<double>(den),
                                static_cast<double>(q[1]) / static_cast<double>(den)}));
    }
    return out;
}

BalanceIntervals balance_intervals(const SequencePair& pair, double lambda) {
    if (pair.a.size() != pair.b.size() || pair.a.empty()) {
        throw DimensionError("balance_intervals: a and b must be nonempty and of equal length");
    }
    const int n = static_cast<int>(pair.size());
    const double inf = std::numeric_limits<double>::infinity();
    const double ll = std::log(lambda);
    // node k is S_k; node 0 doubles as the zero reference. Edge u -> v with
    // weight w encodes S_v - S_u <= w.
    std::vector<std::vector<double>> d(static_cast<std::size_t>(n + 1), std::vector<double>(static_cast<std::size_t>(n + 1), inf));
    auto edge = [&](int u, int v, double w) {
        auto& slot = d[static_cast<std::size_t>(u)][static_cast<std::size_t>(v)];
        slot = std::min(slot, w);
    };
    for (int k = 0; k <= n; ++k) {
        edge(k, k, 0.0);
    }
    for (int k = 1; k <= n; ++k) {
        const auto i = static_cast<std::size_t>(k - 1);
        edge(k - 1, k, std::log(pair.b[i]) + ll);
        edge(k, k - 1, -(std::log(pair.a[i]) - ll));
        if (k < n) {
            edge(0, k, 0.0);
        }
    }
    edge(0, n, 0.0);
    edge(n, 0, 0.0);
    for (int m = 0; m <= n; ++m) {
        for (int u = 0; u <= n; ++u) {
            for (int v = 0; v <= n; ++v) {
                const double via = d[static_cast<std::size_t>(u)][static_cast<std::size_t>(m)] +
                                   d[static_cast<std::size_t>(m)][static_cast<std::size_t>(v)];
                auto& slot = d[static_cast<std::size_t>(u)][static_cast<std::size_t>(v)];
                slot = std::min(slot, via);
            }
        }
    }
    BalanceIntervals out;
    out.feasible = true;
    for (int k = 0; k <= n; ++k) {
        if (d[static_cast<std::size_t>(k)][static_cast<std::size_t>(k)] < -1e-12) {
            out.feasible = false;
        }
    }
    out.lower.resize(static_cast<std::size_t>(n + 1));
    out.upper.resize(static_cast<std::size_t>(n + 1));
    for (int k = 0; k <= n; ++k) {
        out.upper[static_cast<std::size_t>(k)] = d[0][static_cast<std::size_t>(k)];
        out.lower[static_cast<std::size_t>(k)] = -d[static_cast<std::size_t>(k)][0];
    }
    return out;
}

} // namespace qshadow
