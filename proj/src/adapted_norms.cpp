#include "qshadow/adapted_norms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "qshadow/errors.hpp"

namespace qshadow {

namespace {

void check_pair_shape(const SequencePair& pair) {
    if (pair.a.size() != pair.b.size() || pair.a.empty()) {
        throw DimensionError("sequence pair: a and b must be nonempty and of equal length");
    }
    for (std::size_t i = 0; i < pair.a.size(); ++i) {
        if (!(pair.a[i] > 0.0) || !(pair.b[i] > 0.0)) {
            throw DomainError("sequence pair entries must be positive");
        }
    }
}

} // namespace

PairCheck check_pair(const SequencePair& pair, double lambda, PairMode mode) {
    check_pair_shape(pair);
    if (!(lambda > 0.0 && lambda < 1.0)) {
        throw DomainError("lambda must lie in (0,1)");
    }
    const auto n = static_cast<int>(pair.size());
    const double ll = std::log(lambda);
    double worst = std::numeric_limits<double>::infinity();
    if (mode == PairMode::hyperbolic) {
        for (int k = 0; k < n; ++k) {
            worst = std::min(worst, lambda - pair.a[static_cast<std::size_t>(k)]);
            worst = std::min(worst, pair.b[static_cast<std::size_t>(k)] - 1.0 / lambda);
        }
    } else {
        double acc = 0.0;
        for (int k = 1; k <= n; ++k) {
            acc += std::log(pair.a[static_cast<std::size_t>(k - 1)]);
            worst = std::min(worst, k * ll - acc);
        }
        acc = 0.0;
        for (int k = n; k >= 1; --k) {
            acc += std::log(pair.b[static_cast<std::size_t>(k - 1)]);
            worst = std::min(worst, acc - (k - n - 1) * ll);
        }
        for (int k = 0; k < n; ++k) {
            const auto i = static_cast<std::size_t>(k);
            worst = std::min(worst, lambda * lambda - pair.a[i] / pair.b[i]);
        }
    }
    return {worst >= 0.0, worst};
}

bool verify_balance(const BalanceSequence& seq, double tol) {
    if (seq.c.empty()) {
        return false;
    }
    double acc = 0.0;
    for (std::size_t k = 0; k < seq.c.size(); ++k) {
        if (!(seq.c[k] > 0.0)) {
            return false;
        }
        acc += std::log(seq.c[k]);
        if (k + 1 < seq.c.size() && acc > tol) {
            return false;
        }
    }
    return std::abs(acc) <= tol;
}

bool verify_well_adapted(const SequencePair& pair, const BalanceSequence& seq, double lambda, double tol) {
    if (seq.c.size() != pair.size()) {
        return false;
    }
    const double ll = std::log(lambda);
    for (std::size_t i = 0; i < pair.size(); ++i) {
        const double lc = std::log(seq.c[i]);
        if (std::log(pair.a[i]) - lc > ll + tol || std::log(pair.b[i]) - lc < -ll - tol) {
            return false;
        }
    }
    return verify_balance(seq, tol);
}

BalanceSequence well_adapted(const SequencePair& pair, double lambda) {
    check_pair_shape(pair);
    if (!(lambda > 0.0 && lambda < 1.0)) {
        throw DomainError("lambda must lie in (0,1)");
    }
    const std::size_t n = pair.size();
    const double ll = std::log(lambda);
    std::vector<double> alpha(n);
    std::vector<double> beta(n);
    for (std::size_t i = 0; i < n; ++i) {
        alpha[i] = std::log(pair.a[i]) - ll;
        beta[i] = std::log(pair.b[i]) + ll;
        if (alpha[i] > beta[i]) {
            throw InfeasibleError("well_adapted: ratio condition a/b <= lambda^2 fails at i = " +
                                  std::to_string(i + 1));
        }
    }
    // forward pass: reachable partial sums S_k, S_0 = 0, S_k <= 0 for k < n
    std::vector<double> lo(n + 1, 0.0);
    std::vector<double> hi(n + 1, 0.0);
    for (std::size_t k = 1; k <= n; ++k) {
        lo[k] = lo[k - 1] + alpha[k - 1];
        hi[k] = hi[k - 1] + beta[k - 1];
        if (k < n) {
            hi[k] = std::min(hi[k], 0.0);
            if (lo[k] > hi[k]) {
                throw InfeasibleError("well_adapted: contraction product condition fails at k = " +
                                      std::to_string(k));
            }
        }
    }
    if (lo[n] > 0.0) {
        throw InfeasibleError("well_adapted: contraction product condition fails at k = " + std::to_string(n));
    }
    if (hi[n] < 0.0) {
        throw InfeasibleError("well_adapted: expansion product condition fails");
    }
    // backward pass from S_n = 0
    std::vector<double> S(n + 1, 0.0);
    for (std::size_t k = n; k >= 1; --k) {
        const double a = std::max(lo[k - 1], S[k] - beta[k - 1]);
        const double b = std::min(hi[k - 1], S[k] - alpha[k - 1]);
        if (a > b + 1e-14) {
            throw InfeasibleError("well_adapted: empty admissible interval at k = " + std::to_string(k));
        }
        S[k - 1] = k == 1 ? 0.0 : 0.5 * (a + std::max(a, b));
    }
    BalanceSequence out;
    out.c.resize(n);
    for (std::size_t k = 1; k <= n; ++k) {
        out.c[k - 1] = std::exp(S[k] - S[k - 1]);
    }
    return out;
}

std::vector<double> scale_factors(std::span<const double> h, std::span<const int> offsets) {
    if (offsets.empty() || offsets.front() != 0 || offsets.back() != static_cast<int>(h.size())) {
        throw DimensionError("scale_factors: offsets do not match the weights");
    }
    std::vector<double> l(h.size() + 1, 1.0);
    for (std::size_t i = 0; i + 1 < offsets.size(); ++i) {
        double acc = 1.0;
        for (int j = offsets[i]; j < offsets[i + 1]; ++j) {
            l[static_cast<std::size_t>(j)] = acc;
            acc *= h[static_cast<std::size_t>(j)];
        }
    }
    return l;
}

std::vector<BlockJacobian> rescaled_blocks(std::span<const BlockJacobian> blocks, std::span<const double> h) {
    if (blocks.size() != h.size()) {
        throw DimensionError("rescaled_blocks: one weight per block is required");
    }
    std::vector<BlockJacobian> out;
    out.reserve(blocks.size());
    for (std::size_t j = 0; j < blocks.size(); ++j) {
        const double s = 1.0 / h[j];
        out.push_back({blocks[j].A * s, blocks[j].B * s, blocks[j].C * s, blocks[j].D * s});
    }
    return out;
}

bool verify_rescaling(std::span<const BlockJacobian> blocks, std::span<const double> h, double lambda, double R) {
    if (blocks.size() != h.size()) {
        return false;
    }
    for (std::size_t j = 0; j < blocks.size(); ++j) {
        if (!(h[j] >= 1.0 / R && h[j] <= R)) {
            return false;
        }
        if (!(min_norm(blocks[j].A) / h[j] > 1.0 / lambda) || !(op_norm(blocks[j].D) / h[j] < lambda)) {
            return false;
        }
    }
    return true;
}

SequencePair rate_pair(std::span<const BlockJacobian> blocks, int begin, int end) {
    SequencePair pair;
    for (int j = begin; j < end; ++j) {
        const auto& b = blocks[static_cast<std::size_t>(j)];
        // empty factors: use neutral rates so that they never bind
        const double d = b.D.size() == 0 ? 1e-300 : op_norm(b.D);
        const double m = b.A.size() == 0 ? 1e300 : min_norm(b.A);
        pair.a.push_back(std::max(d, 1e-300));
        pair.b.push_back(std::max(m, 1e-300));
    }
    return pair;
}

std::vector<double> adapted_weights(std::span<const BlockJacobian> blocks, std::span<const int> offsets,
                                    double lambda) {
    std::vector<double> h;
    h.reserve(blocks.size());
    for (std::size_t i = 0; i + 1 < offsets.size(); ++i) {
        const auto c = well_adapted(rate_pair(blocks, offsets[i], offsets[i + 1]), lambda).c;
        h.insert(h.end(), c.begin(), c.end());
    }
    return h;
}

} // namespace qshadow
