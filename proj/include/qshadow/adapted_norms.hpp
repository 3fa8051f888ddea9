#pragma once

#include <span>
#include <vector>

#include "qshadow/splitting.hpp"

namespace qshadow {

/// Rates {a_i, b_i}, i = 1..n: a contracting, b expanding. Stored 0-based.
struct SequencePair {
    std::vector<double> a;
    std::vector<double> b;

    std::size_t size() const { return a.size(); }
};

enum class PairMode { hyperbolic, quasi_hyperbolic };

struct PairCheck {
    bool passed = false;
    double worst_slack = 0.0; ///< log-domain slack for products, linear otherwise
};

/// hyperbolic: a_k <= lambda, b_k >= 1/lambda.
/// quasi: prod_{j<=k} a_j <= lambda^k, prod_{j>=k} b_j >= lambda^(k-n-1),
/// a_k / b_k <= lambda^2.
PairCheck check_pair(const SequencePair& pair, double lambda, PairMode mode);

/// Weights with all partial products <= 1 and total product 1.
struct BalanceSequence {
    std::vector<double> c;
};

/// Balance test in log domain: partial sums <= tol and |total| <= tol.
bool verify_balance(const BalanceSequence& seq, double tol = 1e-12);

/// a_i / c_i <= lambda and b_i / c_i >= 1/lambda (up to `tol` in log domain).
bool verify_well_adapted(const SequencePair& pair, const BalanceSequence& seq, double lambda, double tol = 1e-12);

/// Constructs a well-adapted balance sequence of a lambda-quasi-hyperbolic
/// pair. Works on gamma_i = log c_i in [log a_i - log lambda, log b_i + log lambda]:
/// a forward pass propagates the interval of reachable partial sums (clipped
/// above by 0), a backward pass walks from the total 0 choosing each partial
/// sum at the midpoint of its admissible interval. Throws InfeasibleError
/// naming the violated constraint when the pair is not quasi-hyperbolic.
BalanceSequence well_adapted(const SequencePair& pair, double lambda);

/// l_j = prod_{k=N_i}^{j-1} h_k inside each segment, reset to 1 at every
/// segment start. Returns N+1 values; the terminal index starts a new segment.
std::vector<double> scale_factors(std::span<const double> h, std::span<const int> offsets);

/// Blocks in the rescaled norms |v|_N = |v| / l_j: every block of step j is
/// divided by h_j.
std::vector<BlockJacobian> rescaled_blocks(std::span<const BlockJacobian> blocks, std::span<const double> h);

/// Strict hyperbolicity of the rescaled pair, m(A_j)/h_j > 1/lambda and
/// |D_j|/h_j < lambda, together with 1/R <= h_j <= R.
bool verify_rescaling(std::span<const BlockJacobian> blocks, std::span<const double> h, double lambda, double R);

/// (|D_j|, m(A_j)) for j in [begin, end).
SequencePair rate_pair(std::span<const BlockJacobian> blocks, int begin, int end);

/// Concatenated well-adapted sequences, one per segment.
std::vector<double> adapted_weights(std::span<const BlockJacobian> blocks, std::span<const int> offsets,
                                    double lambda);

} // namespace qshadow
