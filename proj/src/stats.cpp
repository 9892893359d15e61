#include "auditshare/stats.hpp"

#include <algorithm>
#include <cmath>

#include "auditshare/errors.hpp"

namespace auditshare {

double log_miss_probability(uint64_t recv, uint64_t unique, uint64_t leak) {
    if (unique > recv) fail(Err::DomainError, "unique set larger than holdings");
    if (leak > recv) fail(Err::DomainError, "leak larger than holdings");
    if (unique == 0) return 0.0;                          // miss certain
    if (leak == 0) return 0.0;
    if (leak > recv - unique) return -HUGE_VAL;           // pigeonhole hit
    // C(recv-unique, leak)/C(recv, leak) = prod_{j<unique} (recv-leak-j)/(recv-j);
    // the unique-term product keeps full relative precision for tiny results.
    if (unique <= leak || unique <= 1000000) {
        double s = 0.0;
        for (uint64_t j = 0; j < unique; ++j)
            s += std::log1p(-double(leak) / double(recv - j));
        return s;
    }
    double s = 0.0;
    for (uint64_t j = 0; j < leak; ++j)
        s += std::log1p(-double(unique) / double(recv - j));
    return s;
}

double prob_receiver_detect(uint64_t recv, uint64_t unique, uint64_t leak) {
    return -std::expm1(log_miss_probability(recv, unique, leak));
}

double prob_sender_detect(uint64_t data, uint64_t senderonly, uint64_t leak) {
    return -std::expm1(log_miss_probability(data, senderonly, leak));
}

// log P[X <= k] for X ~ Binomial(n, 1/2), summed from the dominant term at k
// downward; terms fall off geometrically so the loop exits early.
static double log_lower_tail(uint64_t k, uint64_t n) {
    if (k >= n) return 0.0;
    double lmax = std::lgamma(double(n) + 1) - std::lgamma(double(k) + 1) -
                  std::lgamma(double(n - k) + 1) - double(n) * std::log(2.0);
    double sum = 0.0;
    double term = 1.0;  // relative to the j = k term
    for (uint64_t j = k;; --j) {
        sum += term;
        if (j == 0) break;
        // C(n, j-1)/C(n, j) = j/(n-j+1)
        term *= double(j) / double(n - j + 1);
        if (term < 1e-18 * sum) break;
    }
    return lmax + std::log(sum);
}

double binomial_test(uint64_t count_k, uint64_t count_k_paired) {
    uint64_t n = count_k + count_k_paired;
    if (n == 0) return 1.0;
    uint64_t lo = std::min(count_k, count_k_paired);
    // smaller tail: P[X <= lo] = P[X >= n - lo] by symmetry of Binomial(n, 1/2)
    double logp = log_lower_tail(lo, n) + std::log(2.0);
    if (logp >= 0.0) return 1.0;
    // keep the result strictly positive for downstream log1p arithmetic
    return std::exp(std::max(logp, -690.0));
}

double accuracy_from_pvalues(const std::vector<double>& pvalues) {
    double s = 0.0;
    for (double p : pvalues) s += std::log1p(-std::min(p, 1.0));
    return std::exp(s);
}

}  // namespace auditshare
