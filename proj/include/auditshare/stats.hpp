#pragma once

#include <cstdint>
#include <vector>

namespace auditshare {

// Hypergeometric complement 1 - C(recv-unique, leak)/C(recv, leak):
// probability that a uniform leak of `leak` objects out of `recv` hits the
// `unique` marked ones at least once. Evaluated in log space.
double prob_receiver_detect(uint64_t recv_size, uint64_t unique_size, uint64_t leak_size);

// Same formula over the full object set against the sender-only set.
double prob_sender_detect(uint64_t data_size, uint64_t senderonly_size, uint64_t leak_size);

// log of the above complement C(recv-unique, leak)/C(recv, leak), <= 0.
// Exposed for callers that need the miss probability without 1-ulp loss.
double log_miss_probability(uint64_t recv_size, uint64_t unique_size, uint64_t leak_size);

// Exact two-sided binomial test with success probability 1/2:
// min(1, 2*min(P[X <= k], P[X >= k])) for X ~ Binomial(k + k_paired, 1/2).
// Zero trials return 1 (no evidence). Symmetric in its arguments.
double binomial_test(uint64_t count_k, uint64_t count_k_paired);

// Product accuracy A = prod(1 - p) computed via log1p, in [0, 1].
double accuracy_from_pvalues(const std::vector<double>& pvalues);

}  // namespace auditshare
