#pragma once

#include "auditshare/arbiter.hpp"

// Monte-Carlo reproduction of the evaluation: synthetic allocations with the
// exact OT statistics (one fake per pair per receiver, independent fair
// coins across receivers), scripted leak scenarios, and leak-fraction sweeps
// over the identification algorithms.

namespace auditshare::sim {

struct LeakScenario {
    enum class Kind { GuiltyReceiver, GuiltySender, Collusion };
    Kind kind = Kind::GuiltyReceiver;
    uint32_t receiver = 0;        // GuiltyReceiver target (0-indexed)
    std::string expression;       // Collusion set algebra over R1..RN
    double leak_fraction = 0.01;

    std::string label() const;
    // scenario text: "receiver", "receiver:K" (1-indexed), "sender",
    // "collude:EXPR"
    static LeakScenario parse(const std::string& text);
};

// Set-algebra mini-language over receiver holdings: R1 & ~R2 | (R3 & R4).
// Returns one accept flag per receipt pattern.
std::vector<char> eval_expression(const std::string& expr, uint32_t n_receivers);
// Receivers whose knowledge the expression uses (any mention, complements
// included) -- the scenario's true leaker set.
std::vector<uint32_t> mentioned_receivers(const std::string& expr, uint32_t n_receivers);

// Synthetic allocation matching the OT statistics without the crypto: fakes
// are paired two-per-pair and each receiver keeps one side of every pair.
ConfirmedAllocation simulate_allocation(uint64_t n_fakes, uint32_t n_receivers, uint64_t seed);

// Same allocation distribution through the full crypto path (loopback
// sessions against an in-memory notary); small sizes only.
ConfirmedAllocation simulate_allocation_crypto(uint64_t n_fakes, uint32_t n_receivers,
                                               uint64_t seed);

// Uniform sample of ceil(fraction * |domain|) objects from the scenario's
// knowledge domain.
LeakedSet make_leak(const LeakScenario& scenario, const ConfirmedAllocation& alloc,
                    uint64_t seed);

struct SweepRow {
    std::string scenario;
    double fraction = 0.0;
    uint32_t trials = 0;
    double mean_error = 0.0;
    uint32_t full_id_count = 0;
    // not part of the CSV contract; used by the acceptance analysis
    double median_error = 0.0;
    double stderr_error = 0.0;

    double full_id_rate() const { return trials ? double(full_id_count) / trials : 0.0; }
};

struct SweepResult {
    std::vector<SweepRow> rows;

    // scenario,fraction,trials,mean_error,full_id_rate
    std::string to_csv() const;
};

// Per trial: fresh allocation and leak, matching identification algorithm.
// A trial missing any true leaker scores error 1; a fully identified trial
// scores max(1e-8, 1 - A) with A the product of the true leakers' per-party
// confidence (detection probability for Algorithm 1 scenarios, 1 - p for
// Algorithm 2).
SweepResult sweep(const std::vector<LeakScenario>& scenarios,
                  const std::vector<double>& fractions, uint32_t trials, uint64_t n_fakes,
                  uint32_t n_receivers, uint64_t seed, double alpha = 0.05);

}  // namespace auditshare::sim
