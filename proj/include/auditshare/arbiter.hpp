#pragma once

#include <unordered_map>

#include "auditshare/session.hpp"
#include "auditshare/stats.hpp"

// Arbitration: confirm claimed allocations against certificates, then find
// the leakers. Receipt state is kept as one bitmap per fake object (bit i
// set = receiver i got it), which makes every set in the analysis a pattern
// predicate.

namespace auditshare {

struct ConfirmedAllocation {
    uint32_t n_receivers = 0;
    std::vector<std::string> receiver_ids;           // size n_receivers
    std::vector<uint32_t> patterns;                  // dense object index -> receipt bitmap
    std::vector<std::string> object_ids;             // dense index -> id; empty in simulation
    std::unordered_map<std::string, uint32_t> index_by_id;

    size_t object_count() const { return patterns.size(); }
    uint64_t recv_size(uint32_t receiver) const;
    uint32_t index_of(const std::string& object_id) const;  // throws UnknownObject
};

// Unique_i: objects only receiver i holds (pattern == 1<<i).
std::vector<uint32_t> unique_set(uint32_t receiver, const ConfirmedAllocation& alloc);
// SenderOnly: objects dropped by every receiver (pattern == 0).
std::vector<uint32_t> sender_only_set(const ConfirmedAllocation& alloc);

// Leaked fake objects as dense indices into the allocation.
struct LeakedSet {
    std::vector<uint32_t> indices;
};

LeakedSet leaked_from_ids(const std::vector<std::string>& ids, const ConfirmedAllocation& alloc);

// Histogram of a leaked set over all 2^N receipt patterns.
std::vector<uint64_t> dataset_vector(const LeakedSet& leaked, const ConfirmedAllocation& alloc);

inline uint32_t paired_index(uint32_t pattern, uint32_t receiver) {
    return pattern ^ (1u << receiver);
}

// --- Non-colluding identification ------------------------------------------------

struct NonColludingReport {
    std::vector<uint32_t> guilty_receivers;
    bool sender_guilty = false;
    std::vector<uint64_t> unique_hits;  // |leak cap Unique_i|
    std::vector<uint64_t> drop_hits;    // |leak cap Drop_i|; nonzero hits are evidence of
                                        // third-party involvement, reported as diagnostics
    uint64_t sender_only_hits = 0;
    std::vector<double> receiver_detect_prob;  // detection probability at this leak size
    double sender_detect_prob = 0.0;

    bool receiver_guilty(uint32_t i) const;
};

// Receiver i is guilty iff the leak intersects Unique_i but not Drop_i; the
// sender is guilty iff the leak intersects SenderOnly.
NonColludingReport identify_noncolluding(const LeakedSet& leaked,
                                         const ConfirmedAllocation& alloc);

// --- Colluding identification ------------------------------------------------------

struct PatternPairEvidence {
    uint32_t receiver;
    uint32_t pattern_k;
    uint32_t pattern_k_paired;
    uint64_t count_k;
    uint64_t count_k_paired;
    double p_value;
};

struct IdentificationReport {
    double alpha = 0.05;
    double alpha_effective = 0.05;  // alpha / 2^(N-1) when Bonferroni is on
    std::vector<uint32_t> flagged;
    std::vector<double> pvalues;    // per receiver; min p over triggering pairs, 1.0 if clean
    std::vector<PatternPairEvidence> evidence;  // pairs with p < alpha_effective
    double accuracy = 1.0;          // prod(1 - p) over flagged, capped at 1 - 1e-8

    bool is_flagged(uint32_t i) const;
};

constexpr double kMinErrorRate = 1e-8;

// Balance test per paired pattern: each unordered pair is tested once,
// (0, 0) pairs carry no evidence and are skipped.
IdentificationReport identify_colluding(const LeakedSet& leaked,
                                        const ConfirmedAllocation& alloc, double alpha = 0.05,
                                        bool bonferroni = false);

// --- leak matching -------------------------------------------------------------------

// A leaked record matches an object when any single PII attribute value
// equals that object's value; records matching several objects are rejected.
struct MatchResult {
    std::vector<std::string> leaked_fake_ids;  // deduplicated, first-match order
    uint64_t matched_fake_records = 0;
    uint64_t matched_real_records = 0;
    uint64_t unmatched_records = 0;
    uint64_t ambiguous_records = 0;
};

MatchResult match_leaked(const std::vector<DataEntry>& leak_records,
                         const std::vector<DataObject>& objects, const PIIKeySpec& spec);

// --- sharing confirmation ---------------------------------------------------------------

// One claimed session per receiver plus the notary's disclosed keys.
struct SessionClaim {
    SessionRecordSender sender;      // full pair plaintexts
    SessionRecordReceiver receiver;  // claimed received objects
    SharingCertificate certificate;
    AeadKey key;  // from Notary::disclose_keys
};

// Recomputes the sending tree from the sender claim and re-derives each
// receiver's holdings from the certified choices; any inconsistency names
// the lying party (SenderClaimMismatch / ReceiverClaimMismatch).
ConfirmedAllocation confirm_sharing(const std::vector<SessionClaim>& claims,
                                    const std::array<uint8_t, 32>& notary_public_key);

}  // namespace auditshare
