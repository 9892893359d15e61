#pragma once

#include <cstdint>
#include <unordered_set>

#include "auditshare/data_model.hpp"

namespace auditshare {

// --- grouping ----------------------------------------------------------------

// Groups entries sharing the same PII key into one object, ordered by first
// appearance. Rejects entries missing a PII column or with a blank PII cell.
std::vector<DataObject> group_entries(const std::vector<DataEntry>& entries,
                                      const PIIKeySpec& spec);

// --- fake object preparation -------------------------------------------------

// Lower bound on the fake object count: twice the real object count.
uint64_t min_fake_count(uint64_t real_count);

enum class ColumnStyle : uint8_t {
    Digits,  // digit strings with optional punctuation, e.g. SSNs
    Text,    // name-shaped strings
};

// Classifies each column from observed values; columns where at least 80%
// of values contain only digits / digit punctuation count as Digits.
std::vector<ColumnStyle> infer_column_styles(const std::vector<DataEntry>& entries,
                                             const std::vector<std::string>& schema);

// Synthesizes `count` fake objects over `schema`. PII keys are guaranteed
// fresh against `taken_keys` (joined-key form) and against each other.
// `templates` provides one sample value per column so Digits columns keep
// the observed punctuation shape; pass {} for plain defaults.
std::vector<DataObject> generate_fake_objects(const std::vector<std::string>& schema,
                                              const PIIKeySpec& spec, uint64_t count,
                                              uint64_t seed,
                                              const std::unordered_set<std::string>& taken_keys,
                                              const std::vector<ColumnStyle>& styles = {},
                                              const std::vector<std::string>& templates = {});

// Smallest even |Data| such that the detection probability for a receiver
// leaking `leak_fraction` of its holdings reaches `target_success`, with
// |Recv| = |Data|/2 and |Unique| = |Data|/2^N. Throws Unsatisfiable above
// 10^9.
uint64_t recommend_fake_count(uint32_t n_receivers, double leak_fraction, double target_success);

// --- pair construction ---------------------------------------------------------

// Binds each real object to one pair and splits the fakes across pair sides:
// two per pair, extras dealt round-robin (pair (k/2) mod P, side k mod 2).
// With no real objects, builds |fakes|/2 fake-only pairs.
std::vector<ObjectPair> build_pairs(const std::vector<DataObject>& real,
                                    const std::vector<DataObject>& fakes, uint64_t seed);

// --- message serialization -----------------------------------------------------

constexpr size_t kDefaultMaxObjectBytes = 1 << 20;

size_t padded_length(size_t raw_payload_len);  // 4-byte prefix + round up to 16

// Serializes real_part+fake0 / real_part+fake1 and pads both to
// `target_len` (a padded_length value). Reversible via unpad_payload.
void pad_serialize(ObjectPair& pair, size_t target_len,
                   size_t max_object_bytes = kDefaultMaxObjectBytes);

// Serializes every pair in the session, padding all messages to the
// session-wide maximum length. Returns the common message length.
size_t pad_serialize_session(std::vector<ObjectPair>& pairs,
                             size_t max_object_bytes = kDefaultMaxObjectBytes);

Bytes unpad_payload(BytesView padded);
std::vector<DataObject> deserialize_message(BytesView padded);

}  // namespace auditshare
