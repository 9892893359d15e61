#include "auditshare/arbiter.hpp"

#include <algorithm>
#include <unordered_set>

namespace auditshare {

uint64_t ConfirmedAllocation::recv_size(uint32_t receiver) const {
    uint64_t n = 0;
    uint32_t bit = 1u << receiver;
    for (uint32_t p : patterns) n += (p & bit) ? 1 : 0;
    return n;
}

uint32_t ConfirmedAllocation::index_of(const std::string& object_id) const {
    auto it = index_by_id.find(object_id);
    if (it == index_by_id.end()) fail(Err::UnknownObject, object_id);
    return it->second;
}

std::vector<uint32_t> unique_set(uint32_t receiver, const ConfirmedAllocation& alloc) {
    if (receiver >= alloc.n_receivers) fail(Err::DomainError, "receiver index out of range");
    std::vector<uint32_t> out;
    uint32_t want = 1u << receiver;
    for (uint32_t i = 0; i < alloc.patterns.size(); ++i)
        if (alloc.patterns[i] == want) out.push_back(i);
    return out;
}

std::vector<uint32_t> sender_only_set(const ConfirmedAllocation& alloc) {
    std::vector<uint32_t> out;
    for (uint32_t i = 0; i < alloc.patterns.size(); ++i)
        if (alloc.patterns[i] == 0) out.push_back(i);
    return out;
}

LeakedSet leaked_from_ids(const std::vector<std::string>& ids, const ConfirmedAllocation& alloc) {
    LeakedSet out;
    out.indices.reserve(ids.size());
    for (const auto& id : ids) out.indices.push_back(alloc.index_of(id));
    return out;
}

std::vector<uint64_t> dataset_vector(const LeakedSet& leaked, const ConfirmedAllocation& alloc) {
    if (alloc.n_receivers == 0 || alloc.n_receivers > 20)
        fail(Err::DomainError, "pattern space needs 1..20 receivers");
    std::vector<uint64_t> counts(size_t(1) << alloc.n_receivers, 0);
    for (uint32_t idx : leaked.indices) {
        if (idx >= alloc.patterns.size()) fail(Err::UnknownObject, std::to_string(idx));
        ++counts[alloc.patterns[idx]];
    }
    return counts;
}

bool NonColludingReport::receiver_guilty(uint32_t i) const {
    return std::find(guilty_receivers.begin(), guilty_receivers.end(), i) !=
           guilty_receivers.end();
}

NonColludingReport identify_noncolluding(const LeakedSet& leaked,
                                         const ConfirmedAllocation& alloc) {
    uint32_t n = alloc.n_receivers;
    NonColludingReport rep;
    rep.unique_hits.assign(n, 0);
    rep.drop_hits.assign(n, 0);
    rep.receiver_detect_prob.assign(n, 0.0);

    for (uint32_t idx : leaked.indices) {
        if (idx >= alloc.patterns.size()) fail(Err::UnknownObject, std::to_string(idx));
        uint32_t pat = alloc.patterns[idx];
        if (pat == 0) ++rep.sender_only_hits;
        for (uint32_t i = 0; i < n; ++i) {
            if (pat == (1u << i)) ++rep.unique_hits[i];
            if ((pat & (1u << i)) == 0) ++rep.drop_hits[i];
        }
    }
    for (uint32_t i = 0; i < n; ++i) {
        if (rep.unique_hits[i] > 0 && rep.drop_hits[i] == 0) rep.guilty_receivers.push_back(i);
    }
    rep.sender_guilty = rep.sender_only_hits > 0;

    // theoretical detection probabilities at this leak size, for context
    uint64_t leak_size = leaked.indices.size();
    std::vector<uint64_t> unique_sizes(n, 0);
    uint64_t sender_only_size = 0;
    for (uint32_t p : alloc.patterns) {
        if (p == 0) ++sender_only_size;
        for (uint32_t i = 0; i < n; ++i)
            if (p == (1u << i)) ++unique_sizes[i];
    }
    for (uint32_t i = 0; i < n; ++i) {
        uint64_t recv = alloc.recv_size(i);
        uint64_t capped_leak = std::min(leak_size, recv);
        rep.receiver_detect_prob[i] = prob_receiver_detect(recv, unique_sizes[i], capped_leak);
    }
    rep.sender_detect_prob =
        prob_sender_detect(alloc.object_count(), sender_only_size, leak_size);
    return rep;
}

bool IdentificationReport::is_flagged(uint32_t i) const {
    return std::find(flagged.begin(), flagged.end(), i) != flagged.end();
}

IdentificationReport identify_colluding(const LeakedSet& leaked,
                                        const ConfirmedAllocation& alloc, double alpha,
                                        bool bonferroni) {
    uint32_t n = alloc.n_receivers;
    if (n == 0 || n > 20) fail(Err::DomainError, "pattern space needs 1..20 receivers");
    if (!(alpha > 0.0 && alpha < 1.0)) fail(Err::DomainError, "alpha must be in (0, 1)");

    std::vector<uint64_t> v = dataset_vector(leaked, alloc);
    IdentificationReport rep;
    rep.alpha = alpha;
    rep.alpha_effective = bonferroni ? alpha / double(uint64_t(1) << (n - 1)) : alpha;
    rep.pvalues.assign(n, 1.0);

    uint32_t space = 1u << n;
    for (uint32_t i = 0; i < n; ++i) {
        uint32_t bit = 1u << i;
        bool flagged = false;
        for (uint32_t k = 0; k < space; ++k) {
            if (k & bit) continue;  // each unordered pair once
            uint32_t kp = k | bit;
            if (v[k] == 0 && v[kp] == 0) continue;  // absence is not evidence
            double p = binomial_test(v[k], v[kp]);
            if (p < rep.alpha_effective) {
                flagged = true;
                rep.pvalues[i] = std::min(rep.pvalues[i], p);
                rep.evidence.push_back({i, k, kp, v[k], v[kp], p});
            }
        }
        if (flagged) rep.flagged.push_back(i);
    }

    std::vector<double> flagged_ps;
    for (uint32_t i : rep.flagged) flagged_ps.push_back(rep.pvalues[i]);
    rep.accuracy = std::min(accuracy_from_pvalues(flagged_ps), 1.0 - kMinErrorRate);
    return rep;
}

MatchResult match_leaked(const std::vector<DataEntry>& leak_records,
                         const std::vector<DataObject>& objects, const PIIKeySpec& spec) {
    spec.validate();
    size_t n_attrs = spec.attribute_names.size();
    // one value -> object-id index per PII attribute
    std::vector<std::unordered_map<std::string, std::vector<const DataObject*>>> index(n_attrs);
    for (const auto& o : objects) {
        for (size_t a = 0; a < n_attrs && a < o.pii_key.size(); ++a)
            index[a][o.pii_key[a]].push_back(&o);
    }

    MatchResult res;
    std::unordered_set<std::string> seen;
    for (const auto& rec : leak_records) {
        std::unordered_set<const DataObject*> candidates;
        for (size_t a = 0; a < n_attrs; ++a) {
            const std::string* value = rec.value_of(spec.attribute_names[a]);
            if (value == nullptr || value->empty()) continue;  // stripped attribute
            auto it = index[a].find(*value);
            if (it == index[a].end()) continue;
            for (const DataObject* o : it->second) candidates.insert(o);
        }
        if (candidates.empty()) {
            ++res.unmatched_records;
        } else if (candidates.size() > 1) {
            ++res.ambiguous_records;
        } else {
            const DataObject* o = *candidates.begin();
            if (o->kind == ObjectKind::Fake) {
                ++res.matched_fake_records;
                if (seen.insert(o->object_id).second) res.leaked_fake_ids.push_back(o->object_id);
            } else {
                ++res.matched_real_records;
            }
        }
    }
    return res;
}

ConfirmedAllocation confirm_sharing(const std::vector<SessionClaim>& claims,
                                    const std::array<uint8_t, 32>& notary_public_key) {
    if (claims.empty()) fail(Err::EmptySession, "no sessions to confirm");

    ConfirmedAllocation alloc;
    alloc.n_receivers = uint32_t(claims.size());
    std::vector<std::unordered_set<std::string>> recv_sets;

    for (const auto& claim : claims) {
        const std::string& rid = claim.sender.receiver_id;
        if (!verify_certificate(claim.certificate, notary_public_key))
            fail(Err::CertificateInvalid, "signature rejected for " + rid);
        if (claim.certificate.receiver_id != rid ||
            claim.certificate.session_id != claim.sender.session_id)
            fail(Err::CertificateInvalid, "certificate does not cover session of " + rid);

        Hash32 certified_root = decrypt_certified_root(claim.certificate, claim.key);
        ot::ChoiceVector choices = decrypt_certified_choices(claim.certificate, claim.key);

        // sender claim: rebuild the message bytes and the tree
        if (claim.sender.pairs.empty()) fail(Err::EmptySession, "sender claim has no pairs");
        std::vector<ObjectPair> pairs = claim.sender.pairs;
        std::vector<ot::MsgPair> msgs;
        msgs.reserve(pairs.size());
        try {
            for (auto& p : pairs) {
                pad_serialize(p, claim.sender.message_length);
                msgs.push_back({p.m0_bytes, p.m1_bytes});
            }
        } catch (const AuditError&) {
            fail(Err::SenderClaimMismatch, "claimed pairs exceed certified message length");
        }
        SendingTree tree = build_sending_tree(msgs);
        if (!(tree.root == certified_root))
            fail(Err::SenderClaimMismatch,
                 "sending tree of claimed pairs does not match certificate for " + rid);

        if (choices.size() != pairs.size())
            fail(Err::CertificateInvalid, "certified choice count mismatches pair count");

        // receiver claim: holdings must equal the choice-derived sides
        if (claim.receiver.receiver_id != rid || claim.receiver.session_id != claim.sender.session_id)
            fail(Err::ReceiverClaimMismatch, "receiver claim does not cover session of " + rid);
        if (claim.receiver.choices.bits != choices.bits)
            fail(Err::ReceiverClaimMismatch, "claimed choices differ from certified choices");
        if (claim.receiver.received.size() != pairs.size())
            fail(Err::ReceiverClaimMismatch, "claimed receipt list truncated for " + rid);
        for (size_t i = 0; i < pairs.size(); ++i) {
            const auto& side = choices.bits[i] ? pairs[i].fake1 : pairs[i].fake0;
            const auto& claimed = claim.receiver.received[i];
            std::vector<std::string> expect_ids;
            for (const auto& o : pairs[i].real_part) expect_ids.push_back(o.object_id);
            for (const auto& o : side) expect_ids.push_back(o.object_id);
            std::vector<std::string> claimed_ids;
            for (const auto& o : claimed) claimed_ids.push_back(o.object_id);
            std::sort(expect_ids.begin(), expect_ids.end());
            std::sort(claimed_ids.begin(), claimed_ids.end());
            if (expect_ids != claimed_ids)
                fail(Err::ReceiverClaimMismatch,
                     rid + " pair " + std::to_string(i) + " holdings diverge from choices");
        }

        // verified: collect the fake universe and this receiver's holdings
        std::unordered_set<std::string> recv;
        if (alloc.object_ids.empty()) {
            for (const auto& p : pairs) {
                for (const auto* side : {&p.fake0, &p.fake1}) {
                    for (const auto& o : *side) {
                        alloc.index_by_id.emplace(o.object_id, uint32_t(alloc.object_ids.size()));
                        alloc.object_ids.push_back(o.object_id);
                    }
                }
            }
        }
        size_t seen_fakes = 0;
        for (size_t i = 0; i < pairs.size(); ++i) {
            for (const auto* side : {&pairs[i].fake0, &pairs[i].fake1}) {
                for (const auto& o : *side) {
                    if (!alloc.index_by_id.count(o.object_id))
                        fail(Err::SenderClaimMismatch,
                             "fake universe differs across receiver sessions");
                    ++seen_fakes;
                }
            }
            const auto& side = choices.bits[i] ? pairs[i].fake1 : pairs[i].fake0;
            for (const auto& o : side) recv.insert(o.object_id);
        }
        if (seen_fakes != alloc.object_ids.size())
            fail(Err::SenderClaimMismatch, "fake universe differs across receiver sessions");

        alloc.receiver_ids.push_back(rid);
        recv_sets.push_back(std::move(recv));
    }

    alloc.patterns.assign(alloc.object_ids.size(), 0);
    for (uint32_t r = 0; r < alloc.n_receivers; ++r) {
        for (const auto& id : recv_sets[r]) alloc.patterns[alloc.index_by_id.at(id)] |= 1u << r;
    }
    return alloc;
}

}  // namespace auditshare
