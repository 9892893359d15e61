#include "auditshare/preprocess.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <unordered_map>

#include "auditshare/errors.hpp"
#include "auditshare/rng.hpp"
#include "auditshare/stats.hpp"

namespace auditshare {

static std::string format_seq_id(char prefix, uint64_t n) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%c%08llu", prefix, static_cast<unsigned long long>(n));
    return buf;
}

std::vector<DataObject> group_entries(const std::vector<DataEntry>& entries,
                                      const PIIKeySpec& spec) {
    spec.validate();
    std::vector<DataObject> objects;
    std::unordered_map<std::string, size_t> index_by_key;
    for (const auto& entry : entries) {
        std::vector<std::string> key_values;
        key_values.reserve(spec.attribute_names.size());
        for (const auto& attr : spec.attribute_names) {
            const std::string* v = entry.value_of(attr);
            if (v == nullptr) fail(Err::MissingPIIColumn, attr);
            if (v->empty()) fail(Err::EmptyPIIValue, attr);
            key_values.push_back(*v);
        }
        std::string key = join_pii_key(key_values);
        auto [it, inserted] = index_by_key.try_emplace(key, objects.size());
        if (inserted) {
            DataObject o;
            o.object_id = format_seq_id('r', objects.size());
            o.pii_key = std::move(key_values);
            o.kind = ObjectKind::Real;
            objects.push_back(std::move(o));
        }
        objects[it->second].entries.push_back(entry);
    }
    return objects;
}

uint64_t min_fake_count(uint64_t real_count) {
    if (real_count < 1) fail(Err::DomainError, "real_count must be positive");
    return 2 * real_count;
}

static bool digits_shaped(const std::string& s) {
    if (s.empty()) return false;
    bool any_digit = false;
    for (char c : s) {
        if (std::isdigit(static_cast<unsigned char>(c))) {
            any_digit = true;
        } else if (c != '-' && c != ' ' && c != '.' && c != '/') {
            return false;
        }
    }
    return any_digit;
}

std::vector<ColumnStyle> infer_column_styles(const std::vector<DataEntry>& entries,
                                             const std::vector<std::string>& schema) {
    std::vector<ColumnStyle> styles(schema.size(), ColumnStyle::Text);
    for (size_t c = 0; c < schema.size(); ++c) {
        size_t seen = 0, digit_like = 0;
        for (const auto& e : entries) {
            const std::string* v = e.value_of(schema[c]);
            if (v == nullptr || v->empty()) continue;
            ++seen;
            if (digits_shaped(*v)) ++digit_like;
        }
        if (seen > 0 && digit_like * 5 >= seen * 4) styles[c] = ColumnStyle::Digits;
    }
    return styles;
}

static std::string random_digits_value(Rng& rng, const std::string& tmpl) {
    std::string shape = tmpl.empty() ? std::string("000000000") : tmpl;
    std::string out = shape;
    for (char& c : out) {
        if (std::isdigit(static_cast<unsigned char>(c))) c = char('0' + rng.below(10));
    }
    return out;
}

static std::string random_name_value(Rng& rng) {
    static const char* kVowels = "aeiou";
    static const char* kConsonants = "bcdfghjklmnprstvwz";
    std::string out;
    for (int word = 0; word < 2; ++word) {
        if (word > 0) out.push_back(' ');
        size_t syllables = 2 + rng.below(2);
        for (size_t s = 0; s < syllables; ++s) {
            char c = kConsonants[rng.below(18)];
            if (out.empty() || out.back() == ' ')
                c = char(std::toupper(static_cast<unsigned char>(c)));
            out.push_back(c);
            out.push_back(kVowels[rng.below(5)]);
        }
    }
    return out;
}

std::vector<DataObject> generate_fake_objects(const std::vector<std::string>& schema,
                                              const PIIKeySpec& spec, uint64_t count,
                                              uint64_t seed,
                                              const std::unordered_set<std::string>& taken_keys,
                                              const std::vector<ColumnStyle>& styles,
                                              const std::vector<std::string>& templates) {
    if (schema.empty()) fail(Err::SchemaEmpty, "fake objects need a schema");
    if (count < 1) fail(Err::DomainError, "count must be positive");
    spec.validate();

    std::vector<size_t> pii_columns;
    for (const auto& attr : spec.attribute_names) {
        auto it = std::find(schema.begin(), schema.end(), attr);
        if (it == schema.end()) fail(Err::MissingPIIColumn, attr);
        pii_columns.push_back(size_t(it - schema.begin()));
    }

    DetRng rng(seed, "fake-objects");
    std::unordered_set<std::string> used = taken_keys;
    std::vector<DataObject> out;
    out.reserve(count);
    for (uint64_t i = 0; i < count; ++i) {
        DataEntry entry;
        entry.schema = schema;
        entry.values.resize(schema.size());
        std::vector<std::string> key_values;
        for (int attempt = 0;; ++attempt) {
            if (attempt > 1000) fail(Err::DomainError, "PII key space exhausted");
            for (size_t c = 0; c < schema.size(); ++c) {
                ColumnStyle style = c < styles.size() ? styles[c] : ColumnStyle::Text;
                const std::string tmpl = c < templates.size() ? templates[c] : std::string();
                entry.values[c] = style == ColumnStyle::Digits ? random_digits_value(rng, tmpl)
                                                               : random_name_value(rng);
            }
            key_values.clear();
            for (size_t c : pii_columns) key_values.push_back(entry.values[c]);
            if (used.insert(join_pii_key(key_values)).second) break;
        }
        DataObject o;
        o.object_id = format_seq_id('f', i);
        o.pii_key = std::move(key_values);
        o.kind = ObjectKind::Fake;
        o.entries.push_back(std::move(entry));
        out.push_back(std::move(o));
    }
    return out;
}

uint64_t recommend_fake_count(uint32_t n_receivers, double leak_fraction, double target_success) {
    if (n_receivers < 1 || n_receivers > 62)
        fail(Err::DomainError, "receiver count out of range");
    if (!(leak_fraction > 0.0 && leak_fraction <= 1.0))
        fail(Err::DomainError, "leak fraction must be in (0, 1]");
    if (!(target_success > 0.0 && target_success < 1.0))
        fail(Err::DomainError, "target success must be in (0, 1)");

    constexpr uint64_t kCap = 1000000000ULL;
    for (uint64_t data = 2; data <= kCap; data += 2) {
        uint64_t recv = data / 2;
        uint64_t unique = uint64_t(std::llround(std::ldexp(double(data), -int(n_receivers))));
        uint64_t leak = uint64_t(std::ceil(leak_fraction * double(recv)));
        if (leak > recv) leak = recv;
        if (unique > recv) unique = recv;
        if (prob_receiver_detect(recv, unique, leak) >= target_success) return data;
    }
    fail(Err::Unsatisfiable, "no fake count up to 10^9 meets the target");
}

std::vector<ObjectPair> build_pairs(const std::vector<DataObject>& real,
                                    const std::vector<DataObject>& fakes, uint64_t seed) {
    size_t n_pairs;
    if (!real.empty()) {
        if (fakes.size() < 2 * real.size())
            fail(Err::InsufficientFakes, "need at least twice as many fakes as reals");
        n_pairs = real.size();
    } else {
        if (fakes.size() < 2 || fakes.size() % 2 != 0)
            fail(Err::InsufficientFakes, "fake-only mode needs an even fake count >= 2");
        n_pairs = fakes.size() / 2;
    }

    std::vector<size_t> order(fakes.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    DetRng rng(seed, "pair-shuffle");
    rng.shuffle(order);

    std::vector<ObjectPair> pairs(n_pairs);
    for (size_t i = 0; i < n_pairs; ++i) {
        pairs[i].pair_index = uint32_t(i);
        if (!real.empty()) pairs[i].real_part.push_back(real[i]);
        pairs[i].fake0.push_back(fakes[order[2 * i]]);
        pairs[i].fake1.push_back(fakes[order[2 * i + 1]]);
    }
    // extras beyond two per pair, dealt one side at a time across pairs
    for (size_t k = 0; 2 * n_pairs + k < fakes.size(); ++k) {
        const DataObject& f = fakes[order[2 * n_pairs + k]];
        ObjectPair& p = pairs[(k / 2) % n_pairs];
        (k % 2 == 0 ? p.fake0 : p.fake1).push_back(f);
    }
    return pairs;
}

size_t padded_length(size_t raw_payload_len) {
    size_t with_prefix = raw_payload_len + 4;
    return (with_prefix + 15) / 16 * 16;
}

static Bytes message_payload(const std::vector<DataObject>& real_part,
                             const std::vector<DataObject>& fake_side,
                             size_t max_object_bytes) {
    Writer w;
    w.u32(uint32_t(real_part.size() + fake_side.size()));
    for (const auto* group : {&real_part, &fake_side}) {
        for (const auto& o : *group) {
            size_t before = w.bytes().size();
            serialize_object(w, o);
            if (w.bytes().size() - before > max_object_bytes)
                fail(Err::OversizeObject, o.object_id);
        }
    }
    return w.take();
}

static Bytes pad_payload(Bytes payload, size_t target_len) {
    Writer w;
    w.u32(uint32_t(payload.size()));
    w.raw(payload);
    Bytes out = w.take();
    out.resize(target_len, 0);
    return out;
}

void pad_serialize(ObjectPair& pair, size_t target_len, size_t max_object_bytes) {
    Bytes p0 = message_payload(pair.real_part, pair.fake0, max_object_bytes);
    Bytes p1 = message_payload(pair.real_part, pair.fake1, max_object_bytes);
    if (padded_length(std::max(p0.size(), p1.size())) > target_len)
        fail(Err::OversizeObject, "pair payload exceeds session message length");
    pair.m0_bytes = pad_payload(std::move(p0), target_len);
    pair.m1_bytes = pad_payload(std::move(p1), target_len);
}

size_t pad_serialize_session(std::vector<ObjectPair>& pairs, size_t max_object_bytes) {
    if (pairs.empty()) fail(Err::EmptySession, "no pairs to serialize");
    std::vector<std::pair<Bytes, Bytes>> payloads;
    payloads.reserve(pairs.size());
    size_t max_raw = 0;
    for (const auto& pair : pairs) {
        Bytes p0 = message_payload(pair.real_part, pair.fake0, max_object_bytes);
        Bytes p1 = message_payload(pair.real_part, pair.fake1, max_object_bytes);
        max_raw = std::max({max_raw, p0.size(), p1.size()});
        payloads.emplace_back(std::move(p0), std::move(p1));
    }
    size_t target = padded_length(max_raw);
    for (size_t i = 0; i < pairs.size(); ++i) {
        pairs[i].m0_bytes = pad_payload(std::move(payloads[i].first), target);
        pairs[i].m1_bytes = pad_payload(std::move(payloads[i].second), target);
    }
    return target;
}

Bytes unpad_payload(BytesView padded) {
    Reader r(padded);
    uint32_t n = r.u32();
    if (n > r.remaining()) fail(Err::IoError, "corrupt padding prefix");
    return r.raw(n);
}

std::vector<DataObject> deserialize_message(BytesView padded) {
    return deserialize_objects(unpad_payload(padded));
}

}  // namespace auditshare
