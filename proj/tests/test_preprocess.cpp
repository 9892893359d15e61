#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <set>

#include "auditshare/errors.hpp"
#include "auditshare/preprocess.hpp"
#include "auditshare/rng.hpp"
#include "auditshare/stats.hpp"

using namespace auditshare;

static DataEntry entry(std::vector<std::string> schema, std::vector<std::string> values) {
    DataEntry e;
    e.schema = std::move(schema);
    e.values = std::move(values);
    return e;
}

static PIIKeySpec spec_of(std::vector<std::string> names) {
    PIIKeySpec s;
    s.attribute_names = std::move(names);
    return s;
}

TEST_CASE("group_entries groups by equal PII key") {
    std::vector<DataEntry> entries = {
        entry({"ssn", "grade"}, {"111-22-3333", "A"}),
        entry({"ssn", "grade"}, {"444-55-6666", "B"}),
        entry({"ssn", "grade"}, {"111-22-3333", "C"}),
    };
    auto objects = group_entries(entries, spec_of({"ssn"}));
    REQUIRE(objects.size() == 2);
    CHECK(objects[0].entries.size() == 2);  // first-appearance order
    CHECK(objects[1].entries.size() == 1);
    CHECK(objects[0].pii_key == std::vector<std::string>{"111-22-3333"});
    CHECK(objects[0].kind == ObjectKind::Real);
}

TEST_CASE("group_entries on empty input") {
    CHECK(group_entries({}, spec_of({"ssn"})).empty());
}

TEST_CASE("group_entries: 500 entries over 120 keys vs hash-map oracle") {
    // synthetic two-attribute dataset; oracle is an independent brute-force
    // grouping by joined key
    DetRng rng(42, "grouping");
    std::vector<DataEntry> entries;
    std::vector<std::pair<std::string, std::string>> keys;
    for (int k = 0; k < 120; ++k)
        keys.push_back({"S" + std::to_string(1000 + k), "Name" + std::to_string(k)});
    for (int i = 0; i < 500; ++i) {
        auto& key = keys[i < 120 ? i : rng.below(120)];  // every key at least once
        entries.push_back(entry({"ssn", "full_name", "payload"},
                                {key.first, key.second, "row" + std::to_string(i)}));
    }

    std::map<std::string, size_t> oracle;
    for (const auto& e : entries) oracle[e.values[0] + "\x1f" + e.values[1]]++;

    auto objects = group_entries(entries, spec_of({"ssn", "full_name"}));
    CHECK(objects.size() == oracle.size());
    CHECK(objects.size() == 120);
    size_t total = 0;
    for (const auto& o : objects) {
        total += o.entries.size();
        CHECK(o.entries.size() == oracle.at(join_pii_key(o.pii_key)));
        for (const auto& e : o.entries) {  // partition: entries carry their key
            CHECK(*e.value_of("ssn") == o.pii_key[0]);
            CHECK(*e.value_of("full_name") == o.pii_key[1]);
        }
    }
    CHECK(total == 500);
}

TEST_CASE("group_entries rejects missing and blank PII") {
    std::vector<DataEntry> missing = {entry({"name"}, {"x"})};
    CHECK_THROWS_WITH_AS(group_entries(missing, spec_of({"ssn"})), "MissingPIIColumn: ssn",
                         AuditError);
    std::vector<DataEntry> blank = {entry({"ssn"}, {""})};
    CHECK_THROWS_AS(group_entries(blank, spec_of({"ssn"})), AuditError);
    try {
        group_entries(blank, spec_of({"ssn"}));
    } catch (const AuditError& e) {
        CHECK(e.code() == Err::EmptyPIIValue);
    }
}

TEST_CASE("min_fake_count is twice the real count") {
    CHECK(min_fake_count(10000) == 20000);
    CHECK(min_fake_count(1) == 2);
    CHECK(min_fake_count(3) == 6);
    CHECK_THROWS_AS(min_fake_count(0), AuditError);
}

TEST_CASE("generate_fake_objects: uniqueness against taken and self") {
    PIIKeySpec spec = spec_of({"ssn", "full_name"});
    std::vector<std::string> schema = {"ssn", "full_name", "grade"};
    std::unordered_set<std::string> taken;
    std::vector<std::string> real_keys;
    for (int i = 0; i < 500; ++i) {
        std::string key = "k" + std::to_string(i);
        taken.insert(key);
        real_keys.push_back(key);
    }
    auto fakes = generate_fake_objects(schema, spec, 20000, 7, taken,
                                       {ColumnStyle::Digits, ColumnStyle::Text,
                                        ColumnStyle::Digits});
    REQUIRE(fakes.size() == 20000);
    std::set<std::string> seen(real_keys.begin(), real_keys.end());
    for (const auto& f : fakes) {
        CHECK(f.kind == ObjectKind::Fake);
        CHECK(f.entries.size() == 1);
        CHECK(f.entries[0].schema == schema);
        CHECK(f.entries[0].values.size() == schema.size());
        CHECK(seen.insert(join_pii_key(f.pii_key)).second);  // fresh key
    }
}

TEST_CASE("generate_fake_objects: single object and determinism") {
    PIIKeySpec spec = spec_of({"id"});
    auto one = generate_fake_objects({"id"}, spec, 1, 3, {});
    REQUIRE(one.size() == 1);
    CHECK(one[0].entries[0].values.size() == 1);

    auto a = generate_fake_objects({"id", "v"}, spec, 50, 99, {});
    auto b = generate_fake_objects({"id", "v"}, spec, 50, 99, {});
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].object_id == b[i].object_id);
        CHECK(a[i].pii_key == b[i].pii_key);
        CHECK(a[i].entries[0].values == b[i].entries[0].values);
    }
    CHECK_THROWS_AS(generate_fake_objects({}, spec, 1, 0, {}), AuditError);
}

// Independent oracle for the fake-count recommendation: first even |Data|
// whose detection probability (computed through lgamma binomials, a
// different route than the implementation) reaches the target.
static uint64_t oracle_recommend(uint32_t n, double frac, double target) {
    for (uint64_t data = 2;; data += 2) {
        uint64_t recv = data / 2;
        uint64_t unique = uint64_t(std::llround(std::ldexp(double(data), -int(n))));
        if (unique > recv) unique = recv;
        uint64_t leak = uint64_t(std::ceil(frac * double(recv)));
        if (leak > recv) leak = recv;
        double p;
        if (unique == 0) {
            p = 0.0;
        } else if (leak > recv - unique) {
            p = 1.0;
        } else {
            double a = double(recv - unique);
            double logm =
                std::lgamma(a + 1) - std::lgamma(a - double(leak) + 1) -
                (std::lgamma(double(recv) + 1) - std::lgamma(double(recv) - double(leak) + 1));
            p = -std::expm1(logm);
        }
        if (p >= target) return data;
    }
}

TEST_CASE("recommend_fake_count: paper bound, trivial, and oracle value") {
    // paper: 20000 fakes give P > 1-3e-13 at N=3 with a 1% leak
    uint64_t n3 = recommend_fake_count(3, 0.01, 1.0 - 1e-12);
    CHECK(n3 <= 20000);
    CHECK(n3 % 2 == 0);
    CHECK(recommend_fake_count(1, 1.0, 0.5) == 2);

    uint64_t got = recommend_fake_count(6, 0.05, 0.9999);
    CHECK(got == 11296);  // frozen from the oracle
    CHECK(got == oracle_recommend(6, 0.05, 0.9999));
    CHECK(n3 == oracle_recommend(3, 0.01, 1.0 - 1e-12));

    CHECK_THROWS_AS(recommend_fake_count(3, 0.0, 0.5), AuditError);
    CHECK_THROWS_AS(recommend_fake_count(3, 0.5, 1.0), AuditError);
}

static std::vector<DataObject> fake_objects(size_t count, uint64_t seed = 5) {
    PIIKeySpec spec = spec_of({"id"});
    return generate_fake_objects({"id"}, spec, count, seed, {});
}

static std::vector<DataObject> real_objects(size_t count) {
    std::vector<DataObject> out;
    for (size_t i = 0; i < count; ++i) {
        DataObject o;
        o.object_id = "real" + std::to_string(i);
        o.pii_key = {"rk" + std::to_string(i)};
        o.kind = ObjectKind::Real;
        o.entries.push_back(entry({"id", "v"}, {"rk" + std::to_string(i), "payload"}));
        out.push_back(std::move(o));
    }
    return out;
}

TEST_CASE("build_pairs: exact 2x case") {
    auto pairs = build_pairs(real_objects(3), fake_objects(6), 1);
    REQUIRE(pairs.size() == 3);
    for (const auto& p : pairs) {
        CHECK(p.real_part.size() == 1);
        CHECK(p.fake0.size() == 1);
        CHECK(p.fake1.size() == 1);
    }
}

TEST_CASE("build_pairs: extras distributed uniformly (counting oracle)") {
    auto pairs = build_pairs(real_objects(2), fake_objects(8), 2);
    REQUIRE(pairs.size() == 2);
    for (const auto& p : pairs) {
        CHECK(p.fake0.size() == 2);
        CHECK(p.fake1.size() == 2);
    }

    // balance rule over a sweep of extra counts: side sizes differ by at
    // most one across pairs, and conservation holds
    for (size_t reals : {1u, 3u, 5u}) {
        for (size_t fakes : {2 * reals, 2 * reals + 1, 2 * reals + 3, 7 * reals}) {
            auto rs = real_objects(reals);
            auto fs = fake_objects(fakes, 17);
            auto ps = build_pairs(rs, fs, 3);
            REQUIRE(ps.size() == reals);
            std::set<std::string> seen;
            size_t min0 = SIZE_MAX, max0 = 0, min1 = SIZE_MAX, max1 = 0;
            for (const auto& p : ps) {
                CHECK(!p.fake0.empty());
                CHECK(!p.fake1.empty());
                for (const auto* side : {&p.fake0, &p.fake1})
                    for (const auto& o : *side) CHECK(seen.insert(o.object_id).second);
                min0 = std::min(min0, p.fake0.size());
                max0 = std::max(max0, p.fake0.size());
                min1 = std::min(min1, p.fake1.size());
                max1 = std::max(max1, p.fake1.size());
            }
            CHECK(seen.size() == fakes);  // conservation: every fake exactly once
            CHECK(max0 - min0 <= 1);
            CHECK(max1 - min1 <= 1);
        }
    }
}

TEST_CASE("build_pairs: fake-only simulation mode") {
    auto pairs = build_pairs({}, fake_objects(20000), 9);
    REQUIRE(pairs.size() == 10000);
    for (size_t i = 0; i < 100; ++i) {
        CHECK(pairs[i].real_part.empty());
        CHECK(pairs[i].fake0.size() == 1);
        CHECK(pairs[i].fake1.size() == 1);
    }
}

TEST_CASE("build_pairs: errors and determinism") {
    CHECK_THROWS_AS(build_pairs(real_objects(3), fake_objects(4), 1), AuditError);
    CHECK_THROWS_AS(build_pairs({}, fake_objects(3), 1), AuditError);

    auto a = build_pairs(real_objects(4), fake_objects(11), 123);
    auto b = build_pairs(real_objects(4), fake_objects(11), 123);
    auto c = build_pairs(real_objects(4), fake_objects(11), 124);
    bool same = true, diff = false;
    for (size_t i = 0; i < a.size(); ++i) {
        same = same && a[i].fake0[0].object_id == b[i].fake0[0].object_id;
        diff = diff || a[i].fake0[0].object_id != c[i].fake0[0].object_id;
    }
    CHECK(same);
    CHECK(diff);  // seed changes the shuffle
}

TEST_CASE("pad_serialize: padding rule and round trip") {
    // payloads of 88 and 90 raw bytes pad to the same multiple of 16 >= 90
    CHECK(padded_length(88) == 96);   // 88+4 -> 96
    CHECK(padded_length(90) == 96);   // 90+4 -> 96
    CHECK(padded_length(92) == 96);
    CHECK(padded_length(93) == 112);

    auto reals = real_objects(2);
    auto fakes = fake_objects(4, 21);
    auto pairs = build_pairs(reals, fakes, 5);
    size_t len = pad_serialize_session(pairs);
    CHECK(len % 16 == 0);
    for (const auto& p : pairs) {
        REQUIRE(p.m0_bytes.size() == len);
        REQUIRE(p.m1_bytes.size() == len);
        auto side0 = deserialize_message(p.m0_bytes);
        REQUIRE(side0.size() == p.real_part.size() + p.fake0.size());
        for (size_t i = 0; i < p.real_part.size(); ++i)
            CHECK(side0[i].object_id == p.real_part[i].object_id);
        for (size_t i = 0; i < p.fake0.size(); ++i) {
            const auto& got = side0[p.real_part.size() + i];
            CHECK(got.object_id == p.fake0[i].object_id);
            CHECK(got.pii_key == p.fake0[i].pii_key);
            CHECK(got.kind == ObjectKind::Fake);
        }
        auto side1 = deserialize_message(p.m1_bytes);
        CHECK(side1[p.real_part.size()].object_id == p.fake1[0].object_id);
    }
}

TEST_CASE("pad_serialize: 1000-pair session lengths are uniform (scan oracle)") {
    auto pairs = build_pairs({}, fake_objects(2000, 31), 6);
    size_t len = pad_serialize_session(pairs);
    size_t n_checked = 0;
    for (const auto& p : pairs) {
        if (p.m0_bytes.size() == len && p.m1_bytes.size() == len) n_checked += 2;
    }
    CHECK(n_checked == 2000);
}

TEST_CASE("pad_serialize: oversize object rejected") {
    auto reals = real_objects(1);
    reals[0].entries[0].values[1] = std::string(100, 'x');
    auto pairs = build_pairs(reals, fake_objects(2, 40), 5);
    CHECK_THROWS_AS(pad_serialize_session(pairs, 64), AuditError);
}

TEST_CASE("infer_column_styles spots digit-shaped columns") {
    std::vector<DataEntry> entries = {
        entry({"ssn", "name"}, {"123-45-6789", "Ann Lee"}),
        entry({"ssn", "name"}, {"987-65-4321", "Bo Chen"}),
    };
    auto styles = infer_column_styles(entries, {"ssn", "name"});
    CHECK(styles[0] == ColumnStyle::Digits);
    CHECK(styles[1] == ColumnStyle::Text);
}
