#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "auditshare/errors.hpp"
#include "auditshare/merkle.hpp"
#include "auditshare/rng.hpp"

using namespace auditshare;
using auditshare::ot::ChoiceVector;
using auditshare::ot::MsgPair;

namespace {

std::vector<std::pair<Bytes, Bytes>> random_messages(size_t n, size_t len, uint64_t seed) {
    DetRng rng(seed, "msgs");
    std::vector<std::pair<Bytes, Bytes>> out(n);
    for (auto& m : out) {
        m.first.resize(len);
        m.second.resize(len);
        rng.fill(m.first.data(), len);
        rng.fill(m.second.data(), len);
    }
    return out;
}

std::vector<MsgPair> views(const std::vector<std::pair<Bytes, Bytes>>& msgs) {
    std::vector<MsgPair> out;
    for (const auto& m : msgs) out.push_back({m.first, m.second});
    return out;
}

// Independent re-implementation: byte-level concatenation hashing.
Hash32 oracle_sending_root(const std::vector<std::pair<Bytes, Bytes>>& msgs) {
    Bytes level;
    for (const auto& m : msgs) {
        Bytes cat;
        Hash32 h0 = sha256(m.first), h1 = sha256(m.second);
        cat.insert(cat.end(), h0.v.begin(), h0.v.end());
        cat.insert(cat.end(), h1.v.begin(), h1.v.end());
        Hash32 pair_hash = sha256(cat);
        level.insert(level.end(), pair_hash.v.begin(), pair_hash.v.end());
    }
    return sha256(level);
}

Hash32 oracle_receiving_root(const std::vector<Bytes>& received) {
    Bytes level;
    for (const auto& m : received) {
        Hash32 h = sha256(m);
        level.insert(level.end(), h.v.begin(), h.v.end());
    }
    return sha256(level);
}

}  // namespace

TEST_CASE("sending tree for one pair unrolls to H(H(H(a)||H(b)))") {
    std::vector<std::pair<Bytes, Bytes>> msgs = {{to_bytes("a"), to_bytes("b")}};
    SendingTree tree = build_sending_tree(views(msgs));

    Bytes cat;
    Hash32 ha = sha256(to_bytes("a")), hb = sha256(to_bytes("b"));
    cat.insert(cat.end(), ha.v.begin(), ha.v.end());
    cat.insert(cat.end(), hb.v.begin(), hb.v.end());
    Hash32 expect = sha256(sha256(cat).view());
    CHECK(tree.root == expect);
    CHECK(tree.pair_count() == 1);
}

TEST_CASE("permuting pair order changes the root") {
    auto msgs = random_messages(4, 16, 7);
    SendingTree t1 = build_sending_tree(views(msgs));
    std::swap(msgs[0], msgs[3]);
    SendingTree t2 = build_sending_tree(views(msgs));
    CHECK(!(t1.root == t2.root));
}

TEST_CASE("1000 random pairs match the second-implementation oracle") {
    auto msgs = random_messages(1000, 48, 9);
    SendingTree tree = build_sending_tree(views(msgs));
    CHECK(tree.root == oracle_sending_root(msgs));

    // notary route: rebuilding from the leaves gives the identical tree
    SendingTree from_leaves = sending_tree_from_leaves(tree.leaf_hashes);
    CHECK(from_leaves.root == tree.root);
    CHECK(from_leaves.pair_hashes == tree.pair_hashes);
}

TEST_CASE("empty session rejected") {
    CHECK_THROWS_AS(build_sending_tree({}), AuditError);
    CHECK_THROWS_AS(build_receiving_root({}), AuditError);
}

TEST_CASE("derive_receiving_root: n=1 choice 0 equals H(H(m00))") {
    std::vector<std::pair<Bytes, Bytes>> msgs = {{to_bytes("m00."), to_bytes("m01.")}};
    SendingTree tree = build_sending_tree(views(msgs));
    ChoiceVector c;
    c.bits = {0};
    ReceivingTreeRoot root = derive_receiving_root(tree, c);
    CHECK(root.root == sha256(sha256(to_bytes("m00.")).view()));
}

TEST_CASE("all-zero vs all-one choices give distinct roots") {
    auto msgs = random_messages(8, 24, 11);
    SendingTree tree = build_sending_tree(views(msgs));
    ChoiceVector zeros, ones;
    zeros.bits.assign(8, 0);
    ones.bits.assign(8, 1);
    CHECK(!(derive_receiving_root(tree, zeros) == derive_receiving_root(tree, ones)));
}

TEST_CASE("derive matches receiver-side build on actual received bytes") {
    auto msgs = random_messages(64, 32, 13);
    SendingTree tree = build_sending_tree(views(msgs));
    DetRng rng(15, "choices");
    ChoiceVector c;
    c.bits.resize(64);
    std::vector<Bytes> received;
    for (size_t i = 0; i < 64; ++i) {
        c.bits[i] = rng.bit();
        received.push_back(c.bits[i] ? msgs[i].second : msgs[i].first);
    }
    ReceivingTreeRoot derived = derive_receiving_root(tree, c);
    ReceivingTreeRoot built = build_receiving_root(received);
    CHECK(derived == built);
    CHECK(built.root == oracle_receiving_root(received));
}

TEST_CASE("binding: any single-byte mutation changes the certified root") {
    auto msgs = random_messages(16, 40, 17);
    Hash32 base = build_sending_tree(views(msgs)).root;
    DetRng rng(19, "mutations");
    for (int trial = 0; trial < 64; ++trial) {
        auto copy = msgs;
        size_t pair = rng.below(16);
        bool side = rng.bit();
        Bytes& target = side ? copy[pair].second : copy[pair].first;
        size_t off = rng.below(target.size());
        uint8_t delta = uint8_t(1 + rng.below(255));
        target[off] ^= delta;
        CHECK(!(build_sending_tree(views(copy)).root == base));
    }
}

TEST_CASE("choice length mismatch rejected") {
    auto msgs = random_messages(4, 16, 21);
    SendingTree tree = build_sending_tree(views(msgs));
    ChoiceVector c;
    c.bits = {0, 1};
    CHECK_THROWS_AS(derive_receiving_root(tree, c), AuditError);
}
