#include "auditshare/merkle.hpp"

#include "auditshare/errors.hpp"
#include "auditshare/parallel.hpp"

namespace auditshare {

static void finish_tree(SendingTree& tree) {
    tree.pair_hashes.resize(tree.leaf_hashes.size());
    for (size_t i = 0; i < tree.leaf_hashes.size(); ++i) {
        Sha256 h;
        h.update(tree.leaf_hashes[i][0]);
        h.update(tree.leaf_hashes[i][1]);
        tree.pair_hashes[i] = h.finish();
    }
    Sha256 root;
    for (const auto& ph : tree.pair_hashes) root.update(ph);
    tree.root = root.finish();
}

SendingTree build_sending_tree(const std::vector<ot::MsgPair>& m_pairs) {
    if (m_pairs.empty()) fail(Err::EmptySession, "sending tree needs at least one pair");
    size_t msg_len = m_pairs[0].m0.size();
    for (const auto& p : m_pairs) {
        if (p.m0.size() != msg_len || p.m1.size() != msg_len)
            fail(Err::LengthMismatch, "tree messages must share one byte length");
    }
    SendingTree tree;
    tree.leaf_hashes.resize(m_pairs.size());
    parallel_for(m_pairs.size(), [&](size_t i) {
        tree.leaf_hashes[i][0] = sha256(m_pairs[i].m0);
        tree.leaf_hashes[i][1] = sha256(m_pairs[i].m1);
    });
    finish_tree(tree);
    return tree;
}

SendingTree sending_tree_from_leaves(std::vector<std::array<Hash32, 2>> leaves) {
    if (leaves.empty()) fail(Err::EmptySession, "sending tree needs at least one pair");
    SendingTree tree;
    tree.leaf_hashes = std::move(leaves);
    finish_tree(tree);
    return tree;
}

ReceivingTreeRoot derive_receiving_root(const SendingTree& tree, const ot::ChoiceVector& choices) {
    if (choices.size() != tree.pair_count())
        fail(Err::LengthMismatch, "choice vector does not match tree pair count");
    Sha256 h;
    for (size_t i = 0; i < tree.pair_count(); ++i)
        h.update(tree.leaf_hashes[i][choices.bits[i] ? 1 : 0]);
    return ReceivingTreeRoot{h.finish()};
}

ReceivingTreeRoot build_receiving_root(const std::vector<Bytes>& received) {
    if (received.empty()) fail(Err::EmptySession, "receiving tree needs at least one message");
    std::vector<Hash32> leaves(received.size());
    parallel_for(received.size(), [&](size_t i) { leaves[i] = sha256(received[i]); });
    Sha256 h;
    for (const auto& leaf : leaves) h.update(leaf);
    return ReceivingTreeRoot{h.finish()};
}

}  // namespace auditshare
