#pragma once

#include "auditshare/crypto.hpp"
#include "auditshare/otransfer.hpp"

// The two audit structures binding a sharing session. Both follow the flat
// concatenation form: the root hashes the ordered concatenation of the layer
// below, one slot per pair.
//
//   SendingTree   root = H( H(H(m_{0,0})||H(m_{0,1})) || ... )   (three layers)
//   ReceivingTree root = H( H(m_{0,b_0}) || H(m_{1,b_1}) || ... ) (two layers)

namespace auditshare {

struct SendingTree {
    // leaf_hashes[i] = { H(m_{i,0}), H(m_{i,1}) }
    std::vector<std::array<Hash32, 2>> leaf_hashes;
    std::vector<Hash32> pair_hashes;
    Hash32 root;

    size_t pair_count() const { return leaf_hashes.size(); }
};

struct ReceivingTreeRoot {
    Hash32 root;

    bool operator==(const ReceivingTreeRoot&) const = default;
};

SendingTree build_sending_tree(const std::vector<ot::MsgPair>& m_pairs);

// Rebuilds the interior layers from the leaves (the notary's view: it never
// sees message bytes, only leaf hashes).
SendingTree sending_tree_from_leaves(std::vector<std::array<Hash32, 2>> leaves);

// Receiving root the notary expects given the tree and the committed choices.
ReceivingTreeRoot derive_receiving_root(const SendingTree& tree, const ot::ChoiceVector& choices);

// Receiving root over the messages the receiver actually holds.
ReceivingTreeRoot build_receiving_root(const std::vector<Bytes>& received);

}  // namespace auditshare
