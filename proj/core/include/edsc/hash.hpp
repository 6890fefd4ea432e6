#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "edsc/bytes.hpp"

namespace edsc {

/// SHA-256. The single hash function used everywhere in the protocol.
HashDigest sha256(std::span<const uint8_t> data);
HashDigest sha256(const Bytes& data);
HashDigest sha256(std::string_view data);

/// First 20 bytes of sha256(creator || definition_bytes).
Address derive_event_id(const Address& creator, const Bytes& definition_bytes);

/// External account address: first 20 bytes of sha256(public_key).
Address address_of_key(const Bytes& public_key);

/// Binary Merkle root over a leaf list: parent = sha256(left || right),
/// odd level duplicates its last node. Empty list hashes the empty string.
HashDigest merkle_root(std::vector<HashDigest> leaves);

}  // namespace edsc
