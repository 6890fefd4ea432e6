#pragma once

#include <memory>

#include "edsc/bytes.hpp"

namespace edsc {

struct KeyPair {
    Bytes public_key;
    Bytes secret_key;
};

/// Signing backend. Signatures are made over 32-byte digests only.
class SignatureScheme {
public:
    virtual ~SignatureScheme() = default;

    virtual KeyPair keypair_from_seed(const Bytes& seed) const = 0;
    virtual Bytes sign(const Bytes& secret_key, const HashDigest& digest) const = 0;
    virtual bool verify(const Bytes& public_key, const HashDigest& digest,
                        const Bytes& signature) const = 0;
};

/// Deterministic keyed-digest scheme for desk-scale simulation runs.
/// pub = H("edsc.pub" || secret); sig = secret || H("edsc.mac" || secret || digest).
/// Verification recomputes both hashes. The signature discloses the secret,
/// which is acceptable only because no in-process adversary exists; it keeps
/// the verify contract (matching key + exact digest, nothing else) at hash speed.
const SignatureScheme& desk_scheme();

/// ECDSA over secp256k1 (OpenSSL). Same contract, real curve.
const SignatureScheme& secp256k1_scheme();

/// The scheme consensus operations verify against. Desk scheme: the
/// experiments need authenticity semantics, not curve arithmetic.
inline const SignatureScheme& protocol_scheme() { return desk_scheme(); }

/// Wire-format signature blob: canonical encoding of (public_key, raw signature).
/// Carrying the key in the blob lets any holder of the signed object verify it
/// and check that the signer key matches the claimed sender address.
Bytes make_signature_blob(const SignatureScheme& scheme, const KeyPair& key,
                          const HashDigest& digest);

/// Verify a blob against a digest and the address it claims to speak for.
bool verify_signature_blob(const SignatureScheme& scheme, const Address& expected_signer,
                           const HashDigest& digest, const Bytes& blob);

}  // namespace edsc
