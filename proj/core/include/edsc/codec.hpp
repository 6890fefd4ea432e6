#pragma once

#include <span>
#include <stdexcept>
#include <string>

#include "edsc/types.hpp"

namespace edsc {

/// Raised when bytes fail to decode as a domain object.
class DecodeError : public std::runtime_error {
public:
    explicit DecodeError(const std::string& what) : std::runtime_error(what) {}
};

/// Canonical binary writer. Fixed-width little-endian integers,
/// u32-length-prefixed byte strings, u32-count-prefixed lists,
/// one presence byte for optionals. See docs/formats.md.
class Writer {
public:
    void put_u8(uint8_t v) { buf_.push_back(v); }
    void put_u32(uint32_t v);
    void put_u64(uint64_t v);
    void put_i64(int64_t v) { put_u64(static_cast<uint64_t>(v)); }
    void put_bool(bool v) { put_u8(v ? 1 : 0); }
    void put_raw(std::span<const uint8_t> data) { buf_.insert(buf_.end(), data.begin(), data.end()); }
    void put_bytes(const Bytes& b);
    void put_string(const std::string& s);
    void put_address(const Address& a) { put_raw(std::span(a.bytes)); }
    void put_hash(const HashDigest& h) { put_raw(std::span(h.bytes)); }

    Bytes take() && { return std::move(buf_); }
    const Bytes& data() const { return buf_; }

private:
    Bytes buf_;
};

class Reader {
public:
    explicit Reader(std::span<const uint8_t> data) : data_(data) {}
    explicit Reader(const Bytes& data) : data_(data) {}

    uint8_t get_u8();
    uint32_t get_u32();
    uint64_t get_u64();
    int64_t get_i64() { return static_cast<int64_t>(get_u64()); }
    bool get_bool();
    Bytes get_bytes();
    std::string get_string();
    Address get_address();
    HashDigest get_hash();
    size_t remaining() const { return data_.size() - pos_; }
    void expect_end() const;

private:
    std::span<const uint8_t> data_;
    size_t pos_ = 0;

    void need(size_t n) const;
};

// Canonical encodings. decode_* functions consume the whole buffer and throw
// DecodeError on malformed input.
Bytes encode(const Value& v);
Bytes encode(const EventDefinition& d);
Bytes encode(const EventUpdate& u);
Bytes encode(const SubscriptionParams& p);
Bytes encode(const ScriptAction& a);
Bytes encode(const ContractScript& c);
Bytes encode(const ProtocolMessage& m);
Bytes encode(const TriggeredExecution& e);
Bytes encode(const Receipt& r);
Bytes encode(const Block& b);
Bytes encode(const Account& a);

Value decode_value(const Bytes& data);
EventDefinition decode_event_definition(const Bytes& data);
EventUpdate decode_event_update(const Bytes& data);
SubscriptionParams decode_subscription_params(const Bytes& data);
ProtocolMessage decode_protocol_message(const Bytes& data);
TriggeredExecution decode_triggered_execution(const Bytes& data);
Receipt decode_receipt(const Bytes& data);
Block decode_block(const Bytes& data);
Account decode_account(const Bytes& data);

// In-stream (non-terminal) variants used by composite decoders.
void write_value(Writer& w, const Value& v);
Value read_value(Reader& r);
void write_event_update(Writer& w, const EventUpdate& u);
EventUpdate read_event_update(Reader& r);
void write_subscription_params(Writer& w, const SubscriptionParams& p);
SubscriptionParams read_subscription_params(Reader& r);
void write_protocol_message(Writer& w, const ProtocolMessage& m);
ProtocolMessage read_protocol_message(Reader& r);
void write_triggered_execution(Writer& w, const TriggeredExecution& e);
TriggeredExecution read_triggered_execution(Reader& r);

// Identity digests.
HashDigest digest_of(const EventUpdate& u);
HashDigest digest_of(const ProtocolMessage& m);
HashDigest digest_of(const TriggeredExecution& e);
HashDigest digest_of(const Block& b);

// Digests signed by senders: the object with its signature field blanked.
HashDigest signing_digest(const EventUpdate& u);
HashDigest signing_digest(const ProtocolMessage& m);

/// Canonical bytes of a definition with the event_id field zeroed, the
/// preimage of event-id derivation.
Bytes definition_identity_bytes(const EventDefinition& d);

}  // namespace edsc
