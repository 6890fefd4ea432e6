#include "edsc/codec.hpp"

#include <cstring>
#include <limits>

#include "edsc/hash.hpp"

namespace edsc {

// ---------------------------------------------------------------------------
// Writer / Reader primitives

void Writer::put_u32(uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

void Writer::put_u64(uint64_t v) {
    for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

void Writer::put_bytes(const Bytes& b) {
    if (b.size() > std::numeric_limits<uint32_t>::max()) throw DecodeError("byte string too long");
    put_u32(static_cast<uint32_t>(b.size()));
    put_raw(b);
}

void Writer::put_string(const std::string& s) {
    put_u32(static_cast<uint32_t>(s.size()));
    put_raw(std::span(reinterpret_cast<const uint8_t*>(s.data()), s.size()));
}

void Reader::need(size_t n) const {
    if (pos_ + n > data_.size()) throw DecodeError("truncated input");
}

uint8_t Reader::get_u8() {
    need(1);
    return data_[pos_++];
}

uint32_t Reader::get_u32() {
    need(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(data_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
}

uint64_t Reader::get_u64() {
    need(8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(data_[pos_ + i]) << (8 * i);
    pos_ += 8;
    return v;
}

bool Reader::get_bool() {
    uint8_t b = get_u8();
    if (b > 1) throw DecodeError("bad bool byte");
    return b == 1;
}

Bytes Reader::get_bytes() {
    uint32_t len = get_u32();
    need(len);
    Bytes out(data_.begin() + pos_, data_.begin() + pos_ + len);
    pos_ += len;
    return out;
}

std::string Reader::get_string() {
    uint32_t len = get_u32();
    need(len);
    std::string out(reinterpret_cast<const char*>(data_.data() + pos_), len);
    pos_ += len;
    return out;
}

Address Reader::get_address() {
    need(20);
    Address a;
    std::memcpy(a.bytes.data(), data_.data() + pos_, 20);
    pos_ += 20;
    return a;
}

HashDigest Reader::get_hash() {
    need(32);
    HashDigest h;
    std::memcpy(h.bytes.data(), data_.data() + pos_, 32);
    pos_ += 32;
    return h;
}

void Reader::expect_end() const {
    if (pos_ != data_.size()) throw DecodeError("trailing bytes");
}

namespace {

void write_optional_bytes(Writer& w, const std::optional<Bytes>& b) {
    w.put_bool(b.has_value());
    if (b) w.put_bytes(*b);
}

std::optional<Bytes> read_optional_bytes(Reader& r) {
    if (!r.get_bool()) return std::nullopt;
    return r.get_bytes();
}

ValueType read_value_type(Reader& r) {
    uint8_t t = r.get_u8();
    if (t > 3) throw DecodeError("bad value type tag");
    return static_cast<ValueType>(t);
}

}  // namespace

// ---------------------------------------------------------------------------
// Values

void write_value(Writer& w, const Value& v) {
    w.put_u8(static_cast<uint8_t>(v.type()));
    switch (v.type()) {
        case ValueType::Int: w.put_i64(std::get<int64_t>(v.v)); break;
        case ValueType::Bytes: w.put_bytes(std::get<Bytes>(v.v)); break;
        case ValueType::Address: w.put_address(std::get<Address>(v.v)); break;
        case ValueType::Bool: w.put_bool(std::get<bool>(v.v)); break;
    }
}

Value read_value(Reader& r) {
    switch (read_value_type(r)) {
        case ValueType::Int: return Value::of_int(r.get_i64());
        case ValueType::Bytes: return Value::of_bytes(r.get_bytes());
        case ValueType::Address: return Value::of_address(r.get_address());
        case ValueType::Bool: return Value::of_bool(r.get_bool());
    }
    throw DecodeError("unreachable");
}

// ---------------------------------------------------------------------------
// Event definitions

static void write_event_definition(Writer& w, const EventDefinition& d) {
    w.put_address(d.event_id);
    w.put_address(d.creator);
    w.put_u32(static_cast<uint32_t>(d.variables.size()));
    for (const auto& [name, type] : d.variables) {
        w.put_string(name);
        w.put_u8(static_cast<uint8_t>(type));
    }
    w.put_string(d.comments);
}

static EventDefinition read_event_definition(Reader& r) {
    EventDefinition d;
    d.event_id = r.get_address();
    d.creator = r.get_address();
    uint32_t n = r.get_u32();
    d.variables.reserve(n);
    for (uint32_t i = 0; i < n; ++i) {
        std::string name = r.get_string();
        ValueType t = read_value_type(r);
        d.variables.emplace_back(std::move(name), t);
    }
    d.comments = r.get_string();
    return d;
}

// ---------------------------------------------------------------------------
// Event updates

void write_event_update(Writer& w, const EventUpdate& u) {
    w.put_address(u.event_id);
    w.put_address(u.publisher);
    w.put_bytes(u.publisher_key);
    w.put_u64(u.nonce);
    w.put_u32(static_cast<uint32_t>(u.payload.size()));
    for (const Value& v : u.payload) write_value(w, v);
    w.put_u64(u.subscription_fee);
    w.put_u64(u.inclusion_fee);
    w.put_u8(static_cast<uint8_t>(u.origin));
    write_optional_bytes(w, u.signature);
}

EventUpdate read_event_update(Reader& r) {
    EventUpdate u;
    u.event_id = r.get_address();
    u.publisher = r.get_address();
    u.publisher_key = r.get_bytes();
    u.nonce = r.get_u64();
    uint32_t n = r.get_u32();
    u.payload.reserve(n);
    for (uint32_t i = 0; i < n; ++i) u.payload.push_back(read_value(r));
    u.subscription_fee = r.get_u64();
    u.inclusion_fee = r.get_u64();
    uint8_t origin = r.get_u8();
    if (origin > 2) throw DecodeError("bad update origin");
    u.origin = static_cast<UpdateOrigin>(origin);
    u.signature = read_optional_bytes(r);
    return u;
}

// ---------------------------------------------------------------------------
// Subscription parameters

void write_subscription_params(Writer& w, const SubscriptionParams& p) {
    w.put_address(p.event_id);
    w.put_u64(p.gas_price);
    w.put_u64(p.gas_limit);
    w.put_u64(p.max_subscription_fee);
    w.put_u32(static_cast<uint32_t>(p.publisher_filter.size()));
    for (const Bytes& k : p.publisher_filter) w.put_bytes(k);
    w.put_u64(p.block_rate);
    w.put_u64(p.event_rate);
    w.put_string(p.constraint);
    w.put_bytes(p.subscriber_data);
}

SubscriptionParams read_subscription_params(Reader& r) {
    SubscriptionParams p;
    p.event_id = r.get_address();
    p.gas_price = r.get_u64();
    p.gas_limit = r.get_u64();
    p.max_subscription_fee = r.get_u64();
    uint32_t n = r.get_u32();
    p.publisher_filter.reserve(n);
    for (uint32_t i = 0; i < n; ++i) p.publisher_filter.push_back(r.get_bytes());
    p.block_rate = r.get_u64();
    p.event_rate = r.get_u64();
    p.constraint = r.get_string();
    p.subscriber_data = r.get_bytes();
    return p;
}

// ---------------------------------------------------------------------------
// Contract scripts

static void write_script_action(Writer& w, const ScriptAction& a) {
    w.put_u8(static_cast<uint8_t>(a.kind));
    switch (a.kind) {
        case ScriptAction::Kind::ConsumeGas:
            w.put_u64(a.gas_amount);
            break;
        case ScriptAction::Kind::EmitEvent:
            w.put_address(a.event_id);
            w.put_u32(static_cast<uint32_t>(a.payload_template.size()));
            for (const TemplateValue& t : a.payload_template) {
                w.put_u8(static_cast<uint8_t>(t.kind));
                if (t.kind == TemplateValue::Kind::Literal)
                    write_value(w, t.literal);
                else
                    w.put_u32(t.payload_index);
            }
            w.put_u64(a.emit_subscription_fee);
            break;
        case ScriptAction::Kind::Transfer:
            w.put_address(a.transfer_to);
            w.put_u64(a.transfer_amount);
            break;
        case ScriptAction::Kind::RevertIf:
            w.put_u8(static_cast<uint8_t>(a.predicate.kind));
            w.put_u32(a.predicate.payload_index);
            w.put_i64(a.predicate.int_value);
            w.put_u64(a.predicate.amount);
            break;
        case ScriptAction::Kind::Subscribe:
            write_subscription_params(w, a.subscribe_params);
            break;
        case ScriptAction::Kind::Noop:
            break;
    }
}

static ScriptAction read_script_action(Reader& r) {
    ScriptAction a;
    uint8_t kind = r.get_u8();
    if (kind > 5) throw DecodeError("bad script action tag");
    a.kind = static_cast<ScriptAction::Kind>(kind);
    switch (a.kind) {
        case ScriptAction::Kind::ConsumeGas:
            a.gas_amount = r.get_u64();
            break;
        case ScriptAction::Kind::EmitEvent: {
            a.event_id = r.get_address();
            uint32_t n = r.get_u32();
            a.payload_template.reserve(n);
            for (uint32_t i = 0; i < n; ++i) {
                TemplateValue t;
                uint8_t tk = r.get_u8();
                if (tk > 1) throw DecodeError("bad template tag");
                t.kind = static_cast<TemplateValue::Kind>(tk);
                if (t.kind == TemplateValue::Kind::Literal)
                    t.literal = read_value(r);
                else
                    t.payload_index = r.get_u32();
                a.payload_template.push_back(std::move(t));
            }
            a.emit_subscription_fee = r.get_u64();
            break;
        }
        case ScriptAction::Kind::Transfer:
            a.transfer_to = r.get_address();
            a.transfer_amount = r.get_u64();
            break;
        case ScriptAction::Kind::RevertIf: {
            uint8_t pk = r.get_u8();
            if (pk > 3) throw DecodeError("bad predicate tag");
            a.predicate.kind = static_cast<RevertPredicate::Kind>(pk);
            a.predicate.payload_index = r.get_u32();
            a.predicate.int_value = r.get_i64();
            a.predicate.amount = r.get_u64();
            break;
        }
        case ScriptAction::Kind::Subscribe:
            a.subscribe_params = read_subscription_params(r);
            break;
        case ScriptAction::Kind::Noop:
            break;
    }
    return a;
}

static void write_contract_script(Writer& w, const ContractScript& c) {
    w.put_address(c.address);
    w.put_u32(static_cast<uint32_t>(c.on_trigger.size()));
    for (const ScriptAction& a : c.on_trigger) write_script_action(w, a);
}

static ContractScript read_contract_script(Reader& r) {
    ContractScript c;
    c.address = r.get_address();
    uint32_t n = r.get_u32();
    c.on_trigger.reserve(n);
    for (uint32_t i = 0; i < n; ++i) c.on_trigger.push_back(read_script_action(r));
    return c;
}

// ---------------------------------------------------------------------------
// Protocol messages

void write_protocol_message(Writer& w, const ProtocolMessage& m) {
    w.put_u8(static_cast<uint8_t>(m.kind));
    w.put_address(m.sender);
    w.put_u64(m.sender_nonce);
    w.put_u64(m.inclusion_fee);
    switch (m.kind) {
        case MessageKind::EventCreate:
            write_event_definition(w, std::get<EventCreateBody>(m.body).definition);
            break;
        case MessageKind::Subscribe: {
            const auto& b = std::get<SubscribeBody>(m.body);
            w.put_address(b.subscriber);
            write_subscription_params(w, b.params);
            break;
        }
        case MessageKind::Unsubscribe: {
            const auto& b = std::get<UnsubscribeBody>(m.body);
            w.put_address(b.event_id);
            w.put_address(b.subscriber);
            w.put_u64(b.ordinal);
            break;
        }
        case MessageKind::SubscriptionUpdate: {
            const auto& b = std::get<SubscriptionUpdateBody>(m.body);
            w.put_address(b.event_id);
            w.put_address(b.subscriber);
            w.put_u64(b.ordinal);
            write_subscription_params(w, b.new_params);
            break;
        }
        case MessageKind::TransferEvent: {
            const auto& b = std::get<TransferBody>(m.body);
            w.put_address(b.recipient);
            w.put_u64(b.amount);
            break;
        }
        case MessageKind::DeployEvent: {
            const auto& b = std::get<DeployBody>(m.body);
            w.put_u32(static_cast<uint32_t>(b.on_trigger.size()));
            for (const ScriptAction& a : b.on_trigger) write_script_action(w, a);
            w.put_u64(b.endowment);
            w.put_u64(b.trigger_gas_price);
            w.put_u64(b.trigger_gas_limit);
            break;
        }
        case MessageKind::ExternalEventUpdate:
            write_event_update(w, std::get<ExternalEventUpdateBody>(m.body).update);
            break;
    }
    write_optional_bytes(w, m.signature);
}

ProtocolMessage read_protocol_message(Reader& r) {
    ProtocolMessage m;
    uint8_t kind = r.get_u8();
    if (kind > 6) throw DecodeError("bad message kind");
    m.kind = static_cast<MessageKind>(kind);
    m.sender = r.get_address();
    m.sender_nonce = r.get_u64();
    m.inclusion_fee = r.get_u64();
    switch (m.kind) {
        case MessageKind::EventCreate:
            m.body = EventCreateBody{read_event_definition(r)};
            break;
        case MessageKind::Subscribe: {
            SubscribeBody b;
            b.subscriber = r.get_address();
            b.params = read_subscription_params(r);
            m.body = std::move(b);
            break;
        }
        case MessageKind::Unsubscribe: {
            UnsubscribeBody b;
            b.event_id = r.get_address();
            b.subscriber = r.get_address();
            b.ordinal = r.get_u64();
            m.body = b;
            break;
        }
        case MessageKind::SubscriptionUpdate: {
            SubscriptionUpdateBody b;
            b.event_id = r.get_address();
            b.subscriber = r.get_address();
            b.ordinal = r.get_u64();
            b.new_params = read_subscription_params(r);
            m.body = std::move(b);
            break;
        }
        case MessageKind::TransferEvent: {
            TransferBody b;
            b.recipient = r.get_address();
            b.amount = r.get_u64();
            m.body = b;
            break;
        }
        case MessageKind::DeployEvent: {
            DeployBody b;
            uint32_t n = r.get_u32();
            b.on_trigger.reserve(n);
            for (uint32_t i = 0; i < n; ++i) b.on_trigger.push_back(read_script_action(r));
            b.endowment = r.get_u64();
            b.trigger_gas_price = r.get_u64();
            b.trigger_gas_limit = r.get_u64();
            m.body = std::move(b);
            break;
        }
        case MessageKind::ExternalEventUpdate:
            m.body = ExternalEventUpdateBody{read_event_update(r)};
            break;
    }
    m.signature = read_optional_bytes(r);
    return m;
}

// ---------------------------------------------------------------------------
// Triggered executions, receipts, blocks, accounts

void write_triggered_execution(Writer& w, const TriggeredExecution& e) {
    w.put_address(e.event_id);
    w.put_address(e.subscriber);
    w.put_u64(e.ordinal);
    w.put_hash(e.triggering_update);
    w.put_u64(e.gas_price);
    w.put_u64(e.gas_limit);
    w.put_u64(e.subscription_fee_paid);
    w.put_bytes(e.subscriber_data);
}

TriggeredExecution read_triggered_execution(Reader& r) {
    TriggeredExecution e;
    e.event_id = r.get_address();
    e.subscriber = r.get_address();
    e.ordinal = r.get_u64();
    e.triggering_update = r.get_hash();
    e.gas_price = r.get_u64();
    e.gas_limit = r.get_u64();
    e.subscription_fee_paid = r.get_u64();
    e.subscriber_data = r.get_bytes();
    return e;
}

static void write_receipt(Writer& w, const Receipt& rc) {
    w.put_hash(rc.tx_digest);
    w.put_u8(static_cast<uint8_t>(rc.status));
    w.put_u64(rc.gas_used);
    w.put_u64(rc.miner_fee);
    w.put_u64(rc.subscription_fee);
    w.put_address(rc.publisher);
    w.put_u32(static_cast<uint32_t>(rc.emitted_events.size()));
    for (const HashDigest& h : rc.emitted_events) w.put_hash(h);
}

static Receipt read_receipt(Reader& r) {
    Receipt rc;
    rc.tx_digest = r.get_hash();
    uint8_t st = r.get_u8();
    if (st > 1) throw DecodeError("bad receipt status");
    rc.status = static_cast<ReceiptStatus>(st);
    rc.gas_used = r.get_u64();
    rc.miner_fee = r.get_u64();
    rc.subscription_fee = r.get_u64();
    rc.publisher = r.get_address();
    uint32_t n = r.get_u32();
    rc.emitted_events.reserve(n);
    for (uint32_t i = 0; i < n; ++i) rc.emitted_events.push_back(r.get_hash());
    return rc;
}

static void write_block(Writer& w, const Block& b) {
    w.put_u64(b.number);
    w.put_hash(b.parent);
    w.put_u64(b.timestamp_ms);
    w.put_address(b.miner);
    w.put_u64(b.gas_limit);
    w.put_u64(b.gas_used);
    w.put_hash(b.state_root);
    w.put_hash(b.event_state_root);
    w.put_hash(b.receipts_root);
    w.put_u32(static_cast<uint32_t>(b.external_messages.size()));
    for (const ProtocolMessage& m : b.external_messages) write_protocol_message(w, m);
    w.put_u32(static_cast<uint32_t>(b.executions.size()));
    for (const TriggeredExecution& e : b.executions) write_triggered_execution(w, e);
}

static Block read_block(Reader& r) {
    Block b;
    b.number = r.get_u64();
    b.parent = r.get_hash();
    b.timestamp_ms = r.get_u64();
    b.miner = r.get_address();
    b.gas_limit = r.get_u64();
    b.gas_used = r.get_u64();
    b.state_root = r.get_hash();
    b.event_state_root = r.get_hash();
    b.receipts_root = r.get_hash();
    uint32_t nm = r.get_u32();
    b.external_messages.reserve(nm);
    for (uint32_t i = 0; i < nm; ++i) b.external_messages.push_back(read_protocol_message(r));
    uint32_t ne = r.get_u32();
    b.executions.reserve(ne);
    for (uint32_t i = 0; i < ne; ++i) b.executions.push_back(read_triggered_execution(r));
    return b;
}

static void write_account(Writer& w, const Account& a) {
    w.put_address(a.address);
    w.put_u64(a.balance);
    w.put_u64(a.nonce);
    w.put_u8(static_cast<uint8_t>(a.kind));
}

static Account read_account(Reader& r) {
    Account a;
    a.address = r.get_address();
    a.balance = r.get_u64();
    a.nonce = r.get_u64();
    uint8_t k = r.get_u8();
    if (k > 1) throw DecodeError("bad account kind");
    a.kind = static_cast<AccountKind>(k);
    return a;
}

// ---------------------------------------------------------------------------
// Top-level encode/decode

template <typename T, typename WriteFn>
static Bytes encode_with(const T& x, WriteFn fn) {
    Writer w;
    fn(w, x);
    return std::move(w).take();
}

template <typename ReadFn>
static auto decode_with(const Bytes& data, ReadFn fn) {
    Reader r(data);
    auto x = fn(r);
    r.expect_end();
    return x;
}

Bytes encode(const Value& v) { return encode_with(v, write_value); }
Bytes encode(const EventDefinition& d) { return encode_with(d, write_event_definition); }
Bytes encode(const EventUpdate& u) { return encode_with(u, write_event_update); }
Bytes encode(const SubscriptionParams& p) { return encode_with(p, write_subscription_params); }
Bytes encode(const ScriptAction& a) { return encode_with(a, write_script_action); }
Bytes encode(const ContractScript& c) { return encode_with(c, write_contract_script); }
Bytes encode(const ProtocolMessage& m) { return encode_with(m, write_protocol_message); }
Bytes encode(const TriggeredExecution& e) { return encode_with(e, write_triggered_execution); }
Bytes encode(const Receipt& r) { return encode_with(r, write_receipt); }
Bytes encode(const Block& b) { return encode_with(b, write_block); }
Bytes encode(const Account& a) { return encode_with(a, write_account); }

Value decode_value(const Bytes& d) { return decode_with(d, read_value); }
EventDefinition decode_event_definition(const Bytes& d) {
    return decode_with(d, read_event_definition);
}
EventUpdate decode_event_update(const Bytes& d) { return decode_with(d, read_event_update); }
SubscriptionParams decode_subscription_params(const Bytes& d) {
    return decode_with(d, read_subscription_params);
}
ProtocolMessage decode_protocol_message(const Bytes& d) {
    return decode_with(d, read_protocol_message);
}
TriggeredExecution decode_triggered_execution(const Bytes& d) {
    return decode_with(d, read_triggered_execution);
}
Receipt decode_receipt(const Bytes& d) { return decode_with(d, read_receipt); }
Block decode_block(const Bytes& d) { return decode_with(d, read_block); }
Account decode_account(const Bytes& d) { return decode_with(d, read_account); }

HashDigest digest_of(const EventUpdate& u) { return sha256(encode(u)); }
HashDigest digest_of(const ProtocolMessage& m) { return sha256(encode(m)); }
HashDigest digest_of(const TriggeredExecution& e) { return sha256(encode(e)); }
HashDigest digest_of(const Block& b) { return sha256(encode(b)); }

HashDigest signing_digest(const EventUpdate& u) {
    EventUpdate unsigned_copy = u;
    unsigned_copy.signature.reset();
    return sha256(encode(unsigned_copy));
}

HashDigest signing_digest(const ProtocolMessage& m) {
    ProtocolMessage unsigned_copy = m;
    unsigned_copy.signature.reset();
    return sha256(encode(unsigned_copy));
}

Bytes definition_identity_bytes(const EventDefinition& d) {
    EventDefinition zeroed = d;
    zeroed.event_id = Address{};
    return encode(zeroed);
}

}  // namespace edsc
