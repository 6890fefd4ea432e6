#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "edsc/bytes.hpp"

namespace edsc {

using Tokens = uint64_t;
using Gas = uint64_t;
using Height = uint64_t;

// ---------------------------------------------------------------------------
// Typed payload values

enum class ValueType : uint8_t { Int = 0, Bytes = 1, Address = 2, Bool = 3 };

struct Value {
    std::variant<int64_t, Bytes, Address, bool> v;

    ValueType type() const { return static_cast<ValueType>(v.index()); }
    bool operator==(const Value&) const = default;

    static Value of_int(int64_t x) { return Value{x}; }
    static Value of_bytes(Bytes b) { return Value{std::move(b)}; }
    static Value of_address(Address a) { return Value{a}; }
    static Value of_bool(bool b) { return Value{b}; }
};

// ---------------------------------------------------------------------------
// Event registry entries

struct EventDefinition {
    Address event_id;  // derived: first 20 bytes of H(creator || encoding with zero id)
    Address creator;
    std::vector<std::pair<std::string, ValueType>> variables;
    std::string comments;

    bool operator==(const EventDefinition&) const = default;
};

enum class UpdateOrigin : uint8_t { External = 0, Internal = 1, System = 2 };

/// A published instance of a registered event type.
struct EventUpdate {
    Address event_id;
    Address publisher;
    Bytes publisher_key;  // signing key (external) or 20-byte contract address (internal)
    uint64_t nonce = 0;   // strictly increasing per (event_id, publisher)
    std::vector<Value> payload;
    Tokens subscription_fee = 0;  // paid by each triggered subscriber to the publisher
    Tokens inclusion_fee = 0;     // paid to the miner; zero unless external
    UpdateOrigin origin = UpdateOrigin::External;
    std::optional<Bytes> signature;  // present iff external

    bool operator==(const EventUpdate&) const = default;
};

// ---------------------------------------------------------------------------
// Subscription parameters (the Subscribe message body carries these)

struct SubscriptionParams {
    Address event_id;
    Tokens gas_price = 1;  // tokens per gas unit the subscriber pays for execution
    Gas gas_limit = 100000;
    Tokens max_subscription_fee = 0;
    std::vector<Bytes> publisher_filter;  // empty = any publisher
    uint64_t block_rate = 0;              // 0 = unlimited, else >= N blocks between triggers
    uint64_t event_rate = 0;              // 0 = every instance, else every k-th instance
    std::string constraint;               // predicate DSL text, empty = always true
    Bytes subscriber_data;

    bool operator==(const SubscriptionParams&) const = default;
};

// ---------------------------------------------------------------------------
// Contract scripts

struct RevertPredicate {
    enum class Kind : uint8_t { Never = 0, Always = 1, PayloadIntGt = 2, BalanceBelow = 3 };
    Kind kind = Kind::Never;
    uint32_t payload_index = 0;
    int64_t int_value = 0;
    Tokens amount = 0;

    bool operator==(const RevertPredicate&) const = default;
};

/// Payload template entry for emitted events: a literal or a field spliced
/// from the triggering update's payload.
struct TemplateValue {
    enum class Kind : uint8_t { Literal = 0, FromPayload = 1 };
    Kind kind = Kind::Literal;
    Value literal;
    uint32_t payload_index = 0;

    bool operator==(const TemplateValue&) const = default;
};

struct ScriptAction {
    enum class Kind : uint8_t {
        ConsumeGas = 0,
        EmitEvent = 1,
        Transfer = 2,
        RevertIf = 3,
        Subscribe = 4,
        Noop = 5,
    };
    Kind kind = Kind::Noop;
    Gas gas_amount = 0;                   // ConsumeGas
    Address event_id;                     // EmitEvent
    std::vector<TemplateValue> payload_template;  // EmitEvent
    Tokens emit_subscription_fee = 0;     // EmitEvent
    Address transfer_to;                  // Transfer
    Tokens transfer_amount = 0;           // Transfer
    RevertPredicate predicate;            // RevertIf
    SubscriptionParams subscribe_params;  // Subscribe

    bool operator==(const ScriptAction&) const = default;
};

struct ContractScript {
    Address address;
    std::vector<ScriptAction> on_trigger;

    bool operator==(const ContractScript&) const = default;
};

// ---------------------------------------------------------------------------
// On-chain protocol messages

enum class MessageKind : uint8_t {
    EventCreate = 0,
    Subscribe = 1,
    Unsubscribe = 2,
    SubscriptionUpdate = 3,
    TransferEvent = 4,
    DeployEvent = 5,
    ExternalEventUpdate = 6,
};

struct EventCreateBody {
    EventDefinition definition;  // event_id field zeroed; the registry derives it
    bool operator==(const EventCreateBody&) const = default;
};
struct SubscribeBody {
    Address subscriber;  // the contract being subscribed
    SubscriptionParams params;
    bool operator==(const SubscribeBody&) const = default;
};
struct UnsubscribeBody {
    Address event_id;
    Address subscriber;
    uint64_t ordinal = 0;
    bool operator==(const UnsubscribeBody&) const = default;
};
struct SubscriptionUpdateBody {
    Address event_id;
    Address subscriber;
    uint64_t ordinal = 0;
    SubscriptionParams new_params;
    bool operator==(const SubscriptionUpdateBody&) const = default;
};
struct TransferBody {
    Address recipient;
    Tokens amount = 0;
    bool operator==(const TransferBody&) const = default;
};
struct DeployBody {
    std::vector<ScriptAction> on_trigger;
    Tokens endowment = 0;
    Tokens trigger_gas_price = 1;  // gas terms of the contract's default transfer subscription
    Gas trigger_gas_limit = 100000;
    bool operator==(const DeployBody&) const = default;
};
struct ExternalEventUpdateBody {
    EventUpdate update;
    bool operator==(const ExternalEventUpdateBody&) const = default;
};

using MessageBody = std::variant<EventCreateBody, SubscribeBody, UnsubscribeBody,
                                 SubscriptionUpdateBody, TransferBody, DeployBody,
                                 ExternalEventUpdateBody>;

struct ProtocolMessage {
    MessageKind kind = MessageKind::TransferEvent;
    Address sender;
    uint64_t sender_nonce = 0;
    Tokens inclusion_fee = 0;
    MessageBody body = TransferBody{};
    std::optional<Bytes> signature;

    bool operator==(const ProtocolMessage&) const = default;
};

// ---------------------------------------------------------------------------
// Triggered executions, receipts, blocks

struct TriggeredExecution {
    Address event_id;
    Address subscriber;
    uint64_t ordinal = 0;  // subscription creation ordinal (priority tie-break)
    HashDigest triggering_update;
    Tokens gas_price = 0;
    Gas gas_limit = 0;
    Tokens subscription_fee_paid = 0;
    Bytes subscriber_data;

    bool operator==(const TriggeredExecution&) const = default;
};

enum class ReceiptStatus : uint8_t { Success = 0, Reverted = 1 };

struct Receipt {
    HashDigest tx_digest;
    ReceiptStatus status = ReceiptStatus::Success;
    Gas gas_used = 0;
    Tokens miner_fee = 0;         // tokens paid to the miner
    Tokens subscription_fee = 0;  // tokens paid to the publisher
    Address publisher;            // recipient of the subscription fee (zero if none)
    std::vector<HashDigest> emitted_events;

    bool operator==(const Receipt&) const = default;
};

struct Block {
    Height number = 0;
    HashDigest parent;
    uint64_t timestamp_ms = 0;
    Address miner;
    Gas gas_limit = 0;
    Gas gas_used = 0;
    HashDigest state_root;
    HashDigest event_state_root;
    HashDigest receipts_root;
    std::vector<ProtocolMessage> external_messages;  // in execution order
    std::vector<TriggeredExecution> executions;      // in execution order

    bool operator==(const Block&) const = default;
};

// ---------------------------------------------------------------------------
// Accounts and protocol parameters

enum class AccountKind : uint8_t { External = 0, Contract = 1 };

struct Account {
    Address address;
    Tokens balance = 0;
    uint64_t nonce = 0;
    AccountKind kind = AccountKind::External;

    bool operator==(const Account&) const = default;
};

struct GasSchedule {
    Gas event_create_gas = 40000;
    Gas subscribe_gas = 30000;
    Gas subscription_update_gas = 20000;
    Gas deploy_gas = 60000;
    Gas transfer_gas = 21000;
    Gas base_trigger_gas = 21000;
    Gas eval_gas_per_node = 3;

    bool operator==(const GasSchedule&) const = default;
};

struct RateLimits {
    uint64_t max_updates_per_account_per_epoch = 32;
    uint64_t max_triggers_per_event_update = 64;      // k
    uint64_t max_triggers_per_account_per_epoch = 16; // m
    uint64_t epoch_length = 1;                        // blocks
    uint64_t buffer_capacity = 4096;

    bool operator==(const RateLimits&) const = default;
};

struct ProtocolParams {
    GasSchedule gas;
    RateLimits limits;
    uint64_t activation_delay = 2;      // blocks before subscription changes apply
    Tokens block_reward = 0;
    uint64_t update_budget_per_block = 256;

    bool operator==(const ProtocolParams&) const = default;
};

// ---------------------------------------------------------------------------
// Well-known system identities

/// Creator of the pre-registered system events; also the "publisher" of
/// system-generated updates.
inline Address system_address() { return Address{}; }

/// Pre-registered definition of the per-block system event: payload
/// (number: int, time: int).
EventDefinition new_block_event_definition();

/// Pre-registered definition of the token-transfer event: payload
/// (from: address, to: address, amount: int).
EventDefinition transfer_event_definition();

Address new_block_event_id();
Address transfer_event_id();

}  // namespace edsc
