#pragma once

#include <functional>
#include <map>
#include <string>

#include "edsc/result.hpp"
#include "edsc/types.hpp"

namespace edsc {

enum class EventStateError {
    DuplicateEvent,
    InvalidSignature,
    UnknownEvent,
    UnknownContract,
    NoSuchSubscription,
    BadConstraint,
};

const char* to_string(EventStateError e);

/// A scheduled change to a subscription: new parameters, or removal when
/// params is empty. Changes take effect once effective_block <= current block;
/// the old parameters govern until then.
struct PendingChange {
    Height effective_block = 0;
    std::optional<SubscriptionParams> params;

    bool operator==(const PendingChange&) const = default;
};

struct Subscription {
    Address event_id;
    Address subscriber;
    uint64_t ordinal = 0;  // global creation counter; never changes across updates
    SubscriptionParams params;
    Height activation_block = 0;
    Height last_trigger_block = 0;
    uint64_t instance_counter = 0;
    std::vector<PendingChange> pending;  // sorted by effective_block, then arrival

    bool operator==(const Subscription&) const = default;
};

/// A subscription as seen at a particular block: the governing parameters
/// after resolving any effective pending changes.
struct ActiveSubscription {
    Address event_id;
    Address subscriber;
    uint64_t ordinal = 0;
    SubscriptionParams params;
    Height last_trigger_block = 0;
    uint64_t instance_counter = 0;
};

/// The authenticated global event registry: definitions, subscriptions and
/// the publisher nonce table. Value type; apply_* return new snapshots.
struct EventStateSnapshot {
    using SubKey = std::pair<Address, uint64_t>;     // (event_id, ordinal)
    using NonceKey = std::pair<Address, Address>;    // (event_id, publisher)

    std::map<Address, EventDefinition> definitions;
    std::map<SubKey, Subscription> subscriptions;
    std::map<NonceKey, uint64_t> publisher_nonces;
    uint64_t next_ordinal = 1;

    bool operator==(const EventStateSnapshot&) const = default;

    const EventDefinition* find_definition(const Address& event_id) const;
    const Subscription* find_subscription(const Address& event_id, uint64_t ordinal) const;
    Subscription* find_subscription(const Address& event_id, uint64_t ordinal);

    uint64_t last_nonce(const Address& event_id, const Address& publisher) const;
    void record_nonce(const Address& event_id, const Address& publisher, uint64_t nonce);

    // Trigger bookkeeping, mutated in place by the block pipeline's working copy.
    void mark_trigger(const Address& event_id, uint64_t ordinal, Height block);
    void count_instance(const Address& event_id, uint64_t ordinal);
};

/// Genesis registry: the two system event definitions, nothing else.
EventStateSnapshot genesis_event_state();

using ContractPredicate = std::function<bool(const Address&)>;

using EventStateResult = Result<EventStateSnapshot, EventStateError>;

EventStateResult apply_event_create(const EventStateSnapshot& state, const ProtocolMessage& msg,
                                    Height block);
EventStateResult apply_subscribe(const EventStateSnapshot& state, const ProtocolMessage& msg,
                                 Height block, uint64_t activation_delay,
                                 const ContractPredicate& is_contract);
EventStateResult apply_unsubscribe(const EventStateSnapshot& state, const ProtocolMessage& msg,
                                   Height block, uint64_t activation_delay);
EventStateResult apply_subscription_update(const EventStateSnapshot& state,
                                           const ProtocolMessage& msg, Height block,
                                           uint64_t activation_delay);

/// Direct-form subscribe used by contract scripts and genesis construction.
EventStateResult apply_subscription(const EventStateSnapshot& state, const Address& subscriber,
                                    const SubscriptionParams& params, Height block,
                                    uint64_t activation_delay,
                                    const ContractPredicate& is_contract);

/// Subscriptions active at `block` for the event, resolved to their governing
/// parameters and ordered by (gas_price desc, ordinal asc). Unknown events
/// yield an empty list.
std::vector<ActiveSubscription> active_subscriptions(const EventStateSnapshot& state,
                                                     const Address& event_id, Height block);

/// Fold every pending change with effective_block <= block into the record.
/// Run by the block pipeline at the start of each height so that all nodes
/// compact at identical points and hash identical state.
EventStateSnapshot advance_to_block(const EventStateSnapshot& state, Height block);

/// Merkle root over the sorted (key, value) leaves of both registries plus
/// the nonce table and the ordinal counter.
HashDigest root_hash(const EventStateSnapshot& state);

/// Deterministic JSON rendering of the full registry (sorted keys).
std::string to_debug_json(const EventStateSnapshot& state);

}  // namespace edsc
