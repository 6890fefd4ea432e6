#pragma once

#include <map>
#include <set>

#include "edsc/event_state.hpp"
#include "edsc/types.hpp"

namespace edsc {

enum class RejectReason : uint8_t {
    UnknownEvent,
    BadPayload,
    BadSignature,
    BadNonce,
    RateLimited,
    BufferFull,
};

const char* to_string(RejectReason r);

/// Per-epoch trigger/update accounting. Reset at epoch boundaries by the
/// block pipeline; derived state, not hashed.
struct EpochCounters {
    uint64_t epoch = 0;
    std::map<Address, uint64_t> updates_per_account;
    std::map<Address, uint64_t> triggers_per_account;

    bool operator==(const EpochCounters&) const = default;
};

/// An update awaiting processing, with its buffer priority: the inclusion fee
/// for external updates, the emitting execution's gas price for internal ones.
struct PendingUpdate {
    EventUpdate update;
    Tokens priority = 0;
    bool validated = false;  // accepted by a previous validate pass; skip re-checks

    bool operator==(const PendingUpdate&) const = default;
};

/// Schema/signature checks that need no nonce or counter context.
/// Returns empty on success.
std::optional<RejectReason> check_update_static(const EventUpdate& update,
                                                const EventStateSnapshot& state);

struct ValidationOutcome {
    std::vector<PendingUpdate> accepted;
    std::vector<std::pair<EventUpdate, RejectReason>> rejected;
};

/// Consensus-side validation: schema, signature, sequential nonce, publisher
/// rate limit. Accepted updates record their nonces into `state` and count
/// against `counters`. Already-validated entries pass through untouched.
ValidationOutcome validate_and_filter_evts(std::vector<PendingUpdate> updates,
                                           EventStateSnapshot& state, const RateLimits& limits,
                                           EpochCounters& counters);

struct EvalCharge {
    Address subscriber;
    Gas gas = 0;
    Tokens gas_price = 0;
};

struct TriggerBatch {
    std::vector<TriggeredExecution> executions;
    std::vector<EvalCharge> eval_charges;
    Gas eval_gas_total = 0;
    std::vector<PendingUpdate> deferred;  // not processed: eval headroom exhausted
};

/// Walk each update's active subscriptions in priority order and synthesize
/// triggered executions, enforcing the per-update cap k and the per-account
/// epoch cap m. Instance counters advance for every publisher-matching
/// update; trigger bookkeeping and epoch counters advance for emissions.
/// Updates are left unprocessed (deferred) once remaining_gas cannot cover
/// another worst-case constraint evaluation.
TriggerBatch create_tx_based_on_evts(EventStateSnapshot& state,
                                     const std::vector<PendingUpdate>& updates, Height block,
                                     uint64_t block_time_ms, const RateLimits& limits,
                                     EpochCounters& counters, Gas eval_gas_per_node,
                                     Gas remaining_gas);

/// Deterministic processing order over a set of updates: per-(event,
/// publisher) queues advance in nonce order, queue heads compete by
/// (priority desc, digest asc). Used by the buffer drain and by block
/// validation to re-derive a miner's drain order.
std::vector<PendingUpdate> consensus_update_order(std::vector<PendingUpdate> updates);

/// Per-node buffer of validated external event updates awaiting inclusion
/// (the evtBuffer). Survives across blocks; capacity-bound with lowest-fee
/// eviction.
class EventBuffer {
public:
    explicit EventBuffer(uint64_t capacity = 4096) : capacity_(capacity) {}

    struct IngestResult {
        bool accepted = false;
        RejectReason reason = RejectReason::BufferFull;
        std::optional<HashDigest> evicted;
    };

    /// Validate against current head state and enqueue. Accepts any nonce
    /// beyond the last on-chain one so gossip reordering cannot drop a
    /// publisher's sequence; drains release only contiguous runs.
    IngestResult ingest(const EventUpdate& update, const EventStateSnapshot& state);

    /// Remove and return up to `budget` updates in consensus processing
    /// order. Only nonces contiguous with the chain state are released;
    /// the rest stay buffered.
    std::vector<EventUpdate> drain_for_block(const EventStateSnapshot& state, uint64_t budget);

    void remove(const HashDigest& digest);
    /// Drop entries already superseded by the chain (nonce <= recorded).
    void prune_confirmed(const EventStateSnapshot& state);

    size_t size() const { return size_; }
    bool contains(const HashDigest& digest) const { return digests_.contains(digest); }

private:
    using QueueKey = std::pair<Address, Address>;  // (event_id, publisher)
    struct Entry {
        EventUpdate update;
        HashDigest digest;
        Tokens fee = 0;
    };

    uint64_t capacity_;
    std::map<QueueKey, std::map<uint64_t, Entry>> queues_;
    std::set<HashDigest> digests_;
    size_t size_ = 0;

    std::optional<HashDigest> evict_for(Tokens incoming_fee);
};

}  // namespace edsc
