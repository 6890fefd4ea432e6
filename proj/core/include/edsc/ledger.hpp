#pragma once

#include <map>
#include <set>

#include "edsc/event_manager.hpp"
#include "edsc/event_state.hpp"
#include "edsc/result.hpp"
#include "edsc/types.hpp"

namespace edsc {

// ---------------------------------------------------------------------------
// Chain state

struct ChainState {
    std::map<Address, Account> accounts;
    std::map<Address, ContractScript> contracts;

    bool operator==(const ChainState&) const = default;

    const Account* find_account(const Address& a) const;
    Tokens balance(const Address& a) const;
    bool is_contract(const Address& a) const { return contracts.contains(a); }
    void credit(const Address& a, Tokens amount);
    /// Debit with a balance floor of zero; returns false (and leaves the
    /// account untouched) when the balance cannot cover the amount.
    bool debit(const Address& a, Tokens amount);
};

/// Sum of all balances; conservation checks compare this across blocks.
Tokens total_tokens(const ChainState& chain);

HashDigest state_root(const ChainState& chain);
HashDigest receipts_root(const std::vector<Receipt>& receipts);

/// Consensus-derived work carried between blocks: triggered executions that
/// did not fit and accepted-but-unmatched updates, plus the update bodies
/// pending executions refer to. Deterministically re-derived by every node,
/// so it is not hashed into any root.
struct CarrySet {
    std::vector<TriggeredExecution> pending_execs;
    std::vector<PendingUpdate> pending_updates;
    std::map<HashDigest, EventUpdate> update_index;

    bool operator==(const CarrySet&) const = default;
};

/// Everything the block pipeline needs from (and produces for) one chain tip.
struct StateBundle {
    ChainState chain;
    EventStateSnapshot events;
    EpochCounters counters;
    CarrySet carry;

    bool operator==(const StateBundle&) const = default;
};

// ---------------------------------------------------------------------------
// Execution

enum class ExecError {
    InsufficientPrefund,
    BadNonce,
    InsufficientBalance,
    DuplicateEvent,
    UnknownEvent,
    UnknownContract,
    NoSuchSubscription,
    BadSignature,
    BadConstraint,
};

const char* to_string(ExecError e);

struct ExecutionOutcome {
    Receipt receipt;
    std::vector<PendingUpdate> emitted;  // internal updates, priority = emitter gas price
};

/// Run a triggered execution's contract script with atomic revert semantics.
/// On success the subscriber pays gas to the miner and the subscription fee
/// to the publisher; on revert every script effect is rolled back and only
/// the gas consumed moves (subscriber to miner). Fails without a receipt when
/// the subscriber cannot prefund gas_limit x gas_price + subscription fee.
Result<ExecutionOutcome, ExecError> execute_execution(ChainState& chain,
                                                      EventStateSnapshot& events,
                                                      const TriggeredExecution& exec,
                                                      const EventUpdate& triggering, Height block,
                                                      uint64_t time_ms, const Address& miner,
                                                      const ProtocolParams& params);

struct MessageOutcome {
    Receipt receipt;
    std::vector<PendingUpdate> emitted;        // internal transfer events
    std::optional<PendingUpdate> delivered;    // ExternalEventUpdate handoff
};

/// Execute one on-chain protocol message against the working states.
Result<MessageOutcome, ExecError> execute_message(ChainState& chain, EventStateSnapshot& events,
                                                  const ProtocolMessage& msg, Height block,
                                                  uint64_t time_ms, const Address& miner,
                                                  const ProtocolParams& params);

/// Install a contract (genesis and DeployEvent share this): account, script,
/// and the default transaction-event subscription filtered to its address.
Result<EventStateSnapshot, EventStateError> install_contract(
    ChainState& chain, const EventStateSnapshot& events, const Address& address,
    std::vector<ScriptAction> on_trigger, Tokens endowment, Tokens trigger_gas_price,
    Gas trigger_gas_limit, Height block, uint64_t activation_delay);

Address derive_contract_address(const Address& sender, uint64_t sender_nonce);

// ---------------------------------------------------------------------------
// Node-local pending pool

/// The PendingPool: external protocol messages waiting for inclusion.
class TxPool {
public:
    explicit TxPool(uint64_t per_account_cap = 16) : per_account_cap_(per_account_cap) {}

    bool insert(const ProtocolMessage& msg);
    void remove(const HashDigest& digest);
    bool contains(const HashDigest& digest) const { return entries_.contains(digest); }
    size_t size() const { return entries_.size(); }
    std::vector<ProtocolMessage> snapshot() const;

private:
    uint64_t per_account_cap_;
    std::map<HashDigest, ProtocolMessage> entries_;
    std::map<Address, uint64_t> per_account_;
};

// ---------------------------------------------------------------------------
// Block building and validation

struct BuildInputs {
    Height number = 0;
    HashDigest parent_hash;
    uint64_t timestamp_ms = 0;
    Address miner;
    Gas gas_limit = 0;
    std::vector<ProtocolMessage> pool_messages;   // candidate non-update messages
    std::vector<EventUpdate> drained_updates;     // from the event buffer, drain order
};

struct BuildResult {
    Block block;
    StateBundle post;
    std::vector<Receipt> receipts;
    std::vector<std::pair<EventUpdate, RejectReason>> rejected_updates;
};

/// Deterministic block construction: drained updates are charged and recorded,
/// then the event-processing loop alternates validate / match / merge /
/// filter / sort / select / execute until the pool drains or gas runs out.
/// The per-block system event is processed first.
BuildResult build_block(const StateBundle& parent, const BuildInputs& in,
                        const ProtocolParams& params);

enum class BlockReject : uint8_t {
    BadOrder,
    BadStateRoot,
    BadEventStateRoot,
    BadReceiptsRoot,
    OverGasLimit,
};

const char* to_string(BlockReject r);

struct ValidationResult {
    bool ok = false;
    BlockReject reason = BlockReject::BadOrder;
    StateBundle post;  // valid only when ok
};

/// Re-derive the execution sequence from the block's external messages using
/// the same deterministic rules as build_block and compare order, gas and the
/// three roots.
ValidationResult validate_block(const StateBundle& parent, const Block& block,
                                const ProtocolParams& params);

/// Apply a block without recomputing roots (sim fast path; full validation is
/// validate_block). The execution sequence is still re-derived.
StateBundle apply_block(const StateBundle& parent, const Block& block,
                        const ProtocolParams& params);

}  // namespace edsc
