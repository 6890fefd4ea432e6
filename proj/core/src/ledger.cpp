#include "edsc/ledger.hpp"

#include <algorithm>
#include <cassert>

#include "edsc/codec.hpp"
#include "edsc/hash.hpp"
#include "edsc/matcher.hpp"
#include "edsc/signature.hpp"

namespace edsc {

const char* to_string(ExecError e) {
    switch (e) {
        case ExecError::InsufficientPrefund: return "InsufficientPrefund";
        case ExecError::BadNonce: return "BadNonce";
        case ExecError::InsufficientBalance: return "InsufficientBalance";
        case ExecError::DuplicateEvent: return "DuplicateEvent";
        case ExecError::UnknownEvent: return "UnknownEvent";
        case ExecError::UnknownContract: return "UnknownContract";
        case ExecError::NoSuchSubscription: return "NoSuchSubscription";
        case ExecError::BadSignature: return "BadSignature";
        case ExecError::BadConstraint: return "BadConstraint";
    }
    return "?";
}

const char* to_string(BlockReject r) {
    switch (r) {
        case BlockReject::BadOrder: return "BadOrder";
        case BlockReject::BadStateRoot: return "BadStateRoot";
        case BlockReject::BadEventStateRoot: return "BadEventStateRoot";
        case BlockReject::BadReceiptsRoot: return "BadReceiptsRoot";
        case BlockReject::OverGasLimit: return "OverGasLimit";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// ChainState

const Account* ChainState::find_account(const Address& a) const {
    auto it = accounts.find(a);
    return it == accounts.end() ? nullptr : &it->second;
}

Tokens ChainState::balance(const Address& a) const {
    const Account* acc = find_account(a);
    return acc ? acc->balance : 0;
}

void ChainState::credit(const Address& a, Tokens amount) {
    auto it = accounts.find(a);
    if (it == accounts.end()) {
        Account acc;
        acc.address = a;
        acc.balance = amount;
        acc.kind = contracts.contains(a) ? AccountKind::Contract : AccountKind::External;
        accounts.emplace(a, acc);
    } else {
        it->second.balance += amount;
    }
}

bool ChainState::debit(const Address& a, Tokens amount) {
    auto it = accounts.find(a);
    if (it == accounts.end() || it->second.balance < amount) return false;
    it->second.balance -= amount;
    return true;
}

Tokens total_tokens(const ChainState& chain) {
    Tokens sum = 0;
    for (const auto& [addr, acc] : chain.accounts) sum += acc.balance;
    return sum;
}

HashDigest state_root(const ChainState& chain) {
    std::vector<HashDigest> leaves;
    leaves.reserve(chain.accounts.size() + chain.contracts.size());
    for (const auto& [addr, acc] : chain.accounts) {
        Writer w;
        w.put_u8(1);
        w.put_raw(encode(acc));
        leaves.push_back(sha256(w.data()));
    }
    for (const auto& [addr, script] : chain.contracts) {
        Writer w;
        w.put_u8(2);
        w.put_raw(encode(script));
        leaves.push_back(sha256(w.data()));
    }
    return merkle_root(std::move(leaves));
}

HashDigest receipts_root(const std::vector<Receipt>& receipts) {
    std::vector<HashDigest> leaves;
    leaves.reserve(receipts.size());
    for (const Receipt& r : receipts) leaves.push_back(sha256(encode(r)));
    return merkle_root(std::move(leaves));
}

Address derive_contract_address(const Address& sender, uint64_t sender_nonce) {
    Writer w;
    w.put_address(sender);
    w.put_u64(sender_nonce);
    HashDigest h = sha256(w.data());
    Address a;
    std::copy_n(h.bytes.begin(), 20, a.bytes.begin());
    return a;
}

// ---------------------------------------------------------------------------
// Triggered execution

static bool predicate_holds(const RevertPredicate& p, const EventUpdate& triggering,
                            Tokens contract_balance) {
    switch (p.kind) {
        case RevertPredicate::Kind::Never:
            return false;
        case RevertPredicate::Kind::Always:
            return true;
        case RevertPredicate::Kind::PayloadIntGt: {
            if (p.payload_index >= triggering.payload.size()) return false;
            const Value& v = triggering.payload[p.payload_index];
            return v.type() == ValueType::Int && std::get<int64_t>(v.v) > p.int_value;
        }
        case RevertPredicate::Kind::BalanceBelow:
            return contract_balance < p.amount;
    }
    return false;
}

Result<ExecutionOutcome, ExecError> execute_execution(ChainState& chain,
                                                      EventStateSnapshot& events,
                                                      const TriggeredExecution& exec,
                                                      const EventUpdate& triggering, Height block,
                                                      uint64_t /*time_ms*/, const Address& miner,
                                                      const ProtocolParams& params) {
    const Address& subscriber = exec.subscriber;
    auto script_it = chain.contracts.find(subscriber);
    if (script_it == chain.contracts.end()) return ExecError::UnknownContract;
    Tokens prefund = exec.gas_limit * exec.gas_price + exec.subscription_fee_paid;
    if (chain.balance(subscriber) < prefund) return ExecError::InsufficientPrefund;

    ChainState scratch = chain;
    EventStateSnapshot scratch_events = events;
    Gas gas = params.gas.base_trigger_gas;
    bool reverted = gas > exec.gas_limit;
    if (reverted) gas = exec.gas_limit;
    std::vector<PendingUpdate> emitted;

    for (const ScriptAction& action : script_it->second.on_trigger) {
        if (reverted) break;
        switch (action.kind) {
            case ScriptAction::Kind::ConsumeGas:
                gas += action.gas_amount;
                if (gas > exec.gas_limit) {
                    gas = exec.gas_limit;
                    reverted = true;
                }
                break;
            case ScriptAction::Kind::Transfer:
                if (!scratch.debit(subscriber, action.transfer_amount)) {
                    reverted = true;
                    break;
                }
                scratch.credit(action.transfer_to, action.transfer_amount);
                break;
            case ScriptAction::Kind::EmitEvent: {
                EventUpdate u;
                u.event_id = action.event_id;
                u.publisher = subscriber;
                u.publisher_key.assign(subscriber.bytes.begin(), subscriber.bytes.end());
                u.origin = UpdateOrigin::Internal;
                u.subscription_fee = action.emit_subscription_fee;
                u.inclusion_fee = 0;
                bool bad_splice = false;
                for (const TemplateValue& t : action.payload_template) {
                    if (t.kind == TemplateValue::Kind::Literal) {
                        u.payload.push_back(t.literal);
                    } else if (t.payload_index < triggering.payload.size()) {
                        u.payload.push_back(triggering.payload[t.payload_index]);
                    } else {
                        bad_splice = true;
                        break;
                    }
                }
                if (bad_splice) {
                    reverted = true;
                    break;
                }
                u.nonce = scratch_events.last_nonce(u.event_id, subscriber) + 1;
                scratch_events.record_nonce(u.event_id, subscriber, u.nonce);
                emitted.push_back({std::move(u), exec.gas_price, false});
                break;
            }
            case ScriptAction::Kind::RevertIf:
                if (predicate_holds(action.predicate, triggering, scratch.balance(subscriber)))
                    reverted = true;
                break;
            case ScriptAction::Kind::Subscribe: {
                gas += params.gas.subscribe_gas;
                if (gas > exec.gas_limit) {
                    gas = exec.gas_limit;
                    reverted = true;
                    break;
                }
                auto res = apply_subscription(
                    scratch_events, subscriber, action.subscribe_params, block,
                    params.activation_delay,
                    [&](const Address& a) { return scratch.is_contract(a); });
                if (!res.ok()) {
                    reverted = true;
                    break;
                }
                scratch_events = std::move(res.value());
                break;
            }
            case ScriptAction::Kind::Noop:
                break;
        }
    }

    Tokens gas_tokens = gas * exec.gas_price;
    if (!reverted) {
        Tokens cost = gas_tokens + exec.subscription_fee_paid;
        if (scratch.balance(subscriber) < cost) reverted = true;
    }

    Receipt receipt;
    receipt.tx_digest = digest_of(exec);
    receipt.gas_used = gas;
    if (reverted) {
        // Script effects vanish; the gas consumed is still owed to the miner.
        bool ok = chain.debit(subscriber, gas_tokens);
        assert(ok);
        (void)ok;
        chain.credit(miner, gas_tokens);
        receipt.status = ReceiptStatus::Reverted;
        receipt.miner_fee = gas_tokens;
        return ExecutionOutcome{std::move(receipt), {}};
    }

    scratch.debit(subscriber, gas_tokens + exec.subscription_fee_paid);
    scratch.credit(miner, gas_tokens);
    if (exec.subscription_fee_paid > 0)
        scratch.credit(triggering.publisher, exec.subscription_fee_paid);
    chain = std::move(scratch);
    events = std::move(scratch_events);
    receipt.status = ReceiptStatus::Success;
    receipt.miner_fee = gas_tokens;
    receipt.subscription_fee = exec.subscription_fee_paid;
    receipt.publisher = triggering.publisher;
    for (const PendingUpdate& pu : emitted)
        receipt.emitted_events.push_back(digest_of(pu.update));
    return ExecutionOutcome{std::move(receipt), std::move(emitted)};
}

// ---------------------------------------------------------------------------
// Messages

static Gas message_kind_gas(MessageKind kind, const GasSchedule& gas) {
    switch (kind) {
        case MessageKind::EventCreate: return gas.event_create_gas;
        case MessageKind::Subscribe: return gas.subscribe_gas;
        case MessageKind::Unsubscribe:
        case MessageKind::SubscriptionUpdate: return gas.subscription_update_gas;
        case MessageKind::TransferEvent: return gas.transfer_gas;
        case MessageKind::DeployEvent: return gas.deploy_gas;
        case MessageKind::ExternalEventUpdate: return 0;
    }
    return 0;
}

static ExecError map_event_state_error(EventStateError e) {
    switch (e) {
        case EventStateError::DuplicateEvent: return ExecError::DuplicateEvent;
        case EventStateError::InvalidSignature: return ExecError::BadSignature;
        case EventStateError::UnknownEvent: return ExecError::UnknownEvent;
        case EventStateError::UnknownContract: return ExecError::UnknownContract;
        case EventStateError::NoSuchSubscription: return ExecError::NoSuchSubscription;
        case EventStateError::BadConstraint: return ExecError::BadConstraint;
    }
    return ExecError::BadSignature;
}

Result<EventStateSnapshot, EventStateError> install_contract(
    ChainState& chain, const EventStateSnapshot& events, const Address& address,
    std::vector<ScriptAction> on_trigger, Tokens endowment, Tokens trigger_gas_price,
    Gas trigger_gas_limit, Height block, uint64_t activation_delay) {
    if (chain.contracts.contains(address)) return EventStateError::DuplicateEvent;
    ContractScript script;
    script.address = address;
    script.on_trigger = std::move(on_trigger);
    chain.contracts.emplace(address, std::move(script));
    Account acc;
    acc.address = address;
    acc.balance = endowment;
    acc.kind = AccountKind::Contract;
    chain.accounts[address] = acc;

    // Default transaction-event subscription: run when a transfer names us.
    SubscriptionParams params;
    params.event_id = transfer_event_id();
    params.gas_price = trigger_gas_price;
    params.gas_limit = trigger_gas_limit;
    params.max_subscription_fee = 0;
    params.constraint = "payload.to == " + address.to_hex();
    return apply_subscription(events, address, params, block, activation_delay,
                              [&](const Address& a) { return chain.is_contract(a); });
}

Result<MessageOutcome, ExecError> execute_message(ChainState& chain, EventStateSnapshot& events,
                                                  const ProtocolMessage& msg, Height block,
                                                  uint64_t /*time_ms*/, const Address& miner,
                                                  const ProtocolParams& params) {
    const Gas kind_gas = message_kind_gas(msg.kind, params.gas);
    const Tokens base_cost = msg.inclusion_fee + kind_gas;  // gas priced at one token per unit

    if (msg.kind == MessageKind::ExternalEventUpdate) {
        const EventUpdate& u = std::get<ExternalEventUpdateBody>(msg.body).update;
        if (u.origin != UpdateOrigin::External || u.publisher != msg.sender)
            return ExecError::BadSignature;
        if (check_update_static(u, events)) return ExecError::BadSignature;
        // Updates are replay-protected by the publisher nonce table, not the
        // account nonce; the account must only cover the inclusion fee.
        if (!chain.debit(msg.sender, base_cost)) return ExecError::InsufficientBalance;
        chain.credit(miner, base_cost);
        Receipt receipt;
        receipt.tx_digest = digest_of(msg);
        receipt.gas_used = kind_gas;
        receipt.miner_fee = base_cost;
        MessageOutcome out;
        out.receipt = std::move(receipt);
        out.delivered = PendingUpdate{u, u.inclusion_fee, false};
        return out;
    }

    if (!msg.signature ||
        !verify_signature_blob(protocol_scheme(), msg.sender, signing_digest(msg),
                               *msg.signature))
        return ExecError::BadSignature;
    auto acc_it = chain.accounts.find(msg.sender);
    if (acc_it == chain.accounts.end()) return ExecError::InsufficientBalance;
    if (msg.sender_nonce != acc_it->second.nonce + 1) return ExecError::BadNonce;

    MessageOutcome out;
    out.receipt.tx_digest = digest_of(msg);
    out.receipt.gas_used = kind_gas;
    out.receipt.miner_fee = base_cost;
    Tokens total_cost = base_cost;

    switch (msg.kind) {
        case MessageKind::EventCreate: {
            if (chain.balance(msg.sender) < total_cost) return ExecError::InsufficientBalance;
            auto res = apply_event_create(events, msg, block);
            if (!res.ok()) return map_event_state_error(res.error());
            events = std::move(res.value());
            break;
        }
        case MessageKind::Subscribe: {
            if (chain.balance(msg.sender) < total_cost) return ExecError::InsufficientBalance;
            auto res = apply_subscribe(events, msg, block, params.activation_delay,
                                       [&](const Address& a) { return chain.is_contract(a); });
            if (!res.ok()) return map_event_state_error(res.error());
            events = std::move(res.value());
            break;
        }
        case MessageKind::Unsubscribe: {
            if (chain.balance(msg.sender) < total_cost) return ExecError::InsufficientBalance;
            auto res = apply_unsubscribe(events, msg, block, params.activation_delay);
            if (!res.ok()) return map_event_state_error(res.error());
            events = std::move(res.value());
            break;
        }
        case MessageKind::SubscriptionUpdate: {
            if (chain.balance(msg.sender) < total_cost) return ExecError::InsufficientBalance;
            auto res = apply_subscription_update(events, msg, block, params.activation_delay);
            if (!res.ok()) return map_event_state_error(res.error());
            events = std::move(res.value());
            break;
        }
        case MessageKind::TransferEvent: {
            const auto& body = std::get<TransferBody>(msg.body);
            total_cost += body.amount;
            if (chain.balance(msg.sender) < total_cost) return ExecError::InsufficientBalance;
            chain.debit(msg.sender, body.amount);
            chain.credit(body.recipient, body.amount);

            EventUpdate u;
            u.event_id = transfer_event_id();
            u.publisher = msg.sender;
            u.publisher_key.assign(msg.sender.bytes.begin(), msg.sender.bytes.end());
            u.origin = UpdateOrigin::Internal;
            u.payload = {Value::of_address(msg.sender), Value::of_address(body.recipient),
                         Value::of_int(static_cast<int64_t>(body.amount))};
            u.nonce = events.last_nonce(u.event_id, msg.sender) + 1;
            events.record_nonce(u.event_id, msg.sender, u.nonce);
            out.receipt.emitted_events.push_back(digest_of(u));
            out.emitted.push_back({std::move(u), msg.inclusion_fee, false});
            break;
        }
        case MessageKind::DeployEvent: {
            const auto& body = std::get<DeployBody>(msg.body);
            total_cost += body.endowment;
            if (chain.balance(msg.sender) < total_cost) return ExecError::InsufficientBalance;
            Address addr = derive_contract_address(msg.sender, msg.sender_nonce);
            auto res = install_contract(chain, events, addr, body.on_trigger, body.endowment,
                                        body.trigger_gas_price, body.trigger_gas_limit, block,
                                        params.activation_delay);
            if (!res.ok()) return map_event_state_error(res.error());
            events = std::move(res.value());
            break;
        }
        case MessageKind::ExternalEventUpdate:
            break;  // handled above
    }

    chain.accounts[msg.sender].nonce = msg.sender_nonce;
    chain.debit(msg.sender, base_cost);
    chain.credit(miner, base_cost);
    return out;
}

// ---------------------------------------------------------------------------
// TxPool

bool TxPool::insert(const ProtocolMessage& msg) {
    HashDigest digest = digest_of(msg);
    if (entries_.contains(digest)) return false;
    uint64_t& count = per_account_[msg.sender];
    if (count >= per_account_cap_) return false;
    ++count;
    entries_.emplace(digest, msg);
    return true;
}

void TxPool::remove(const HashDigest& digest) {
    auto it = entries_.find(digest);
    if (it == entries_.end()) return;
    auto acc = per_account_.find(it->second.sender);
    if (acc != per_account_.end() && acc->second > 0) --acc->second;
    entries_.erase(it);
}

std::vector<ProtocolMessage> TxPool::snapshot() const {
    std::vector<ProtocolMessage> out;
    out.reserve(entries_.size());
    for (const auto& [digest, msg] : entries_) out.push_back(msg);
    return out;
}

// ---------------------------------------------------------------------------
// Block pipeline

namespace {

struct PipelineOutput {
    std::vector<ProtocolMessage> messages;
    std::vector<TriggeredExecution> executions;
    std::vector<Receipt> receipts;
    Gas gas_used = 0;
    StateBundle post;
    std::vector<std::pair<EventUpdate, RejectReason>> rejected_updates;
};

ProtocolMessage wrap_update(const EventUpdate& u) {
    ProtocolMessage m;
    m.kind = MessageKind::ExternalEventUpdate;
    m.sender = u.publisher;
    m.sender_nonce = u.nonce;
    m.inclusion_fee = u.inclusion_fee;
    m.body = ExternalEventUpdateBody{u};
    return m;  // authenticated by the embedded update's signature
}

EventUpdate make_new_block_update(const EventStateSnapshot& events, Height number,
                                  uint64_t timestamp_ms) {
    EventUpdate u;
    u.event_id = new_block_event_id();
    u.publisher = system_address();
    u.origin = UpdateOrigin::System;
    u.payload = {Value::of_int(static_cast<int64_t>(number)),
                 Value::of_int(static_cast<int64_t>(timestamp_ms))};
    u.nonce = events.last_nonce(u.event_id, u.publisher) + 1;
    return u;
}

struct PoolItem {
    bool is_message = false;
    Tokens priority = 0;
    uint64_t ordinal = 0;  // triggers only
    HashDigest digest;
    size_t index = 0;  // into msgs / execs storage
};

bool item_before(const PoolItem& a, const PoolItem& b) {
    if (a.priority != b.priority) return a.priority > b.priority;
    if (a.is_message != b.is_message) return a.is_message;  // messages first on ties
    if (!a.is_message && a.ordinal != b.ordinal) return a.ordinal < b.ordinal;
    return a.digest < b.digest;
}

PipelineOutput run_pipeline(const StateBundle& parent, Height number, uint64_t timestamp_ms,
                            const Address& miner, Gas gas_limit,
                            const std::vector<ProtocolMessage>& pool_messages,
                            const std::vector<EventUpdate>& drained_updates,
                            const ProtocolParams& params) {
    PipelineOutput out;
    StateBundle work = parent;
    work.events = advance_to_block(work.events, number);
    uint64_t epoch = params.limits.epoch_length ? number / params.limits.epoch_length : 0;
    if (epoch != work.counters.epoch) {
        work.counters = EpochCounters{};
        work.counters.epoch = epoch;
    }

    std::map<HashDigest, EventUpdate> update_bodies = work.carry.update_index;

    // Round-zero updates: the system block event, then work carried from the
    // previous block, then this block's drained updates (charged as messages).
    std::vector<PendingUpdate> tmp;
    tmp.push_back({make_new_block_update(work.events, number, timestamp_ms), 0, false});
    for (PendingUpdate& pu : work.carry.pending_updates) tmp.push_back(std::move(pu));

    for (const EventUpdate& u : drained_updates) {
        ProtocolMessage m = wrap_update(u);
        auto res = execute_message(work.chain, work.events, m, number, timestamp_ms, miner,
                                   params);
        if (!res.ok()) continue;  // unfunded or malformed: drop, publisher retries
        out.messages.push_back(std::move(m));
        out.receipts.push_back(res.value().receipt);
        if (res.value().delivered) tmp.push_back(std::move(*res.value().delivered));
    }

    // Candidate pools for the selection loop.
    std::map<HashDigest, ProtocolMessage> msg_pool;
    for (const ProtocolMessage& m : pool_messages) {
        if (m.kind == MessageKind::ExternalEventUpdate) continue;  // updates ride the buffer
        msg_pool.emplace(digest_of(m), m);
    }
    std::map<HashDigest, TriggeredExecution> exec_pool;
    for (TriggeredExecution& e : work.carry.pending_execs)
        exec_pool.emplace(digest_of(e), std::move(e));
    work.carry = CarrySet{};

    std::vector<PendingUpdate> carried_updates;
    const int kMaxRounds = 100000;
    for (int round = 0; round < kMaxRounds; ++round) {
        // validate-and-filter-evts
        ValidationOutcome vo = validate_and_filter_evts(std::move(tmp), work.events,
                                                        params.limits, work.counters);
        tmp.clear();
        for (auto& rej : vo.rejected) out.rejected_updates.push_back(std::move(rej));
        for (const PendingUpdate& pu : vo.accepted)
            update_bodies.emplace(digest_of(pu.update), pu.update);

        // create-tx-based-on-evts
        Gas remaining = gas_limit > out.gas_used ? gas_limit - out.gas_used : 0;
        TriggerBatch batch = create_tx_based_on_evts(
            work.events, vo.accepted, number, timestamp_ms, params.limits, work.counters,
            params.gas.eval_gas_per_node, remaining);
        for (const EvalCharge& charge : batch.eval_charges) {
            Tokens owed = charge.gas * charge.gas_price;
            Tokens paid = std::min(owed, work.chain.balance(charge.subscriber));
            work.chain.debit(charge.subscriber, paid);
            work.chain.credit(miner, paid);
        }
        out.gas_used += batch.eval_gas_total;
        if (!batch.deferred.empty()) {
            carried_updates = std::move(batch.deferred);
            break;  // gas headroom exhausted mid-matching
        }
        for (TriggeredExecution& e : batch.executions)
            exec_pool.emplace(digest_of(e), std::move(e));

        // tx-filter + sort + select top n (all that fit, greedily)
        std::vector<PoolItem> items;
        items.reserve(msg_pool.size() + exec_pool.size());
        std::vector<const ProtocolMessage*> msg_refs;
        std::vector<const TriggeredExecution*> exec_refs;
        for (const auto& [digest, m] : msg_pool) {
            items.push_back({true, m.inclusion_fee, 0, digest, msg_refs.size()});
            msg_refs.push_back(&m);
        }
        for (const auto& [digest, e] : exec_pool) {
            items.push_back({false, e.gas_price, e.ordinal, digest, exec_refs.size()});
            exec_refs.push_back(&e);
        }
        std::sort(items.begin(), items.end(), item_before);

        std::map<Address, uint64_t> per_account;
        bool progress = false;
        for (const PoolItem& item : items) {
            const Address& account =
                item.is_message ? msg_refs[item.index]->sender : exec_refs[item.index]->subscriber;
            uint64_t& count = per_account[account];
            if (count >= params.limits.max_triggers_per_account_per_epoch) continue;
            Gas max_gas = item.is_message
                              ? message_kind_gas(msg_refs[item.index]->kind, params.gas)
                              : exec_refs[item.index]->gas_limit;
            if (out.gas_used + max_gas > gas_limit) continue;
            ++count;
            if (item.is_message) {
                ProtocolMessage msg = *msg_refs[item.index];
                msg_pool.erase(item.digest);
                auto res = execute_message(work.chain, work.events, msg, number, timestamp_ms,
                                           miner, params);
                progress = true;
                if (!res.ok()) continue;  // invalid message: dropped, no record
                out.gas_used += res.value().receipt.gas_used;
                out.receipts.push_back(std::move(res.value().receipt));
                out.messages.push_back(std::move(msg));
                for (PendingUpdate& pu : res.value().emitted) {
                    update_bodies.emplace(digest_of(pu.update), pu.update);
                    tmp.push_back(std::move(pu));
                }
            } else {
                TriggeredExecution exec = *exec_refs[item.index];
                exec_pool.erase(item.digest);
                progress = true;
                auto body_it = update_bodies.find(exec.triggering_update);
                if (body_it == update_bodies.end()) continue;  // unresolvable: drop
                auto res = execute_execution(work.chain, work.events, exec, body_it->second,
                                             number, timestamp_ms, miner, params);
                if (!res.ok()) continue;  // prefund failure: skipped entirely
                out.gas_used += res.value().receipt.gas_used;
                out.receipts.push_back(std::move(res.value().receipt));
                out.executions.push_back(std::move(exec));
                for (PendingUpdate& pu : res.value().emitted) {
                    update_bodies.emplace(digest_of(pu.update), pu.update);
                    tmp.push_back(std::move(pu));
                }
            }
        }
        if (!progress && tmp.empty()) break;
    }

    if (params.block_reward > 0) work.chain.credit(miner, params.block_reward);

    // Leftovers carry to the next block.
    for (auto& [digest, e] : exec_pool) work.carry.pending_execs.push_back(std::move(e));
    for (PendingUpdate& pu : carried_updates) work.carry.pending_updates.push_back(std::move(pu));
    for (PendingUpdate& pu : tmp) work.carry.pending_updates.push_back(std::move(pu));
    for (const TriggeredExecution& e : work.carry.pending_execs) {
        auto it = update_bodies.find(e.triggering_update);
        if (it != update_bodies.end()) work.carry.update_index.emplace(it->first, it->second);
    }
    out.post = std::move(work);
    return out;
}

}  // namespace

BuildResult build_block(const StateBundle& parent, const BuildInputs& in,
                        const ProtocolParams& params) {
    PipelineOutput po = run_pipeline(parent, in.number, in.timestamp_ms, in.miner, in.gas_limit,
                                     in.pool_messages, in.drained_updates, params);
    BuildResult out;
    out.block.number = in.number;
    out.block.parent = in.parent_hash;
    out.block.timestamp_ms = in.timestamp_ms;
    out.block.miner = in.miner;
    out.block.gas_limit = in.gas_limit;
    out.block.gas_used = po.gas_used;
    out.block.external_messages = std::move(po.messages);
    out.block.executions = std::move(po.executions);
    out.block.state_root = state_root(po.post.chain);
    out.block.event_state_root = root_hash(po.post.events);
    out.block.receipts_root = receipts_root(po.receipts);
    out.post = std::move(po.post);
    out.receipts = std::move(po.receipts);
    out.rejected_updates = std::move(po.rejected_updates);
    return out;
}

namespace {

struct BlockInputsSplit {
    std::vector<EventUpdate> drained;
    std::vector<ProtocolMessage> pool;
    bool drain_order_ok = true;
};

BlockInputsSplit split_block_messages(const Block& block) {
    BlockInputsSplit out;
    for (const ProtocolMessage& m : block.external_messages) {
        if (m.kind == MessageKind::ExternalEventUpdate)
            out.drained.push_back(std::get<ExternalEventUpdateBody>(m.body).update);
        else
            out.pool.push_back(m);
    }
    // The recorded drain order must match the consensus ordering rule.
    std::vector<PendingUpdate> recorded;
    recorded.reserve(out.drained.size());
    for (const EventUpdate& u : out.drained) recorded.push_back({u, u.inclusion_fee, false});
    std::vector<PendingUpdate> canonical = consensus_update_order(recorded);
    for (size_t i = 0; i < recorded.size(); ++i) {
        if (!(recorded[i].update == canonical[i].update)) {
            out.drain_order_ok = false;
            break;
        }
    }
    return out;
}

}  // namespace

ValidationResult validate_block(const StateBundle& parent, const Block& block,
                                const ProtocolParams& params) {
    ValidationResult out;
    if (block.gas_used > block.gas_limit) {
        out.reason = BlockReject::OverGasLimit;
        return out;
    }
    BlockInputsSplit split = split_block_messages(block);
    if (!split.drain_order_ok) {
        out.reason = BlockReject::BadOrder;
        return out;
    }
    PipelineOutput po = run_pipeline(parent, block.number, block.timestamp_ms, block.miner,
                                     block.gas_limit, split.pool, split.drained, params);
    if (po.messages != block.external_messages || po.executions != block.executions ||
        po.gas_used != block.gas_used) {
        out.reason = BlockReject::BadOrder;
        return out;
    }
    if (state_root(po.post.chain) != block.state_root) {
        out.reason = BlockReject::BadStateRoot;
        return out;
    }
    if (root_hash(po.post.events) != block.event_state_root) {
        out.reason = BlockReject::BadEventStateRoot;
        return out;
    }
    if (receipts_root(po.receipts) != block.receipts_root) {
        out.reason = BlockReject::BadReceiptsRoot;
        return out;
    }
    out.ok = true;
    out.post = std::move(po.post);
    return out;
}

StateBundle apply_block(const StateBundle& parent, const Block& block,
                        const ProtocolParams& params) {
    BlockInputsSplit split = split_block_messages(block);
    PipelineOutput po = run_pipeline(parent, block.number, block.timestamp_ms, block.miner,
                                     block.gas_limit, split.pool, split.drained, params);
    return std::move(po.post);
}

}  // namespace edsc
