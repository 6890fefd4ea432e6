#include "edsc/event_manager.hpp"

#include <algorithm>

#include "edsc/codec.hpp"
#include "edsc/hash.hpp"
#include "edsc/matcher.hpp"
#include "edsc/signature.hpp"

namespace edsc {

const char* to_string(RejectReason r) {
    switch (r) {
        case RejectReason::UnknownEvent: return "UnknownEvent";
        case RejectReason::BadPayload: return "BadPayload";
        case RejectReason::BadSignature: return "BadSignature";
        case RejectReason::BadNonce: return "BadNonce";
        case RejectReason::RateLimited: return "RateLimited";
        case RejectReason::BufferFull: return "BufferFull";
    }
    return "?";
}

static bool payload_matches(const EventUpdate& u, const EventDefinition& def) {
    if (u.payload.size() != def.variables.size()) return false;
    for (size_t i = 0; i < u.payload.size(); ++i)
        if (u.payload[i].type() != def.variables[i].second) return false;
    return true;
}

std::optional<RejectReason> check_update_static(const EventUpdate& update,
                                                const EventStateSnapshot& state) {
    const EventDefinition* def = state.find_definition(update.event_id);
    if (!def) return RejectReason::UnknownEvent;
    if (!payload_matches(update, *def)) return RejectReason::BadPayload;
    if (update.origin == UpdateOrigin::External) {
        if (!update.signature) return RejectReason::BadSignature;
        if (update.publisher != address_of_key(update.publisher_key))
            return RejectReason::BadSignature;
        if (!protocol_scheme().verify(update.publisher_key, signing_digest(update),
                                      *update.signature)) {
            // Signature blob here is the raw scheme signature; reject on any mismatch.
            return RejectReason::BadSignature;
        }
    } else if (update.signature) {
        return RejectReason::BadSignature;  // internal/system updates carry none
    }
    return std::nullopt;
}

ValidationOutcome validate_and_filter_evts(std::vector<PendingUpdate> updates,
                                           EventStateSnapshot& state, const RateLimits& limits,
                                           EpochCounters& counters) {
    ValidationOutcome out;
    for (PendingUpdate& pu : updates) {
        if (pu.validated) {
            out.accepted.push_back(std::move(pu));
            continue;
        }
        const EventUpdate& u = pu.update;
        if (auto reason = check_update_static(u, state)) {
            out.rejected.emplace_back(u, *reason);
            continue;
        }
        // Nonces: external sequences are replay-protected; internal and system
        // updates were numbered by the pipeline at emission.
        if (u.origin == UpdateOrigin::External &&
            u.nonce != state.last_nonce(u.event_id, u.publisher) + 1) {
            out.rejected.emplace_back(u, RejectReason::BadNonce);
            continue;
        }
        if (u.origin != UpdateOrigin::System) {
            uint64_t& count = counters.updates_per_account[u.publisher];
            if (count >= limits.max_updates_per_account_per_epoch) {
                out.rejected.emplace_back(u, RejectReason::RateLimited);
                continue;
            }
            ++count;
        }
        state.record_nonce(u.event_id, u.publisher, u.nonce);
        pu.validated = true;
        out.accepted.push_back(std::move(pu));
    }
    return out;
}

TriggerBatch create_tx_based_on_evts(EventStateSnapshot& state,
                                     const std::vector<PendingUpdate>& updates, Height block,
                                     uint64_t block_time_ms, const RateLimits& limits,
                                     EpochCounters& counters, Gas eval_gas_per_node,
                                     Gas remaining_gas) {
    TriggerBatch out;
    const Gas eval_headroom = static_cast<Gas>(kMaxConstraintNodes) * eval_gas_per_node;
    for (size_t i = 0; i < updates.size(); ++i) {
        if (remaining_gas < out.eval_gas_total + eval_headroom) {
            out.deferred.assign(updates.begin() + i, updates.end());
            break;
        }
        const PendingUpdate& pu = updates[i];
        const EventUpdate& update = pu.update;
        const EventDefinition* def = state.find_definition(update.event_id);
        if (!def) continue;  // accepted updates always resolve; defensive for direct calls
        HashDigest update_digest = digest_of(update);
        MatchContext ctx{&update, block, block_time_ms};

        uint64_t emitted_for_update = 0;
        for (const ActiveSubscription& sub :
             active_subscriptions(state, update.event_id, block)) {
            TriggerDecision d = should_trigger(sub, ctx, *def, eval_gas_per_node);
            if (d.reason == TriggerReason::PublisherFilter) continue;
            // Instance counting: every publisher-matching update counts,
            // whatever the later gates or caps decide.
            state.count_instance(update.event_id, sub.ordinal);
            if (emitted_for_update >= limits.max_triggers_per_event_update) continue;
            if (counters.triggers_per_account[sub.subscriber] >=
                limits.max_triggers_per_account_per_epoch)
                continue;
            if (d.eval_gas > 0) {
                out.eval_charges.push_back({sub.subscriber, d.eval_gas, sub.params.gas_price});
                out.eval_gas_total += d.eval_gas;
            }
            if (!d.triggered) continue;
            TriggeredExecution exec;
            exec.event_id = update.event_id;
            exec.subscriber = sub.subscriber;
            exec.ordinal = sub.ordinal;
            exec.triggering_update = update_digest;
            exec.gas_price = sub.params.gas_price;
            exec.gas_limit = sub.params.gas_limit;
            exec.subscription_fee_paid = update.subscription_fee;
            exec.subscriber_data = sub.params.subscriber_data;
            out.executions.push_back(std::move(exec));
            state.mark_trigger(update.event_id, sub.ordinal, block);
            ++counters.triggers_per_account[sub.subscriber];
            ++emitted_for_update;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Processing order and the event buffer

namespace {

struct OrderEntry {
    Tokens priority;
    HashDigest digest;
    size_t index;
};

bool head_before(const std::pair<Tokens, HashDigest>& a,
                 const std::pair<Tokens, HashDigest>& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
}

}  // namespace

std::vector<PendingUpdate> consensus_update_order(std::vector<PendingUpdate> updates) {
    using QueueKey = std::pair<Address, Address>;
    std::map<QueueKey, std::map<uint64_t, PendingUpdate>> queues;
    for (PendingUpdate& pu : updates) {
        QueueKey key{pu.update.event_id, pu.update.publisher};
        queues[key].emplace(pu.update.nonce, std::move(pu));
    }
    std::vector<PendingUpdate> out;
    out.reserve(updates.size());
    while (!queues.empty()) {
        auto best = queues.end();
        std::pair<Tokens, HashDigest> best_key;
        for (auto it = queues.begin(); it != queues.end(); ++it) {
            const PendingUpdate& head = it->second.begin()->second;
            std::pair<Tokens, HashDigest> key{head.priority, digest_of(head.update)};
            if (best == queues.end() || head_before(key, best_key)) {
                best = it;
                best_key = key;
            }
        }
        out.push_back(std::move(best->second.begin()->second));
        best->second.erase(best->second.begin());
        if (best->second.empty()) queues.erase(best);
    }
    return out;
}

EventBuffer::IngestResult EventBuffer::ingest(const EventUpdate& update,
                                              const EventStateSnapshot& state) {
    if (auto reason = check_update_static(update, state)) return {false, *reason, std::nullopt};
    HashDigest digest = digest_of(update);
    if (digests_.contains(digest)) return {false, RejectReason::BadNonce, std::nullopt};
    QueueKey key{update.event_id, update.publisher};
    uint64_t last = state.last_nonce(update.event_id, update.publisher);
    if (update.nonce <= last) return {false, RejectReason::BadNonce, std::nullopt};
    auto& queue = queues_[key];
    if (queue.contains(update.nonce)) return {false, RejectReason::BadNonce, std::nullopt};

    IngestResult res{true, RejectReason::BufferFull, std::nullopt};
    if (size_ >= capacity_) {
        std::optional<HashDigest> evicted = evict_for(update.inclusion_fee);
        if (!evicted) {
            if (queue.empty()) queues_.erase(key);
            return {false, RejectReason::BufferFull, std::nullopt};
        }
        res.evicted = evicted;
    }
    queue.emplace(update.nonce, Entry{update, digest, update.inclusion_fee});
    digests_.insert(digest);
    ++size_;
    return res;
}

std::optional<HashDigest> EventBuffer::evict_for(Tokens incoming_fee) {
    // Lowest (fee, digest) entry goes, and only for a strictly better newcomer.
    auto best_queue = queues_.end();
    std::map<uint64_t, Entry>::iterator best_entry;
    bool found = false;
    Tokens best_fee = 0;
    HashDigest best_digest;
    for (auto qit = queues_.begin(); qit != queues_.end(); ++qit) {
        for (auto eit = qit->second.begin(); eit != qit->second.end(); ++eit) {
            const Entry& e = eit->second;
            if (!found || e.fee < best_fee || (e.fee == best_fee && e.digest < best_digest)) {
                found = true;
                best_fee = e.fee;
                best_digest = e.digest;
                best_queue = qit;
                best_entry = eit;
            }
        }
    }
    if (!found || best_fee >= incoming_fee) return std::nullopt;
    HashDigest evicted = best_entry->second.digest;
    digests_.erase(evicted);
    best_queue->second.erase(best_entry);
    if (best_queue->second.empty()) queues_.erase(best_queue);
    --size_;
    return evicted;
}

std::vector<EventUpdate> EventBuffer::drain_for_block(const EventStateSnapshot& state,
                                                      uint64_t budget) {
    std::vector<EventUpdate> out;
    std::map<QueueKey, uint64_t> released;  // queue -> count drained this call
    while (out.size() < budget) {
        auto best = queues_.end();
        std::pair<Tokens, HashDigest> best_key;
        for (auto it = queues_.begin(); it != queues_.end(); ++it) {
            const Entry& head = it->second.begin()->second;
            uint64_t expected = state.last_nonce(it->first.first, it->first.second) +
                                released[it->first] + 1;
            if (head.update.nonce != expected) continue;  // gap: hold this queue
            std::pair<Tokens, HashDigest> key{head.fee, head.digest};
            if (best == queues_.end() || head_before(key, best_key)) {
                best = it;
                best_key = key;
            }
        }
        if (best == queues_.end()) break;
        Entry head = std::move(best->second.begin()->second);
        best->second.erase(best->second.begin());
        ++released[best->first];
        if (best->second.empty()) queues_.erase(best);
        digests_.erase(head.digest);
        --size_;
        out.push_back(std::move(head.update));
    }
    return out;
}

void EventBuffer::remove(const HashDigest& digest) {
    if (!digests_.contains(digest)) return;
    for (auto qit = queues_.begin(); qit != queues_.end(); ++qit) {
        for (auto eit = qit->second.begin(); eit != qit->second.end(); ++eit) {
            if (eit->second.digest == digest) {
                qit->second.erase(eit);
                if (qit->second.empty()) queues_.erase(qit);
                digests_.erase(digest);
                --size_;
                return;
            }
        }
    }
}

void EventBuffer::prune_confirmed(const EventStateSnapshot& state) {
    for (auto qit = queues_.begin(); qit != queues_.end();) {
        uint64_t last = state.last_nonce(qit->first.first, qit->first.second);
        auto& queue = qit->second;
        while (!queue.empty() && queue.begin()->first <= last) {
            digests_.erase(queue.begin()->second.digest);
            queue.erase(queue.begin());
            --size_;
        }
        qit = queue.empty() ? queues_.erase(qit) : std::next(qit);
    }
}

}  // namespace edsc
