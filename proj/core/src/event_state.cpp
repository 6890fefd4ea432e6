#include "edsc/event_state.hpp"

#include <algorithm>

#include "edsc/codec.hpp"
#include "edsc/constraint.hpp"
#include "edsc/hash.hpp"
#include "edsc/signature.hpp"
#include "json.hpp"

namespace edsc {

const char* to_string(EventStateError e) {
    switch (e) {
        case EventStateError::DuplicateEvent: return "DuplicateEvent";
        case EventStateError::InvalidSignature: return "InvalidSignature";
        case EventStateError::UnknownEvent: return "UnknownEvent";
        case EventStateError::UnknownContract: return "UnknownContract";
        case EventStateError::NoSuchSubscription: return "NoSuchSubscription";
        case EventStateError::BadConstraint: return "BadConstraint";
    }
    return "?";
}

const EventDefinition* EventStateSnapshot::find_definition(const Address& event_id) const {
    auto it = definitions.find(event_id);
    return it == definitions.end() ? nullptr : &it->second;
}

const Subscription* EventStateSnapshot::find_subscription(const Address& event_id,
                                                          uint64_t ordinal) const {
    auto it = subscriptions.find({event_id, ordinal});
    return it == subscriptions.end() ? nullptr : &it->second;
}

Subscription* EventStateSnapshot::find_subscription(const Address& event_id, uint64_t ordinal) {
    auto it = subscriptions.find({event_id, ordinal});
    return it == subscriptions.end() ? nullptr : &it->second;
}

uint64_t EventStateSnapshot::last_nonce(const Address& event_id, const Address& publisher) const {
    auto it = publisher_nonces.find({event_id, publisher});
    return it == publisher_nonces.end() ? 0 : it->second;
}

void EventStateSnapshot::record_nonce(const Address& event_id, const Address& publisher,
                                      uint64_t nonce) {
    uint64_t& slot = publisher_nonces[{event_id, publisher}];
    if (nonce > slot) slot = nonce;
}

void EventStateSnapshot::mark_trigger(const Address& event_id, uint64_t ordinal, Height block) {
    if (Subscription* s = find_subscription(event_id, ordinal)) s->last_trigger_block = block;
}

void EventStateSnapshot::count_instance(const Address& event_id, uint64_t ordinal) {
    if (Subscription* s = find_subscription(event_id, ordinal)) s->instance_counter += 1;
}

EventStateSnapshot genesis_event_state() {
    EventStateSnapshot s;
    EventDefinition nb = new_block_event_definition();
    EventDefinition tr = transfer_event_definition();
    s.definitions[nb.event_id] = nb;
    s.definitions[tr.event_id] = tr;
    return s;
}

// ---------------------------------------------------------------------------
// apply_*

static bool message_signed_ok(const ProtocolMessage& msg) {
    if (!msg.signature) return false;
    return verify_signature_blob(protocol_scheme(), msg.sender, signing_digest(msg),
                                 *msg.signature);
}

EventStateResult apply_event_create(const EventStateSnapshot& state, const ProtocolMessage& msg,
                                    Height /*block*/) {
    if (!message_signed_ok(msg)) return EventStateError::InvalidSignature;
    const auto& body = std::get<EventCreateBody>(msg.body);
    EventDefinition def = body.definition;
    def.creator = msg.sender;
    def.event_id = derive_event_id(msg.sender, definition_identity_bytes(def));
    if (state.definitions.contains(def.event_id)) return EventStateError::DuplicateEvent;
    EventStateSnapshot next = state;
    next.definitions[def.event_id] = std::move(def);
    return next;
}

/// Final scheduled params: what the subscription will be once all pending
/// changes have taken effect (nullopt = scheduled for removal).
static std::optional<SubscriptionParams> final_scheduled_params(const Subscription& sub) {
    if (sub.pending.empty()) return sub.params;
    return sub.pending.back().params;
}

EventStateResult apply_subscription(const EventStateSnapshot& state, const Address& subscriber,
                                    const SubscriptionParams& params, Height block,
                                    uint64_t activation_delay,
                                    const ContractPredicate& is_contract) {
    const EventDefinition* def = state.find_definition(params.event_id);
    if (!def) return EventStateError::UnknownEvent;
    if (is_contract && !is_contract(subscriber)) return EventStateError::UnknownContract;
    if (!parse_constraint(params.constraint, *def).ok()) return EventStateError::BadConstraint;

    EventStateSnapshot next = state;
    Subscription sub;
    sub.event_id = params.event_id;
    sub.subscriber = subscriber;
    sub.ordinal = next.next_ordinal++;
    sub.params = params;
    sub.activation_block = block + activation_delay;
    next.subscriptions[{sub.event_id, sub.ordinal}] = std::move(sub);
    return next;
}

EventStateResult apply_subscribe(const EventStateSnapshot& state, const ProtocolMessage& msg,
                                 Height block, uint64_t activation_delay,
                                 const ContractPredicate& is_contract) {
    if (!message_signed_ok(msg)) return EventStateError::InvalidSignature;
    const auto& body = std::get<SubscribeBody>(msg.body);
    return apply_subscription(state, body.subscriber, body.params, block, activation_delay,
                              is_contract);
}

EventStateResult apply_unsubscribe(const EventStateSnapshot& state, const ProtocolMessage& msg,
                                   Height block, uint64_t activation_delay) {
    if (!message_signed_ok(msg)) return EventStateError::InvalidSignature;
    const auto& body = std::get<UnsubscribeBody>(msg.body);
    const Subscription* sub = state.find_subscription(body.event_id, body.ordinal);
    if (!sub || sub->subscriber != body.subscriber) return EventStateError::NoSuchSubscription;
    if (!final_scheduled_params(*sub)) return EventStateError::NoSuchSubscription;
    EventStateSnapshot next = state;
    next.find_subscription(body.event_id, body.ordinal)
        ->pending.push_back({block + activation_delay, std::nullopt});
    return next;
}

EventStateResult apply_subscription_update(const EventStateSnapshot& state,
                                           const ProtocolMessage& msg, Height block,
                                           uint64_t activation_delay) {
    if (!message_signed_ok(msg)) return EventStateError::InvalidSignature;
    const auto& body = std::get<SubscriptionUpdateBody>(msg.body);
    const Subscription* sub = state.find_subscription(body.event_id, body.ordinal);
    if (!sub || sub->subscriber != body.subscriber) return EventStateError::NoSuchSubscription;
    if (!final_scheduled_params(*sub)) return EventStateError::NoSuchSubscription;
    const EventDefinition* def = state.find_definition(body.event_id);
    SubscriptionParams params = body.new_params;
    params.event_id = body.event_id;  // updates may not move a subscription across events
    if (!parse_constraint(params.constraint, *def).ok()) return EventStateError::BadConstraint;
    EventStateSnapshot next = state;
    next.find_subscription(body.event_id, body.ordinal)
        ->pending.push_back({block + activation_delay, std::move(params)});
    return next;
}

// ---------------------------------------------------------------------------
// Queries

/// Governing view of one record at `block`, or nullopt when not active
/// (not yet activated, or an effective removal).
static std::optional<ActiveSubscription> resolve_at(const Subscription& sub, Height block) {
    if (sub.activation_block > block) return std::nullopt;
    const SubscriptionParams* governing = &sub.params;
    for (const PendingChange& ch : sub.pending) {
        if (ch.effective_block > block) break;
        if (!ch.params) return std::nullopt;
        governing = &*ch.params;
    }
    ActiveSubscription out;
    out.event_id = sub.event_id;
    out.subscriber = sub.subscriber;
    out.ordinal = sub.ordinal;
    out.params = *governing;
    out.last_trigger_block = sub.last_trigger_block;
    out.instance_counter = sub.instance_counter;
    return out;
}

std::vector<ActiveSubscription> active_subscriptions(const EventStateSnapshot& state,
                                                     const Address& event_id, Height block) {
    std::vector<ActiveSubscription> out;
    auto it = state.subscriptions.lower_bound({event_id, 0});
    for (; it != state.subscriptions.end() && it->first.first == event_id; ++it) {
        if (auto active = resolve_at(it->second, block)) out.push_back(std::move(*active));
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const ActiveSubscription& a, const ActiveSubscription& b) {
                         if (a.params.gas_price != b.params.gas_price)
                             return a.params.gas_price > b.params.gas_price;
                         return a.ordinal < b.ordinal;
                     });
    return out;
}

EventStateSnapshot advance_to_block(const EventStateSnapshot& state, Height block) {
    EventStateSnapshot next = state;
    for (auto it = next.subscriptions.begin(); it != next.subscriptions.end();) {
        Subscription& sub = it->second;
        bool removed = false;
        size_t applied = 0;
        for (const PendingChange& ch : sub.pending) {
            if (ch.effective_block > block) break;
            ++applied;
            if (!ch.params) {
                removed = true;
            } else {
                removed = false;
                sub.params = *ch.params;
            }
        }
        if (removed) {
            it = next.subscriptions.erase(it);
            continue;
        }
        if (applied > 0) sub.pending.erase(sub.pending.begin(), sub.pending.begin() + applied);
        ++it;
    }
    return next;
}

// ---------------------------------------------------------------------------
// Authentication

static void write_subscription_record(Writer& w, const Subscription& s) {
    w.put_address(s.event_id);
    w.put_address(s.subscriber);
    w.put_u64(s.ordinal);
    write_subscription_params(w, s.params);
    w.put_u64(s.activation_block);
    w.put_u64(s.last_trigger_block);
    w.put_u64(s.instance_counter);
    w.put_u32(static_cast<uint32_t>(s.pending.size()));
    for (const PendingChange& ch : s.pending) {
        w.put_u64(ch.effective_block);
        w.put_bool(ch.params.has_value());
        if (ch.params) write_subscription_params(w, *ch.params);
    }
}

HashDigest root_hash(const EventStateSnapshot& state) {
    std::vector<HashDigest> leaves;
    leaves.reserve(state.definitions.size() + state.subscriptions.size() +
                   state.publisher_nonces.size() + 1);
    for (const auto& [id, def] : state.definitions) {
        Writer w;
        w.put_u8(1);
        w.put_raw(encode(def));
        leaves.push_back(sha256(w.data()));
    }
    for (const auto& [key, sub] : state.subscriptions) {
        Writer w;
        w.put_u8(2);
        write_subscription_record(w, sub);
        leaves.push_back(sha256(w.data()));
    }
    for (const auto& [key, nonce] : state.publisher_nonces) {
        Writer w;
        w.put_u8(3);
        w.put_address(key.first);
        w.put_address(key.second);
        w.put_u64(nonce);
        leaves.push_back(sha256(w.data()));
    }
    Writer w;
    w.put_u8(4);
    w.put_u64(state.next_ordinal);
    leaves.push_back(sha256(w.data()));
    return merkle_root(std::move(leaves));
}

// ---------------------------------------------------------------------------
// Debug dump

static const char* value_type_name(ValueType t) {
    switch (t) {
        case ValueType::Int: return "int";
        case ValueType::Bytes: return "bytes";
        case ValueType::Address: return "address";
        case ValueType::Bool: return "bool";
    }
    return "?";
}

std::string to_debug_json(const EventStateSnapshot& state) {
    nlohmann::json doc;
    auto& defs = doc["definitions"];
    defs = nlohmann::json::object();
    for (const auto& [id, def] : state.definitions) {
        nlohmann::json vars = nlohmann::json::array();
        for (const auto& [name, type] : def.variables)
            vars.push_back({{"name", name}, {"type", value_type_name(type)}});
        defs[id.to_hex()] = {
            {"creator", def.creator.to_hex()}, {"variables", vars}, {"comments", def.comments}};
    }
    auto& subs = doc["subscriptions"];
    subs = nlohmann::json::object();
    auto params_json = [](const SubscriptionParams& p) {
        nlohmann::json filt = nlohmann::json::array();
        for (const Bytes& k : p.publisher_filter) filt.push_back(to_hex(k));
        return nlohmann::json{{"event_id", p.event_id.to_hex()},
                              {"gas_price", p.gas_price},
                              {"gas_limit", p.gas_limit},
                              {"max_subscription_fee", p.max_subscription_fee},
                              {"publisher_filter", filt},
                              {"block_rate", p.block_rate},
                              {"event_rate", p.event_rate},
                              {"constraint", p.constraint},
                              {"subscriber_data", to_hex(p.subscriber_data)}};
    };
    for (const auto& [key, sub] : state.subscriptions) {
        nlohmann::json pend = nlohmann::json::array();
        for (const PendingChange& ch : sub.pending) {
            nlohmann::json entry = {{"effective_block", ch.effective_block}};
            entry["params"] = ch.params ? params_json(*ch.params) : nlohmann::json(nullptr);
            pend.push_back(entry);
        }
        subs[key.first.to_hex() + "/" + std::to_string(key.second)] = {
            {"subscriber", sub.subscriber.to_hex()},
            {"ordinal", sub.ordinal},
            {"params", params_json(sub.params)},
            {"activation_block", sub.activation_block},
            {"last_trigger_block", sub.last_trigger_block},
            {"instance_counter", sub.instance_counter},
            {"pending", pend}};
    }
    auto& nonces = doc["publisher_nonces"];
    nonces = nlohmann::json::object();
    for (const auto& [key, nonce] : state.publisher_nonces)
        nonces[key.first.to_hex() + "/" + key.second.to_hex()] = nonce;
    doc["next_ordinal"] = state.next_ordinal;
    doc["root"] = root_hash(state).to_hex();
    return doc.dump(2);
}

}  // namespace edsc
