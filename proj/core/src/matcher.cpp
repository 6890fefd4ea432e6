#include "edsc/matcher.hpp"

#include <map>

namespace edsc {

const char* to_string(TriggerReason r) {
    switch (r) {
        case TriggerReason::Pass: return "Pass";
        case TriggerReason::PublisherFilter: return "PublisherFilter";
        case TriggerReason::SubscriptionFee: return "SubscriptionFee";
        case TriggerReason::BlockRate: return "BlockRate";
        case TriggerReason::EventRate: return "EventRate";
        case TriggerReason::Constraint: return "Constraint";
    }
    return "?";
}

const ConstraintExpr* cached_constraint(const Address& event_id, const std::string& text,
                                        const EventDefinition& schema) {
    thread_local std::map<std::pair<Address, std::string>, ConstraintExpr> cache;
    if (cache.size() > 100000) cache.clear();
    auto key = std::make_pair(event_id, text);
    auto it = cache.find(key);
    if (it != cache.end()) return &it->second;
    auto parsed = parse_constraint(text, schema);
    if (!parsed.ok()) return nullptr;  // registry validation keeps this unreachable
    return &cache.emplace(std::move(key), std::move(parsed.value())).first->second;
}

TriggerDecision should_trigger(const ActiveSubscription& sub, const MatchContext& ctx,
                               const EventDefinition& schema, Gas eval_gas_per_node) {
    const EventUpdate& update = *ctx.update;

    if (!sub.params.publisher_filter.empty()) {
        bool known = false;
        for (const Bytes& key : sub.params.publisher_filter)
            if (key == update.publisher_key) {
                known = true;
                break;
            }
        if (!known) return {false, 0, TriggerReason::PublisherFilter};
    }

    if (sub.params.max_subscription_fee < update.subscription_fee)
        return {false, 0, TriggerReason::SubscriptionFee};

    if (sub.params.block_rate > 0 &&
        ctx.block_number - sub.last_trigger_block < sub.params.block_rate)
        return {false, 0, TriggerReason::BlockRate};

    if (sub.params.event_rate > 0 && (sub.instance_counter + 1) % sub.params.event_rate != 0)
        return {false, 0, TriggerReason::EventRate};

    const ConstraintExpr* expr = cached_constraint(sub.event_id, sub.params.constraint, schema);
    if (!expr) return {false, 0, TriggerReason::Constraint};
    EvalOutcome out = evaluate(*expr, ctx, eval_gas_per_node);
    return {out.value, out.gas_cost, out.value ? TriggerReason::Pass : TriggerReason::Constraint};
}

}  // namespace edsc
