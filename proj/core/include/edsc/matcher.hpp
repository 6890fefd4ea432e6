#pragma once

#include "edsc/constraint.hpp"
#include "edsc/event_state.hpp"
#include "edsc/types.hpp"

namespace edsc {

enum class TriggerReason : uint8_t {
    Pass,
    PublisherFilter,
    SubscriptionFee,
    BlockRate,
    EventRate,
    Constraint,
};

const char* to_string(TriggerReason r);

struct TriggerDecision {
    bool triggered = false;
    Gas eval_gas = 0;  // accrues only if the constraint gate ran
    TriggerReason reason = TriggerReason::Pass;
};

/// Does the (active) subscription fire for this update? Gates run in a fixed,
/// consensus-relevant order, cheapest first: publisher filter, subscription
/// fee cap, block rate, event rate, constraint. The first failing gate is
/// named and the constraint is only evaluated (and only then charged) when
/// every earlier gate passed.
TriggerDecision should_trigger(const ActiveSubscription& sub, const MatchContext& ctx,
                               const EventDefinition& schema, Gas eval_gas_per_node);

/// Parse-once cache for subscription constraints, keyed by (event_id, text).
/// Event ids are derived injectively from their definitions, so the key pins
/// the schema the text was checked against.
const ConstraintExpr* cached_constraint(const Address& event_id, const std::string& text,
                                        const EventDefinition& schema);

}  // namespace edsc
