#include "edsc/types.hpp"

#include "edsc/codec.hpp"
#include "edsc/hash.hpp"

namespace edsc {

static EventDefinition with_derived_id(EventDefinition d) {
    d.event_id = derive_event_id(d.creator, definition_identity_bytes(d));
    return d;
}

EventDefinition new_block_event_definition() {
    EventDefinition d;
    d.creator = system_address();
    d.variables = {{"number", ValueType::Int}, {"time", ValueType::Int}};
    d.comments = "system event emitted once per block";
    return with_derived_id(d);
}

EventDefinition transfer_event_definition() {
    EventDefinition d;
    d.creator = system_address();
    d.variables = {{"from", ValueType::Address},
                   {"to", ValueType::Address},
                   {"amount", ValueType::Int}};
    d.comments = "system token transfer event; contracts hold a default subscription";
    return with_derived_id(d);
}

Address new_block_event_id() {
    static const Address id = new_block_event_definition().event_id;
    return id;
}

Address transfer_event_id() {
    static const Address id = transfer_event_definition().event_id;
    return id;
}

}  // namespace edsc
