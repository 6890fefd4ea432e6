#pragma once

#include <memory>
#include <string>

#include "edsc/result.hpp"
#include "edsc/types.hpp"

namespace edsc {

/// Subscription predicate AST. Nodes are immutable after parsing; trees are
/// shared by value through a shared_ptr root.
///
/// Grammar (surface syntax, UTF-8 text inside Subscribe bodies):
///   expr     := or_expr
///   or_expr  := and_expr ("or" and_expr)*
///   and_expr := not_expr ("and" not_expr)*
///   not_expr := ["not"] cmp
///   cmp      := term op term | "(" expr ")" | bool_lit
///   term     := int_lit | hex_bytes_lit | field_ref
///   op       := "==" | "!=" | "<" | "<=" | ">" | ">="
///   field_ref:= "payload." name | "block.number" | "block.time" | "publisher"
///
/// Empty text parses as the always-true expression. Ordering operators apply
/// to ints only; ==/!= apply to any matching types. block.time is the block
/// timestamp in milliseconds.
struct ConstraintNode;
using ConstraintNodePtr = std::shared_ptr<const ConstraintNode>;

enum class CmpOp : uint8_t { Eq, Ne, Lt, Le, Gt, Ge };

struct ConstraintNode {
    enum class Kind : uint8_t {
        BoolLit,
        IntLit,
        BytesLit,
        PayloadField,
        BlockNumber,
        BlockTime,
        Publisher,
        Cmp,
        And,
        Or,
        Not,
    };
    Kind kind = Kind::BoolLit;
    bool bool_value = false;
    int64_t int_value = 0;
    Bytes bytes_value;
    uint32_t payload_index = 0;      // PayloadField
    ValueType field_type = ValueType::Int;
    CmpOp op = CmpOp::Eq;            // Cmp
    ConstraintNodePtr left;
    ConstraintNodePtr right;
};

struct ConstraintExpr {
    ConstraintNodePtr root;
    uint32_t node_count = 0;
    std::string source;
};

struct ConstraintError {
    enum class Kind { Syntax, Type };
    Kind kind = Kind::Syntax;
    std::string message;
};

inline constexpr uint32_t kMaxConstraintDepth = 32;
inline constexpr uint32_t kMaxConstraintNodes = 256;

/// Parse and type-check against the event's payload schema. Empty text yields
/// the always-true expression (a single bool literal).
Result<ConstraintExpr, ConstraintError> parse_constraint(const std::string& text,
                                                         const EventDefinition& schema);

struct MatchContext {
    const EventUpdate* update = nullptr;
    Height block_number = 0;
    uint64_t block_time_ms = 0;
};

struct EvalOutcome {
    bool value = false;
    Gas gas_cost = 0;  // eval_gas_per_node x nodes visited (short-circuit skips subtrees)
};

EvalOutcome evaluate(const ConstraintExpr& expr, const MatchContext& ctx, Gas eval_gas_per_node);

}  // namespace edsc
