#include "edsc/constraint.hpp"

#include <cctype>

#include "edsc/hash.hpp"

namespace edsc {

namespace {

// ---------------------------------------------------------------------------
// Tokenizer

enum class Tok { End, Ident, Int, HexBytes, Op, LParen, RParen };

struct Token {
    Tok kind = Tok::End;
    std::string text{};
    int64_t int_value = 0;
    Bytes bytes_value{};
    CmpOp op = CmpOp::Eq;
};

class Lexer {
public:
    explicit Lexer(const std::string& src) : src_(src) {}

    Result<std::vector<Token>, ConstraintError> run() {
        std::vector<Token> out;
        while (true) {
            skip_space();
            if (pos_ >= src_.size()) break;
            char c = src_[pos_];
            if (c == '(') {
                out.push_back({Tok::LParen, "("});
                ++pos_;
            } else if (c == ')') {
                out.push_back({Tok::RParen, ")"});
                ++pos_;
            } else if (c == '=' || c == '!' || c == '<' || c == '>') {
                Token t{Tok::Op, {}};
                if (starts_with("==")) t.op = CmpOp::Eq;
                else if (starts_with("!=")) t.op = CmpOp::Ne;
                else if (starts_with("<=")) t.op = CmpOp::Le;
                else if (starts_with(">=")) t.op = CmpOp::Ge;
                else if (c == '<') t.op = CmpOp::Lt;
                else if (c == '>') t.op = CmpOp::Gt;
                else return err("bad operator at offset " + std::to_string(pos_));
                pos_ += (t.op == CmpOp::Lt || t.op == CmpOp::Gt) ? 1 : 2;
                out.push_back(std::move(t));
            } else if (c == '0' && pos_ + 1 < src_.size() &&
                       (src_[pos_ + 1] == 'x' || src_[pos_ + 1] == 'X')) {
                size_t start = pos_;
                pos_ += 2;
                while (pos_ < src_.size() && std::isxdigit(static_cast<unsigned char>(src_[pos_])))
                    ++pos_;
                auto bytes = from_hex(std::string_view(src_).substr(start, pos_ - start));
                if (!bytes) return err("bad hex literal");
                Token t{Tok::HexBytes, src_.substr(start, pos_ - start)};
                t.bytes_value = std::move(*bytes);
                out.push_back(std::move(t));
            } else if (std::isdigit(static_cast<unsigned char>(c)) ||
                       (c == '-' && pos_ + 1 < src_.size() &&
                        std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
                size_t start = pos_;
                if (c == '-') ++pos_;
                while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
                    ++pos_;
                Token t{Tok::Int, src_.substr(start, pos_ - start)};
                try {
                    t.int_value = std::stoll(t.text);
                } catch (...) {
                    return err("integer literal out of range: " + t.text);
                }
                out.push_back(std::move(t));
            } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
                size_t start = pos_;
                while (pos_ < src_.size() &&
                       (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
                        src_[pos_] == '_' || src_[pos_] == '.'))
                    ++pos_;
                out.push_back({Tok::Ident, src_.substr(start, pos_ - start)});
            } else {
                return err(std::string("unexpected character '") + c + "'");
            }
        }
        out.push_back({Tok::End, ""});
        return out;
    }

private:
    const std::string& src_;
    size_t pos_ = 0;

    void skip_space() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }
    bool starts_with(std::string_view s) const {
        return src_.compare(pos_, s.size(), s) == 0;
    }
    static ConstraintError err(std::string msg) {
        return ConstraintError{ConstraintError::Kind::Syntax, std::move(msg)};
    }
};

// ---------------------------------------------------------------------------
// Parser

enum class TermKind { Int, Bytes, Bool };

class Parser {
public:
    Parser(std::vector<Token> toks, const EventDefinition& schema)
        : toks_(std::move(toks)), schema_(schema) {}

    Result<ConstraintExpr, ConstraintError> run(const std::string& source) {
        auto root = parse_or(0);
        if (!root.ok()) return root.error();
        if (peek().kind != Tok::End)
            return syntax_err("unexpected token '" + peek().text + "'");
        ConstraintExpr expr;
        expr.root = root.value();
        expr.node_count = nodes_;
        expr.source = source;
        return expr;
    }

private:
    std::vector<Token> toks_;
    const EventDefinition& schema_;
    size_t pos_ = 0;
    uint32_t nodes_ = 0;

    using NodeResult = Result<ConstraintNodePtr, ConstraintError>;

    const Token& peek() const { return toks_[pos_]; }
    const Token& advance() { return toks_[pos_++]; }
    bool accept_ident(std::string_view name) {
        if (peek().kind == Tok::Ident && peek().text == name) {
            ++pos_;
            return true;
        }
        return false;
    }

    static ConstraintError syntax_err(std::string msg) {
        return ConstraintError{ConstraintError::Kind::Syntax, std::move(msg)};
    }
    static ConstraintError type_err(std::string msg) {
        return ConstraintError{ConstraintError::Kind::Type, std::move(msg)};
    }
    NodeResult syntax(std::string msg) { return syntax_err(std::move(msg)); }

    ConstraintNodePtr make(ConstraintNode n) {
        ++nodes_;
        return std::make_shared<ConstraintNode>(std::move(n));
    }

    NodeResult parse_or(uint32_t depth) {
        if (depth > kMaxConstraintDepth) return syntax("expression too deep");
        auto left = parse_and(depth + 1);
        if (!left.ok()) return left;
        while (accept_ident("or")) {
            auto right = parse_and(depth + 1);
            if (!right.ok()) return right;
            ConstraintNode n;
            n.kind = ConstraintNode::Kind::Or;
            n.left = left.value();
            n.right = right.value();
            left = check_limit(make(std::move(n)));
            if (!left.ok()) return left;
        }
        return left;
    }

    NodeResult parse_and(uint32_t depth) {
        if (depth > kMaxConstraintDepth) return syntax("expression too deep");
        auto left = parse_not(depth + 1);
        if (!left.ok()) return left;
        while (accept_ident("and")) {
            auto right = parse_not(depth + 1);
            if (!right.ok()) return right;
            ConstraintNode n;
            n.kind = ConstraintNode::Kind::And;
            n.left = left.value();
            n.right = right.value();
            left = check_limit(make(std::move(n)));
            if (!left.ok()) return left;
        }
        return left;
    }

    NodeResult parse_not(uint32_t depth) {
        if (depth > kMaxConstraintDepth) return syntax("expression too deep");
        if (accept_ident("not")) {
            auto child = parse_not(depth + 1);
            if (!child.ok()) return child;
            ConstraintNode n;
            n.kind = ConstraintNode::Kind::Not;
            n.left = child.value();
            return check_limit(make(std::move(n)));
        }
        return parse_cmp(depth + 1);
    }

    NodeResult parse_cmp(uint32_t depth) {
        if (depth > kMaxConstraintDepth) return syntax("expression too deep");
        if (peek().kind == Tok::LParen) {
            advance();
            auto inner = parse_or(depth + 1);
            if (!inner.ok()) return inner;
            if (peek().kind != Tok::RParen) return syntax("expected ')'");
            advance();
            return inner;
        }
        if (peek().kind == Tok::Ident && (peek().text == "true" || peek().text == "false")) {
            ConstraintNode n;
            n.kind = ConstraintNode::Kind::BoolLit;
            n.bool_value = advance().text == "true";
            return check_limit(make(std::move(n)));
        }
        auto left = parse_term(depth + 1);
        if (!left.ok()) return left;
        if (peek().kind != Tok::Op) return syntax("expected comparison operator");
        CmpOp op = advance().op;
        auto right = parse_term(depth + 1);
        if (!right.ok()) return right;

        TermKind lk = term_kind(*left.value());
        TermKind rk = term_kind(*right.value());
        if (lk != rk)
            return type_err("cannot compare values of different kinds");
        bool ordered = op == CmpOp::Lt || op == CmpOp::Le || op == CmpOp::Gt || op == CmpOp::Ge;
        if (ordered && lk != TermKind::Int)
            return type_err("ordering comparison requires integer operands");

        ConstraintNode n;
        n.kind = ConstraintNode::Kind::Cmp;
        n.op = op;
        n.left = left.value();
        n.right = right.value();
        return check_limit(make(std::move(n)));
    }

    NodeResult parse_term(uint32_t depth) {
        if (depth > kMaxConstraintDepth) return syntax("expression too deep");
        const Token& t = peek();
        if (t.kind == Tok::Int) {
            ConstraintNode n;
            n.kind = ConstraintNode::Kind::IntLit;
            n.int_value = advance().int_value;
            return check_limit(make(std::move(n)));
        }
        if (t.kind == Tok::HexBytes) {
            ConstraintNode n;
            n.kind = ConstraintNode::Kind::BytesLit;
            n.bytes_value = advance().bytes_value;
            return check_limit(make(std::move(n)));
        }
        if (t.kind == Tok::Ident) {
            std::string name = advance().text;
            ConstraintNode n;
            if (name == "block.number") {
                n.kind = ConstraintNode::Kind::BlockNumber;
            } else if (name == "block.time") {
                n.kind = ConstraintNode::Kind::BlockTime;
            } else if (name == "publisher") {
                n.kind = ConstraintNode::Kind::Publisher;
            } else if (name.starts_with("payload.")) {
                std::string field = name.substr(8);
                auto it = std::find_if(schema_.variables.begin(), schema_.variables.end(),
                                       [&](const auto& v) { return v.first == field; });
                if (it == schema_.variables.end())
                    return type_err("unknown payload field '" + field + "'");
                n.kind = ConstraintNode::Kind::PayloadField;
                n.payload_index =
                    static_cast<uint32_t>(std::distance(schema_.variables.begin(), it));
                n.field_type = it->second;
            } else {
                return syntax("unknown identifier '" + name + "'");
            }
            return check_limit(make(std::move(n)));
        }
        return syntax("expected term");
    }

    static TermKind term_kind(const ConstraintNode& n) {
        switch (n.kind) {
            case ConstraintNode::Kind::IntLit:
            case ConstraintNode::Kind::BlockNumber:
            case ConstraintNode::Kind::BlockTime:
                return TermKind::Int;
            case ConstraintNode::Kind::BytesLit:
            case ConstraintNode::Kind::Publisher:
                return TermKind::Bytes;
            case ConstraintNode::Kind::PayloadField:
                switch (n.field_type) {
                    case ValueType::Int: return TermKind::Int;
                    case ValueType::Bool: return TermKind::Bool;
                    case ValueType::Bytes:
                    case ValueType::Address: return TermKind::Bytes;
                }
                return TermKind::Int;
            default:
                return TermKind::Bool;
        }
    }

    NodeResult check_limit(ConstraintNodePtr node) {
        if (nodes_ > kMaxConstraintNodes) return syntax("expression too large");
        return node;
    }
};

// ---------------------------------------------------------------------------
// Evaluator

struct TermValue {
    TermKind kind = TermKind::Int;
    int64_t i = 0;
    Bytes b{};
    bool flag = false;
};

TermValue eval_term(const ConstraintNode& n, const MatchContext& ctx, uint32_t& visited) {
    ++visited;
    TermValue out{TermKind::Int};
    switch (n.kind) {
        case ConstraintNode::Kind::IntLit:
            out.i = n.int_value;
            return out;
        case ConstraintNode::Kind::BlockNumber:
            out.i = static_cast<int64_t>(ctx.block_number);
            return out;
        case ConstraintNode::Kind::BlockTime:
            out.i = static_cast<int64_t>(ctx.block_time_ms);
            return out;
        case ConstraintNode::Kind::BytesLit:
            out.kind = TermKind::Bytes;
            out.b = n.bytes_value;
            return out;
        case ConstraintNode::Kind::Publisher:
            out.kind = TermKind::Bytes;
            out.b = ctx.update->publisher_key;
            return out;
        case ConstraintNode::Kind::PayloadField: {
            const Value& v = ctx.update->payload.at(n.payload_index);
            switch (v.type()) {
                case ValueType::Int:
                    out.i = std::get<int64_t>(v.v);
                    return out;
                case ValueType::Bool:
                    out.kind = TermKind::Bool;
                    out.flag = std::get<bool>(v.v);
                    return out;
                case ValueType::Bytes:
                    out.kind = TermKind::Bytes;
                    out.b = std::get<Bytes>(v.v);
                    return out;
                case ValueType::Address: {
                    const Address& a = std::get<Address>(v.v);
                    out.kind = TermKind::Bytes;
                    out.b.assign(a.bytes.begin(), a.bytes.end());
                    return out;
                }
            }
            return out;
        }
        default:
            return out;  // unreachable for well-typed trees
    }
}

bool eval_bool(const ConstraintNode& n, const MatchContext& ctx, uint32_t& visited) {
    ++visited;
    switch (n.kind) {
        case ConstraintNode::Kind::BoolLit:
            return n.bool_value;
        case ConstraintNode::Kind::Not:
            return !eval_bool(*n.left, ctx, visited);
        case ConstraintNode::Kind::And:
            if (!eval_bool(*n.left, ctx, visited)) return false;
            return eval_bool(*n.right, ctx, visited);
        case ConstraintNode::Kind::Or:
            if (eval_bool(*n.left, ctx, visited)) return true;
            return eval_bool(*n.right, ctx, visited);
        case ConstraintNode::Kind::Cmp: {
            TermValue l = eval_term(*n.left, ctx, visited);
            TermValue r = eval_term(*n.right, ctx, visited);
            switch (l.kind) {
                case TermKind::Int:
                    switch (n.op) {
                        case CmpOp::Eq: return l.i == r.i;
                        case CmpOp::Ne: return l.i != r.i;
                        case CmpOp::Lt: return l.i < r.i;
                        case CmpOp::Le: return l.i <= r.i;
                        case CmpOp::Gt: return l.i > r.i;
                        case CmpOp::Ge: return l.i >= r.i;
                    }
                    return false;
                case TermKind::Bytes:
                    return n.op == CmpOp::Eq ? l.b == r.b : l.b != r.b;
                case TermKind::Bool:
                    return n.op == CmpOp::Eq ? l.flag == r.flag : l.flag != r.flag;
            }
            return false;
        }
        default:
            return false;  // unreachable for well-typed trees
    }
}

}  // namespace

Result<ConstraintExpr, ConstraintError> parse_constraint(const std::string& text,
                                                         const EventDefinition& schema) {
    // Empty text is the identity constraint.
    bool all_space = true;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c))) {
            all_space = false;
            break;
        }
    if (all_space) {
        ConstraintExpr expr;
        auto node = std::make_shared<ConstraintNode>();
        node->kind = ConstraintNode::Kind::BoolLit;
        node->bool_value = true;
        expr.root = node;
        expr.node_count = 1;
        expr.source = text;
        return expr;
    }
    auto toks = Lexer(text).run();
    if (!toks.ok()) return toks.error();
    return Parser(std::move(toks.value()), schema).run(text);
}

EvalOutcome evaluate(const ConstraintExpr& expr, const MatchContext& ctx, Gas eval_gas_per_node) {
    uint32_t visited = 0;
    bool value = eval_bool(*expr.root, ctx, visited);
    return EvalOutcome{value, static_cast<Gas>(visited) * eval_gas_per_node};
}

}  // namespace edsc
