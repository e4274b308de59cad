#include "zql/parser.hpp"

#include <algorithm>
#include <cctype>
#include <optional>
#include <sstream>

#include "zql/errors.hpp"

namespace zql {

namespace {

// ---------- tokens ----------

enum class Tok {
    End, Ident, Quoted, Number,
    Arrow,      // <--
    RArrow,     // -->
    Le, Ge, Ne, Lt, Gt, Eq,
    LBrace, RBrace, LParen, RParen, LBracket, RBracket,
    Comma, Dot, Star, Plus, Minus, Caret, Slash, Pipe, Underscore, Question, Colon,
};

struct Token {
    Tok kind = Tok::End;
    std::string text;
    int64_t ival = 0;
    double dval = 0;
    bool is_int = false;
    int line = 0, col = 0;
};

const char* tok_name(Tok t) {
    switch (t) {
        case Tok::End: return "end of cell";
        case Tok::Ident: return "identifier";
        case Tok::Quoted: return "quoted literal";
        case Tok::Number: return "number";
        case Tok::Arrow: return "<--";
        case Tok::RArrow: return "-->";
        case Tok::Le: return "<=";
        case Tok::Ge: return ">=";
        case Tok::Ne: return "!=";
        case Tok::Lt: return "<";
        case Tok::Gt: return ">";
        case Tok::Eq: return "=";
        case Tok::LBrace: return "{";
        case Tok::RBrace: return "}";
        case Tok::LParen: return "(";
        case Tok::RParen: return ")";
        case Tok::LBracket: return "[";
        case Tok::RBracket: return "]";
        case Tok::Comma: return ",";
        case Tok::Dot: return ".";
        case Tok::Star: return "*";
        case Tok::Plus: return "+";
        case Tok::Minus: return "-";
        case Tok::Caret: return "^";
        case Tok::Slash: return "/";
        case Tok::Pipe: return "|";
        case Tok::Underscore: return "_";
        case Tok::Question: return "?";
        case Tok::Colon: return ":";
    }
    return "?";
}

class Lexer {
public:
    Lexer(const std::string& text, int line, int col0) : s_(text), line_(line), col0_(col0) {
        tokenize();
    }

    const Token& peek(std::size_t ahead = 0) const {
        const std::size_t i = pos_ + ahead;
        return i < toks_.size() ? toks_[i] : toks_.back();
    }
    const Token& next() {
        const Token& t = peek();
        if (pos_ < toks_.size() - 1) ++pos_;
        return t;
    }
    bool at(Tok k, std::size_t ahead = 0) const { return peek(ahead).kind == k; }
    bool accept(Tok k) {
        if (!at(k)) return false;
        next();
        return true;
    }
    Token expect(Tok k, const std::string& what) {
        if (!at(k)) fail(what);
        return next();
    }
    [[noreturn]] void fail(const std::string& expected) const {
        const Token& t = peek();
        throw SyntaxError(t.line, t.col, expected,
                          t.kind == Tok::Ident || t.kind == Tok::Quoted || t.kind == Tok::Number
                              ? "'" + t.text + "'"
                              : tok_name(t.kind));
    }

private:
    std::string s_;
    int line_, col0_;
    std::vector<Token> toks_;
    std::size_t pos_ = 0;

    void push(Tok k, std::size_t at, std::string text = {}) {
        Token t;
        t.kind = k;
        t.text = std::move(text);
        t.line = line_;
        t.col = col0_ + static_cast<int>(at) + 1;
        toks_.push_back(std::move(t));
    }

    void tokenize() {
        std::size_t i = 0;
        const std::size_t n = s_.size();
        while (i < n) {
            const char c = s_[i];
            if (std::isspace(static_cast<unsigned char>(c))) { ++i; continue; }
            if (c == '\'') {
                std::string text;
                std::size_t start = i++;
                while (i < n && s_[i] != '\'') text.push_back(s_[i++]);
                if (i >= n)
                    throw SyntaxError(line_, col0_ + static_cast<int>(start) + 1,
                                      "closing quote", "end of cell");
                ++i;
                push(Tok::Quoted, start, text);
                continue;
            }
            if (std::isalpha(static_cast<unsigned char>(c))) {
                std::size_t start = i;
                while (i < n && std::isalnum(static_cast<unsigned char>(s_[i]))) ++i;
                push(Tok::Ident, start, s_.substr(start, i - start));
                continue;
            }
            if (std::isdigit(static_cast<unsigned char>(c))) {
                std::size_t start = i;
                bool is_int = true;
                while (i < n && std::isdigit(static_cast<unsigned char>(s_[i]))) ++i;
                if (i < n && s_[i] == '.' && i + 1 < n &&
                    std::isdigit(static_cast<unsigned char>(s_[i + 1]))) {
                    is_int = false;
                    ++i;
                    while (i < n && std::isdigit(static_cast<unsigned char>(s_[i]))) ++i;
                }
                Token t;
                t.kind = Tok::Number;
                t.text = s_.substr(start, i - start);
                t.is_int = is_int;
                if (is_int) t.ival = std::stoll(t.text);
                t.dval = std::stod(t.text);
                t.line = line_;
                t.col = col0_ + static_cast<int>(start) + 1;
                toks_.push_back(std::move(t));
                continue;
            }
            auto two = [&](const char* p) { return i + 1 < n && s_[i] == p[0] && s_[i + 1] == p[1]; };
            if (i + 2 < n && s_[i] == '<' && s_[i + 1] == '-' && s_[i + 2] == '-') {
                push(Tok::Arrow, i); i += 3; continue;
            }
            if (i + 2 <= n - 1 && s_[i] == '-' && s_[i + 1] == '-' && s_[i + 2] == '>') {
                push(Tok::RArrow, i); i += 3; continue;
            }
            if (two("<=")) { push(Tok::Le, i); i += 2; continue; }
            if (two(">=")) { push(Tok::Ge, i); i += 2; continue; }
            if (two("!=")) { push(Tok::Ne, i); i += 2; continue; }
            if (two("<>")) { push(Tok::Ne, i); i += 2; continue; }
            switch (c) {
                case '<': push(Tok::Lt, i); break;
                case '>': push(Tok::Gt, i); break;
                case '=': push(Tok::Eq, i); break;
                case '{': push(Tok::LBrace, i); break;
                case '}': push(Tok::RBrace, i); break;
                case '(': push(Tok::LParen, i); break;
                case ')': push(Tok::RParen, i); break;
                case '[': push(Tok::LBracket, i); break;
                case ']': push(Tok::RBracket, i); break;
                case ',': push(Tok::Comma, i); break;
                case '.': push(Tok::Dot, i); break;
                case '*': push(Tok::Star, i); break;
                case '+': push(Tok::Plus, i); break;
                case '-': push(Tok::Minus, i); break;
                case '^': push(Tok::Caret, i); break;
                case '/': push(Tok::Slash, i); break;
                case '\\': push(Tok::Minus, i); break;  // "\" accepted for set difference
                case '|': push(Tok::Pipe, i); break;
                case '_': push(Tok::Underscore, i); break;
                case '?': push(Tok::Question, i); break;
                case ':': push(Tok::Colon, i); break;
                default:
                    throw SyntaxError(line_, col0_ + static_cast<int>(i) + 1, "token",
                                      std::string("'") + c + "'");
            }
            ++i;
        }
        Token end;
        end.kind = Tok::End;
        end.line = line_;
        end.col = col0_ + static_cast<int>(n) + 1;
        toks_.push_back(end);
    }
};

// ---------- helpers ----------

Value token_value(const Token& t) {
    if (t.kind == Tok::Quoted) return t.text;
    if (t.is_int) return t.ival;
    return t.dval;
}

Value signed_value(Lexer& lx) {
    const bool neg = lx.accept(Tok::Minus);
    const Token t = lx.expect(Tok::Number, "number");
    if (!neg) return token_value(t);
    if (t.is_int) return Value{-t.ival};
    return Value{-t.dval};
}

// ---------- domain expressions ----------

DomainExprPtr parse_domain_expr(Lexer& lx);

DomainExprPtr parse_domain_term(Lexer& lx) {
    auto e = std::make_shared<DomainExpr>();
    if (lx.at(Tok::Quoted)) {
        e->kind = DomainExpr::Kind::Literal;
        e->literal = lx.next().text;
        return e;
    }
    if (lx.at(Tok::Number) || (lx.at(Tok::Minus) && lx.at(Tok::Number, 1))) {
        e->kind = DomainExpr::Kind::Literal;
        e->literal = signed_value(lx);
        return e;
    }
    if (lx.accept(Tok::Star)) {
        e->kind = DomainExpr::Kind::All;
        return e;
    }
    if (lx.accept(Tok::Underscore)) {
        e->kind = DomainExpr::Kind::Placeholder;
        return e;
    }
    if (lx.at(Tok::Ident)) {
        e->kind = DomainExpr::Kind::VarRef;
        e->var = lx.next().text;
        return e;
    }
    if (lx.accept(Tok::LBrace)) {
        e->kind = DomainExpr::Kind::Set;
        if (!lx.at(Tok::RBrace)) {
            while (true) {
                if (lx.at(Tok::Quoted)) e->set_values.push_back(Value{lx.next().text});
                else e->set_values.push_back(signed_value(lx));
                if (!lx.accept(Tok::Comma)) break;
            }
        }
        lx.expect(Tok::RBrace, "}");
        return e;
    }
    if (lx.accept(Tok::LParen)) {
        auto inner = parse_domain_expr(lx);
        lx.expect(Tok::RParen, ")");
        return inner;
    }
    lx.fail("collection expression");
}

// `^` continues a domain expression only when an operand follows; `^2` is a
// cross-product priority superscript handled by the cell parser.
bool caret_is_operator(Lexer& lx) {
    return lx.at(Tok::Caret) &&
           (lx.at(Tok::Ident, 1) || lx.at(Tok::Quoted, 1) || lx.at(Tok::LParen, 1) ||
            lx.at(Tok::LBrace, 1) || lx.at(Tok::Star, 1));
}

DomainExprPtr parse_domain_expr(Lexer& lx) {
    DomainExprPtr lhs = parse_domain_term(lx);
    while (true) {
        DomainExpr::Kind op;
        if (lx.at(Tok::Minus)) op = DomainExpr::Kind::Diff;
        else if (lx.at(Tok::Pipe)) op = DomainExpr::Kind::Union;
        else if (caret_is_operator(lx)) op = DomainExpr::Kind::Intersect;
        else if (lx.at(Tok::Star) &&
                 (lx.at(Tok::Ident, 1) || lx.at(Tok::Quoted, 1) || lx.at(Tok::LBrace, 1) ||
                  lx.at(Tok::LParen, 1)))
            op = DomainExpr::Kind::Cross;
        else if (lx.at(Tok::Plus)) op = DomainExpr::Kind::Plus;
        else if (lx.at(Tok::Slash)) op = DomainExpr::Kind::Div;
        else break;
        lx.next();
        auto node = std::make_shared<DomainExpr>();
        node->kind = op;
        node->a = lhs;
        node->b = parse_domain_term(lx);
        lhs = node;
    }
    return lhs;
}

// ---------- name cells ----------

NameExprPtr parse_name_expr(Lexer& lx);

NameExprPtr parse_name_postfix(Lexer& lx, NameExprPtr base) {
    while (true) {
        if (lx.at(Tok::LBracket)) {
            lx.next();
            auto node = std::make_shared<NameExpr>();
            node->a = base;
            if (lx.accept(Tok::Colon)) {
                node->op = NameExpr::Op::Slice;
                if (lx.at(Tok::Number)) node->to = lx.next().ival;
            } else {
                const Token first = lx.expect(Tok::Number, "index");
                if (lx.accept(Tok::Colon)) {
                    node->op = NameExpr::Op::Slice;
                    node->from = first.ival;
                    if (lx.at(Tok::Number)) node->to = lx.next().ival;
                } else {
                    node->op = NameExpr::Op::Index;
                    node->index = first.ival;
                }
            }
            lx.expect(Tok::RBracket, "]");
            base = node;
        } else if (lx.at(Tok::Dot) && lx.at(Tok::Ident, 1) &&
                   (lx.peek(1).text == "uniq" || lx.peek(1).text == "order")) {
            lx.next();
            const std::string w = lx.next().text;
            auto node = std::make_shared<NameExpr>();
            node->op = w == "uniq" ? NameExpr::Op::Uniq : NameExpr::Op::Order;
            node->a = base;
            base = node;
        } else {
            return base;
        }
    }
}

NameExprPtr parse_name_term(Lexer& lx) {
    if (lx.accept(Tok::LParen)) {
        auto inner = parse_name_expr(lx);
        lx.expect(Tok::RParen, ")");
        return parse_name_postfix(lx, inner);
    }
    auto node = std::make_shared<NameExpr>();
    node->op = NameExpr::Op::Ref;
    node->ref = lx.expect(Tok::Ident, "collection name").text;
    return parse_name_postfix(lx, node);
}

NameExprPtr parse_name_expr(Lexer& lx) {
    NameExprPtr lhs = parse_name_term(lx);
    while (lx.at(Tok::Plus) || lx.at(Tok::Minus) || lx.at(Tok::Caret)) {
        const Tok op = lx.next().kind;
        auto node = std::make_shared<NameExpr>();
        node->op = op == Tok::Plus   ? NameExpr::Op::Concat
                   : op == Tok::Minus ? NameExpr::Op::Diff
                                      : NameExpr::Op::Intersect;
        node->a = lhs;
        node->b = parse_name_term(lx);
        lhs = node;
    }
    return lhs;
}

NameCell parse_name_cell(Lexer& lx) {
    NameCell cell;
    if (lx.accept(Tok::Star)) cell.output = true;
    cell.var = lx.expect(Tok::Ident, "collection name").text;
    if (lx.accept(Tok::Arrow) || lx.accept(Tok::Eq)) cell.derivation = parse_name_expr(lx);
    if (!lx.at(Tok::End)) lx.fail("end of name cell");
    return cell;
}

// ---------- shared cell suffix: ^n priority and --> marker ----------

void parse_cell_suffix(Lexer& lx, int& priority, bool& reorder) {
    while (true) {
        if (lx.at(Tok::Caret) && lx.at(Tok::Number, 1)) {
            lx.next();
            priority = static_cast<int>(lx.next().ival);
        } else if (lx.at(Tok::RArrow)) {
            lx.next();
            reorder = true;
        } else {
            break;
        }
    }
}

AxisCell parse_axis_cell(Lexer& lx) {
    AxisCell cell;
    if (lx.at(Tok::End)) return cell;
    if (lx.at(Tok::Ident) && lx.at(Tok::Arrow, 1)) {
        cell.kind = AxisCell::Kind::Bind;
        cell.var = lx.next().text;
        lx.next();
        cell.expr = parse_domain_expr(lx);
    } else {
        cell.kind = AxisCell::Kind::Expr;
        cell.expr = parse_domain_expr(lx);
    }
    parse_cell_suffix(lx, cell.priority, cell.reorder);
    if (!lx.at(Tok::End)) lx.fail("end of cell");
    return cell;
}

// ---------- z cells ----------

std::optional<ZConstraint> try_parse_constraint(Lexer& lx) {
    if (!lx.at(Tok::LBracket)) return std::nullopt;
    lx.next();
    lx.expect(Tok::Question, "?");
    ZConstraint c;
    if (lx.at(Tok::Ident) && (lx.peek().text == "IN" || lx.peek().text == "in")) {
        lx.next();
        c.in_var = lx.expect(Tok::Ident, "variable").text;
        c.op = CmpOp::In;
    } else {
        switch (lx.next().kind) {
            case Tok::Lt: c.op = CmpOp::Lt; break;
            case Tok::Le: c.op = CmpOp::Le; break;
            case Tok::Gt: c.op = CmpOp::Gt; break;
            case Tok::Ge: c.op = CmpOp::Ge; break;
            case Tok::Eq: c.op = CmpOp::Eq; break;
            case Tok::Ne: c.op = CmpOp::Ne; break;
            default: lx.fail("comparison operator");
        }
        if (lx.at(Tok::Quoted)) c.literal = lx.next().text;
        else c.literal = signed_value(lx);
    }
    lx.expect(Tok::RBracket, "]");
    return c;
}

ZCell parse_z_cell(Lexer& lx) {
    ZCell cell;
    if (lx.at(Tok::End)) return cell;

    if (lx.at(Tok::Ident) && lx.at(Tok::Arrow, 1)) {
        cell.val_var = lx.next().text;
        lx.next();
    } else if (lx.at(Tok::Ident) && lx.at(Tok::Dot, 1) && lx.at(Tok::Ident, 2) &&
               lx.at(Tok::Arrow, 3)) {
        cell.attr_var = lx.next().text;
        lx.next();
        cell.val_var = lx.next().text;
        lx.next();
    }

    if (lx.at(Tok::End)) {
        if (cell.val_var.empty()) lx.fail("z expression");
        return cell;
    }

    DomainExprPtr first = parse_domain_expr(lx);
    if (lx.at(Tok::Dot)) {
        lx.next();
        cell.attr = first;
        cell.constraint = try_parse_constraint(lx);
        if (!cell.constraint) cell.val = parse_domain_expr(lx);
    } else {
        cell.val = first;
    }
    parse_cell_suffix(lx, cell.priority, cell.reorder);
    if (!lx.at(Tok::End)) lx.fail("end of cell");
    return cell;
}

// ---------- viz cells ----------

VizSpec parse_viz_cell(Lexer& lx) {
    VizSpec viz;
    if (lx.at(Tok::End)) return viz;
    const std::string type = lx.expect(Tok::Ident, "visualization type").text;
    if (type == "bar") viz.type = VizSpec::Type::Bar;
    else if (type == "point" || type == "scatterplot") viz.type = VizSpec::Type::Point;
    else if (type == "bin2d") viz.type = VizSpec::Type::Bin2d;
    else lx.fail("visualization type (bar, point, bin2d)");
    if (lx.accept(Tok::Dot)) {
        lx.expect(Tok::LParen, "(");
        if (!lx.at(Tok::RParen)) {
            while (true) {
                const std::string axis = lx.expect(Tok::Ident, "x or y").text;
                lx.expect(Tok::Eq, "=");
                const std::string fn = lx.expect(Tok::Ident, "agg, bin, or nbin").text;
                if (fn == "agg") {
                    lx.expect(Tok::LParen, "(");
                    const Token a = lx.expect(Tok::Quoted, "aggregate name");
                    lx.expect(Tok::RParen, ")");
                    auto parsed = agg_fn_from_string(a.text);
                    if (!parsed) lx.fail("aggregate name");
                    if (axis != "y") lx.fail("aggregation on the y axis");
                    viz.y_agg = parsed;
                } else if (fn == "bin" || fn == "nbin") {
                    lx.expect(Tok::LParen, "(");
                    const Token n = lx.expect(Tok::Number, "number");
                    lx.expect(Tok::RParen, ")");
                    const Binning b = fn == "bin" ? Binning::by_width(n.dval)
                                                  : Binning::by_count(static_cast<int>(n.ival));
                    if (axis == "x") viz.x_binning = b;
                    else if (axis == "y") viz.y_binning = b;
                    else lx.fail("x or y");
                } else {
                    lx.fail("agg, bin, or nbin");
                }
                if (!lx.accept(Tok::Comma)) break;
            }
        }
        lx.expect(Tok::RParen, ")");
    }
    if (!lx.at(Tok::End)) lx.fail("end of viz cell");
    return viz;
}

// ---------- process cells ----------

ProcExprPtr parse_proc_expr(Lexer& lx);

std::vector<PlugArg> parse_plug_args(Lexer& lx) {
    std::vector<PlugArg> args;
    lx.expect(Tok::LParen, "(");
    if (!lx.at(Tok::RParen)) {
        while (true) {
            PlugArg a;
            if (lx.at(Tok::Number) && (lx.at(Tok::Comma, 1) || lx.at(Tok::RParen, 1))) {
                a.kind = PlugArg::Kind::Number;
                a.number = lx.next().dval;
            } else if (lx.at(Tok::Ident) && (lx.at(Tok::Comma, 1) || lx.at(Tok::RParen, 1))) {
                a.kind = PlugArg::Kind::Ident;
                a.ident = lx.next().text;
            } else {
                a.kind = PlugArg::Kind::Expr;
                a.expr = parse_proc_expr(lx);
            }
            args.push_back(std::move(a));
            if (!lx.accept(Tok::Comma)) break;
        }
    }
    lx.expect(Tok::RParen, ")");
    return args;
}

bool is_reduce_word(const std::string& s) {
    return s == "max" || s == "min" || s == "sum" || s == "prod";
}

ProcExprPtr parse_proc_unary(Lexer& lx) {
    if (lx.at(Tok::Ident) && is_reduce_word(lx.peek().text) && lx.at(Tok::Underscore, 1)) {
        auto node = std::make_shared<ProcExpr>();
        node->kind = ProcExpr::Kind::Reduce;
        const std::string w = lx.next().text;
        node->rop = w == "max"   ? ReduceOp::Max
                    : w == "min" ? ReduceOp::Min
                    : w == "sum" ? ReduceOp::Sum
                                 : ReduceOp::Prod;
        lx.next();  // _
        node->reduce_var = lx.expect(Tok::Ident, "axis variable").text;
        node->a = parse_proc_unary(lx);
        return node;
    }
    if (lx.accept(Tok::LParen)) {
        auto inner = parse_proc_expr(lx);
        lx.expect(Tok::RParen, ")");
        return inner;
    }
    const Token id = lx.expect(Tok::Ident, "T, D, or a registered function");
    auto node = std::make_shared<ProcExpr>();
    if (id.text == "T") {
        node->kind = ProcExpr::Kind::T;
        lx.expect(Tok::LParen, "(");
        node->name1 = lx.expect(Tok::Ident, "collection name").text;
        lx.expect(Tok::RParen, ")");
    } else if (id.text == "D") {
        node->kind = ProcExpr::Kind::D;
        lx.expect(Tok::LParen, "(");
        node->name1 = lx.expect(Tok::Ident, "collection name").text;
        lx.expect(Tok::Comma, ",");
        node->name2 = lx.expect(Tok::Ident, "collection name").text;
        lx.expect(Tok::RParen, ")");
    } else {
        node->kind = ProcExpr::Kind::Plug;
        node->fn = id.text;
        node->args = parse_plug_args(lx);
    }
    return node;
}

ProcExprPtr parse_proc_mul(Lexer& lx) {
    ProcExprPtr lhs = parse_proc_unary(lx);
    while (lx.at(Tok::Star) || lx.at(Tok::Slash)) {
        const char op = lx.next().kind == Tok::Star ? '*' : '/';
        auto node = std::make_shared<ProcExpr>();
        node->kind = ProcExpr::Kind::Arith;
        node->arith = op;
        node->a = lhs;
        node->b = parse_proc_unary(lx);
        lhs = node;
    }
    return lhs;
}

ProcExprPtr parse_proc_expr(Lexer& lx) {
    ProcExprPtr lhs = parse_proc_mul(lx);
    while (lx.at(Tok::Plus) || lx.at(Tok::Minus)) {
        const char op = lx.next().kind == Tok::Plus ? '+' : '-';
        auto node = std::make_shared<ProcExpr>();
        node->kind = ProcExpr::Kind::Arith;
        node->arith = op;
        node->a = lhs;
        node->b = parse_proc_mul(lx);
        lhs = node;
    }
    return lhs;
}

Limiter parse_limiter(Lexer& lx) {
    lx.expect(Tok::LBracket, "[");
    Limiter lim;
    const Token id = lx.expect(Tok::Ident, "k, t, or p");
    if (id.text == "k") {
        lim.kind = Limiter::Kind::K;
        lx.expect(Tok::Eq, "=");
        if (lx.at(Tok::Ident) && (lx.peek().text == "inf" || lx.peek().text == "INF")) {
            lx.next();
            lim.k = std::nullopt;
        } else {
            lim.k = lx.expect(Tok::Number, "count or inf").ival;
        }
    } else if (id.text == "t") {
        lim.kind = Limiter::Kind::Threshold;
        switch (lx.next().kind) {
            case Tok::Lt: lim.cmp = CmpOp::Lt; break;
            case Tok::Le: lim.cmp = CmpOp::Le; break;
            case Tok::Gt: lim.cmp = CmpOp::Gt; break;
            case Tok::Ge: lim.cmp = CmpOp::Ge; break;
            case Tok::Eq: lim.cmp = CmpOp::Eq; break;
            case Tok::Ne: lim.cmp = CmpOp::Ne; break;
            default: lx.fail("comparison operator");
        }
        lim.threshold = as_double(signed_value(lx));
    } else if (id.text == "p") {
        lim.kind = Limiter::Kind::Percentile;
        lx.expect(Tok::Eq, "=");
        lim.percentile = as_double(signed_value(lx));
    } else {
        lx.fail("k, t, or p");
    }
    lx.expect(Tok::RBracket, "]");
    return lim;
}

ProcessDecl parse_process_decl(Lexer& lx) {
    ProcessDecl decl;
    decl.outputs.push_back(lx.expect(Tok::Ident, "output variable").text);
    while (lx.accept(Tok::Comma))
        decl.outputs.push_back(lx.expect(Tok::Ident, "output variable").text);
    lx.expect(Tok::Arrow, "<--");

    if (lx.at(Tok::Ident) &&
        (lx.peek().text == "argmax" || lx.peek().text == "argmin" || lx.peek().text == "argany")) {
        const std::string w = lx.next().text;
        decl.argopt = w == "argmax"   ? ArgOpt::ArgMax
                      : w == "argmin" ? ArgOpt::ArgMin
                                      : ArgOpt::ArgAny;
        lx.expect(Tok::Underscore, "_");
        if (lx.accept(Tok::LBrace) || lx.accept(Tok::LParen)) {
            decl.opt_vars.push_back(lx.expect(Tok::Ident, "axis variable").text);
            while (lx.accept(Tok::Comma))
                decl.opt_vars.push_back(lx.expect(Tok::Ident, "axis variable").text);
            if (!lx.accept(Tok::RBrace)) lx.expect(Tok::RParen, ") or }");
        } else {
            decl.opt_vars.push_back(lx.expect(Tok::Ident, "axis variable").text);
        }
        decl.limiter = parse_limiter(lx);
        decl.body = parse_proc_expr(lx);
    } else {
        decl.is_plug_form = true;
        decl.plug_fn = lx.expect(Tok::Ident, "function name").text;
        decl.plug_args = parse_plug_args(lx);
    }
    return decl;
}

std::vector<ProcessDecl> parse_process_cell(Lexer& lx) {
    std::vector<ProcessDecl> decls;
    if (lx.at(Tok::End)) return decls;
    while (true) {
        const bool wrapped = lx.accept(Tok::LParen);
        decls.push_back(parse_process_decl(lx));
        if (wrapped) lx.expect(Tok::RParen, ")");
        if (!lx.accept(Tok::Comma)) break;
    }
    if (!lx.at(Tok::End)) lx.fail("end of process cell");
    return decls;
}

// ---------- rows ----------

// Split a line on '|' at nesting depth 0, quotes respected.
std::vector<std::pair<std::string, int>> split_cells(const std::string& line) {
    std::vector<std::pair<std::string, int>> cells;
    std::string cur;
    int start = 0, depth = 0;
    bool quoted = false;
    for (int i = 0; i < static_cast<int>(line.size()); ++i) {
        const char c = line[i];
        if (quoted) {
            cur.push_back(c);
            if (c == '\'') quoted = false;
            continue;
        }
        switch (c) {
            case '\'': quoted = true; cur.push_back(c); break;
            case '(': case '{': case '[': ++depth; cur.push_back(c); break;
            case ')': case '}': case ']': --depth; cur.push_back(c); break;
            case '|':
                if (depth == 0) {
                    cells.emplace_back(cur, start);
                    cur.clear();
                    start = i + 1;
                } else {
                    cur.push_back(c);
                }
                break;
            default: cur.push_back(c);
        }
    }
    cells.emplace_back(cur, start);
    return cells;
}

std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

std::string trimmed(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

enum class ColRole { Name, X, Y, Z, Viz, Process };

struct HeaderLayout {
    std::vector<std::pair<ColRole, int>> cols;  // role + z slot for Z columns
    int z_count = 0;
};

std::optional<HeaderLayout> try_parse_header(const std::string& line) {
    HeaderLayout layout;
    for (const auto& [cell, _] : split_cells(line)) {
        const std::string t = lower(trimmed(cell));
        if (t.empty()) return std::nullopt;
        if (t == "name") layout.cols.emplace_back(ColRole::Name, 0);
        else if (t == "x") layout.cols.emplace_back(ColRole::X, 0);
        else if (t == "y") layout.cols.emplace_back(ColRole::Y, 0);
        else if (t == "viz") layout.cols.emplace_back(ColRole::Viz, 0);
        else if (t == "process") layout.cols.emplace_back(ColRole::Process, 0);
        else if (t == "z") layout.cols.emplace_back(ColRole::Z, layout.z_count++);
        else if (t.size() >= 2 && t[0] == 'z' &&
                 std::all_of(t.begin() + 1, t.end(),
                             [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
            layout.cols.emplace_back(ColRole::Z, layout.z_count++);
        else return std::nullopt;
    }
    if (layout.cols.empty()) return std::nullopt;
    return layout;
}

HeaderLayout default_layout() {
    HeaderLayout layout;
    layout.cols = {{ColRole::Name, 0}, {ColRole::X, 0},   {ColRole::Y, 0},
                   {ColRole::Z, 0},    {ColRole::Viz, 0}, {ColRole::Process, 0}};
    layout.z_count = 1;
    return layout;
}

}  // namespace

ZqlQuery parse_query(const std::string& text) {
    ZqlQuery q;
    std::optional<HeaderLayout> layout;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const std::string t = trimmed(line);
        if (t.empty() || t[0] == '#') continue;
        if (!layout) {
            layout = try_parse_header(line);
            if (layout) continue;
            layout = default_layout();
        }
        auto cells = split_cells(line);
        if (cells.size() > layout->cols.size())
            throw SyntaxError(lineno, static_cast<int>(line.size()),
                              std::to_string(layout->cols.size()) + " cells",
                              std::to_string(cells.size()) + " cells");
        ZqlRow row;
        row.z.resize(layout->z_count);
        bool saw_name = false;
        for (std::size_t i = 0; i < cells.size(); ++i) {
            Lexer lx(cells[i].first, lineno, cells[i].second);
            switch (layout->cols[i].first) {
                case ColRole::Name:
                    row.name = parse_name_cell(lx);
                    saw_name = true;
                    break;
                case ColRole::X: row.x = parse_axis_cell(lx); break;
                case ColRole::Y: row.y = parse_axis_cell(lx); break;
                case ColRole::Z: row.z[layout->cols[i].second] = parse_z_cell(lx); break;
                case ColRole::Viz: row.viz = parse_viz_cell(lx); break;
                case ColRole::Process: row.processes = parse_process_cell(lx); break;
            }
        }
        if (!saw_name) throw SyntaxError(lineno, 1, "name cell", "missing cell");
        while (!row.z.empty() && row.z.back().empty()) row.z.pop_back();
        q.rows.push_back(std::move(row));
    }
    if (q.rows.empty())
        throw SyntaxError(lineno, 1, "at least one query row", "end of input");
    return q;
}

}  // namespace zql
