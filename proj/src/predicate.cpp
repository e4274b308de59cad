#include "zql/predicate.hpp"

#include "zql/errors.hpp"

namespace zql {

const char* to_string(CmpOp op) {
    switch (op) {
        case CmpOp::Eq: return "=";
        case CmpOp::Ne: return "<>";
        case CmpOp::Lt: return "<";
        case CmpOp::Le: return "<=";
        case CmpOp::Gt: return ">";
        case CmpOp::Ge: return ">=";
        case CmpOp::In: return "IN";
    }
    return "?";
}

Predicate Predicate::and_with(const Predicate& other) const {
    if (is_true()) return other;
    if (other.is_true()) return *this;
    Predicate out;
    for (const auto& a : disjuncts)
        for (const auto& b : other.disjuncts) {
            Conjunction c = a;
            c.insert(c.end(), b.begin(), b.end());
            out.disjuncts.push_back(std::move(c));
        }
    return out;
}

Predicate Predicate::or_with(const Predicate& other) const {
    if (is_true() || other.is_true()) return always_true();
    Predicate out = *this;
    out.disjuncts.insert(out.disjuncts.end(), other.disjuncts.begin(), other.disjuncts.end());
    return out;
}

bool atom_matches(const PredAtom& atom, const Value& v) {
    switch (atom.op) {
        case CmpOp::Eq: return value_eq(v, atom.operands.front());
        case CmpOp::Ne: return !value_eq(v, atom.operands.front());
        case CmpOp::Lt: return value_less(v, atom.operands.front());
        case CmpOp::Le: return !value_less(atom.operands.front(), v);
        case CmpOp::Gt: return value_less(atom.operands.front(), v);
        case CmpOp::Ge: return !value_less(v, atom.operands.front());
        case CmpOp::In:
            for (const auto& o : atom.operands)
                if (value_eq(v, o)) return true;
            return false;
    }
    return false;
}

void check_predicate(const Predicate& p, const ColumnTable& table) {
    for (const auto& conj : p.disjuncts)
        for (const auto& atom : conj) {
            if (!table.has_column(atom.attr))
                throw ZqlError(ErrorStage::Execute, ErrorKind::UnknownAttribute,
                               "predicate references unknown attribute '" + atom.attr + "'");
            // an IN over an empty resolved set matches nothing; every other
            // operator needs its literal
            if (atom.operands.empty() && atom.op != CmpOp::In)
                throw ZqlError(ErrorStage::Execute, ErrorKind::ParseError,
                               "predicate atom on '" + atom.attr + "' has no operand");
        }
}

bool predicate_matches(const Predicate& p, const ColumnTable& table, std::size_t row) {
    if (p.is_true()) return true;
    for (const auto& conj : p.disjuncts) {
        bool all = true;
        for (const auto& atom : conj) {
            if (!atom_matches(atom, table.column(atom.attr).at(row))) {
                all = false;
                break;
            }
        }
        if (all) return true;
    }
    return false;
}

}  // namespace zql
