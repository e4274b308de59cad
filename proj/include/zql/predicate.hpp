#pragma once

#include <string>
#include <vector>

#include "zql/column_table.hpp"
#include "zql/value.hpp"

namespace zql {

enum class CmpOp { Eq, Ne, Lt, Le, Gt, Ge, In };

const char* to_string(CmpOp op);

struct PredAtom {
    std::string attr;
    CmpOp op = CmpOp::Eq;
    std::vector<Value> operands;  // one literal, or the IN set (non-empty)
};

// Conjunction of atoms.
using Conjunction = std::vector<PredAtom>;

// Disjunction of conjunctions. No disjuncts means "no constraint" (true for
// every row); a disjunct with no atoms is likewise always true.
struct Predicate {
    std::vector<Conjunction> disjuncts;

    static Predicate always_true() { return Predicate{}; }
    bool is_true() const { return disjuncts.empty(); }

    static Predicate single(PredAtom atom) {
        Predicate p;
        p.disjuncts.push_back(Conjunction{std::move(atom)});
        return p;
    }
    static Predicate conjunction(Conjunction c) {
        Predicate p;
        p.disjuncts.push_back(std::move(c));
        return p;
    }

    // this AND other, distributing over the disjuncts.
    Predicate and_with(const Predicate& other) const;
    // this OR other.
    Predicate or_with(const Predicate& other) const;
};

bool atom_matches(const PredAtom& atom, const Value& v);

// Validates referenced attributes and IN-set non-emptiness.
void check_predicate(const Predicate& p, const ColumnTable& table);

bool predicate_matches(const Predicate& p, const ColumnTable& table, std::size_t row);

}  // namespace zql
