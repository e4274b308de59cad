#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "zql/aggregate.hpp"
#include "zql/predicate.hpp"
#include "zql/value.hpp"

namespace zql {

// ---------- name column ----------

// Derivation expression over previously defined collections.
struct NameExpr;
using NameExprPtr = std::shared_ptr<NameExpr>;

struct NameExpr {
    enum class Op { Ref, Concat, Diff, Intersect, Index, Slice, Uniq, Order };
    Op op = Op::Ref;
    std::string ref;       // Ref
    NameExprPtr a, b;      // operands (unary ops use a)
    int64_t index = 0;     // Index, 1-based
    std::optional<int64_t> from, to;  // Slice, inclusive, 1-based
};

struct NameCell {
    std::string var;
    bool output = false;
    NameExprPtr derivation;  // null for fresh collections
};

// ---------- domain expressions ----------

// A collection expression appearing in X/Y cells, or in either part of a Z
// cell. Values are attribute names for attribute-position expressions and
// attribute values for value-position expressions.
struct DomainExpr;
using DomainExprPtr = std::shared_ptr<DomainExpr>;

struct DomainExpr {
    enum class Kind {
        Literal,      // 'year' or 2015
        Set,          // {'a','b'}
        All,          // *
        Placeholder,  // _
        VarRef,       // v2
        Diff,         // a - b   (set difference)
        Union,        // a | b
        Intersect,    // a ^ b
        Cross,        // a * b   (Polaris table algebra; executable)
        Plus,         // a + b   (Polaris; parsed, rejected at planning)
        Div,          // a / b   (Polaris; parsed, rejected at planning)
    };
    Kind kind = Kind::All;
    Value literal;
    std::vector<Value> set_values;
    std::string var;
    DomainExprPtr a, b;
};

// ---------- X / Y cells ----------

struct AxisCell {
    enum class Kind { Empty, Expr, Bind };
    Kind kind = Kind::Empty;
    std::string var;      // Bind only
    DomainExprPtr expr;   // Expr: literal/set/reuse; Bind: bound domain
    int priority = 0;     // ^n cross-product superscript, 0 = default
    bool reorder = false; // --> marker (only meaningful in .order rows)

    bool empty() const { return kind == Kind::Empty; }
};

// ---------- Z cells ----------

struct ZConstraint {
    CmpOp op = CmpOp::Lt;
    Value literal;        // [? < 10]
    std::string in_var;   // [? IN v2]
    bool references_var() const { return !in_var.empty(); }
};

struct ZCell {
    // `z1.v1 <-- (*-{..}).*` binds both parts; `v1 <-- 'product'.*` binds the
    // value part only; `'product'.'chair'` binds neither.
    std::string attr_var;               // optional bound variable for the attribute part
    std::string val_var;                // optional bound variable for the value part
    DomainExprPtr attr;                 // attribute-part expression (may be null for bare reuse)
    DomainExprPtr val;                  // value-part expression (null when constraint present)
    std::optional<ZConstraint> constraint;
    int priority = 0;
    bool reorder = false;

    bool empty() const { return !attr && !val && !constraint && attr_var.empty() && val_var.empty(); }
};

// ---------- Viz ----------

struct VizSpec {
    enum class Type { Auto, Bar, Point, Bin2d };
    Type type = Type::Auto;
    std::optional<Binning> x_binning;
    std::optional<AggFn> y_agg;
    std::optional<Binning> y_binning;

    bool is_auto() const {
        return type == Type::Auto && !x_binning && !y_agg && !y_binning;
    }
};

// ---------- Process ----------

enum class ArgOpt { ArgMax, ArgMin, ArgAny };
enum class ReduceOp { Max, Min, Sum, Prod };

struct Limiter {
    enum class Kind { K, Threshold, Percentile };
    Kind kind = Kind::K;
    std::optional<int64_t> k;  // nullopt = inf
    CmpOp cmp = CmpOp::Lt;     // Threshold comparator
    double threshold = 0;
    double percentile = 0;
};

struct ProcExpr;
using ProcExprPtr = std::shared_ptr<ProcExpr>;

struct PlugArg {
    enum class Kind { Expr, Ident, Number };
    Kind kind = Kind::Number;
    ProcExprPtr expr;
    std::string ident;  // name variable or axis variable; resolved at validation
    double number = 0;
};

struct ProcExpr {
    enum class Kind { Reduce, Arith, T, D, Plug };
    Kind kind = Kind::T;
    ReduceOp rop = ReduceOp::Sum;
    std::string reduce_var;
    ProcExprPtr a, b;
    char arith = '+';
    std::string name1, name2;  // T(name1), D(name1, name2)
    std::string fn;            // Plug
    std::vector<PlugArg> args;
};

struct ProcessDecl {
    std::vector<std::string> outputs;
    // Optimization form: argopt_{vars}[limiter] body.
    bool is_plug_form = false;
    ArgOpt argopt = ArgOpt::ArgMax;
    std::vector<std::string> opt_vars;
    Limiter limiter;
    ProcExprPtr body;
    // Selector-plug form: outputs <-- fn(args...), e.g. representative sets.
    std::string plug_fn;
    std::vector<PlugArg> plug_args;
};

// ---------- rows / query ----------

struct ZqlRow {
    NameCell name;
    AxisCell x, y;
    std::vector<ZCell> z;  // Z, Z2, Z3, ...
    VizSpec viz;
    std::vector<ProcessDecl> processes;
};

struct ZqlQuery {
    std::vector<ZqlRow> rows;
};

// Structural equality (used by the reprint-reparse property tests).
bool operator==(const ZqlQuery& a, const ZqlQuery& b);
bool operator==(const ZqlRow& a, const ZqlRow& b);

}  // namespace zql
