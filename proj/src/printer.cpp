#include <sstream>

#include "zql/parser.hpp"

namespace zql {

namespace {

std::string print_value_literal(const Value& v) {
    if (is_numeric(v)) return value_to_string(v);
    return "'" + value_to_string(v) + "'";
}

std::string print_domain(const DomainExpr& e) {
    switch (e.kind) {
        case DomainExpr::Kind::Literal: return print_value_literal(e.literal);
        case DomainExpr::Kind::All: return "*";
        case DomainExpr::Kind::Placeholder: return "_";
        case DomainExpr::Kind::VarRef: return e.var;
        case DomainExpr::Kind::Set: {
            std::string out = "{";
            for (std::size_t i = 0; i < e.set_values.size(); ++i) {
                if (i) out += ", ";
                out += print_value_literal(e.set_values[i]);
            }
            return out + "}";
        }
        default: break;
    }
    const char* op = "?";
    switch (e.kind) {
        case DomainExpr::Kind::Diff: op = "-"; break;
        case DomainExpr::Kind::Union: op = "|"; break;
        case DomainExpr::Kind::Intersect: op = "^"; break;
        case DomainExpr::Kind::Cross: op = "*"; break;
        case DomainExpr::Kind::Plus: op = "+"; break;
        case DomainExpr::Kind::Div: op = "/"; break;
        default: break;
    }
    return "(" + print_domain(*e.a) + " " + op + " " + print_domain(*e.b) + ")";
}

std::string print_name_expr(const NameExpr& e) {
    switch (e.op) {
        case NameExpr::Op::Ref: return e.ref;
        case NameExpr::Op::Concat: return "(" + print_name_expr(*e.a) + "+" + print_name_expr(*e.b) + ")";
        case NameExpr::Op::Diff: return "(" + print_name_expr(*e.a) + "-" + print_name_expr(*e.b) + ")";
        case NameExpr::Op::Intersect:
            return "(" + print_name_expr(*e.a) + "^" + print_name_expr(*e.b) + ")";
        case NameExpr::Op::Index:
            return print_name_expr(*e.a) + "[" + std::to_string(e.index) + "]";
        case NameExpr::Op::Slice: {
            std::string out = print_name_expr(*e.a) + "[";
            if (e.from) out += std::to_string(*e.from);
            out += ":";
            if (e.to) out += std::to_string(*e.to);
            return out + "]";
        }
        case NameExpr::Op::Uniq: return print_name_expr(*e.a) + ".uniq";
        case NameExpr::Op::Order: return print_name_expr(*e.a) + ".order";
    }
    return "?";
}

void print_suffix(std::ostringstream& os, int priority, bool reorder) {
    if (priority > 0) os << "^" << priority;
    if (reorder) os << " -->";
}

std::string print_axis(const AxisCell& c) {
    if (c.empty()) return "";
    std::ostringstream os;
    if (c.kind == AxisCell::Kind::Bind) os << c.var << " <-- ";
    os << print_domain(*c.expr);
    print_suffix(os, c.priority, c.reorder);
    return os.str();
}

std::string print_z(const ZCell& c) {
    if (c.empty()) return "";
    std::ostringstream os;
    if (!c.attr_var.empty()) os << c.attr_var << "." << c.val_var << " <-- ";
    else if (!c.val_var.empty()) os << c.val_var << " <-- ";
    if (c.attr) {
        os << print_domain(*c.attr) << ".";
        if (c.constraint) {
            os << "[? ";
            if (c.constraint->references_var()) os << "IN " << c.constraint->in_var;
            else {
                os << to_string(c.constraint->op) << " " << print_value_literal(c.constraint->literal);
            }
            os << "]";
        } else {
            os << print_domain(*c.val);
        }
    } else if (c.val) {
        os << print_domain(*c.val);
    }
    print_suffix(os, c.priority, c.reorder);
    return os.str();
}

std::string print_viz(const VizSpec& v) {
    if (v.is_auto()) return "";
    std::ostringstream os;
    switch (v.type) {
        case VizSpec::Type::Auto:
        case VizSpec::Type::Bar: os << "bar"; break;
        case VizSpec::Type::Point: os << "point"; break;
        case VizSpec::Type::Bin2d: os << "bin2d"; break;
    }
    std::vector<std::string> args;
    auto binning_str = [](const Binning& b) {
        if (b.mode == Binning::Mode::Width) return "bin(" + value_to_string(Value{b.width}) + ")";
        return "nbin(" + std::to_string(b.count) + ")";
    };
    if (v.x_binning) args.push_back("x=" + binning_str(*v.x_binning));
    if (v.y_agg) {
        std::string fn = to_string(*v.y_agg);
        for (char& ch : fn) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
        args.push_back("y=agg('" + fn + "')");
    }
    if (v.y_binning) args.push_back("y=" + binning_str(*v.y_binning));
    if (!args.empty()) {
        os << ".(";
        for (std::size_t i = 0; i < args.size(); ++i) {
            if (i) os << ", ";
            os << args[i];
        }
        os << ")";
    }
    return os.str();
}

std::string print_proc_expr(const ProcExpr& e);

std::string print_plug_args(const std::vector<PlugArg>& args) {
    std::string out = "(";
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (i) out += ", ";
        switch (args[i].kind) {
            case PlugArg::Kind::Number: out += value_to_string(Value{args[i].number}); break;
            case PlugArg::Kind::Ident: out += args[i].ident; break;
            case PlugArg::Kind::Expr: out += print_proc_expr(*args[i].expr); break;
        }
    }
    return out + ")";
}

std::string print_proc_expr(const ProcExpr& e) {
    switch (e.kind) {
        case ProcExpr::Kind::T: return "T(" + e.name1 + ")";
        case ProcExpr::Kind::D: return "D(" + e.name1 + ", " + e.name2 + ")";
        case ProcExpr::Kind::Plug: return e.fn + print_plug_args(e.args);
        case ProcExpr::Kind::Arith:
            return "(" + print_proc_expr(*e.a) + " " + e.arith + " " + print_proc_expr(*e.b) + ")";
        case ProcExpr::Kind::Reduce: {
            const char* w = e.rop == ReduceOp::Max   ? "max"
                            : e.rop == ReduceOp::Min ? "min"
                            : e.rop == ReduceOp::Sum ? "sum"
                                                     : "prod";
            return std::string(w) + "_" + e.reduce_var + " " + print_proc_expr(*e.a);
        }
    }
    return "?";
}

std::string print_limiter(const Limiter& l) {
    std::ostringstream os;
    os << "[";
    switch (l.kind) {
        case Limiter::Kind::K:
            os << "k=" << (l.k ? std::to_string(*l.k) : std::string("inf"));
            break;
        case Limiter::Kind::Threshold:
            os << "t" << to_string(l.cmp) << value_to_string(Value{l.threshold});
            break;
        case Limiter::Kind::Percentile:
            os << "p=" << value_to_string(Value{l.percentile});
            break;
    }
    os << "]";
    return os.str();
}

std::string print_process(const ProcessDecl& p) {
    std::ostringstream os;
    for (std::size_t i = 0; i < p.outputs.size(); ++i) {
        if (i) os << ", ";
        os << p.outputs[i];
    }
    os << " <-- ";
    if (p.is_plug_form) {
        os << p.plug_fn << print_plug_args(p.plug_args);
        return os.str();
    }
    os << (p.argopt == ArgOpt::ArgMax   ? "argmax"
           : p.argopt == ArgOpt::ArgMin ? "argmin"
                                        : "argany");
    os << "_";
    if (p.opt_vars.size() == 1) os << p.opt_vars[0];
    else {
        os << "{";
        for (std::size_t i = 0; i < p.opt_vars.size(); ++i) {
            if (i) os << ", ";
            os << p.opt_vars[i];
        }
        os << "}";
    }
    os << print_limiter(p.limiter) << " " << print_proc_expr(*p.body);
    return os.str();
}

}  // namespace

std::string print_query(const ZqlQuery& q) {
    std::size_t z_cols = 1;
    for (const auto& row : q.rows) z_cols = std::max(z_cols, row.z.size());

    std::ostringstream os;
    os << "name | x | y";
    for (std::size_t i = 0; i < z_cols; ++i) {
        os << " | z";
        if (i) os << (i + 1);
    }
    os << " | viz | process\n";

    for (const auto& row : q.rows) {
        std::ostringstream name;
        if (row.name.output) name << "*";
        name << row.name.var;
        if (row.name.derivation) name << " <-- " << print_name_expr(*row.name.derivation);
        os << name.str() << " | " << print_axis(row.x) << " | " << print_axis(row.y);
        for (std::size_t i = 0; i < z_cols; ++i)
            os << " | " << (i < row.z.size() ? print_z(row.z[i]) : "");
        os << " | " << print_viz(row.viz) << " | ";
        for (std::size_t i = 0; i < row.processes.size(); ++i) {
            if (i) os << ", ";
            if (row.processes.size() > 1) os << "(";
            os << print_process(row.processes[i]);
            if (row.processes.size() > 1) os << ")";
        }
        os << "\n";
    }
    return os.str();
}

}  // namespace zql
