#include "zql/sql_emit.hpp"

#include <sstream>

#include "zql/errors.hpp"

namespace zql {

namespace {

std::string quote_ident(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        out.push_back(c);
        if (c == '"') out.push_back('"');
    }
    out.push_back('"');
    return out;
}

std::string quote_literal(const Value& v) {
    if (is_numeric(v)) return value_to_string(v);
    std::string out = "'";
    for (char c : value_to_string(v)) {
        out.push_back(c);
        if (c == '\'') out.push_back('\'');
    }
    out.push_back('\'');
    return out;
}

std::string binned_expr(const std::string& attr, const Binning& b) {
    std::ostringstream os;
    if (b.mode == Binning::Mode::Width) {
        os << "FLOOR(" << quote_ident(attr) << " / " << b.width << ") * " << b.width;
    } else {
        os << "WIDTH_BUCKET(" << quote_ident(attr) << ", :" << attr << "_min, :" << attr
           << "_max, " << b.count << ")";
    }
    return os.str();
}

std::string atom_to_sql(const PredAtom& a) {
    std::ostringstream os;
    os << quote_ident(a.attr) << " ";
    if (a.op == CmpOp::In) {
        if (a.operands.empty()) return "FALSE";
        os << "IN (";
        for (std::size_t i = 0; i < a.operands.size(); ++i) {
            if (i) os << ", ";
            os << quote_literal(a.operands[i]);
        }
        os << ")";
    } else {
        os << to_string(a.op) << " " << quote_literal(a.operands.front());
    }
    return os.str();
}

std::string conjunction_to_sql(const Conjunction& c) {
    if (c.empty()) return "TRUE";
    std::ostringstream os;
    for (std::size_t i = 0; i < c.size(); ++i) {
        if (i) os << " AND ";
        os << atom_to_sql(c[i]);
    }
    return os.str();
}

struct RequestParts {
    std::string x_expr;
    std::vector<std::string> y_exprs;
    std::vector<std::string> dim_exprs;
};

RequestParts request_parts(const AggregateRequest& req) {
    RequestParts p;
    p.x_expr = req.x_binning ? binned_expr(req.x_attr, *req.x_binning) : quote_ident(req.x_attr);
    for (const auto& yt : req.y_terms)
        p.y_exprs.push_back(std::string(to_string(yt.fn)) + "(" + quote_ident(yt.attr) + ")");
    for (const auto& d : req.group_dims)
        p.dim_exprs.push_back(d.binning ? binned_expr(d.attr, *d.binning) : quote_ident(d.attr));
    return p;
}

void join_into(std::ostringstream& os, const std::vector<std::string>& items) {
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) os << ", ";
        os << items[i];
    }
}

}  // namespace

std::string predicate_to_sql(const Predicate& p) {
    if (p.is_true()) return "";
    std::ostringstream os;
    for (std::size_t i = 0; i < p.disjuncts.size(); ++i) {
        if (i) os << " OR ";
        if (p.disjuncts.size() > 1 && p.disjuncts[i].size() > 1) os << "(";
        os << conjunction_to_sql(p.disjuncts[i]);
        if (p.disjuncts.size() > 1 && p.disjuncts[i].size() > 1) os << ")";
    }
    return os.str();
}

std::string emit_sql(const AggregateRequest& req, const std::string& table_name) {
    RequestParts p = request_parts(req);
    std::ostringstream os;
    os << "SELECT " << p.x_expr << ", ";
    join_into(os, p.y_exprs);
    for (const auto& d : p.dim_exprs) os << ", " << d;
    os << " FROM " << quote_ident(table_name);
    const std::string where = predicate_to_sql(req.where);
    if (!where.empty()) os << " WHERE " << where;
    std::vector<std::string> keys;
    keys.push_back(p.x_expr);
    for (const auto& d : p.dim_exprs) keys.push_back(d);
    os << " GROUP BY ";
    join_into(os, keys);
    os << " ORDER BY ";
    join_into(os, keys);
    os << ";";
    return os.str();
}

std::string emit_sql_combined(const std::vector<AggregateRequest>& reqs,
                              const std::string& table_name) {
    if (reqs.empty()) throw ZqlError(ErrorStage::Plan, ErrorKind::Internal, "nothing to combine");
    if (reqs.size() == 1) return emit_sql(reqs.front(), table_name);

    std::vector<RequestParts> parts;
    std::vector<std::string> conds;
    for (std::size_t i = 0; i < reqs.size(); ++i) {
        parts.push_back(request_parts(reqs[i]));
        const std::string w = predicate_to_sql(reqs[i].where);
        conds.push_back(w.empty() ? "TRUE" : w);
    }

    std::vector<std::string> select_items, key_items;
    for (std::size_t i = 0; i < reqs.size(); ++i) {
        select_items.push_back(parts[i].x_expr);
        key_items.push_back(parts[i].x_expr);
        for (const auto& y : parts[i].y_exprs) select_items.push_back(y);
        for (const auto& d : parts[i].dim_exprs) {
            select_items.push_back(d);
            key_items.push_back(d);
        }
        const std::string flag =
            "CASE WHEN " + conds[i] + " THEN 1 ELSE 0 END";
        select_items.push_back(flag);
        key_items.push_back(flag);
    }

    std::ostringstream os;
    os << "SELECT ";
    join_into(os, select_items);
    os << " FROM " << quote_ident(table_name) << " WHERE ";
    for (std::size_t i = 0; i < conds.size(); ++i) {
        if (i) os << " OR ";
        os << "(" << conds[i] << ")";
    }
    os << " GROUP BY ";
    join_into(os, key_items);
    os << " ORDER BY ";
    join_into(os, key_items);
    os << ";";
    return os.str();
}

}  // namespace zql
