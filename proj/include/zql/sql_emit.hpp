#pragma once

#include <string>
#include <vector>

#include "zql/aggregate.hpp"

namespace zql {

// Renders the SQL a relational backend would receive for a request: a single
// SELECT .. WHERE .. GROUP BY .. ORDER BY statement. ANSI SQL-92 subset;
// identifiers double-quoted, string literals single-quoted; bucketed
// attributes appear as WIDTH_BUCKET-style expressions (documented dialect
// extension, bounds of count-based bins are bind parameters resolved at
// execution time). Deterministic for a given request.
std::string emit_sql(const AggregateRequest& req, const std::string& table_name);

// Combined form: shared select list, the disjunction "C1 OR C2 .." in WHERE,
// and per-request condition flags in GROUP BY / ORDER BY.
std::string emit_sql_combined(const std::vector<AggregateRequest>& reqs,
                              const std::string& table_name);

std::string predicate_to_sql(const Predicate& p);

}  // namespace zql
