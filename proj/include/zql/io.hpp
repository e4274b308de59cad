#pragma once

#include <string>

#include "zql/executor.hpp"

namespace zql {

// Serializes one output collection as delimited text: one line per series
// point, leading group-key columns, then x and y (x, y-bucket, count for
// 2-d histograms). Deterministic in result order.
std::string result_to_csv(const VisCollection& coll, const ValidatedQuery& vq);

// Writes every output row of a result set to <dir>/<name>.csv; returns the
// file names written.
std::vector<std::string> write_results(const ResultSet& results, const ValidatedQuery& vq,
                                       const std::string& dir);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace zql
