#pragma once

#include <string>

#include "zql/zql_ast.hpp"

namespace zql {

// Parses the pipe-delimited ZQL table format. `#` starts a comment line; the
// first non-comment line may be a header naming the columns present
// (name | x | y | z | z2 | ... | viz | process, case-insensitive); without a
// header the default layout name|x|y|z|viz|process applies.
ZqlQuery parse_query(const std::string& text);

// Canonical reprint; parse(print_query(q)) reparses to an equal AST.
std::string print_query(const ZqlQuery& q);

}  // namespace zql
