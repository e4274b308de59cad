#pragma once

#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "zql/value.hpp"

namespace zql {

enum class ColumnKind { Categorical, Ordinal, Measure };

const char* to_string(ColumnKind k);
std::optional<ColumnKind> column_kind_from_string(const std::string& s);

// One typed column. Categorical -> string, Ordinal -> int64, Measure -> double.
struct Column {
    std::string name;
    ColumnKind kind = ColumnKind::Categorical;
    std::vector<std::string> cat;
    std::vector<int64_t> ord;
    std::vector<double> num;

    std::size_t size() const {
        switch (kind) {
            case ColumnKind::Categorical: return cat.size();
            case ColumnKind::Ordinal: return ord.size();
            case ColumnKind::Measure: return num.size();
        }
        return 0;
    }
    Value at(std::size_t row) const {
        switch (kind) {
            case ColumnKind::Categorical: return cat[row];
            case ColumnKind::Ordinal: return ord[row];
            case ColumnKind::Measure: return num[row];
        }
        return Star{};
    }
    bool is_dimension() const { return kind != ColumnKind::Measure; }
};

// Immutable columnar relation. All mutation happens during construction;
// afterwards the table is safely shareable across threads.
class ColumnTable {
public:
    ColumnTable() = default;
    ColumnTable(std::string name, std::vector<Column> columns);

    const std::string& name() const { return name_; }
    std::size_t row_count() const { return rows_; }
    const std::vector<Column>& columns() const { return columns_; }

    bool has_column(const std::string& attr) const { return index_.count(attr) > 0; }
    const Column& column(const std::string& attr) const;  // throws UnknownAttribute
    int column_index(const std::string& attr) const;      // -1 when absent

    // Distinct values of a dimension or measure column, ascending.
    const std::vector<Value>& distinct_values(const std::string& attr) const;

private:
    std::string name_;
    std::vector<Column> columns_;
    std::size_t rows_ = 0;
    std::unordered_map<std::string, int> index_;
    mutable std::unordered_map<std::string, std::vector<Value>> distinct_cache_;
    void validate() const;
};

// Column kind declarations, ordered; mirrors the on-disk schema file.
struct TableSchema {
    std::vector<std::pair<std::string, ColumnKind>> columns;
};

TableSchema load_schema(const std::string& path);
TableSchema parse_schema_text(const std::string& text);

// Loads a delimited text file (comma or tab, auto-detected from the header
// line) whose header must match the schema's column names in order.
ColumnTable load_table(const std::string& path, const TableSchema& schema);
ColumnTable parse_table_text(const std::string& table_name, const std::string& text,
                             const TableSchema& schema);

// Which attributes may appear on the x- and y-axes. Defaults: every column
// is x-eligible, measure columns are y-eligible.
struct AttributeCatalog {
    std::vector<std::string> x_eligible;
    std::vector<std::string> y_eligible;

    static AttributeCatalog defaults_for(const ColumnTable& table);
    bool x_ok(const std::string& a) const;
    bool y_ok(const std::string& a) const;
};

}  // namespace zql
