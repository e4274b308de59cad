#include "zql/column_table.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "zql/errors.hpp"

namespace zql {

const char* to_string(ColumnKind k) {
    switch (k) {
        case ColumnKind::Categorical: return "categorical";
        case ColumnKind::Ordinal: return "ordinal";
        case ColumnKind::Measure: return "measure";
    }
    return "?";
}

std::optional<ColumnKind> column_kind_from_string(const std::string& s) {
    if (s == "categorical" || s == "cat" || s == "dimension") return ColumnKind::Categorical;
    if (s == "ordinal" || s == "ord") return ColumnKind::Ordinal;
    if (s == "measure" || s == "num" || s == "numeric") return ColumnKind::Measure;
    return std::nullopt;
}

ColumnTable::ColumnTable(std::string name, std::vector<Column> columns)
    : name_(std::move(name)), columns_(std::move(columns)) {
    rows_ = columns_.empty() ? 0 : columns_.front().size();
    for (int i = 0; i < static_cast<int>(columns_.size()); ++i) index_[columns_[i].name] = i;
    validate();
}

void ColumnTable::validate() const {
    if (index_.size() != columns_.size())
        throw ZqlError(ErrorStage::Io, ErrorKind::SchemaMismatch, "duplicate column name");
    for (const auto& c : columns_) {
        if (c.size() != rows_)
            throw ZqlError(ErrorStage::Io, ErrorKind::SchemaMismatch,
                           "column '" + c.name + "' has mismatched length");
        if (c.kind == ColumnKind::Measure)
            for (double v : c.num)
                if (!std::isfinite(v))
                    throw ZqlError(ErrorStage::Io, ErrorKind::ParseError,
                                   "non-finite value in measure column '" + c.name + "'");
    }
}

const Column& ColumnTable::column(const std::string& attr) const {
    auto it = index_.find(attr);
    if (it == index_.end())
        throw ZqlError(ErrorStage::Execute, ErrorKind::UnknownAttribute,
                       "no column named '" + attr + "'");
    return columns_[it->second];
}

int ColumnTable::column_index(const std::string& attr) const {
    auto it = index_.find(attr);
    return it == index_.end() ? -1 : it->second;
}

const std::vector<Value>& ColumnTable::distinct_values(const std::string& attr) const {
    auto it = distinct_cache_.find(attr);
    if (it != distinct_cache_.end()) return it->second;
    const Column& c = column(attr);
    std::set<Value, ValueLess> vals;
    for (std::size_t r = 0; r < rows_; ++r) vals.insert(c.at(r));
    auto [pos, _] = distinct_cache_.emplace(attr, std::vector<Value>(vals.begin(), vals.end()));
    return pos->second;
}

namespace {

std::string strip(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::vector<std::string> split_line(const std::string& line, char delim) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == delim) {
            out.push_back(strip(cur));
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    out.push_back(strip(cur));
    return out;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ZqlError(ErrorStage::Io, ErrorKind::ParseError, "cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string table_name_from_path(const std::string& path) {
    std::size_t slash = path.find_last_of("/\\");
    std::string base = slash == std::string::npos ? path : path.substr(slash + 1);
    std::size_t dot = base.find_last_of('.');
    if (dot != std::string::npos && dot > 0) base = base.substr(0, dot);
    return base.empty() ? "table" : base;
}

}  // namespace

TableSchema parse_schema_text(const std::string& text) {
    TableSchema schema;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = strip(line);
        if (line.empty() || line[0] == '#') continue;
        auto colon = line.find(':');
        if (colon == std::string::npos)
            throw ZqlError(ErrorStage::Io, ErrorKind::SchemaMismatch,
                           "schema line " + std::to_string(lineno) + ": expected name:kind");
        std::string name = strip(line.substr(0, colon));
        std::string kind_s = strip(line.substr(colon + 1));
        auto kind = column_kind_from_string(kind_s);
        if (name.empty() || !kind)
            throw ZqlError(ErrorStage::Io, ErrorKind::SchemaMismatch,
                           "schema line " + std::to_string(lineno) + ": bad column kind '" +
                               kind_s + "'");
        schema.columns.emplace_back(name, *kind);
    }
    if (schema.columns.empty())
        throw ZqlError(ErrorStage::Io, ErrorKind::SchemaMismatch, "empty schema");
    return schema;
}

TableSchema load_schema(const std::string& path) { return parse_schema_text(read_file(path)); }

ColumnTable parse_table_text(const std::string& table_name, const std::string& text,
                             const TableSchema& schema) {
    std::istringstream in(text);
    std::string header;
    if (!std::getline(in, header))
        throw ZqlError(ErrorStage::Io, ErrorKind::SchemaMismatch, "missing header row");
    if (!header.empty() && header.back() == '\r') header.pop_back();
    const char delim = header.find('\t') != std::string::npos ? '\t' : ',';
    std::vector<std::string> names = split_line(header, delim);
    if (names.size() != schema.columns.size())
        throw ZqlError(ErrorStage::Io, ErrorKind::SchemaMismatch,
                       "header has " + std::to_string(names.size()) + " columns, schema has " +
                           std::to_string(schema.columns.size()));
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] != schema.columns[i].first)
            throw ZqlError(ErrorStage::Io, ErrorKind::SchemaMismatch,
                           "header column '" + names[i] + "' does not match schema column '" +
                               schema.columns[i].first + "'");

    std::vector<Column> cols(schema.columns.size());
    for (std::size_t i = 0; i < cols.size(); ++i) {
        cols[i].name = schema.columns[i].first;
        cols[i].kind = schema.columns[i].second;
    }

    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (strip(line).empty()) continue;
        ++row;
        std::vector<std::string> cells = split_line(line, delim);
        if (cells.size() != cols.size())
            throw ZqlError(ErrorStage::Io, ErrorKind::ParseError,
                           "row " + std::to_string(row) + ": expected " +
                               std::to_string(cols.size()) + " cells, got " +
                               std::to_string(cells.size()));
        for (std::size_t i = 0; i < cols.size(); ++i) {
            const std::string& cell = cells[i];
            if (cell.empty())
                throw ZqlError(ErrorStage::Io, ErrorKind::ParseError,
                               "row " + std::to_string(row) + ": empty value in column '" +
                                   cols[i].name + "'");
            switch (cols[i].kind) {
                case ColumnKind::Categorical:
                    cols[i].cat.push_back(cell);
                    break;
                case ColumnKind::Ordinal: {
                    int64_t v = 0;
                    auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
                    if (ec != std::errc() || p != cell.data() + cell.size())
                        throw ZqlError(ErrorStage::Io, ErrorKind::ParseError,
                                       "row " + std::to_string(row) + ": '" + cell +
                                           "' is not an integer (column '" + cols[i].name + "')");
                    cols[i].ord.push_back(v);
                    break;
                }
                case ColumnKind::Measure: {
                    char* end = nullptr;
                    const double v = std::strtod(cell.c_str(), &end);
                    if (end != cell.c_str() + cell.size() || !std::isfinite(v))
                        throw ZqlError(ErrorStage::Io, ErrorKind::ParseError,
                                       "row " + std::to_string(row) + ": '" + cell +
                                           "' is not a finite number (column '" + cols[i].name +
                                           "')");
                    cols[i].num.push_back(v);
                    break;
                }
            }
        }
    }
    return ColumnTable(table_name, std::move(cols));
}

ColumnTable load_table(const std::string& path, const TableSchema& schema) {
    return parse_table_text(table_name_from_path(path), read_file(path), schema);
}

AttributeCatalog AttributeCatalog::defaults_for(const ColumnTable& table) {
    AttributeCatalog cat;
    for (const auto& c : table.columns()) {
        cat.x_eligible.push_back(c.name);
        if (c.kind == ColumnKind::Measure) cat.y_eligible.push_back(c.name);
    }
    return cat;
}

bool AttributeCatalog::x_ok(const std::string& a) const {
    return std::find(x_eligible.begin(), x_eligible.end(), a) != x_eligible.end();
}
bool AttributeCatalog::y_ok(const std::string& a) const {
    return std::find(y_eligible.begin(), y_eligible.end(), a) != y_eligible.end();
}

}  // namespace zql
