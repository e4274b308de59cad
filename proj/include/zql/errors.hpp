#pragma once

#include <stdexcept>
#include <string>

namespace zql {

// Pipeline stage that produced a failure; the CLI maps this to exit codes
// and tags diagnostics with it.
enum class ErrorStage { Io, Parse, Validate, Plan, Execute };

enum class ErrorKind {
    // ingestion / backend
    SchemaMismatch,
    ParseError,
    UnknownAttribute,
    BinningOnCategorical,
    // frontend
    SyntaxError,
    UndefinedVariable,
    DoubleBinding,
    XYOnDerivedRow,
    ProcessArityMismatch,
    NotSupported,
    // planner
    CycleDetected,
    UnboundedDomain,
    // process engine
    SeriesTooShort,
    InsufficientOverlap,
    BadK,
    MisalignedAxes,
    UnknownPrimitive,
    // vea
    IndexOutOfRange,
    IllegalOperator,
    UndefinedMatch,
    NonSingletonReference,
    UniverseTooLarge,
    Internal,
};

const char* to_string(ErrorKind k);
const char* to_string(ErrorStage s);

class ZqlError : public std::runtime_error {
public:
    ZqlError(ErrorStage stage, ErrorKind kind, std::string message)
        : std::runtime_error(std::string(to_string(stage)) + ": " + std::string(to_string(kind)) +
                             ": " + message),
          stage_(stage),
          kind_(kind) {}

    ErrorStage stage() const { return stage_; }
    ErrorKind kind() const { return kind_; }

private:
    ErrorStage stage_;
    ErrorKind kind_;
};

// Syntax errors carry a location for editor-style diagnostics.
class SyntaxError : public ZqlError {
public:
    SyntaxError(int line, int column, const std::string& expected, const std::string& found)
        : ZqlError(ErrorStage::Parse, ErrorKind::SyntaxError,
                   "line " + std::to_string(line) + ", col " + std::to_string(column) +
                       ": expected " + expected + ", found " + found),
          line_(line),
          column_(column) {}

    int line() const { return line_; }
    int column() const { return column_; }

private:
    int line_;
    int column_;
};

}  // namespace zql
