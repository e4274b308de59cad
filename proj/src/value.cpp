#include "zql/value.hpp"

#include <cmath>
#include <cstdio>

#include "zql/errors.hpp"

namespace zql {

const char* to_string(ErrorStage s) {
    switch (s) {
        case ErrorStage::Io: return "io";
        case ErrorStage::Parse: return "parse";
        case ErrorStage::Validate: return "validate";
        case ErrorStage::Plan: return "plan";
        case ErrorStage::Execute: return "execute";
    }
    return "?";
}

const char* to_string(ErrorKind k) {
    switch (k) {
        case ErrorKind::SchemaMismatch: return "SchemaMismatch";
        case ErrorKind::ParseError: return "ParseError";
        case ErrorKind::UnknownAttribute: return "UnknownAttribute";
        case ErrorKind::BinningOnCategorical: return "BinningOnCategorical";
        case ErrorKind::SyntaxError: return "SyntaxError";
        case ErrorKind::UndefinedVariable: return "UndefinedVariable";
        case ErrorKind::DoubleBinding: return "DoubleBinding";
        case ErrorKind::XYOnDerivedRow: return "XYOnDerivedRow";
        case ErrorKind::ProcessArityMismatch: return "ProcessArityMismatch";
        case ErrorKind::NotSupported: return "NotSupported";
        case ErrorKind::CycleDetected: return "CycleDetected";
        case ErrorKind::UnboundedDomain: return "UnboundedDomain";
        case ErrorKind::SeriesTooShort: return "SeriesTooShort";
        case ErrorKind::InsufficientOverlap: return "InsufficientOverlap";
        case ErrorKind::BadK: return "BadK";
        case ErrorKind::MisalignedAxes: return "MisalignedAxes";
        case ErrorKind::UnknownPrimitive: return "UnknownPrimitive";
        case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
        case ErrorKind::IllegalOperator: return "IllegalOperator";
        case ErrorKind::UndefinedMatch: return "UndefinedMatch";
        case ErrorKind::NonSingletonReference: return "NonSingletonReference";
        case ErrorKind::UniverseTooLarge: return "UniverseTooLarge";
        case ErrorKind::Internal: return "Internal";
    }
    return "?";
}

namespace {

// star > string > numeric for cross-type ordering; numerics compare by value.
int type_rank(const Value& v) {
    if (is_star(v)) return 2;
    if (std::holds_alternative<std::string>(v)) return 1;
    return 0;
}

}  // namespace

bool value_less(const Value& a, const Value& b) {
    const int ra = type_rank(a), rb = type_rank(b);
    if (ra != rb) return ra < rb;
    if (ra == 2) return false;  // both star
    if (ra == 1) return std::get<std::string>(a) < std::get<std::string>(b);
    // both numeric: exact comparison when both int64, else via double
    if (std::holds_alternative<int64_t>(a) && std::holds_alternative<int64_t>(b))
        return std::get<int64_t>(a) < std::get<int64_t>(b);
    return as_double(a) < as_double(b);
}

bool value_eq(const Value& a, const Value& b) {
    const int ra = type_rank(a), rb = type_rank(b);
    if (ra != rb) return false;
    if (ra == 2) return true;
    if (ra == 1) return std::get<std::string>(a) == std::get<std::string>(b);
    if (std::holds_alternative<int64_t>(a) && std::holds_alternative<int64_t>(b))
        return std::get<int64_t>(a) == std::get<int64_t>(b);
    return as_double(a) == as_double(b);
}

std::string value_to_string(const Value& v) {
    if (is_star(v)) return "*";
    if (const auto* i = std::get_if<int64_t>(&v)) return std::to_string(*i);
    if (const auto* d = std::get_if<double>(&v)) {
        if (*d == std::floor(*d) && std::fabs(*d) < 1e15)
            return std::to_string(static_cast<int64_t>(*d));
        // shortest round-trip formatting
        char buf[64];
        for (int prec = 1; prec <= 17; ++prec) {
            std::snprintf(buf, sizeof(buf), "%.*g", prec, *d);
            double back = 0;
            std::sscanf(buf, "%lf", &back);
            if (back == *d) return buf;
        }
        return buf;
    }
    return std::get<std::string>(v);
}

bool tuple_less(const ValueTuple& a, const ValueTuple& b) {
    const std::size_t n = std::min(a.size(), b.size());
    for (std::size_t i = 0; i < n; ++i) {
        if (value_less(a[i], b[i])) return true;
        if (value_less(b[i], a[i])) return false;
    }
    return a.size() < b.size();
}

bool tuple_eq(const ValueTuple& a, const ValueTuple& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!value_eq(a[i], b[i])) return false;
    return true;
}

}  // namespace zql
