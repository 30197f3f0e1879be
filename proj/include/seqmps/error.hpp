#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace seqmps {

enum class ErrorKind {
    InvalidArgument,
    PhysDimMismatch,
    SymbolOutOfRange,
    ZeroLeftBoundary,
    NotNormalizable,
    DivisionUndefined,
    IllConditionedSimilarity,
    BudgetExceeded,
    EmptyFactorList,
    ShapeMismatch,
    InvalidFcs,
    InvalidParams,
    ParseError,
    ValidationError,
    UnknownEntity,
};

inline const char *to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::PhysDimMismatch: return "phys-dim-mismatch";
    case ErrorKind::SymbolOutOfRange: return "symbol-out-of-range";
    case ErrorKind::ZeroLeftBoundary: return "zero-left-boundary";
    case ErrorKind::NotNormalizable: return "not-normalizable";
    case ErrorKind::DivisionUndefined: return "division-undefined";
    case ErrorKind::IllConditionedSimilarity: return "ill-conditioned-similarity";
    case ErrorKind::BudgetExceeded: return "budget-exceeded";
    case ErrorKind::EmptyFactorList: return "empty-factor-list";
    case ErrorKind::ShapeMismatch: return "shape-mismatch";
    case ErrorKind::InvalidFcs: return "invalid-fcs";
    case ErrorKind::InvalidParams: return "invalid-params";
    case ErrorKind::ParseError: return "parse-error";
    case ErrorKind::ValidationError: return "validation-error";
    case ErrorKind::UnknownEntity: return "unknown-entity";
    }
    return "unknown";
}

class Error : public std::runtime_error {
  public:
    Error(ErrorKind kind, const std::string &what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

  private:
    ErrorKind kind_;
};

/// Parse failure with a 1-based source position.
class ParseError : public Error {
  public:
    ParseError(std::size_t line, std::size_t column, const std::string &reason)
        : Error(ErrorKind::ParseError, "line " + std::to_string(line) + ", column " +
                                           std::to_string(column) + ": " + reason),
          line_(line), column_(column) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

  private:
    std::size_t line_;
    std::size_t column_;
};

} // namespace seqmps
