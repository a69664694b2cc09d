#pragma once

#include <stdexcept>
#include <string>

namespace dd {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

#define DD_ERROR(Name)                       \
    struct Name : Error {                    \
        using Error::Error;                  \
    }

DD_ERROR(InvalidEdge);
DD_ERROR(DisconnectedGraph);
DD_ERROR(DimensionMismatch);
DD_ERROR(NotPositiveSemidefinite);
DD_ERROR(IndexOutOfRange);
DD_ERROR(NotAGenerator);
DD_ERROR(EmptyPriorityLevel);
DD_ERROR(InfeasibleShedding);
DD_ERROR(ZeroCardinality);
DD_ERROR(Undecodable);
DD_ERROR(GridTooLarge);
DD_ERROR(Infeasible);
DD_ERROR(NotConverged);
DD_ERROR(IoError);

#undef DD_ERROR

struct ParseError : Error {
    ParseError(int line, const std::string& field, const std::string& what)
        : Error("line " + std::to_string(line) + ", field '" + field + "': " + what),
          line(line), field(field) {}
    int line;
    std::string field;
};

// label names the violated assumption, e.g. "A5.1"
struct ValidationError : Error {
    ValidationError(const std::string& label, const std::string& what)
        : Error(label + ": " + what), label(label) {}
    std::string label;
};

} // namespace dd
