#pragma once

#include <string>
#include <vector>

namespace dd {

struct IterationTrace {
    std::string stage;
    std::vector<std::string> columns;  // after "stage,k"
    std::vector<long> k;
    std::vector<std::vector<double>> rows;

    void add(long iter, std::vector<double> row);
    bool empty() const { return rows.empty(); }
};

// header-only file for an empty trace; numbers use %.10g
void emit_trace(const IterationTrace& trace, const std::string& path);
std::string trace_csv(const IterationTrace& trace);

// columns "<prefix>_1..<prefix>_n"
void append_columns(std::vector<std::string>& cols, const std::string& prefix, int n);

} // namespace dd
