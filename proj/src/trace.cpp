#include "dd/trace.hpp"

#include <cstdio>
#include <fstream>

#include "dd/errors.hpp"

namespace dd {

void IterationTrace::add(long iter, std::vector<double> row) {
    if (row.size() != columns.size())
        throw DimensionMismatch("trace row has " + std::to_string(row.size()) + " values, header has " +
                                std::to_string(columns.size()));
    if (!k.empty() && iter <= k.back()) throw Error("trace iteration index must increase");
    k.push_back(iter);
    rows.push_back(std::move(row));
}

std::string trace_csv(const IterationTrace& trace) {
    std::string out = "stage,k";
    for (const auto& c : trace.columns) out += "," + c;
    out += "\n";
    char buf[64];
    for (size_t r = 0; r < trace.rows.size(); ++r) {
        out += trace.stage;
        out += "," + std::to_string(trace.k[r]);
        for (double v : trace.rows[r]) {
            std::snprintf(buf, sizeof buf, ",%.10g", v == 0.0 ? 0.0 : v);
            out += buf;
        }
        out += "\n";
    }
    return out;
}

void emit_trace(const IterationTrace& trace, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open trace file " + path);
    f << trace_csv(trace);
    if (!f) throw IoError("write failed for " + path);
}

void append_columns(std::vector<std::string>& cols, const std::string& prefix, int n) {
    for (int i = 1; i <= n; ++i) cols.push_back(prefix + "_" + std::to_string(i));
}

} // namespace dd
