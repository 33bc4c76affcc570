#ifndef APFSIM_TRACE_IO_HPP
#define APFSIM_TRACE_IO_HPP

#include <string>
#include <vector>

#include "apfsim/emd.hpp"
#include "apfsim/metrics.hpp"
#include "apfsim/plant.hpp"
#include "apfsim/signal.hpp"

namespace apfsim::io {

/// Fixed trace column order; the header string is part of the file format.
extern const char* kTraceHeader;

void write_trace_csv(const std::string& path, const plant::SimulationTrace& trace);

void write_metrics_csv(const std::string& path, const metrics::MetricsSeries& series);

/// Single-column numeric CSV, optional one-line header. Parse failures
/// carry the 1-based line number.
struct CsvParseError : std::runtime_error {
    CsvParseError(std::size_t line_no, const std::string& why)
        : std::runtime_error("line " + std::to_string(line_no) + ": " + why), line(line_no) {}
    std::size_t line;
};

Signal read_signal_csv(const std::string& path, double sample_rate);

/// One column per IMF plus the residue: IMF1..IMFk, residue.
void write_imfs_csv(const std::string& path, const emd::ImfSet& set);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace apfsim::io

#endif
