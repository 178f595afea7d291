/**
 * @file io.hpp
 * @brief Columnar text files with a commented key/value header.
 *
 * Layout:
 *   # magest <kind>
 *   # key: value          (any number)
 *   # columns: a b c
 *   1.5 2 3
 *
 * Numbers are written in shortest round-trip form, so read -> write -> read
 * reproduces a file byte for byte.
 */
#pragma once

#include "magest/delay_fit.hpp"
#include "magest/filter.hpp"
#include "magest/smoother.hpp"
#include "magest/truth.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace magest {

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string format_double(double value);
/// Throws ContractError on malformed input.
double parse_double(std::string_view text);

struct FileHeader {
    std::string kind;
    std::vector<std::pair<std::string, std::string>> entries;
    std::vector<std::string> columns;

    void set(const std::string& key, std::string value);
    void set(const std::string& key, double value);
    std::optional<std::string> get(std::string_view key) const;
    double get_double(std::string_view key) const;
};

struct Table {
    FileHeader header;
    std::vector<std::vector<double>> columns;

    std::size_t rows() const { return columns.empty() ? 0 : columns.front().size(); }
    const std::vector<double>& column(std::string_view name) const;
};

void write_table(std::ostream& os, const FileHeader& header, const std::vector<std::vector<double>>& columns);
Table read_table(std::istream& is);

void write_table_file(const std::filesystem::path& path, const FileHeader& header,
                      const std::vector<std::vector<double>>& columns);
Table read_table_file(const std::filesystem::path& path);

/// Record files: columns t, x_meas, B_true; header carries tau and seed.
void write_record(const std::filesystem::path& path, const MeasurementRecord& record, FileHeader header);
struct LoadedRecord {
    MeasurementRecord record;
    FileHeader header;
};
LoadedRecord read_record(const std::filesystem::path& path);

/// Trace files: columns t, b_hat, b_var.
void write_trace(const std::filesystem::path& path, const EstimateTrace& trace, FileHeader header);
EstimateTrace read_trace(const std::filesystem::path& path);

/// Smoothed traces: t, then delay_i, b_hat_i, b_var_i for slot 0 (current) .. n.
void write_smoothed(const std::filesystem::path& path, const SmoothedTrace& trace, FileHeader header);

/// (delay, weight) pairs; fit error in the header.
void write_weights(const std::filesystem::path& path, const DelayWeights& weights, FileHeader header);

} // namespace magest
