#include "magest/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace magest {

namespace {

std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string> split_ws(std::string_view s)
{
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
        std::size_t j = i;
        while (j < s.size() && s[j] != ' ' && s[j] != '\t' && s[j] != '\r') ++j;
        if (j > i) out.emplace_back(s.substr(i, j - i));
        i = j;
    }
    return out;
}

std::ofstream open_out(const std::filesystem::path& path)
{
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open " + path.string() + " for writing");
    return os;
}

std::ifstream open_in(const std::filesystem::path& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path.string() + " for reading");
    return is;
}

void expect_kind(const Table& t, std::string_view kind, const std::filesystem::path& path)
{
    if (t.header.kind != kind) {
        throw ContractError(path.string() + ": expected a '" + std::string(kind) + "' file, found '" +
                            t.header.kind + "'");
    }
}

} // namespace

std::string format_double(double value)
{
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view text)
{
    text = trim(text);
    double v = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    if (!text.empty() && *first == '+') ++first;
    auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr != last) {
        throw ContractError("not a number: '" + std::string(text) + "'");
    }
    return v;
}

void FileHeader::set(const std::string& key, std::string value)
{
    for (auto& [k, v] : entries) {
        if (k == key) {
            v = std::move(value);
            return;
        }
    }
    entries.emplace_back(key, std::move(value));
}

void FileHeader::set(const std::string& key, double value) { set(key, format_double(value)); }

std::optional<std::string> FileHeader::get(std::string_view key) const
{
    for (const auto& [k, v] : entries) {
        if (k == key) return v;
    }
    return std::nullopt;
}

double FileHeader::get_double(std::string_view key) const
{
    auto v = get(key);
    if (!v) throw ContractError("header is missing key '" + std::string(key) + "'");
    return parse_double(*v);
}

const std::vector<double>& Table::column(std::string_view name) const
{
    for (std::size_t i = 0; i < header.columns.size(); ++i) {
        if (header.columns[i] == name) return columns[i];
    }
    throw ContractError("table has no column '" + std::string(name) + "'");
}

void write_table(std::ostream& os, const FileHeader& header, const std::vector<std::vector<double>>& columns)
{
    if (columns.size() != header.columns.size()) {
        throw ContractError("write_table: column count does not match header");
    }
    const std::size_t rows = columns.empty() ? 0 : columns.front().size();
    for (const auto& c : columns) {
        if (c.size() != rows) throw ContractError("write_table: ragged columns");
    }
    os << "# magest " << header.kind << '\n';
    for (const auto& [k, v] : header.entries) os << "# " << k << ": " << v << '\n';
    os << "# columns:";
    for (const auto& c : header.columns) os << ' ' << c;
    os << '\n';
    std::string line;
    for (std::size_t r = 0; r < rows; ++r) {
        line.clear();
        for (std::size_t c = 0; c < columns.size(); ++c) {
            if (c) line += ' ';
            line += format_double(columns[c][r]);
        }
        line += '\n';
        os << line;
    }
    if (!os) throw IoError("write failed");
}

Table read_table(std::istream& is)
{
    Table t;
    std::string line;
    bool first = true;
    bool have_columns = false;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        std::string_view s = trim(line);
        if (s.empty()) continue;
        if (s.front() == '#') {
            s.remove_prefix(1);
            s = trim(s);
            if (first) {
                if (s.substr(0, 7) != "magest ") throw ContractError("not a magest data file");
                t.header.kind = std::string(trim(s.substr(7)));
                first = false;
                continue;
            }
            const auto colon = s.find(':');
            if (colon == std::string_view::npos) continue;
            const std::string key(trim(s.substr(0, colon)));
            const std::string_view value = trim(s.substr(colon + 1));
            if (key == "columns") {
                t.header.columns = split_ws(value);
                t.columns.assign(t.header.columns.size(), {});
                have_columns = true;
            } else {
                t.header.entries.emplace_back(key, std::string(value));
            }
            continue;
        }
        if (!have_columns) throw ContractError("data before '# columns:' header line");
        const auto fields = split_ws(s);
        if (fields.size() != t.columns.size()) {
            throw ContractError("line " + std::to_string(lineno) + ": expected " +
                                std::to_string(t.columns.size()) + " fields");
        }
        for (std::size_t c = 0; c < fields.size(); ++c) t.columns[c].push_back(parse_double(fields[c]));
    }
    if (first) throw ContractError("empty file");
    return t;
}

void write_table_file(const std::filesystem::path& path, const FileHeader& header,
                      const std::vector<std::vector<double>>& columns)
{
    auto os = open_out(path);
    write_table(os, header, columns);
}

Table read_table_file(const std::filesystem::path& path)
{
    auto is = open_in(path);
    return read_table(is);
}

void write_record(const std::filesystem::path& path, const MeasurementRecord& record, FileHeader header)
{
    header.kind = "record";
    header.set("tau", record.tau);
    header.set("realization_seed", std::to_string(record.seed));
    header.columns = {"t", "x_meas", "B_true"};
    std::vector<double> t(record.size());
    for (std::size_t k = 0; k < t.size(); ++k) t[k] = record.time(k);
    write_table_file(path, header, {t, record.outcomes, record.true_field});
}

LoadedRecord read_record(const std::filesystem::path& path)
{
    Table t = read_table_file(path);
    expect_kind(t, "record", path);
    LoadedRecord out;
    out.record.tau = t.header.get_double("tau");
    out.record.seed = std::stoull(t.header.get("realization_seed").value_or(t.header.get("seed").value_or("0")));
    out.record.outcomes = t.column("x_meas");
    out.record.true_field = t.column("B_true");
    out.record.validate();
    out.header = std::move(t.header);
    return out;
}

void write_trace(const std::filesystem::path& path, const EstimateTrace& trace, FileHeader header)
{
    header.kind = "trace";
    header.set("tau", trace.tau);
    header.columns = {"t", "b_hat", "b_var"};
    write_table_file(path, header, {trace.times, trace.b_hat, trace.b_var});
}

EstimateTrace read_trace(const std::filesystem::path& path)
{
    Table t = read_table_file(path);
    expect_kind(t, "trace", path);
    EstimateTrace out;
    out.tau = t.header.get_double("tau");
    out.times = t.column("t");
    out.b_hat = t.column("b_hat");
    out.b_var = t.column("b_var");
    return out;
}

void write_smoothed(const std::filesystem::path& path, const SmoothedTrace& trace, FileHeader header)
{
    header.kind = "smoothed";
    header.set("tau", trace.tau);
    header.set("n_slots", std::to_string(trace.n_slots));
    header.columns = {"t"};
    std::vector<std::vector<double>> cols{trace.times};
    for (std::size_t i = 0; i < trace.width(); ++i) {
        const std::string s = std::to_string(i);
        header.columns.push_back("delay_" + s);
        header.columns.push_back("b_hat_" + s);
        header.columns.push_back("b_var_" + s);
        std::vector<double> d, m, v;
        for (std::size_t r = 0; r < trace.rows(); ++r) {
            d.push_back(trace.delay_at(r, i));
            m.push_back(trace.b_hat_at(r, i));
            v.push_back(trace.b_var_at(r, i));
        }
        cols.push_back(std::move(d));
        cols.push_back(std::move(m));
        cols.push_back(std::move(v));
    }
    write_table_file(path, header, cols);
}

void write_weights(const std::filesystem::path& path, const DelayWeights& weights, FileHeader header)
{
    header.kind = "weights";
    header.set("fit_error_sq", weights.error_sq);
    header.set("fit_samples", std::to_string(weights.samples));
    header.set("collinear", weights.collinear ? "true" : "false");
    header.columns = {"delay", "weight"};
    write_table_file(path, header, {weights.delay, weights.weights});
}

} // namespace magest
