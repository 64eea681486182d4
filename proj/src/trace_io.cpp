#include "itms/trace_io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "itms/errors.hpp"

namespace itms {
namespace {

constexpr std::size_t kInputColumns = 6;
constexpr std::size_t kColumns = 1 + PlantState::kSize + kInputColumns + 3;

double parse_double(std::string_view s, std::size_t line, std::size_t col) {
    double v = 0.0;
    const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || end != s.data() + s.size()) {
        throw ConfigError(fmt::format("trace line {}, column {}: '{}' is not a number", line,
                                      col + 1, s));
    }
    return v;
}

bool parse_flag(std::string_view s, std::size_t line, std::size_t col) {
    if (s == "0") return false;
    if (s == "1") return true;
    throw ConfigError(fmt::format("trace line {}, column {}: flag must be 0 or 1, got '{}'", line,
                                  col + 1, s));
}

std::vector<std::string_view> split(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(',', start);
        out.push_back(s.substr(start, pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

}  // namespace

std::vector<std::string> trace_columns() {
    std::vector<std::string> cols{"t"};
    for (const char* name : kStateFieldNames) cols.emplace_back(name);
    for (const char* name : {"mdot_b", "mdot_c", "mdot_a1", "mdot_a2", "mdot_a3", "mdot_a4"}) {
        cols.emplace_back(name);
    }
    for (const char* name : {"door_signal", "lower_active", "q_hp"}) cols.emplace_back(name);
    return cols;
}

std::string format_double(double v) {
    char buf[64];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{}) throw Error("double formatting failed");
    return {buf, end};
}

void write_trace_csv(std::ostream& os, const Trace& trace) {
    const auto cols = trace_columns();
    for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
    os << '\n';
    std::string row;
    for (const auto& r : trace) {
        row = format_double(r.t);
        for (double v : r.state.to_array()) row += ',' + format_double(v);
        for (double v : {r.u.mdot_b, r.u.mdot_c}) row += ',' + format_double(v);
        for (double v : r.u.mdot_a) row += ',' + format_double(v);
        row += r.door_signal ? ",1" : ",0";
        row += r.lower_active ? ",1" : ",0";
        row += ',' + format_double(r.q_hp);
        os << row << '\n';
    }
}

void write_trace_csv(const std::string& path, const Trace& trace) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error(fmt::format("cannot open '{}' for writing", path));
    write_trace_csv(os, trace);
    if (!os) throw Error(fmt::format("write to '{}' failed", path));
}

Trace read_trace_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw ConfigError("trace is empty");
    const auto cols = trace_columns();
    const auto header = split(line);
    if (header.size() != cols.size() ||
        !std::equal(header.begin(), header.end(), cols.begin())) {
        throw ConfigError(fmt::format("unexpected trace header '{}'", line));
    }
    Trace trace;
    std::size_t line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto f = split(line);
        if (f.size() != kColumns) {
            throw ConfigError(fmt::format("trace line {} has {} fields, expected {}", line_no,
                                          f.size(), kColumns));
        }
        TraceRecord r;
        std::size_t c = 0;
        r.t = parse_double(f[c], line_no, c);
        ++c;
        PlantState::Array a{};
        for (auto& v : a) {
            v = parse_double(f[c], line_no, c);
            ++c;
        }
        r.state = PlantState::from_array(a);
        r.u.mdot_b = parse_double(f[c], line_no, c);
        ++c;
        r.u.mdot_c = parse_double(f[c], line_no, c);
        ++c;
        for (auto& v : r.u.mdot_a) {
            v = parse_double(f[c], line_no, c);
            ++c;
        }
        r.door_signal = parse_flag(f[c], line_no, c);
        ++c;
        r.lower_active = parse_flag(f[c], line_no, c);
        ++c;
        r.q_hp = parse_double(f[c], line_no, c);
        if (!trace.empty() && !(r.t > trace.back().t)) {
            throw ConfigError(fmt::format("trace line {}: time {} is not increasing", line_no, r.t));
        }
        trace.push_back(r);
    }
    return trace;
}

Trace read_trace_csv(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError(fmt::format("cannot open trace '{}'", path));
    return read_trace_csv(is);
}

}  // namespace itms
