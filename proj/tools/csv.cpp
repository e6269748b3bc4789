#include "csv.hpp"

#include "ipop/errors.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace ipop::cli {

namespace {

constexpr const char* kSampleHeader = "module_id,current_a,p_in_w,p_out_w";

std::string location(const std::string& name, std::size_t line) {
    return name + ":" + std::to_string(line);
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream iss(line);
    while (std::getline(iss, field, ',')) {
        fields.push_back(field);
    }
    if (!line.empty() && line.back() == ',') {
        fields.emplace_back();
    }
    return fields;
}

double parse_number(const std::string& text, const std::string& name, std::size_t line,
                    const char* column) {
    const char* begin = text.c_str();
    char* end = nullptr;
    const double value = std::strtod(begin, &end);
    if (end == begin || *end != '\0') {
        throw InputError(location(name, line) + ": column " + column + " is not a number: '" +
                         text + "'");
    }
    return value;
}

/// Shortest decimal form that survives a parse round-trip at the CLI's
/// 9-significant-digit budget.
std::string format_number(double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", value);
    return buf;
}

} // namespace

std::vector<EfficiencySample> parse_sample_csv(std::istream& in, const std::string& name) {
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) {
        throw InputError(name + ": empty file");
    }
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    if (line != kSampleHeader) {
        throw InputError(location(name, line_no) + ": header must be exactly '" +
                         kSampleHeader + "', got '" + line + "'");
    }

    std::vector<EfficiencySample> samples;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        const std::vector<std::string> fields = split_fields(line);
        if (fields.size() != 4) {
            throw InputError(location(name, line_no) + ": expected 4 fields, got " +
                             std::to_string(fields.size()));
        }
        EfficiencySample s;
        s.module_id = fields[0];
        if (s.module_id.empty()) {
            throw InputError(location(name, line_no) + ": module_id must not be empty");
        }
        s.current = parse_number(fields[1], name, line_no, "current_a");
        s.p_in = parse_number(fields[2], name, line_no, "p_in_w");
        s.p_out = parse_number(fields[3], name, line_no, "p_out_w");
        validate_sample(s, location(name, line_no));
        samples.push_back(std::move(s));
    }
    if (samples.empty()) {
        throw InputError(name + ": no data rows");
    }
    return samples;
}

std::vector<EfficiencySample> read_sample_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open sample file '" + path + "'");
    }
    return parse_sample_csv(in, path);
}

void write_sample_csv(std::ostream& out, const std::vector<EfficiencySample>& samples) {
    out << kSampleHeader << '\n';
    for (const EfficiencySample& s : samples) {
        out << s.module_id << ',' << format_number(s.current) << ',' << format_number(s.p_in)
            << ',' << format_number(s.p_out) << '\n';
    }
}

void write_schedule_csv(std::ostream& out, const DispatchSchedule& schedule) {
    out << "p_lo_w,p_hi_w,active_modules,example_demand_w,eta\n";
    for (const ScheduleRange& r : schedule.ranges) {
        out << format_number(r.p_lo) << ',' << format_number(r.p_hi) << ',';
        if (r.feasible) {
            out << r.active.label() << ',' << format_number(r.example_demand) << ','
                << format_number(r.eta);
        } else {
            out << ",,";
        }
        out << '\n';
    }
}

} // namespace ipop::cli
