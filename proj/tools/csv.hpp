#pragma once

#include "ipop/dispatch.hpp"
#include "ipop/profile.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace ipop::cli {

/// Parses a sample CSV stream. `name` labels the stream in error messages,
/// which carry 1-based line numbers. Requires the exact header
/// `module_id,current_a,p_in_w,p_out_w` and at least one data row.
std::vector<EfficiencySample> parse_sample_csv(std::istream& in, const std::string& name);

/// File wrapper around parse_sample_csv; InputError when unreadable.
std::vector<EfficiencySample> read_sample_csv(const std::string& path);

void write_sample_csv(std::ostream& out, const std::vector<EfficiencySample>& samples);

/// Schedule rows as `p_lo_w,p_hi_w,active_modules,example_demand_w,eta`.
/// Infeasible gaps keep their power bounds and leave the other fields empty.
void write_schedule_csv(std::ostream& out, const DispatchSchedule& schedule);

} // namespace ipop::cli
