#include "commands.hpp"

#include "csv.hpp"
#include "synth.hpp"

#include "ipop/annealer.hpp"
#include "ipop/curvefit.hpp"
#include "ipop/dispatch.hpp"
#include "ipop/errors.hpp"
#include "ipop/log.hpp"
#include "ipop/oracle.hpp"
#include "ipop/profile.hpp"
#include "ipop/tps.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>

namespace ipop::cli {

namespace {

using nlohmann::json;

double round_sig9(double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", value);
    return std::strtod(buf, nullptr);
}

/// CLI surfaces serialize floating-point numbers at 9 significant digits.
json round_numbers(json j) {
    if (j.is_number_float()) {
        return round_sig9(j.get<double>());
    }
    if (j.is_array() || j.is_object()) {
        for (auto& item : j.items()) {
            item.value() = round_numbers(item.value());
        }
    }
    return j;
}

/// FNV-1a over the argument vector and every input file's bytes, so the
/// digest pins down everything the run depended on.
class Digest {
public:
    void feed(std::string_view bytes) {
        for (const char c : bytes) {
            hash_ ^= static_cast<unsigned char>(c);
            hash_ *= 1099511628211ull;
        }
        feed_byte('\0');
    }

    void feed_file(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) {
            return;
        }
        std::ostringstream buffer;
        buffer << in.rdbuf();
        feed(buffer.str());
    }

    [[nodiscard]] std::string hex() const {
        char buf[20];
        std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash_));
        return buf;
    }

private:
    void feed_byte(char c) {
        hash_ ^= static_cast<unsigned char>(c);
        hash_ *= 1099511628211ull;
    }

    std::uint64_t hash_ = 14695981039346656037ull;
};

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open '" + path + "'");
    }
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw InputError("invalid JSON in '" + path + "': " + e.what());
    }
}

std::vector<ModuleProfile> load_profiles(const std::vector<std::string>& paths) {
    if (paths.empty()) {
        throw InputError("at least one profile file is required");
    }
    std::vector<ModuleProfile> profiles;
    std::set<std::string> ids;
    profiles.reserve(paths.size());
    for (const std::string& path : paths) {
        ModuleProfile p = ModuleProfile::from_json(read_json_file(path));
        if (!ids.insert(p.module_id()).second) {
            throw InputError("duplicate module id '" + p.module_id() + "' across profile files");
        }
        profiles.push_back(std::move(p));
    }
    return profiles;
}

ActiveSet full_set(const std::vector<ModuleProfile>& profiles) {
    ActiveSet set;
    set.module_ids.reserve(profiles.size());
    for (const ModuleProfile& p : profiles) {
        set.module_ids.push_back(p.module_id());
    }
    return set;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw InputError("cannot write '" + path + "'");
    }
    out << content;
    if (!out) {
        throw InputError("failed while writing '" + path + "'");
    }
}

json fit_report_json(const FitReport& r) {
    return json{{"degree", r.degree},
                {"rmse", r.rmse},
                {"r_squared", r.r_squared},
                {"max_residual", r.max_residual},
                {"sample_count", r.sample_count}};
}

json active_set_json(const ActiveSet& set) {
    return json(set.module_ids);
}

struct FitOptions {
    std::string samples_path;
    int degree = 3;
};

json run_fit(const FitOptions& opt, const std::string& out_dir,
             std::vector<std::string>& input_files) {
    input_files.push_back(opt.samples_path);
    const std::vector<EfficiencySample> samples = read_sample_csv(opt.samples_path);

    // Group per module, keeping first-appearance order.
    std::vector<std::pair<std::string, std::vector<EfficiencySample>>> groups;
    for (const EfficiencySample& s : samples) {
        auto it = std::find_if(groups.begin(), groups.end(),
                               [&](const auto& g) { return g.first == s.module_id; });
        if (it == groups.end()) {
            groups.push_back({s.module_id, {}});
            it = std::prev(groups.end());
        }
        it->second.push_back(s);
    }

    const std::filesystem::path dir = out_dir.empty() ? "." : out_dir;
    std::filesystem::create_directories(dir);

    json profiles = json::array();
    for (const auto& [id, group] : groups) {
        ProfileFit fit = fit_profile_report(group, opt.degree);
        const std::filesystem::path path = dir / (id + ".profile.json");
        write_text_file(path.string(), round_numbers(fit.profile.to_json()).dump(2) + "\n");
        profiles.push_back(json{{"module_id", id},
                                {"path", path.string()},
                                {"pin_fit", fit_report_json(fit.pin_report)},
                                {"pout_fit", fit_report_json(fit.pout_report)}});
    }
    return json{{"degree", opt.degree}, {"profiles", std::move(profiles)}};
}

struct DemandOptions {
    std::vector<std::string> profile_paths;
    double demand = 0.0;
};

json run_dispatch(const DemandOptions& opt, std::vector<std::string>& input_files) {
    input_files.insert(input_files.end(), opt.profile_paths.begin(), opt.profile_paths.end());
    const std::vector<ModuleProfile> profiles = load_profiles(opt.profile_paths);
    const ActiveSet active = full_set(profiles);
    const Allocation alloc = solve_equal_incremental(active, opt.demand, profiles);
    json outputs = alloc.to_json();
    outputs["demand_w"] = opt.demand;
    outputs["active_modules"] = active_set_json(active);
    return outputs;
}

struct ScheduleOptions {
    std::vector<std::string> profile_paths;
    double p_min = 0.0;
    double p_max = 0.0;
    double step = 1.0;
    bool exhaustive = false;
};

json schedule_json(const DispatchSchedule& schedule) {
    json ranges = json::array();
    for (const ScheduleRange& r : schedule.ranges) {
        json row{{"p_lo_w", r.p_lo}, {"p_hi_w", r.p_hi}, {"feasible", r.feasible}};
        if (r.feasible) {
            row["active_modules"] = active_set_json(r.active);
            row["example_demand_w"] = r.example_demand;
            row["eta"] = r.eta;
        }
        ranges.push_back(std::move(row));
    }
    json switches = json::array();
    for (const SwitchingPoint& sp : schedule.switching_points) {
        switches.push_back(json{{"p_total_w", sp.p_total},
                                {"set_below", active_set_json(sp.set_below)},
                                {"set_above", active_set_json(sp.set_above)},
                                {"eta_at_switch", sp.eta_at_switch}});
    }
    return json{{"ranges", std::move(ranges)}, {"switching_points", std::move(switches)}};
}

json run_schedule(const ScheduleOptions& opt, const std::string& out_path,
                  std::vector<std::string>& input_files) {
    input_files.insert(input_files.end(), opt.profile_paths.begin(), opt.profile_paths.end());
    const std::vector<ModuleProfile> profiles = load_profiles(opt.profile_paths);
    const DispatchSchedule schedule =
        build_dispatch_schedule(profiles, opt.p_min, opt.p_max, opt.step, opt.exhaustive);
    json outputs = schedule_json(schedule);
    if (!out_path.empty()) {
        std::ostringstream csv;
        write_schedule_csv(csv, schedule);
        write_text_file(out_path, csv.str());
        outputs["csv_path"] = out_path;
    }
    return outputs;
}

struct AnnealOptions {
    std::vector<std::string> profile_paths;
    double demand = 0.0;
    std::string config_path;
};

json run_anneal(const AnnealOptions& opt, const std::optional<std::uint64_t>& seed_override,
                std::vector<std::string>& input_files, std::optional<std::uint64_t>& seed_used) {
    input_files.insert(input_files.end(), opt.profile_paths.begin(), opt.profile_paths.end());
    const std::vector<ModuleProfile> profiles = load_profiles(opt.profile_paths);

    AnnealerConfig config;
    std::string config_source = "defaults";
    if (!opt.config_path.empty()) {
        if (std::filesystem::exists(opt.config_path)) {
            input_files.push_back(opt.config_path);
            config = AnnealerConfig::from_json(read_json_file(opt.config_path));
            config_source = opt.config_path;
        } else {
            log_warn("config file '" + opt.config_path + "' not found; using defaults");
            config_source = "defaults (config file '" + opt.config_path + "' not found)";
        }
    }
    if (seed_override) {
        config.seed = *seed_override;
    }
    seed_used = config.seed;

    const ActiveSet active = full_set(profiles);
    const Allocation alloc = anneal(profiles, active, opt.demand, config);
    return json{{"demand_w", opt.demand},
                {"active_modules", active_set_json(active)},
                {"config", config.to_json()},
                {"config_source", config_source},
                {"allocation", alloc.to_json()}};
}

struct CompareOptions {
    std::vector<std::string> profile_paths;
    double demand = 0.0;
    bool exhaustive = false;
};

json run_compare(const CompareOptions& opt, std::vector<std::string>& input_files) {
    input_files.insert(input_files.end(), opt.profile_paths.begin(), opt.profile_paths.end());
    const std::vector<ModuleProfile> profiles = load_profiles(opt.profile_paths);

    // Control group: every module carries demand/m.
    const double share = opt.demand / static_cast<double>(profiles.size());
    json equal_split;
    std::optional<double> eta_equal;
    std::string infeasible_reason;
    for (const ModuleProfile& p : profiles) {
        if (share < p.p_out_min() || share > p.p_out_max()) {
            std::ostringstream oss;
            oss << "equal share " << share << " W is outside module '" << p.module_id()
                << "' bounds [" << p.p_out_min() << ", " << p.p_out_max() << "] W";
            infeasible_reason = oss.str();
            break;
        }
    }
    if (infeasible_reason.empty()) {
        double total_pin = 0.0;
        for (const ModuleProfile& p : profiles) {
            total_pin += p.eval_pin(p.invert_pout(share));
        }
        eta_equal = opt.demand / total_pin;
        equal_split = json{{"feasible", true}, {"p_out_each_w", share}, {"eta", *eta_equal}};
    } else {
        equal_split = json{{"feasible", false}, {"reason", infeasible_reason}};
    }

    const auto best = best_allocation(profiles, opt.demand, opt.exhaustive);
    if (!best) {
        std::ostringstream oss;
        oss << "no candidate module combination can serve demand " << opt.demand << " W";
        throw FeasibilityError(oss.str());
    }

    json outputs{{"demand_w", opt.demand},
                 {"equal_split", std::move(equal_split)},
                 {"optimized", json{{"active_modules", active_set_json(best->first)},
                                    {"allocation", best->second.to_json()}}}};
    if (eta_equal) {
        outputs["improvement_pct_points"] = (best->second.eta - *eta_equal) * 100.0;
    } else {
        outputs["improvement_pct_points"] = nullptr;
    }
    return outputs;
}

struct TpsOptions {
    double k = 1.0;
    double p = 0.0;
};

json run_tps(const TpsOptions& opt) {
    const PhaseShiftSet shifts = phase_shifts(OperatingPoint{opt.k, opt.p});
    return json{{"k", opt.k},
                {"p", opt.p},
                {"regime", to_string(shifts.regime)},
                {"mode", static_cast<int>(shifts.mode)},
                {"d1", shifts.d1},
                {"d2", shifts.d2},
                {"d3", shifts.d3},
                {"i_m_pu", current_stress(opt.k, shifts)}};
}

struct SynthOptions {
    int points = 26;
};

std::optional<json> run_synth(const SynthOptions& opt, const std::string& out_path,
                              std::ostream& out) {
    const std::vector<EfficiencySample> samples = synth_samples(opt.points);
    std::ostringstream csv;
    write_sample_csv(csv, samples);
    if (out_path.empty()) {
        out << csv.str();
        return std::nullopt;
    }
    write_text_file(out_path, csv.str());
    json modules = json::array();
    for (const SynthModule& m : synth_fleet()) {
        modules.push_back(json{{"module_id", m.id},
                               {"a0", m.a0},
                               {"a2", m.a2},
                               {"p_min_w", m.p_min},
                               {"p_max_w", m.p_max}});
    }
    return json{{"path", out_path},
                {"bus_voltage_v", kSynthBusVoltage},
                {"modules", std::move(modules)},
                {"samples", samples.size()}};
}

struct OracleOptions {
    std::vector<std::string> profile_paths;
    double demand = 0.0;
    double step = 0.1;
    bool combinations = false;
};

json run_oracle(const OracleOptions& opt, std::vector<std::string>& input_files) {
    input_files.insert(input_files.end(), opt.profile_paths.begin(), opt.profile_paths.end());
    const std::vector<ModuleProfile> profiles = load_profiles(opt.profile_paths);
    const OracleResult result =
        opt.combinations ? enumerate_combinations(profiles, opt.demand, opt.step)
                         : grid_search(full_set(profiles), opt.demand, opt.step, profiles);
    return json{{"demand_w", opt.demand},
                {"step_w", result.grid_step},
                {"evaluations", result.evaluations},
                {"active_modules", active_set_json(result.active_set)},
                {"allocation", result.best.to_json()}};
}

std::string join_args(const std::vector<std::string>& args) {
    std::string joined = "ipop-dispatch";
    for (const std::string& a : args) {
        joined += ' ';
        joined += a;
    }
    return joined;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Efficiency-optimal load dispatch for parallel converter modules"};
    app.name("ipop-dispatch");
    app.require_subcommand(1);

    std::optional<std::uint64_t> seed;
    std::string out_path;
    bool quiet = false;
    app.add_option("--seed", seed, "Override the random seed (anneal)");
    app.add_option("--out", out_path,
                   "Output path: directory for fit, CSV file for schedule/synth, JSON copy "
                   "otherwise");
    app.add_flag("--quiet", quiet, "Print only the command outputs, without the run report");

    FitOptions fit_opt;
    CLI::App* fit_cmd = app.add_subcommand("fit", "Fit module power models from a sample CSV");
    fit_cmd->add_option("--samples", fit_opt.samples_path, "Sample CSV file")->required();
    fit_cmd->add_option("--degree", fit_opt.degree, "Polynomial degree, at least 3")
        ->default_val(3);

    DemandOptions dispatch_opt;
    CLI::App* dispatch_cmd =
        app.add_subcommand("dispatch", "Optimal power split across the given modules");
    dispatch_cmd->add_option("--profiles", dispatch_opt.profile_paths, "Module profile JSON files")
        ->required();
    dispatch_cmd->add_option("--demand", dispatch_opt.demand, "Total output power, W")
        ->required();

    ScheduleOptions schedule_opt;
    CLI::App* schedule_cmd = app.add_subcommand(
        "schedule", "Best module combination per demand range, with switching points");
    schedule_cmd
        ->add_option("--profiles", schedule_opt.profile_paths, "Module profile JSON files")
        ->required();
    schedule_cmd->add_option("--p-min", schedule_opt.p_min, "Lowest demand, W")->required();
    schedule_cmd->add_option("--p-max", schedule_opt.p_max, "Highest demand, W")->required();
    schedule_cmd->add_option("--step", schedule_opt.step, "Demand grid step, W")->default_val(1.0);
    schedule_cmd->add_flag("--exhaustive", schedule_opt.exhaustive,
                           "Evaluate every subset instead of priority-list prefixes");

    AnnealOptions anneal_opt;
    CLI::App* anneal_cmd =
        app.add_subcommand("anneal", "Simulated-annealing power split across the given modules");
    anneal_cmd->add_option("--profiles", anneal_opt.profile_paths, "Module profile JSON files")
        ->required();
    anneal_cmd->add_option("--demand", anneal_opt.demand, "Total output power, W")->required();
    anneal_cmd->add_option("--config", anneal_opt.config_path,
                           "Annealer config JSON; defaults are used when the file is absent");

    CompareOptions compare_opt;
    CLI::App* compare_cmd = app.add_subcommand(
        "compare", "Optimized dispatch versus the equal-split control policy");
    compare_cmd->add_option("--profiles", compare_opt.profile_paths, "Module profile JSON files")
        ->required();
    compare_cmd->add_option("--demand", compare_opt.demand, "Total output power, W")->required();
    compare_cmd->add_flag("--exhaustive", compare_opt.exhaustive,
                          "Consider every subset instead of priority-list prefixes");

    TpsOptions tps_opt;
    CLI::App* tps_cmd = app.add_subcommand(
        "tps", "Minimum-current-stress phase shifts for a DAB operating point");
    tps_cmd->add_option("--k", tps_opt.k, "Voltage gain n*u_in/u_out")->required();
    tps_cmd->add_option("--p", tps_opt.p, "Per-unit power in [0, 1]")->required();

    SynthOptions synth_opt;
    CLI::App* synth_cmd = app.add_subcommand(
        "synth", "Emit the pinned two-module demonstration sample CSV");
    synth_cmd->add_option("--points", synth_opt.points, "Samples per module")->default_val(26);

    OracleOptions oracle_opt;
    CLI::App* oracle_cmd =
        app.add_subcommand("oracle", "Brute-force grid search (debugging aid)");
    oracle_cmd->group(""); // hidden
    oracle_cmd->add_option("--profiles", oracle_opt.profile_paths, "Module profile JSON files")
        ->required();
    oracle_cmd->add_option("--demand", oracle_opt.demand, "Total output power, W")->required();
    oracle_cmd->add_option("--step", oracle_opt.step, "Grid step, W")->default_val(0.1);
    oracle_cmd->add_flag("--combinations", oracle_opt.combinations,
                         "Search every feasible subset, not just the full set");

    // Let --seed/--out/--quiet appear after the subcommand name as well.
    for (CLI::App* sub : {fit_cmd, dispatch_cmd, schedule_cmd, anneal_cmd, compare_cmd, tps_cmd,
                          synth_cmd, oracle_cmd}) {
        sub->fallthrough();
    }

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    const auto started = std::chrono::steady_clock::now();
    try {
        std::vector<std::string> input_files;
        std::optional<std::uint64_t> seed_used = seed;
        std::optional<json> outputs;

        if (fit_cmd->parsed()) {
            outputs = run_fit(fit_opt, out_path, input_files);
        } else if (dispatch_cmd->parsed()) {
            outputs = run_dispatch(dispatch_opt, input_files);
        } else if (schedule_cmd->parsed()) {
            outputs = run_schedule(schedule_opt, out_path, input_files);
        } else if (anneal_cmd->parsed()) {
            outputs = run_anneal(anneal_opt, seed, input_files, seed_used);
        } else if (compare_cmd->parsed()) {
            outputs = run_compare(compare_opt, input_files);
        } else if (tps_cmd->parsed()) {
            outputs = run_tps(tps_opt);
        } else if (synth_cmd->parsed()) {
            outputs = run_synth(synth_opt, out_path, out);
            if (!outputs) {
                return 0; // raw CSV already on stdout
            }
        } else if (oracle_cmd->parsed()) {
            outputs = run_oracle(oracle_opt, input_files);
        }

        const json rounded = round_numbers(*outputs);
        if (!out_path.empty() && !fit_cmd->parsed() && !schedule_cmd->parsed() &&
            !synth_cmd->parsed()) {
            write_text_file(out_path, rounded.dump(2) + "\n");
        }
        if (quiet) {
            out << rounded.dump(2) << '\n';
        } else {
            Digest digest;
            digest.feed(join_args(args));
            for (const std::string& path : input_files) {
                digest.feed_file(path);
            }
            const double ms = std::chrono::duration<double, std::milli>(
                                  std::chrono::steady_clock::now() - started)
                                  .count();
            json envelope{{"command", join_args(args)},
                          {"inputs_digest", digest.hex()},
                          {"seed", seed_used ? json(*seed_used) : json()},
                          {"outputs", rounded},
                          {"timing_ms", ms}};
            out << envelope.dump(2) << '\n';
        }
        return 0;
    } catch (const FeasibilityError& e) {
        err << "error: " << e.what() << '\n';
        return 3;
    } catch (const InputError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const RangeError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const CapabilityError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return 4;
    }
}

} // namespace ipop::cli
