#include "ipop/dispatch.hpp"

#include "ipop/errors.hpp"
#include "ipop/log.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>
#include <utility>

namespace ipop {

namespace {

constexpr int kRootScanIntervals = 256;
constexpr int kPriceBisectionIters = 200;

struct Response {
    double current = 0.0;
    double p_out = 0.0;
    int bound = 0; ///< -1 at p_out_min, +1 at p_out_max, 0 interior
};

std::vector<const ModuleProfile*> collect(const ActiveSet& active,
                                          std::span<const ModuleProfile> profiles) {
    if (active.module_ids.empty()) {
        throw InputError("active set must not be empty");
    }
    std::set<std::string> seen;
    std::vector<const ModuleProfile*> out;
    out.reserve(active.module_ids.size());
    for (const std::string& id : active.module_ids) {
        if (!seen.insert(id).second) {
            throw InputError("active set repeats module id '" + id + "'");
        }
        const ModuleProfile* match = nullptr;
        for (const ModuleProfile& p : profiles) {
            if (p.module_id() == id) {
                match = &p;
                break;
            }
        }
        if (match == nullptr) {
            throw InputError("active set names unknown module id '" + id + "'");
        }
        out.push_back(match);
    }
    return out;
}

double eval_coeffs(const std::vector<double>& coeffs, double x) {
    double acc = 0.0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) {
        acc = acc * x + *it;
    }
    return acc;
}

/// Roots of pin'(I) - mu*pout'(I) inside [lo, hi], by sign scan + bisection.
std::vector<double> stationary_currents(const ModuleProfile& m, double mu, double lo, double hi) {
    const std::vector<double> dpin = m.pin_poly().derivative().coefficients();
    const std::vector<double> dpout = m.pout_poly().derivative().coefficients();
    std::vector<double> diff(std::max(dpin.size(), dpout.size()), 0.0);
    for (std::size_t k = 0; k < dpin.size(); ++k) diff[k] += dpin[k];
    for (std::size_t k = 0; k < dpout.size(); ++k) diff[k] -= mu * dpout[k];

    std::vector<double> roots;
    const double width = (hi - lo) / kRootScanIntervals;
    double x_prev = lo;
    double f_prev = eval_coeffs(diff, lo);
    for (int k = 1; k <= kRootScanIntervals; ++k) {
        const double x = (k == kRootScanIntervals) ? hi : lo + k * width;
        const double f = eval_coeffs(diff, x);
        if (f_prev == 0.0) {
            roots.push_back(x_prev);
        } else if (f_prev * f < 0.0) {
            double a = x_prev, b = x, fa = f_prev;
            for (int it = 0; it < 80; ++it) {
                const double mid = 0.5 * (a + b);
                const double fm = eval_coeffs(diff, mid);
                if (fm == 0.0) {
                    a = b = mid;
                    break;
                }
                if ((fa < 0.0) == (fm < 0.0)) {
                    a = mid;
                    fa = fm;
                } else {
                    b = mid;
                }
            }
            roots.push_back(0.5 * (a + b));
        }
        x_prev = x;
        f_prev = f;
    }
    return roots;
}

/// Minimizer of pin(I) - mu*pout(I) over the operating range: the module's
/// best operating point when marginal input power is priced at mu.
Response best_response(const ModuleProfile& m, double mu) {
    const double lo = m.i_min();
    const double hi = m.i_max();
    auto cost = [&](double c) { return m.pin_poly()(c) - mu * m.pout_poly()(c); };

    double best_c = lo;
    double best_f = cost(lo);
    const double f_hi = cost(hi);
    if (f_hi < best_f) {
        best_c = hi;
        best_f = f_hi;
    }
    for (double r : stationary_currents(m, mu, lo, hi)) {
        const double f = cost(r);
        if (f < best_f || (f == best_f && r < best_c)) {
            best_c = r;
            best_f = f;
        }
    }

    Response resp;
    resp.current = best_c;
    resp.p_out = m.pout_poly()(best_c);
    const double span = hi - lo;
    if (best_c <= lo + 1e-12 * span) {
        resp.current = lo;
        resp.p_out = m.p_out_min();
        resp.bound = -1;
    } else if (best_c >= hi - 1e-12 * span) {
        resp.current = hi;
        resp.p_out = m.p_out_max();
        resp.bound = +1;
    }
    return resp;
}

/// Price bracket wide enough that the fleet saturates at both ends,
/// seeded from the marginal input/output slope extremes.
std::pair<double, double> price_bracket(const std::vector<const ModuleProfile*>& mods) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const ModuleProfile* m : mods) {
        const double a = m->i_min();
        const double b = m->i_max();
        for (int k = 0; k <= kRootScanIntervals; ++k) {
            const double c = a + (b - a) * static_cast<double>(k) / kRootScanIntervals;
            const double dpo = m->pout_poly().derivative_at(c);
            const double dpi = m->pin_poly().derivative_at(c);
            if (dpo > 0.0) {
                const double mu = dpi / dpo;
                lo = std::min(lo, mu);
                hi = std::max(hi, mu);
            }
        }
    }
    if (!std::isfinite(lo) || !std::isfinite(hi)) {
        throw SolverError("cannot bracket the marginal price; output power slope vanishes");
    }
    const double pad = 1e-6 + 0.1 * (std::abs(lo) + std::abs(hi));
    return {lo - pad, hi + pad};
}

struct WaterfillResult {
    std::vector<Response> responses;
    double mu = 0.0;
};

/// Equal-marginal solve over the given modules: bisect the price mu until
/// the summed best responses meet the demand.
WaterfillResult waterfill(const std::vector<const ModuleProfile*>& mods, double demand) {
    auto [mu_lo, mu_hi] = price_bracket(mods);
    auto total = [&](double mu) {
        double sum = 0.0;
        for (const ModuleProfile* m : mods) {
            sum += best_response(*m, mu).p_out;
        }
        return sum;
    };
    for (int guard = 0; guard < 64 && total(mu_lo) > demand; ++guard) {
        mu_lo -= std::max(1.0, std::abs(mu_lo));
    }
    for (int guard = 0; guard < 64 && total(mu_hi) < demand; ++guard) {
        mu_hi += std::max(1.0, std::abs(mu_hi));
    }

    for (int it = 0; it < kPriceBisectionIters; ++it) {
        const double mid = 0.5 * (mu_lo + mu_hi);
        if (total(mid) < demand) {
            mu_lo = mid;
        } else {
            mu_hi = mid;
        }
        if (mu_hi - mu_lo <= 1e-15 * std::max(1.0, std::abs(mu_hi))) {
            break;
        }
    }

    WaterfillResult result;
    result.mu = 0.5 * (mu_lo + mu_hi);
    result.responses.reserve(mods.size());
    for (const ModuleProfile* m : mods) {
        result.responses.push_back(best_response(*m, result.mu));
    }
    return result;
}

Allocation assemble(const std::vector<const ModuleProfile*>& mods,
                    const std::vector<double>& p_out, const std::vector<bool>& clamped) {
    Allocation alloc;
    alloc.modules.reserve(mods.size());
    for (std::size_t i = 0; i < mods.size(); ++i) {
        ModuleAllocation ma;
        ma.module_id = mods[i]->module_id();
        ma.p_out = p_out[i];
        ma.current = mods[i]->invert_pout(p_out[i]);
        ma.p_in = mods[i]->eval_pin(ma.current);
        ma.clamped = clamped[i];
        alloc.total_p_out += ma.p_out;
        alloc.total_p_in += ma.p_in;
        alloc.modules.push_back(std::move(ma));
    }
    alloc.eta = alloc.total_p_out / alloc.total_p_in;
    return alloc;
}

std::string feasibility_message(const ActiveSet& active, double demand, double lo, double hi) {
    std::ostringstream oss;
    oss << "demand " << demand << " W is outside the feasible range [" << lo << ", " << hi
        << "] W of active set {" << active.label() << "}";
    if (demand < lo) {
        oss << "; the sum of module minimum output powers is " << lo << " W";
    } else {
        oss << "; the sum of module maximum output powers is " << hi << " W";
    }
    return oss.str();
}

} // namespace

bool ActiveSet::contains(const std::string& id) const {
    return std::find(module_ids.begin(), module_ids.end(), id) != module_ids.end();
}

std::string ActiveSet::label() const {
    std::string out;
    for (std::size_t i = 0; i < module_ids.size(); ++i) {
        if (i > 0) {
            out += '+';
        }
        out += module_ids[i];
    }
    return out;
}

nlohmann::json Allocation::to_json() const {
    nlohmann::json mods = nlohmann::json::array();
    for (const ModuleAllocation& m : modules) {
        mods.push_back({{"module_id", m.module_id},
                        {"p_out_w", m.p_out},
                        {"p_in_w", m.p_in},
                        {"current_a", m.current},
                        {"clamped", m.clamped}});
    }
    return nlohmann::json{{"total_p_out_w", total_p_out},
                          {"total_p_in_w", total_p_in},
                          {"eta", eta},
                          {"modules", std::move(mods)}};
}

PriorityList build_priority_list(std::span<const ModuleProfile> profiles) {
    if (profiles.empty()) {
        throw InputError("priority list needs at least one profile");
    }
    struct Keyed {
        PriorityEntry entry;
        double no_load_pin;
    };
    std::vector<Keyed> keyed;
    keyed.reserve(profiles.size());
    for (const ModuleProfile& p : profiles) {
        const PeakEfficiency peak = p.peak_efficiency();
        keyed.push_back({{p.module_id(), peak.eta, p.eval_pout(peak.current)},
                         p.eval_pin(p.i_min())});
    }
    std::stable_sort(keyed.begin(), keyed.end(), [](const Keyed& a, const Keyed& b) {
        if (a.entry.peak_eta != b.entry.peak_eta) return a.entry.peak_eta > b.entry.peak_eta;
        if (a.no_load_pin != b.no_load_pin) return a.no_load_pin < b.no_load_pin;
        return a.entry.module_id < b.entry.module_id;
    });

    PriorityList list;
    list.entries.reserve(keyed.size());
    for (Keyed& k : keyed) {
        list.entries.push_back(std::move(k.entry));
    }
    return list;
}

std::pair<double, double> feasible_range(const ActiveSet& active,
                                         std::span<const ModuleProfile> profiles) {
    double lo = 0.0;
    double hi = 0.0;
    for (const ModuleProfile* m : collect(active, profiles)) {
        lo += m->p_out_min();
        hi += m->p_out_max();
    }
    return {lo, hi};
}

Allocation solve_equal_incremental(const ActiveSet& active, double demand,
                                   std::span<const ModuleProfile> profiles) {
    const std::vector<const ModuleProfile*> mods = collect(active, profiles);
    if (!std::isfinite(demand)) {
        throw InputError("demand must be finite");
    }

    double sum_min = 0.0;
    double sum_max = 0.0;
    for (const ModuleProfile* m : mods) {
        sum_min += m->p_out_min();
        sum_max += m->p_out_max();
    }
    const double feas_tol = 1e-9 * std::max(1.0, sum_max);
    if (demand < sum_min - feas_tol || demand > sum_max + feas_tol) {
        throw FeasibilityError(feasibility_message(active, demand, sum_min, sum_max));
    }
    const double target = std::clamp(demand, sum_min, sum_max);

    const std::size_t m_count = mods.size();
    std::vector<double> p_out(m_count, 0.0);
    std::vector<bool> clamped(m_count, false);
    std::vector<bool> fixed(m_count, false);
    double fixed_power = 0.0;

    // KKT clamping loop: solve the free set, pin every module the solve
    // leaves at a bound, re-solve the remainder on the reduced demand.
    for (std::size_t pass = 0; pass <= m_count; ++pass) {
        std::vector<const ModuleProfile*> free_mods;
        std::vector<std::size_t> free_idx;
        for (std::size_t i = 0; i < m_count; ++i) {
            if (!fixed[i]) {
                free_mods.push_back(mods[i]);
                free_idx.push_back(i);
            }
        }
        if (free_mods.empty()) {
            if (std::abs(fixed_power - target) > 1e-6 * std::max(1.0, target)) {
                throw SolverError("all modules clamped but bounds do not meet the demand");
            }
            break;
        }

        const double remainder = target - fixed_power;
        const WaterfillResult wf = waterfill(free_mods, remainder);

        bool new_clamp = false;
        for (std::size_t j = 0; j < free_mods.size(); ++j) {
            const std::size_t i = free_idx[j];
            p_out[i] = wf.responses[j].p_out;
            if (wf.responses[j].bound != 0) {
                fixed[i] = true;
                clamped[i] = true;
                fixed_power += p_out[i];
                new_clamp = true;
            }
        }
        if (!new_clamp) {
            break;
        }
    }

    // Land the total exactly on the demand; the bisection residual is tiny,
    // so this moves one unclamped module by a negligible amount.
    double residual = target;
    for (double p : p_out) {
        residual -= p;
    }
    if (std::abs(residual) > 1e-9 * std::max(1.0, target)) {
        std::vector<std::size_t> order;
        for (std::size_t i = 0; i < m_count; ++i) {
            if (!clamped[i]) {
                order.push_back(i);
            }
        }
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            const double span_a = mods[a]->p_out_max() - mods[a]->p_out_min();
            const double span_b = mods[b]->p_out_max() - mods[b]->p_out_min();
            return span_a > span_b;
        });
        for (std::size_t i : order) {
            const double lo = mods[i]->p_out_min();
            const double hi = mods[i]->p_out_max();
            const double moved = std::clamp(p_out[i] + residual, lo, hi);
            residual -= moved - p_out[i];
            p_out[i] = moved;
            if (std::abs(residual) <= 1e-12 * std::max(1.0, target)) {
                break;
            }
        }
        if (std::abs(residual) > 1e-6 * std::max(1.0, target)) {
            throw SolverError("equal-incremental solve could not meet the demand exactly");
        }
    }

    return assemble(mods, p_out, clamped);
}

std::optional<SwitchingPoint> find_switching_point(const ActiveSet& set_a, const ActiveSet& set_b,
                                                   double p_lo, double p_hi,
                                                   std::span<const ModuleProfile> profiles) {
    if (!(p_lo < p_hi)) {
        throw InputError("switching-point bracket needs p_lo < p_hi");
    }
    for (const ActiveSet* set : {&set_a, &set_b}) {
        const auto [lo, hi] = feasible_range(*set, profiles);
        const double tol = 1e-9 * std::max(1.0, hi);
        if (p_lo < lo - tol || p_hi > hi + tol) {
            throw FeasibilityError("active set {" + set->label() +
                                   "} cannot serve the whole bracket [" + std::to_string(p_lo) +
                                   ", " + std::to_string(p_hi) + "] W (feasible [" +
                                   std::to_string(lo) + ", " + std::to_string(hi) + "] W)");
        }
    }

    auto gap = [&](double p) {
        return solve_equal_incremental(set_a, p, profiles).eta -
               solve_equal_incremental(set_b, p, profiles).eta;
    };
    double g_lo = gap(p_lo);
    double g_hi = gap(p_hi);
    if (g_lo * g_hi > 0.0) {
        return std::nullopt;
    }

    double lo = p_lo;
    double hi = p_hi;
    double mid = 0.5 * (lo + hi);
    double g_mid = gap(mid);
    for (int it = 0; it < 300 && hi - lo > 1e-9 * std::max(1.0, hi); ++it) {
        if (g_mid == 0.0) {
            break;
        }
        if ((g_lo < 0.0) == (g_mid < 0.0)) {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
        }
        mid = 0.5 * (lo + hi);
        g_mid = gap(mid);
    }
    if (std::abs(g_mid) >= 1e-8) {
        throw SolverError("switching-point bisection did not reach the efficiency-equality "
                          "tolerance; |gap| = " +
                          std::to_string(std::abs(g_mid)));
    }

    SwitchingPoint sp;
    sp.p_total = mid;
    const double eta_a = solve_equal_incremental(set_a, mid, profiles).eta;
    const double eta_b = solve_equal_incremental(set_b, mid, profiles).eta;
    sp.eta_at_switch = 0.5 * (eta_a + eta_b);
    const bool a_below = g_lo > 0.0; // set_a is the better set at low demand
    sp.set_below = a_below ? set_a : set_b;
    sp.set_above = a_below ? set_b : set_a;
    return sp;
}

namespace {

std::vector<ActiveSet> candidate_sets(std::span<const ModuleProfile> profiles, bool exhaustive) {
    std::vector<ActiveSet> candidates;
    if (exhaustive) {
        if (profiles.size() > 12) {
            throw CapabilityError("exhaustive candidate enumeration supports at most 12 modules; "
                                  "use the priority-list default");
        }
        const std::size_t n = profiles.size();
        for (std::size_t mask = 1; mask < (std::size_t{1} << n); ++mask) {
            ActiveSet set;
            for (std::size_t i = 0; i < n; ++i) {
                if (mask & (std::size_t{1} << i)) {
                    set.module_ids.push_back(profiles[i].module_id());
                }
            }
            candidates.push_back(std::move(set));
        }
        return candidates;
    }

    const PriorityList list = build_priority_list(profiles);
    for (const PriorityEntry& e : list.entries) {
        candidates.push_back(ActiveSet{{e.module_id}});
    }
    ActiveSet prefix;
    for (const PriorityEntry& e : list.entries) {
        prefix.module_ids.push_back(e.module_id);
        if (prefix.module_ids.size() >= 2) {
            candidates.push_back(prefix);
        }
    }
    return candidates;
}

} // namespace

std::optional<std::pair<ActiveSet, Allocation>> best_allocation(
    std::span<const ModuleProfile> profiles, double demand, bool exhaustive) {
    std::optional<std::pair<ActiveSet, Allocation>> best;
    for (const ActiveSet& set : candidate_sets(profiles, exhaustive)) {
        const auto [lo, hi] = feasible_range(set, profiles);
        if (demand < lo || demand > hi) {
            continue;
        }
        Allocation alloc = solve_equal_incremental(set, demand, profiles);
        if (!best || alloc.eta > best->second.eta) {
            best = {set, std::move(alloc)};
        }
    }
    return best;
}

DispatchSchedule build_dispatch_schedule(std::span<const ModuleProfile> profiles, double p_min,
                                         double p_max, double step, bool exhaustive) {
    if (!(p_min < p_max)) {
        throw InputError("schedule needs p_min < p_max");
    }
    if (!(step > 0.0)) {
        throw InputError("schedule needs step > 0");
    }

    std::vector<double> grid;
    for (double p = p_min; p < p_max; p += step) {
        grid.push_back(p);
    }
    grid.push_back(p_max);

    struct GridPoint {
        double demand;
        std::optional<std::pair<ActiveSet, Allocation>> winner;
    };
    std::vector<GridPoint> points;
    points.reserve(grid.size());
    for (double d : grid) {
        points.push_back({d, best_allocation(profiles, d, exhaustive)});
    }

    DispatchSchedule schedule;
    std::size_t i = 0;
    while (i < points.size()) {
        std::size_t j = i;
        const bool feasible = points[i].winner.has_value();
        while (j + 1 < points.size() && points[j + 1].winner.has_value() == feasible &&
               (!feasible ||
                points[j + 1].winner->first == points[i].winner->first)) {
            ++j;
        }

        ScheduleRange range;
        range.p_lo = points[i].demand;
        range.p_hi = points[j].demand;
        range.feasible = feasible;
        if (feasible) {
            const std::size_t mid = i + (j - i) / 2;
            range.active = points[i].winner->first;
            range.example_demand = points[mid].demand;
            range.eta = points[mid].winner->second.eta;
        } else {
            log_info("schedule: no candidate set can serve [" + std::to_string(range.p_lo) +
                     ", " + std::to_string(range.p_hi) + "] W");
        }
        schedule.ranges.push_back(std::move(range));
        i = j + 1;
    }

    // Refine boundaries between adjacent feasible ranges where both winners
    // can serve the bracket and their efficiency difference changes sign.
    for (std::size_t r = 0; r + 1 < schedule.ranges.size(); ++r) {
        ScheduleRange& below = schedule.ranges[r];
        ScheduleRange& above = schedule.ranges[r + 1];
        const double bracket_lo = below.p_hi;
        const double bracket_hi = above.p_lo;
        if (!below.feasible || !above.feasible) {
            continue;
        }
        bool both_cover = true;
        for (const ActiveSet* set : {&below.active, &above.active}) {
            const auto [lo, hi] = feasible_range(*set, profiles);
            if (bracket_lo < lo || bracket_hi > hi) {
                both_cover = false;
            }
        }
        std::optional<SwitchingPoint> sp;
        if (both_cover) {
            sp = find_switching_point(below.active, above.active, bracket_lo, bracket_hi,
                                      profiles);
        }
        if (sp) {
            sp->set_below = below.active;
            sp->set_above = above.active;
            below.p_hi = sp->p_total;
            above.p_lo = sp->p_total;
            schedule.switching_points.push_back(*sp);
        } else {
            // Feasibility-driven handover; keep the grid boundary.
            below.p_hi = bracket_hi;
        }
    }
    return schedule;
}

} // namespace ipop
