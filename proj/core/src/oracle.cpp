#include "ipop/oracle.hpp"

#include "ipop/errors.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <vector>

namespace ipop {

namespace {

constexpr std::size_t kMaxFleet = 4;

/// Power/input-power grid of one swept module. Entries below lattice_count
/// sit on p_min + k*step; a final off-lattice entry covers p_max.
struct GridAxis {
    std::vector<double> p;
    std::vector<double> p_in;
    std::size_t lattice_count = 0;
};

GridAxis build_axis(const ModuleProfile& m, double step) {
    GridAxis axis;
    const double lo = m.p_out_min();
    const double hi = m.p_out_max();
    const double eps = 1e-9 * std::max(1.0, hi);
    for (std::size_t k = 0;; ++k) {
        const double p = lo + static_cast<double>(k) * step;
        if (p > hi + eps) {
            break;
        }
        axis.p.push_back(std::min(p, hi));
    }
    axis.lattice_count = axis.p.size();
    if (axis.p.empty() || axis.p.back() < hi - eps) {
        axis.p.push_back(hi);
    }
    axis.p_in.reserve(axis.p.size());
    for (double p : axis.p) {
        axis.p_in.push_back(m.eval_pin(m.invert_pout(p)));
    }
    return axis;
}

std::vector<const ModuleProfile*> collect(const ActiveSet& active,
                                          std::span<const ModuleProfile> profiles) {
    if (active.module_ids.empty()) {
        throw InputError("active set must not be empty");
    }
    std::vector<const ModuleProfile*> out;
    out.reserve(active.module_ids.size());
    for (const std::string& id : active.module_ids) {
        out.push_back(&find_profile(profiles, id));
    }
    return out;
}

Allocation assemble(const std::vector<const ModuleProfile*>& mods,
                    const std::vector<double>& p_out) {
    Allocation alloc;
    alloc.modules.reserve(mods.size());
    for (std::size_t i = 0; i < mods.size(); ++i) {
        const ModuleProfile& m = *mods[i];
        ModuleAllocation ma;
        ma.module_id = m.module_id();
        ma.p_out = p_out[i];
        ma.current = m.invert_pout(p_out[i]);
        ma.p_in = m.eval_pin(ma.current);
        const double span = m.p_out_max() - m.p_out_min();
        ma.clamped = p_out[i] <= m.p_out_min() + 1e-12 * span ||
                     p_out[i] >= m.p_out_max() - 1e-12 * span;
        alloc.total_p_out += ma.p_out;
        alloc.total_p_in += ma.p_in;
        alloc.modules.push_back(std::move(ma));
    }
    alloc.eta = alloc.total_p_out / alloc.total_p_in;
    return alloc;
}

} // namespace

OracleResult grid_search(const ActiveSet& active, double demand, double step,
                         std::span<const ModuleProfile> profiles) {
    if (!(step > 0.0) || !std::isfinite(step)) {
        throw InputError("grid step must be finite and > 0");
    }
    const std::vector<const ModuleProfile*> mods = collect(active, profiles);
    if (mods.size() > kMaxFleet) {
        throw CapabilityError("grid search handles at most 4 modules (cost grows with the "
                              "grid size to the power of fleet size minus one); use the "
                              "simulated annealer for larger fleets");
    }

    double sum_min = 0.0;
    double sum_max = 0.0;
    for (const ModuleProfile* m : mods) {
        sum_min += m->p_out_min();
        sum_max += m->p_out_max();
    }
    const double feas_tol = 1e-9 * std::max(1.0, sum_max);
    if (demand < sum_min - feas_tol || demand > sum_max + feas_tol) {
        std::ostringstream oss;
        oss << "demand " << demand << " W is outside the feasible range [" << sum_min << ", "
            << sum_max << "] W of active set {" << active.label() << "}";
        throw FeasibilityError(oss.str());
    }

    const std::size_t m_count = mods.size();
    const ModuleProfile& last = *mods.back();
    const double last_lo = last.p_out_min();
    const double last_hi = last.p_out_max();
    const double last_tol = 1e-9 * std::max(1.0, last_hi);

    std::vector<GridAxis> axes;
    axes.reserve(m_count - 1);
    double lattice_base = demand;
    std::size_t t_span = 0;
    for (std::size_t i = 0; i + 1 < m_count; ++i) {
        axes.push_back(build_axis(*mods[i], step));
        lattice_base -= mods[i]->p_out_min();
        t_span += axes.back().lattice_count - 1;
    }

    // Every pure-lattice cell leaves the last module one of t_span+1 powers,
    // so its inversions are shared across cells through this table.
    std::vector<double> tail_p(t_span + 1), tail_pin(t_span + 1);
    std::vector<bool> tail_ok(t_span + 1, false);
    for (std::size_t t = 0; t <= t_span; ++t) {
        const double r = lattice_base - static_cast<double>(t) * step;
        if (r < last_lo - last_tol || r > last_hi + last_tol) {
            continue;
        }
        const double p = std::clamp(r, last_lo, last_hi);
        tail_p[t] = p;
        tail_pin[t] = last.eval_pin(last.invert_pout(p));
        tail_ok[t] = true;
    }

    std::uint64_t evaluations = 0;
    double best_pin = std::numeric_limits<double>::infinity();
    std::vector<double> best_p;
    std::vector<double> chosen(m_count, 0.0);

    std::function<void(std::size_t, double, double, std::size_t, bool)> sweep =
        [&](std::size_t depth, double sum_p, double sum_pin, std::size_t t, bool on_lattice) {
            if (depth + 1 == m_count) {
                ++evaluations;
                double p_last = 0.0;
                double pin_last = 0.0;
                if (on_lattice) {
                    if (!tail_ok[t]) {
                        return;
                    }
                    p_last = tail_p[t];
                    pin_last = tail_pin[t];
                } else {
                    const double r = demand - sum_p;
                    if (r < last_lo - last_tol || r > last_hi + last_tol) {
                        return;
                    }
                    p_last = std::clamp(r, last_lo, last_hi);
                    pin_last = last.eval_pin(last.invert_pout(p_last));
                }
                const double total_pin = sum_pin + pin_last;
                if (total_pin < best_pin) {
                    best_pin = total_pin;
                    chosen[m_count - 1] = p_last;
                    best_p = chosen;
                }
                return;
            }
            const GridAxis& axis = axes[depth];
            for (std::size_t k = 0; k < axis.p.size(); ++k) {
                chosen[depth] = axis.p[k];
                const bool pure = on_lattice && k < axis.lattice_count;
                sweep(depth + 1, sum_p + axis.p[k], sum_pin + axis.p_in[k],
                      pure ? t + k : t, pure);
            }
        };
    sweep(0, 0.0, 0.0, 0, true);

    if (best_p.empty()) {
        throw SolverError("grid search found no feasible cell; the step may be larger than "
                          "the feasible band");
    }

    OracleResult result;
    result.best = assemble(mods, best_p);
    result.active_set = active;
    result.grid_step = step;
    result.evaluations = evaluations;
    return result;
}

OracleResult enumerate_combinations(std::span<const ModuleProfile> profiles, double demand,
                                    double step) {
    if (profiles.empty()) {
        throw InputError("fleet must not be empty");
    }
    if (profiles.size() > kMaxFleet) {
        throw CapabilityError("combination enumeration handles at most 4 modules; use the "
                              "priority-list dispatch or the simulated annealer instead");
    }

    std::optional<OracleResult> best;
    std::uint64_t evaluations = 0;
    const std::size_t n = profiles.size();
    for (std::size_t mask = 1; mask < (std::size_t{1} << n); ++mask) {
        ActiveSet set;
        double sum_min = 0.0;
        double sum_max = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (mask & (std::size_t{1} << i)) {
                set.module_ids.push_back(profiles[i].module_id());
                sum_min += profiles[i].p_out_min();
                sum_max += profiles[i].p_out_max();
            }
        }
        if (demand < sum_min - 1e-9 * std::max(1.0, sum_max) ||
            demand > sum_max + 1e-9 * std::max(1.0, sum_max)) {
            continue;
        }
        OracleResult r = grid_search(set, demand, step, profiles);
        evaluations += r.evaluations;
        if (!best || r.best.eta > best->best.eta) {
            best = std::move(r);
        }
    }
    if (!best) {
        std::ostringstream oss;
        oss << "no subset of the fleet can serve demand " << demand << " W";
        throw FeasibilityError(oss.str());
    }
    best->evaluations = evaluations;
    return *best;
}

} // namespace ipop
