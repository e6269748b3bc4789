#include "ipop/annealer.hpp"

#include "ipop/errors.hpp"
#include "ipop/log.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ipop {

namespace {

void require(bool ok, const std::string& message) {
    if (!ok) {
        throw InputError(message);
    }
}

std::vector<const ModuleProfile*> collect(const ActiveSet& active,
                                          std::span<const ModuleProfile> profiles) {
    require(!active.module_ids.empty(), "active set must not be empty");
    std::vector<const ModuleProfile*> out;
    out.reserve(active.module_ids.size());
    for (const std::string& id : active.module_ids) {
        out.push_back(&find_profile(profiles, id));
    }
    return out;
}

Allocation build_allocation(const std::vector<const ModuleProfile*>& mods,
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

void AnnealerConfig::validate() const {
    require(std::isfinite(t0) && t0 > 0.0, "annealer t0 must be > 0");
    require(std::isfinite(cooling) && cooling > 0.0 && cooling < 1.0,
            "annealer cooling must lie in (0, 1)");
    require(iters_per_temp >= 1, "annealer iters_per_temp must be >= 1");
    require(std::isfinite(t_thres) && t_thres > 0.0 && t_thres < t0,
            "annealer t_thres must satisfy 0 < t_thres < t0");
    require(std::isfinite(boltzmann) && boltzmann > 0.0, "annealer boltzmann must be > 0");
    require(std::isfinite(max_transfer_frac) && max_transfer_frac > 0.0 &&
                max_transfer_frac <= 1.0,
            "annealer max_transfer_frac must lie in (0, 1]");
}

nlohmann::json AnnealerConfig::to_json() const {
    return nlohmann::json{{"t0", t0},
                          {"cooling", cooling},
                          {"iters_per_temp", iters_per_temp},
                          {"t_thres", t_thres},
                          {"boltzmann", boltzmann},
                          {"seed", seed},
                          {"max_transfer_frac", max_transfer_frac}};
}

AnnealerConfig AnnealerConfig::from_json(const nlohmann::json& j) {
    require(j.is_object(), "annealer config must be a JSON object");
    AnnealerConfig cfg;
    for (const auto& [key, value] : j.items()) {
        try {
            if (key == "t0") {
                cfg.t0 = value.get<double>();
            } else if (key == "cooling") {
                cfg.cooling = value.get<double>();
            } else if (key == "iters_per_temp") {
                cfg.iters_per_temp = value.get<int>();
            } else if (key == "t_thres") {
                cfg.t_thres = value.get<double>();
            } else if (key == "boltzmann") {
                cfg.boltzmann = value.get<double>();
            } else if (key == "seed") {
                cfg.seed = value.get<std::uint64_t>();
            } else if (key == "max_transfer_frac") {
                cfg.max_transfer_frac = value.get<double>();
            } else {
                throw InputError("unknown annealer config key '" + key + "'");
            }
        } catch (const nlohmann::json::exception&) {
            throw InputError("annealer config key '" + key + "' has the wrong type");
        }
    }
    cfg.validate();
    return cfg;
}

bool metropolis_accept(double delta_eta, double temperature, const AnnealerConfig& config,
                       Rng& rng) {
    if (delta_eta > 0.0) {
        return true;
    }
    const double p = std::exp(delta_eta / (config.boltzmann * temperature));
    return rng.uniform01() < p;
}

Allocation perturb(const Allocation& allocation, double /*temperature*/,
                   const AnnealerConfig& config, Rng& rng,
                   std::span<const ModuleProfile> profiles) {
    const std::size_t m = allocation.modules.size();
    if (m < 2) {
        return allocation;
    }

    const std::size_t giver = rng.uniform_below(m);
    std::size_t taker = rng.uniform_below(m - 1);
    if (taker >= giver) {
        ++taker;
    }
    const ModuleProfile& gp = find_profile(profiles, allocation.modules[giver].module_id);
    const ModuleProfile& tp = find_profile(profiles, allocation.modules[taker].module_id);

    const double give_room = allocation.modules[giver].p_out - gp.p_out_min();
    const double take_room = tp.p_out_max() - allocation.modules[taker].p_out;
    const double cap = config.max_transfer_frac * std::max(0.0, std::min(give_room, take_room));
    const double delta = rng.uniform01() * cap;

    Allocation next = allocation;
    ModuleAllocation& g = next.modules[giver];
    ModuleAllocation& t = next.modules[taker];
    g.p_out = std::clamp(g.p_out - delta, gp.p_out_min(), gp.p_out_max());
    t.p_out = std::clamp(t.p_out + delta, tp.p_out_min(), tp.p_out_max());
    g.current = gp.invert_pout(g.p_out);
    t.current = tp.invert_pout(t.p_out);
    g.p_in = gp.eval_pin(g.current);
    t.p_in = tp.eval_pin(t.current);

    // The transfer conserves total output by construction; carrying the
    // total over (instead of re-summing) keeps it bit-stable across moves.
    next.total_p_out = allocation.total_p_out;
    next.total_p_in = 0.0;
    for (const ModuleAllocation& ma : next.modules) {
        next.total_p_in += ma.p_in;
    }
    next.eta = next.total_p_out / next.total_p_in;
    return next;
}

Allocation random_feasible_allocation(const ActiveSet& active, double demand,
                                      std::span<const ModuleProfile> profiles, Rng& rng) {
    const std::vector<const ModuleProfile*> mods = collect(active, profiles);
    double sum_min = 0.0;
    double sum_max = 0.0;
    for (const ModuleProfile* m : mods) {
        sum_min += m->p_out_min();
        sum_max += m->p_out_max();
    }
    const double tol = 1e-9 * std::max(1.0, sum_max);
    if (demand < sum_min - tol || demand > sum_max + tol) {
        std::ostringstream oss;
        oss << "demand " << demand << " W is outside the feasible range [" << sum_min << ", "
            << sum_max << "] W of active set {" << active.label() << "}";
        throw FeasibilityError(oss.str());
    }
    const double target = std::clamp(demand, sum_min, sum_max);

    std::vector<double> p(mods.size());
    for (std::size_t i = 0; i < mods.size(); ++i) {
        const ModuleProfile& m = *mods[i];
        p[i] = m.p_out_min() + rng.uniform01() * (m.p_out_max() - m.p_out_min());
    }

    // Reconcile the draw onto the demand total: move every module in
    // proportion to its remaining room, which lands on the total without
    // leaving the box.
    for (int pass = 0; pass < 64; ++pass) {
        double total = 0.0;
        for (double v : p) {
            total += v;
        }
        const double resid = target - total;
        if (std::abs(resid) <= 1e-12 * std::max(1.0, target)) {
            break;
        }
        double room = 0.0;
        for (std::size_t i = 0; i < mods.size(); ++i) {
            room += resid > 0.0 ? mods[i]->p_out_max() - p[i] : p[i] - mods[i]->p_out_min();
        }
        if (room <= 0.0) {
            break;
        }
        for (std::size_t i = 0; i < mods.size(); ++i) {
            const double share =
                resid > 0.0 ? mods[i]->p_out_max() - p[i] : p[i] - mods[i]->p_out_min();
            p[i] = std::clamp(p[i] + resid * share / room, mods[i]->p_out_min(),
                              mods[i]->p_out_max());
        }
    }
    return build_allocation(mods, p);
}

Allocation anneal(std::span<const ModuleProfile> profiles, const ActiveSet& active, double demand,
                  const AnnealerConfig& config, const std::optional<Allocation>& warm_start,
                  const LevelObserver& observer) {
    config.validate();
    require(std::isfinite(demand), "demand must be finite");
    const std::vector<const ModuleProfile*> mods = collect(active, profiles);

    double sum_min = 0.0;
    double sum_max = 0.0;
    for (const ModuleProfile* m : mods) {
        sum_min += m->p_out_min();
        sum_max += m->p_out_max();
    }
    if (demand < sum_min - 1e-9 * std::max(1.0, sum_max) ||
        demand > sum_max + 1e-9 * std::max(1.0, sum_max)) {
        std::ostringstream oss;
        oss << "demand " << demand << " W is outside the feasible range [" << sum_min << ", "
            << sum_max << "] W of active set {" << active.label() << "}";
        throw FeasibilityError(oss.str());
    }

    Rng rng(config.seed);
    Allocation current;
    if (warm_start) {
        require(warm_start->modules.size() == mods.size(),
                "warm start does not match the active set size");
        std::vector<double> p(mods.size());
        for (std::size_t i = 0; i < mods.size(); ++i) {
            const ModuleAllocation& ma = warm_start->modules[i];
            require(ma.module_id == mods[i]->module_id(),
                    "warm start module order does not match the active set");
            p[i] = std::clamp(ma.p_out, mods[i]->p_out_min(), mods[i]->p_out_max());
        }
        double total = 0.0;
        for (double v : p) {
            total += v;
        }
        require(std::abs(total - demand) <= 1e-6 * std::max(1.0, demand),
                "warm start total output power does not meet the demand");
        current = build_allocation(mods, p);
    } else {
        current = random_feasible_allocation(active, demand, profiles, rng);
    }

    Allocation best = current;
    double temperature = config.t0;
    int level = 0;
    while (temperature > config.t_thres) {
        temperature *= config.cooling;
        ++level;
        for (int it = 0; it < config.iters_per_temp; ++it) {
            Allocation candidate = perturb(current, temperature, config, rng, profiles);
            const double delta = candidate.eta - current.eta;
            if (metropolis_accept(delta, temperature, config, rng)) {
                current = std::move(candidate);
                if (current.eta > best.eta) {
                    best = current;
                }
            }
        }
        if (observer) {
            observer(level, temperature, best.eta);
        }
    }
    log_debug("anneal: " + std::to_string(level) + " levels, best eta " +
              std::to_string(best.eta));
    return best;
}

} // namespace ipop
