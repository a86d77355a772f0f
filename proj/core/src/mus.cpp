#include "p2s/mus.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace p2s {

namespace {

    std::vector<const Body*> pick(std::span<const Body* const> soft, std::span<const std::size_t> indices)
    {
        std::vector<const Body*> out;
        out.reserve(indices.size());
        for (auto i : indices)
            out.push_back(soft[i]);
        return out;
    }

    constexpr std::uint64_t grow_budget = 200;

    [[noreturn]] void budget_exceeded() { throw MusError(MusError::Kind::BudgetExceeded, "oracle budget exceeded"); }

    /// Deletion-based shrinking of an unsatisfiable subset `current` (sorted).
    std::vector<std::size_t> shrink(std::span<const Body* const> soft, std::span<const Body* const> hard,
        std::vector<std::size_t> current, Oracle& oracle)
    {
        for (std::size_t pos = current.size(); pos-- > 0;) {
            if (pos >= current.size())
                continue;
            std::vector<std::size_t> candidate = current;
            candidate.erase(candidate.begin() + static_cast<std::ptrdiff_t>(pos));
            auto bodies = pick(soft, candidate);
            OracleResult r = oracle.solve(hard, bodies);
            if (std::holds_alternative<BudgetExceeded>(r))
                budget_exceeded();
            if (auto* u = std::get_if<Unsat>(&r)) {
                std::vector<std::size_t> refined;
                for (auto k : u->core)
                    refined.push_back(candidate[k]);
                std::sort(refined.begin(), refined.end());
                // Later positions may have vanished with the refinement; continue below `pos`.
                std::size_t kept_below = 0;
                while (kept_below < refined.size() && refined[kept_below] < current[pos])
                    ++kept_below;
                current = std::move(refined);
                pos = kept_below;
            }
        }
        return current;
    }

    class HittingSetSearch {
    public:
        HittingSetSearch(std::span<const std::vector<std::size_t>> sets, std::span<const std::uint64_t> weights)
            : sets_(sets), weights_(weights), hit_(sets.size(), 0), chosen_(weights.size(), 0),
              forbidden_(weights.size(), 0), elem_sets_(weights.size())
        {
            for (std::size_t s = 0; s < sets.size(); ++s)
                for (auto e : sets[s])
                    elem_sets_.at(e).push_back(s);
        }

        std::vector<std::size_t> run()
        {
            greedy();
            search(0);
            std::sort(best_.begin(), best_.end());
            return best_;
        }

    private:
        void choose(std::size_t e)
        {
            chosen_[e] = 1;
            for (auto s : elem_sets_[e])
                ++hit_[s];
            picked_.push_back(e);
        }

        void unchoose(std::size_t e)
        {
            chosen_[e] = 0;
            for (auto s : elem_sets_[e])
                --hit_[s];
            picked_.pop_back();
        }

        void greedy()
        {
            std::uint64_t cost = 0;
            for (std::size_t s = 0; s < sets_.size(); ++s) {
                if (hit_[s])
                    continue;
                if (sets_[s].empty())
                    return;
                std::size_t e = *std::min_element(sets_[s].begin(), sets_[s].end(),
                    [&](std::size_t x, std::size_t y) { return std::pair(weights_[x], x) < std::pair(weights_[y], y); });
                choose(e);
                cost += weights_[e];
            }
            best_ = picked_;
            best_cost_ = cost;
            while (!picked_.empty())
                unchoose(picked_.back());
        }

        void search(std::uint64_t cost)
        {
            std::size_t branch_set = sets_.size();
            std::size_t fewest = std::numeric_limits<std::size_t>::max();
            std::uint64_t bound = 0;
            for (std::size_t s = 0; s < sets_.size(); ++s) {
                if (hit_[s])
                    continue;
                std::size_t allowed = 0;
                std::uint64_t cheapest = std::numeric_limits<std::uint64_t>::max();
                for (auto e : sets_[s])
                    if (!forbidden_[e]) {
                        ++allowed;
                        cheapest = std::min(cheapest, weights_[e]);
                    }
                if (allowed == 0)
                    return;
                bound = std::max(bound, cheapest);
                if (allowed < fewest) {
                    fewest = allowed;
                    branch_set = s;
                }
            }
            if (branch_set == sets_.size()) {
                if (cost < best_cost_) {
                    best_cost_ = cost;
                    best_ = picked_;
                }
                return;
            }
            if (cost + bound >= best_cost_)
                return;
            std::vector<std::size_t> elems;
            for (auto e : sets_[branch_set])
                if (!forbidden_[e])
                    elems.push_back(e);
            std::sort(elems.begin(), elems.end(),
                [&](std::size_t x, std::size_t y) { return std::pair(weights_[x], x) < std::pair(weights_[y], y); });
            std::vector<std::size_t> newly_forbidden;
            for (auto e : elems) {
                choose(e);
                search(cost + weights_[e]);
                unchoose(e);
                forbidden_[e] = 1;
                newly_forbidden.push_back(e);
            }
            for (auto e : newly_forbidden)
                forbidden_[e] = 0;
        }

        std::span<const std::vector<std::size_t>> sets_;
        std::span<const std::uint64_t> weights_;
        std::vector<std::uint32_t> hit_;
        std::vector<std::uint8_t> chosen_;
        std::vector<std::uint8_t> forbidden_;
        std::vector<std::vector<std::size_t>> elem_sets_;
        std::vector<std::size_t> picked_;
        std::vector<std::size_t> best_;
        std::uint64_t best_cost_ = std::numeric_limits<std::uint64_t>::max();
    };

    std::vector<std::size_t> smallest_weighted(std::span<const Body* const> soft, std::span<const std::uint64_t> weights,
        std::span<const Body* const> hard, Oracle& oracle, std::size_t max_correction_sets)
    {
        std::size_t n = soft.size();
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return weights[x] > weights[y]; });

        std::vector<std::vector<std::size_t>> correction_sets;
        for (;;) {
            std::vector<std::size_t> hs = min_cost_hitting_set(correction_sets, weights);
            OracleResult r = oracle.solve(hard, pick(soft, hs));
            if (std::holds_alternative<BudgetExceeded>(r))
                budget_exceeded();
            if (std::holds_alternative<Unsat>(r)) {
                bool free_member = std::any_of(hs.begin(), hs.end(), [&](std::size_t i) { return weights[i] == 0; });
                return free_member ? shrink(soft, hard, std::move(hs), oracle) : hs;
            }

            // Grow the satisfied set to a maximal one; its complement is a minimal correction set.
            std::vector<std::uint8_t> satisfied(n, 0);
            auto absorb = [&](const Assignment& a) {
                for (std::size_t j = 0; j < n; ++j)
                    if (!satisfied[j] && eval(*soft[j], a))
                        satisfied[j] = 1;
            };
            for (auto i : hs)
                satisfied[i] = 1;
            absorb(std::get<Sat>(r).assignment);
            for (auto j : order) {
                if (satisfied[j])
                    continue;
                std::vector<std::size_t> grown;
                for (std::size_t k = 0; k < n; ++k)
                    if (satisfied[k] || k == j)
                        grown.push_back(k);
                // An undecided probe leaves `j` out, which only weakens the correction set.
                OracleResult g = oracle.solve(hard, pick(soft, grown), grow_budget);
                if (auto* sat = std::get_if<Sat>(&g)) {
                    satisfied[j] = 1;
                    absorb(sat->assignment);
                }
            }
            std::vector<std::size_t> correction;
            for (std::size_t j = 0; j < n; ++j)
                if (!satisfied[j])
                    correction.push_back(j);
            if (correction.empty())
                throw MusError(MusError::Kind::SatInput, "soft and hard constraints are jointly satisfiable");
            correction_sets.push_back(std::move(correction));
            if (correction_sets.size() > max_correction_sets)
                throw MusError(MusError::Kind::BudgetExceeded, "correction-set cap exceeded");
        }
    }

} // namespace

std::vector<std::size_t> min_cost_hitting_set(
    std::span<const std::vector<std::size_t>> sets, std::span<const std::uint64_t> weights)
{
    return HittingSetSearch(sets, weights).run();
}

std::vector<std::size_t> extract_mus(std::span<const Body* const> soft, std::span<const std::uint64_t> weights,
    std::span<const Body* const> hard, MusMode mode, Oracle& oracle, std::size_t max_correction_sets)
{
    OracleResult r = oracle.solve(hard, soft);
    if (std::holds_alternative<BudgetExceeded>(r))
        budget_exceeded();
    if (std::holds_alternative<Sat>(r))
        throw MusError(MusError::Kind::SatInput, "soft and hard constraints are jointly satisfiable");
    if (mode == MusMode::SmallestWeighted) {
        std::vector<std::uint64_t> w(weights.begin(), weights.end());
        w.resize(soft.size(), 1);
        return smallest_weighted(soft, w, hard, oracle, max_correction_sets);
    }
    std::vector<std::size_t> core = std::get<Unsat>(r).core;
    std::sort(core.begin(), core.end());
    return shrink(soft, hard, std::move(core), oracle);
}

std::vector<std::size_t> extract_mus(const MusQuery& q, Oracle& oracle)
{
    std::vector<const Body*> soft, hard;
    std::vector<std::uint64_t> weights;
    for (const auto& s : q.soft) {
        soft.push_back(&s.body);
        weights.push_back(s.weight);
    }
    for (const auto& h : q.hard)
        hard.push_back(&h);
    return extract_mus(soft, weights, hard, q.mode, oracle, q.max_correction_sets);
}

bool verify_mus(std::span<const std::size_t> mus, const MusQuery& q, Oracle& oracle)
{
    std::vector<const Body*> hard;
    for (const auto& h : q.hard)
        hard.push_back(&h);
    auto status = [&](std::span<const std::size_t> members) {
        std::vector<const Body*> bodies;
        for (auto i : members)
            bodies.push_back(&q.soft.at(i).body);
        OracleResult r = oracle.solve(hard, bodies);
        if (std::holds_alternative<BudgetExceeded>(r))
            budget_exceeded();
        return std::holds_alternative<Unsat>(r);
    };
    if (!status(mus))
        return false;
    for (std::size_t k = 0; k < mus.size(); ++k) {
        std::vector<std::size_t> rest(mus.begin(), mus.end());
        rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(k));
        if (status(rest))
            return false;
    }
    return true;
}

} // namespace p2s
