#include "p2s/generate.hpp"

#include "p2s/flatten.hpp"
#include "p2s/oracle.hpp"

#include <algorithm>
#include <numeric>
#include <random>

namespace p2s {

std::string to_string(InstanceKind kind)
{
    switch (kind) {
    case InstanceKind::Sudoku4: return "sudoku4";
    case InstanceKind::Sudoku9: return "sudoku9";
    case InstanceKind::Jobshop: return "jobshop";
    case InstanceKind::Mutated: return "mutated";
    }
    return "?";
}

std::optional<InstanceKind> parse_instance_kind(std::string_view name)
{
    for (auto k : {InstanceKind::Sudoku4, InstanceKind::Sudoku9, InstanceKind::Jobshop, InstanceKind::Mutated})
        if (to_string(k) == name)
            return k;
    return std::nullopt;
}

namespace {

    /// Modulo reduction keeps sequences identical across standard libraries.
    class Rng {
    public:
        explicit Rng(std::uint64_t seed) : engine_(seed) {}

        std::size_t below(std::size_t n) { return static_cast<std::size_t>(engine_() % n); }
        Value between(Value lo, Value hi) { return lo + static_cast<Value>(below(static_cast<std::size_t>(hi - lo + 1))); }

        template <typename T>
        void shuffle(std::vector<T>& v)
        {
            for (std::size_t i = v.size(); i > 1; --i)
                std::swap(v[i - 1], v[below(i)]);
        }

    private:
        std::mt19937_64 engine_;
    };

    enum class Outcome : std::uint8_t { Sat, Unsat, Unknown };

    Outcome check(const UserModel& m, std::span<const Constraint> constraints)
    {
        SolverModel s = flatten(UserModel{m.vars, {constraints.begin(), constraints.end()}});
        Oracle oracle(domains_of(s.vars));
        std::vector<Body> bodies;
        for (const auto& c : s.constraints)
            bodies.push_back(c.body);
        OracleResult r = oracle.solve(std::span<const Body>(bodies));
        if (std::holds_alternative<Sat>(r))
            return Outcome::Sat;
        return std::holds_alternative<Unsat>(r) ? Outcome::Unsat : Outcome::Unknown;
    }

    Outcome check(const UserModel& m) { return check(m, m.constraints); }

    VarId var(std::size_t i) { return VarId{static_cast<std::uint32_t>(i)}; }

    UserModel sudoku(std::size_t box, std::uint64_t seed, std::size_t retries)
    {
        const std::size_t n = box * box;
        Rng rng(seed);
        auto cell = [&](std::size_t r, std::size_t c) { return var(r * n + c); };

        UserModel base;
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < n; ++c)
                base.vars.push_back({"cell_" + std::to_string(r + 1) + "_" + std::to_string(c + 1),
                    Domain(1, static_cast<Value>(n))});
        for (std::size_t r = 0; r < n; ++r) {
            AllDifferent row;
            for (std::size_t c = 0; c < n; ++c)
                row.vars.push_back(cell(r, c));
            base.constraints.push_back({"row" + std::to_string(r + 1), row});
        }
        for (std::size_t c = 0; c < n; ++c) {
            AllDifferent col;
            for (std::size_t r = 0; r < n; ++r)
                col.vars.push_back(cell(r, c));
            base.constraints.push_back({"col" + std::to_string(c + 1), col});
        }
        for (std::size_t b = 0; b < n; ++b) {
            AllDifferent blk;
            for (std::size_t k = 0; k < n; ++k)
                blk.vars.push_back(cell(b / box * box + k / box, b % box * box + k % box));
            base.constraints.push_back({"block" + std::to_string(b + 1), blk});
        }

        for (std::size_t attempt = 0; attempt < retries; ++attempt) {
            // Random solution: a pattern grid under digit, row and column permutations.
            std::vector<std::size_t> digits(n), bands(box), stacks(box);
            std::iota(digits.begin(), digits.end(), std::size_t{0});
            std::iota(bands.begin(), bands.end(), std::size_t{0});
            std::iota(stacks.begin(), stacks.end(), std::size_t{0});
            rng.shuffle(digits);
            rng.shuffle(bands);
            rng.shuffle(stacks);
            std::vector<std::size_t> rows, cols;
            for (auto b : bands) {
                std::vector<std::size_t> inner(box);
                std::iota(inner.begin(), inner.end(), std::size_t{0});
                rng.shuffle(inner);
                for (auto i : inner)
                    rows.push_back(b * box + i);
            }
            for (auto s : stacks) {
                std::vector<std::size_t> inner(box);
                std::iota(inner.begin(), inner.end(), std::size_t{0});
                rng.shuffle(inner);
                for (auto i : inner)
                    cols.push_back(s * box + i);
            }
            std::vector<Value> solution(n * n);
            for (std::size_t r = 0; r < n; ++r)
                for (std::size_t c = 0; c < n; ++c) {
                    std::size_t pr = rows[r], pc = cols[c];
                    solution[r * n + c] = static_cast<Value>(digits[(box * (pr % box) + pr / box + pc) % n] + 1);
                }

            std::vector<std::size_t> order(n * n);
            std::iota(order.begin(), order.end(), std::size_t{0});
            rng.shuffle(order);
            std::vector<Value> hint(n * n, 0);
            auto clashes = [&](std::size_t at, Value v) {
                std::size_t r = at / n, c = at % n;
                for (std::size_t k = 0; k < n * n; ++k) {
                    if (k == at || hint[k] != v)
                        continue;
                    std::size_t kr = k / n, kc = k % n;
                    if (kr == r || kc == c || (kr / box == r / box && kc / box == c / box))
                        return true;
                }
                return false;
            };
            std::size_t initial = box == 2 ? 4 : 26;
            std::size_t next = 0;
            for (; next < initial; ++next)
                hint[order[next]] = solution[order[next]];

            // The wrong hint goes into a free cell with a value that repeats nothing.
            std::size_t wrong_cell = n * n;
            Value wrong_value = 0;
            for (std::size_t k = next; k < order.size() && wrong_cell == n * n; ++k) {
                std::size_t at = order[k];
                std::vector<Value> options;
                for (Value v = 1; v <= static_cast<Value>(n); ++v)
                    if (v != solution[at] && !clashes(at, v))
                        options.push_back(v);
                if (!options.empty()) {
                    wrong_cell = at;
                    wrong_value = options[rng.below(options.size())];
                }
            }
            if (wrong_cell == n * n)
                continue;
            hint[wrong_cell] = wrong_value;

            for (;;) {
                UserModel m = base;
                for (std::size_t k = 0; k < n * n; ++k)
                    if (hint[k])
                        m.constraints.push_back({"h_" + std::to_string(k / n + 1) + "_" + std::to_string(k % n + 1),
                            Atomic{cell(k / n, k % n), RelOp::Eq, hint[k]}});
                Outcome o = check(m);
                if (o == Outcome::Unsat)
                    return m;
                if (o == Outcome::Unknown)
                    break;
                bool added = false;
                for (; next < order.size() && !added; ++next) {
                    std::size_t at = order[next];
                    if (hint[at] || clashes(at, solution[at]))
                        continue;
                    hint[at] = solution[at];
                    added = true;
                }
                if (!added)
                    break;
            }
        }
        throw GenerationError("no unsatisfiable sudoku within the retry budget");
    }

    UserModel jobshop(const GenerateOptions& options, std::uint64_t seed)
    {
        Rng rng(seed);
        const std::size_t jobs = options.jobs, tasks = options.tasks;
        if (jobs == 0 || tasks < 2)
            throw GenerationError("jobshop needs at least one job of two tasks");
        std::vector<std::vector<std::size_t>> machine(jobs);
        std::vector<std::vector<Value>> duration(jobs);
        Value horizon = 0;
        for (std::size_t j = 0; j < jobs; ++j) {
            machine[j].resize(tasks);
            std::iota(machine[j].begin(), machine[j].end(), std::size_t{0});
            rng.shuffle(machine[j]);
            for (std::size_t t = 0; t < tasks; ++t) {
                duration[j].push_back(rng.between(1, 4));
                horizon += duration[j].back();
            }
        }
        auto name = [](std::size_t j, std::size_t t) {
            return "t" + std::to_string(j + 1) + "_" + std::to_string(t + 1);
        };
        auto build = [&](Value makespan) {
            UserModel m;
            for (std::size_t j = 0; j < jobs; ++j)
                for (std::size_t t = 0; t < tasks; ++t)
                    m.vars.push_back({name(j, t), Domain(0, makespan - duration[j][t])});
            auto task = [&](std::size_t j, std::size_t t) { return var(j * tasks + t); };
            for (std::size_t j = 0; j < jobs; ++j)
                for (std::size_t t = 0; t + 1 < tasks; ++t)
                    m.constraints.push_back({"prec" + std::to_string(j + 1) + "_" + std::to_string(t + 1),
                        Linear{{{1, task(j, t)}, {-1, task(j, t + 1)}}, RelOp::Le, -duration[j][t]}});
            for (std::size_t mc = 0; mc < tasks; ++mc)
                for (std::size_t a = 0; a < jobs; ++a)
                    for (std::size_t b = a + 1; b < jobs; ++b) {
                        std::size_t ta = static_cast<std::size_t>(
                            std::find(machine[a].begin(), machine[a].end(), mc) - machine[a].begin());
                        std::size_t tb = static_cast<std::size_t>(
                            std::find(machine[b].begin(), machine[b].end(), mc) - machine[b].begin());
                        Disjunction d{{
                            Linear{{{1, task(a, ta)}, {-1, task(b, tb)}}, RelOp::Le, -duration[a][ta]},
                            Linear{{{1, task(b, tb)}, {-1, task(a, ta)}}, RelOp::Le, -duration[b][tb]},
                        }};
                        m.constraints.push_back({"m" + std::to_string(mc + 1) + "_" + std::to_string(a + 1) + "_"
                                + std::to_string(b + 1),
                            std::move(d)});
                    }
            return m;
        };
        Value lower = 0;
        for (std::size_t j = 0; j < jobs; ++j)
            lower = std::max(lower, std::accumulate(duration[j].begin(), duration[j].end(), Value{0}));
        for (Value makespan = lower; makespan <= horizon; ++makespan) {
            Outcome o = check(build(makespan));
            if (o == Outcome::Unknown)
                break;
            if (o == Outcome::Sat) {
                UserModel m = build(makespan - 1);
                if (check(m) != Outcome::Unsat)
                    break;
                return m;
            }
        }
        throw GenerationError("could not determine the optimal makespan");
    }

    UserModel mutated(std::uint64_t seed, std::size_t retries)
    {
        Rng rng(seed);
        constexpr std::size_t n = 5;
        constexpr Value upper = 5;
        for (std::size_t attempt = 0; attempt < retries; ++attempt) {
            UserModel m;
            std::vector<Value> planted;
            for (std::size_t i = 0; i < n; ++i) {
                m.vars.push_back({"v" + std::to_string(i + 1), Domain(0, upper)});
                planted.push_back(rng.between(0, upper));
            }
            auto random_terms = [&] {
                std::vector<std::size_t> pick(n);
                std::iota(pick.begin(), pick.end(), std::size_t{0});
                rng.shuffle(pick);
                std::vector<Term> terms;
                std::size_t arity = 2 + rng.below(2);
                for (std::size_t k = 0; k < arity; ++k) {
                    Value c = rng.between(1, 3) * (rng.below(2) ? 1 : -1);
                    terms.push_back({c, var(pick[k])});
                }
                std::sort(terms.begin(), terms.end(), [](const Term& a, const Term& b) { return a.var < b.var; });
                return terms;
            };
            auto at_planted = [&](const std::vector<Term>& terms) {
                Value sum = 0;
                for (const auto& t : terms)
                    sum += t.coeff * planted[t.var.index];
                return sum;
            };

            std::vector<std::size_t> linear_at;
            bool have_alldiff = false;
            std::size_t count = 9 + rng.below(3);
            for (std::size_t c = 0; c < count; ++c) {
                std::string id = "c" + std::to_string(c + 1);
                std::size_t kind = rng.below(10);
                if (kind < 7) {
                    auto terms = random_terms();
                    Value rhs = at_planted(terms);
                    linear_at.push_back(m.constraints.size());
                    m.constraints.push_back({id, Linear{std::move(terms), RelOp::Le, rhs}});
                }
                else if (kind < 9 || have_alldiff) {
                    auto tight = random_terms();
                    auto loose = random_terms();
                    Value tight_rhs = at_planted(tight);
                    Value loose_rhs = at_planted(loose) - 1 - static_cast<Value>(rng.below(2));
                    Disjunction d;
                    d.parts.emplace_back(Linear{std::move(tight), RelOp::Le, tight_rhs});
                    d.parts.emplace_back(Linear{std::move(loose), RelOp::Le, loose_rhs});
                    if (rng.below(2))
                        std::swap(d.parts[0], d.parts[1]);
                    m.constraints.push_back({id, std::move(d)});
                }
                else {
                    std::vector<std::size_t> pick(n);
                    std::iota(pick.begin(), pick.end(), std::size_t{0});
                    rng.shuffle(pick);
                    AllDifferent ad;
                    for (auto i : pick) {
                        bool distinct = std::none_of(ad.vars.begin(), ad.vars.end(),
                            [&](VarId v) { return planted[v.index] == planted[i]; });
                        if (distinct && ad.vars.size() < 3)
                            ad.vars.push_back(var(i));
                    }
                    if (ad.vars.size() < 2) {
                        --c;
                        continue;
                    }
                    std::sort(ad.vars.begin(), ad.vars.end());
                    have_alldiff = true;
                    m.constraints.push_back({id, std::move(ad)});
                }
            }
            rng.shuffle(linear_at);
            for (auto idx : linear_at) {
                auto& lin = std::get<Linear>(m.constraints[idx].body.node);
                lin.rhs -= 1;
                if (check(m, std::span(&m.constraints[idx], 1)) == Outcome::Sat && check(m) == Outcome::Unsat)
                    return m;
                lin.rhs += 1;
            }
        }
        throw GenerationError("no unsatisfiable mutation within the retry budget");
    }

} // namespace

UserModel generate_instance(InstanceKind kind, std::uint64_t seed, const GenerateOptions& options)
{
    switch (kind) {
    case InstanceKind::Sudoku4: return sudoku(2, seed, options.retries);
    case InstanceKind::Sudoku9: return sudoku(3, seed, options.retries);
    case InstanceKind::Jobshop: return jobshop(options, seed);
    case InstanceKind::Mutated: return mutated(seed, options.retries);
    }
    throw GenerationError("unknown instance kind");
}

} // namespace p2s
