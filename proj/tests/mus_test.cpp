#include "support.hpp"

#include "p2s/mus.hpp"

#include <gtest/gtest.h>

#include <limits>

namespace p2s {
namespace {

    struct BruteForce {
        std::vector<std::vector<std::size_t>> muses;
        std::uint64_t min_weight = std::numeric_limits<std::uint64_t>::max();
    };

    /// Enumerates every subset of the soft constraints (|soft| <= 10).
    BruteForce brute_force(const MusQuery& q, const std::vector<Domain>& doms)
    {
        std::size_t n = q.soft.size();
        std::vector<std::uint8_t> unsat(std::size_t{1} << n, 0);
        for (std::uint32_t mask = 0; mask < unsat.size(); ++mask) {
            std::vector<const Body*> bodies;
            for (const auto& h : q.hard)
                bodies.push_back(&h);
            for (std::size_t i = 0; i < n; ++i)
                if (mask >> i & 1)
                    bodies.push_back(&q.soft[i].body);
            unsat[mask] = !testing::ref_sat(doms, bodies);
        }
        BruteForce out;
        for (std::uint32_t mask = 0; mask < unsat.size(); ++mask) {
            if (!unsat[mask])
                continue;
            bool minimal = true;
            for (std::size_t i = 0; i < n; ++i)
                if ((mask >> i & 1) && unsat[mask & ~(1u << i)])
                    minimal = false;
            std::uint64_t w = 0;
            std::vector<std::size_t> members;
            for (std::size_t i = 0; i < n; ++i)
                if (mask >> i & 1) {
                    members.push_back(i);
                    w += q.soft[i].weight;
                }
            out.min_weight = std::min(out.min_weight, w);
            if (minimal)
                out.muses.push_back(members);
        }
        return out;
    }

    MusQuery random_unsat_query(std::mt19937_64& rng, std::vector<Domain>& doms)
    {
        for (;;) {
            std::uint32_t vars = 2 + static_cast<std::uint32_t>(rng() % 2);
            Value hi = 1 + static_cast<Value>(rng() % 5); // domain size <= 6
            doms.assign(vars, Domain(0, hi));
            testing::BodyFuzzer fz(rng(), vars, 0, hi);
            MusQuery q;
            std::size_t n = 3 + rng() % 8;
            for (std::size_t i = 0; i < n; ++i)
                q.soft.push_back({fz.body(1), 1 + rng() % 4});
            if (rng() % 3 == 0)
                q.hard.push_back(fz.body(0));
            std::vector<const Body*> all;
            for (const auto& h : q.hard)
                all.push_back(&h);
            if (!testing::ref_sat(doms, all)) {
                continue;
            }
            for (const auto& s : q.soft)
                all.push_back(&s.body);
            if (!testing::ref_sat(doms, all))
                return q;
        }
    }

    TEST(Mus, RandomQueriesMatchBruteForce)
    {
        std::mt19937_64 rng(31337);
        for (int k = 0; k < 200; ++k) {
            std::vector<Domain> doms;
            MusQuery q = random_unsat_query(rng, doms);
            BruteForce expected = brute_force(q, doms);
            Oracle oracle(doms);

            q.mode = MusMode::SubsetMinimal;
            auto mus = extract_mus(q, oracle);
            ASSERT_TRUE(std::is_sorted(mus.begin(), mus.end()));
            ASSERT_NE(std::find(expected.muses.begin(), expected.muses.end(), mus), expected.muses.end())
                << "query " << k;
            ASSERT_TRUE(verify_mus(mus, q, oracle));

            q.mode = MusMode::SmallestWeighted;
            auto smallest = extract_mus(q, oracle);
            std::uint64_t w = 0;
            for (auto i : smallest)
                w += q.soft[i].weight;
            ASSERT_EQ(w, expected.min_weight) << "query " << k;
            ASSERT_NE(std::find(expected.muses.begin(), expected.muses.end(), smallest), expected.muses.end());
        }
    }

    TEST(Mus, SatInputRejected)
    {
        Oracle oracle({Domain(0, 3)});
        MusQuery q;
        q.soft = {{Atomic{VarId{0}, RelOp::Le, 2}}, {Atomic{VarId{0}, RelOp::Ge, 1}}};
        try {
            extract_mus(q, oracle);
            FAIL();
        }
        catch (const MusError& e) {
            EXPECT_EQ(e.kind(), MusError::Kind::SatInput);
        }
    }

    TEST(Mus, HardAloneUnsatGivesEmpty)
    {
        Oracle oracle({Domain(0, 3)});
        MusQuery q;
        q.hard = {falsity()};
        q.soft = {{Atomic{VarId{0}, RelOp::Le, 2}}};
        EXPECT_TRUE(extract_mus(q, oracle).empty());
        q.mode = MusMode::SmallestWeighted;
        EXPECT_TRUE(extract_mus(q, oracle).empty());
    }

    TEST(Mus, SubsetMinimalPrefersEarlierMembers)
    {
        // x<=1 conflicts with both x>=2 and x>=3; deletion runs back to front.
        Oracle oracle({Domain(0, 5)});
        MusQuery q;
        VarId x{0};
        q.soft = {{Atomic{x, RelOp::Le, 1}}, {Atomic{x, RelOp::Ge, 2}}, {Atomic{x, RelOp::Ge, 3}}};
        EXPECT_EQ(extract_mus(q, oracle), (std::vector<std::size_t>{0, 1}));
    }

    TEST(Mus, WeightsSteerSmallest)
    {
        Oracle oracle({Domain(0, 5)});
        MusQuery q;
        VarId x{0};
        q.mode = MusMode::SmallestWeighted;
        q.soft = {{Atomic{x, RelOp::Le, 1}, 1}, {Atomic{x, RelOp::Ge, 2}, 10}, {Atomic{x, RelOp::Ge, 3}, 2}};
        EXPECT_EQ(extract_mus(q, oracle), (std::vector<std::size_t>{0, 2}));
        q.soft[1].weight = 1;
        EXPECT_EQ(extract_mus(q, oracle), (std::vector<std::size_t>{0, 1}));
    }

    TEST(Mus, CorrectionSetCap)
    {
        std::vector<Domain> doms(4, Domain(0, 2));
        MusQuery q;
        q.mode = MusMode::SmallestWeighted;
        q.max_correction_sets = 0;
        for (std::uint32_t i = 0; i < 4; ++i)
            for (std::uint32_t j = i + 1; j < 4; ++j)
                q.soft.push_back({Linear{{{1, VarId{i}}, {-1, VarId{j}}}, RelOp::Ne, 0}});
        Oracle oracle(doms);
        try {
            extract_mus(q, oracle);
            FAIL();
        }
        catch (const MusError& e) {
            EXPECT_EQ(e.kind(), MusError::Kind::BudgetExceeded);
        }
    }

    TEST(HittingSet, BruteForceAgreement)
    {
        std::mt19937_64 rng(4);
        for (int k = 0; k < 300; ++k) {
            std::size_t n = 1 + rng() % 8;
            std::vector<std::uint64_t> w(n);
            for (auto& x : w)
                x = rng() % 5;
            std::vector<std::vector<std::size_t>> sets(rng() % 6);
            for (auto& s : sets) {
                for (std::size_t e = 0; e < n; ++e)
                    if (rng() % 3 == 0)
                        s.push_back(e);
                if (s.empty())
                    s.push_back(rng() % n);
            }
            std::uint64_t best = std::numeric_limits<std::uint64_t>::max();
            for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
                bool hits = std::all_of(sets.begin(), sets.end(), [&](const auto& s) {
                    return std::any_of(s.begin(), s.end(), [&](std::size_t e) { return mask >> e & 1; });
                });
                if (!hits)
                    continue;
                std::uint64_t c = 0;
                for (std::size_t e = 0; e < n; ++e)
                    if (mask >> e & 1)
                        c += w[e];
                best = std::min(best, c);
            }
            auto hs = min_cost_hitting_set(sets, w);
            std::uint64_t c = 0;
            for (auto e : hs)
                c += w[e];
            EXPECT_EQ(c, best);
            for (const auto& s : sets)
                EXPECT_TRUE(std::any_of(s.begin(), s.end(), [&](std::size_t e) {
                    return std::find(hs.begin(), hs.end(), e) != hs.end();
                }));
        }
    }

} // namespace
} // namespace p2s
