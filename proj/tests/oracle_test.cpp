#include "support.hpp"

#include "p2s/oracle.hpp"

#include <gtest/gtest.h>

#include <cstdlib>

namespace p2s {
namespace {

    using testing::ref_eval;

    std::vector<const Body*> ptrs(const std::vector<Body>& bodies)
    {
        std::vector<const Body*> out;
        for (const auto& b : bodies)
            out.push_back(&b);
        return out;
    }

    TEST(Oracle, AgreesWithBruteForce)
    {
        std::mt19937_64 rng(99);
        for (int q = 0; q < 400; ++q) {
            std::uint32_t n = 2 + static_cast<std::uint32_t>(rng() % 3);
            Value hi = 1 + static_cast<Value>(rng() % 4);
            testing::BodyFuzzer fz(rng(), n, 0, hi);
            std::vector<Domain> doms(n, Domain(0, hi));
            if (rng() % 3 == 0)
                doms[0].remove(1);
            std::vector<Body> hard, assume;
            for (std::uint32_t k = rng() % 3; k > 0; --k)
                hard.push_back(fz.body(1));
            for (std::uint32_t k = 1 + rng() % 5; k > 0; --k)
                assume.push_back(fz.body(1));

            Oracle oracle(doms);
            OracleResult r = oracle.solve(hard, assume);
            auto all = ptrs(hard);
            for (const auto& b : assume)
                all.push_back(&b);
            bool expected_sat = testing::ref_sat(doms, all);
            if (auto* sat = std::get_if<Sat>(&r)) {
                ASSERT_TRUE(expected_sat);
                std::vector<Value> x;
                for (std::uint32_t v = 0; v < n; ++v) {
                    x.push_back(sat->assignment.at(VarId{v}));
                    ASSERT_TRUE(doms[v].contains(x.back()));
                }
                for (const Body* b : all)
                    ASSERT_TRUE(ref_eval(*b, x));
            }
            else {
                ASSERT_TRUE(std::holds_alternative<Unsat>(r));
                ASSERT_FALSE(expected_sat);
                // Core soundness: hard plus the core alone is already unsatisfiable.
                const auto& core = std::get<Unsat>(r).core;
                auto sub = ptrs(hard);
                for (auto i : core) {
                    ASSERT_LT(i, assume.size());
                    sub.push_back(&assume[i]);
                }
                ASSERT_FALSE(testing::ref_sat(doms, sub));
            }
        }
        SUCCEED();
    }

    TEST(Oracle, CountsCalls)
    {
        Oracle oracle({Domain(0, 1)});
        EXPECT_EQ(oracle.calls(), 0u);
        oracle.solve(std::span<const Body>{});
        oracle.solve(std::vector<Body>{Atomic{VarId{0}, RelOp::Eq, 1}});
        EXPECT_EQ(oracle.calls(), 2u);
    }

    TEST(Oracle, EmptyDomainIsUnsat)
    {
        Oracle oracle({Domain(0, 1), Domain::empty()});
        EXPECT_TRUE(std::holds_alternative<Unsat>(oracle.solve(std::span<const Body>{})));
    }

    TEST(Oracle, ZeroBudgetGivesUp)
    {
        // Pigeonhole: four values into three slots needs search.
        std::vector<Domain> doms(4, Domain(0, 2));
        std::vector<Body> hard;
        for (std::uint32_t i = 0; i < 4; ++i)
            for (std::uint32_t j = i + 1; j < 4; ++j)
                hard.push_back(Linear{{{1, VarId{i}}, {-1, VarId{j}}}, RelOp::Ne, 0});
        Oracle tight(doms, 0);
        EXPECT_TRUE(std::holds_alternative<BudgetExceeded>(tight.solve(hard)));
        Oracle loose(doms, 1000);
        EXPECT_TRUE(std::holds_alternative<Unsat>(loose.solve(hard)));
    }

    TEST(Oracle, BudgetFromEnvironment)
    {
        ::setenv("P2S_BUDGET", "1234", 1);
        EXPECT_EQ(budget_from_env(), 1234u);
        ::setenv("P2S_BUDGET", "garbage", 1);
        EXPECT_EQ(budget_from_env(77), 77u);
        ::unsetenv("P2S_BUDGET");
        EXPECT_EQ(budget_from_env(), default_oracle_budget);
    }

    TEST(Oracle, FreeFunction)
    {
        OracleProblem p;
        p.domains = {Domain(0, 1)};
        p.hard = {Atomic{VarId{0}, RelOp::Ge, 1}};
        p.assumptions = {Atomic{VarId{0}, RelOp::Le, 0}};
        auto r = solve(p);
        ASSERT_TRUE(std::holds_alternative<Unsat>(r));
        EXPECT_EQ(std::get<Unsat>(r).core, (std::vector<std::size_t>{0}));
    }

    TEST(Negate, Examples)
    {
        VarId x{0}, y{1};
        EXPECT_EQ(negate(Body(Atomic{x, RelOp::Le, 3})), Body(Atomic{x, RelOp::Ge, 4}));
        EXPECT_EQ(negate(Body(Clause{{{x, RelOp::Eq, 1}}})), Body(Atomic{x, RelOp::Ne, 1}));
        EXPECT_TRUE(negate(truth()).is_false());
        // The negation of false holds everywhere.
        std::vector<Domain> doms{Domain(0, 2)};
        testing::enumerate(doms, [&](const std::vector<Value>& v) {
            EXPECT_TRUE(ref_eval(negate(falsity()), v));
            return true;
        });
        // Negated atoms of a clause come back as a flat clause when negated again.
        Body c = Clause{{{x, RelOp::Le, 1}, {y, RelOp::Ge, 2}}};
        Body nn = negate_conjunction(std::vector<Body>{negate(c)});
        EXPECT_TRUE(std::holds_alternative<Clause>(nn.node));
        EXPECT_TRUE(negate_conjunction(std::span<const Body>{}).is_false());
    }

    TEST(Negate, ComplementOnRandomBodies)
    {
        testing::BodyFuzzer fz(5, 3, 0, 2);
        std::vector<Domain> doms(3, Domain(0, 2));
        for (int k = 0; k < 300; ++k) {
            Body b = fz.body(2);
            Body n = negate(b);
            std::vector<Body> pair{b, fz.body(1)};
            Body nc = negate_conjunction(pair);
            testing::enumerate(doms, [&](const std::vector<Value>& x) {
                EXPECT_NE(ref_eval(b, x), ref_eval(n, x)) << format_body(b, {});
                EXPECT_EQ(ref_eval(nc, x), !(ref_eval(pair[0], x) && ref_eval(pair[1], x)));
                return true;
            });
        }
    }

} // namespace
} // namespace p2s
