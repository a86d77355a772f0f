#include "support.hpp"

#include <gtest/gtest.h>

namespace p2s {
namespace {

    using testing::ref_eval;

    /// Independent projection check: a user assignment is a solution iff some
    /// completion of the auxiliaries satisfies every solver constraint.
    bool projection_equivalent(const UserModel& user, const SolverModel& solver)
    {
        auto user_doms = testing::domains_of_vars(user.vars);
        std::vector<Domain> aux_doms;
        for (std::size_t i = user.vars.size(); i < solver.vars.size(); ++i)
            aux_doms.push_back(solver.vars[i].domain);
        bool same = true;
        testing::enumerate(user_doms, [&](const std::vector<Value>& x) {
            bool user_ok = true;
            for (const auto& c : user.constraints)
                user_ok = user_ok && ref_eval(c.body, x);
            bool solver_ok = false;
            auto check = [&](const std::vector<Value>& aux) {
                std::vector<Value> full = x;
                full.insert(full.end(), aux.begin(), aux.end());
                bool ok = true;
                for (const auto& c : solver.constraints)
                    ok = ok && ref_eval(c.body, full);
                solver_ok = solver_ok || ok;
                return !solver_ok;
            };
            if (aux_doms.empty())
                check({});
            else
                testing::enumerate(aux_doms, check);
            same = same && user_ok == solver_ok;
            return same;
        });
        return same;
    }

    TEST(Flatten, GoldenShape)
    {
        SolverModel s = flatten(testing::golden_model());
        ASSERT_EQ(s.vars.size(), 6u);
        EXPECT_EQ(s.vars[4].name, "x1");
        EXPECT_EQ(s.vars[5].name, "x2");
        EXPECT_EQ(s.aux_vars, (std::vector<VarId>{VarId{4}, VarId{5}}));
        ASSERT_EQ(s.constraints.size(), 6u);
        EXPECT_EQ(s.constraints[0].id, "no1.1");
        EXPECT_EQ(s.constraints[3].id, "no2.2");
        EXPECT_EQ(s.constraints[4].id, "p1");
        EXPECT_EQ(s.provenance.solver_to_user, (std::vector<std::size_t>{0, 0, 1, 1, 2, 3}));
        EXPECT_EQ(s.user_constraint_of(1).id, "no1");
        EXPECT_TRUE(s.is_aux(VarId{4}));
        EXPECT_FALSE(s.is_aux(VarId{3}));
        const auto& h = std::get<HalfReified>(s.constraints[0].body.node);
        EXPECT_EQ(h.guard, (Atomic{VarId{4}, RelOp::Eq, 1}));
    }

    TEST(Flatten, GoldenProjectionEquivalent)
    {
        UserModel u = testing::golden_model();
        SolverModel s = flatten(u);
        EXPECT_TRUE(projection_equivalent(u, s));
        EXPECT_TRUE(check_projection_equivalence(u, s, 1'000'000));
    }

    TEST(Flatten, RandomModelsProjectionEquivalent)
    {
        for (std::uint64_t seed = 0; seed < 150; ++seed) {
            UserModel u = testing::random_user_model(seed, 3, 3);
            for (bool decompose : {false, true})
                for (bool selectors : {false, true}) {
                    SolverModel s = flatten(u, {decompose, selectors});
                    for (const auto& c : s.constraints)
                        EXPECT_TRUE(is_solver_level(c.body));
                    for (std::size_t i = 0; i < s.constraints.size(); ++i)
                        EXPECT_LT(s.provenance.user_of(i), u.constraints.size());
                    EXPECT_TRUE(projection_equivalent(u, s)) << serialize_model(u);
                    EXPECT_TRUE(check_projection_equivalence(u, s, 1'000'000));
                }
        }
    }

    TEST(Flatten, DecomposeAllDifferent)
    {
        UserModel u = parse_model("var x 0..2\nvar y 0..2\nvar z 0..2\ncon a: alldifferent(x, y, z)\n");
        SolverModel s = flatten(u, {.decompose_alldiff = true});
        ASSERT_EQ(s.constraints.size(), 3u);
        for (const auto& c : s.constraints) {
            const auto& l = std::get<Linear>(c.body.node);
            EXPECT_EQ(l.op, RelOp::Ne);
            EXPECT_EQ(l.rhs, 0);
        }
        EXPECT_TRUE(std::holds_alternative<AllDifferent>(flatten(u).constraints[0].body.node));
    }

    TEST(Flatten, SelectorDisjunctions)
    {
        SolverModel s = flatten(testing::golden_model(), {.selector_disjunctions = true});
        EXPECT_GT(s.aux_vars.size(), 2u);
        EXPECT_TRUE(projection_equivalent(s.source, s));
    }

    TEST(Flatten, AuxNamesAvoidClashes)
    {
        UserModel u = parse_model("var x1 0..3\nvar y 0..3\ncon a: or(lin x1 + y <= 1; lin x1 - y >= 2)\n");
        SolverModel s = flatten(u);
        ASSERT_EQ(s.vars.size(), 3u);
        EXPECT_NE(s.vars[2].name, "x1");
        EXPECT_TRUE(projection_equivalent(u, s));
    }

    TEST(Flatten, MutationIsDetected)
    {
        // Weakening a flattened constraint changes the projected solutions,
        // and both checkers must notice. The bound is relaxed so that the
        // model has solutions to gain.
        UserModel u = testing::golden_model();
        for (auto& v : u.vars)
            v.domain = Domain(0, 9);
        SolverModel s = flatten(u);
        ASSERT_TRUE(projection_equivalent(u, s));
        std::get<Linear>(s.constraints[4].body.node).rhs = -2;
        EXPECT_FALSE(projection_equivalent(u, s));
        EXPECT_FALSE(check_projection_equivalence(u, s, 1'000'000));

        SolverModel t = flatten(u);
        t.constraints.erase(t.constraints.begin() + 1);
        t.provenance.solver_to_user.erase(t.provenance.solver_to_user.begin() + 1);
        EXPECT_FALSE(projection_equivalent(u, t));
        EXPECT_FALSE(check_projection_equivalence(u, t, 1'000'000));
    }

    TEST(Flatten, ProjectionCap)
    {
        UserModel u = testing::golden_model();
        EXPECT_THROW(check_projection_equivalence(u, flatten(u), 10), CapExceeded);
    }

} // namespace
} // namespace p2s
