#include "support.hpp"

#include <gtest/gtest.h>

namespace p2s {
namespace {

    using testing::BodyFuzzer;
    using testing::ref_eval;

    TEST(Domain, RemoveTightensBounds)
    {
        Domain d(0, 5);
        d.remove(0);
        d.remove(3);
        EXPECT_EQ(d.lower(), 1);
        EXPECT_EQ(d.upper(), 5);
        EXPECT_FALSE(d.contains(3));
        EXPECT_EQ(d.size(), 4u);
        d.remove(5);
        d.remove(4);
        EXPECT_EQ(d.upper(), 2);
        EXPECT_EQ(d.values(), (std::vector<Value>{1, 2}));
        d.remove(1);
        d.remove(2);
        EXPECT_TRUE(d.is_empty());
    }

    TEST(Atomic, NegationIsComplement)
    {
        for (RelOp op : {RelOp::Le, RelOp::Ge, RelOp::Eq, RelOp::Ne}) {
            Atomic a{VarId{0}, op, 2};
            Atomic n = negate(a);
            for (Value x = -2; x <= 6; ++x)
                EXPECT_NE(a.holds(x), n.holds(x));
        }
    }

    TEST(Parse, GoldenModel)
    {
        UserModel m = testing::golden_model();
        ASSERT_EQ(m.vars.size(), 4u);
        ASSERT_EQ(m.constraints.size(), 4u);
        EXPECT_EQ(m.vars[2].name, "c");
        EXPECT_EQ(m.vars[0].domain, Domain(0, 6));
        EXPECT_EQ(*m.find_constraint("p2"), 3u);
        EXPECT_FALSE(m.find_constraint("p3"));
        const auto& p1 = std::get<Linear>(m.constraints[2].body.node);
        EXPECT_EQ(p1.rhs, -3);
        EXPECT_EQ(p1.terms.size(), 2u);
        EXPECT_TRUE(std::holds_alternative<Disjunction>(m.constraints[0].body.node));
    }

    TEST(Parse, AllConstraintForms)
    {
        UserModel m = parse_model("var x 0..3\nvar y -2..2\n"
                                  "con a: alldifferent(x, y)\n"
                                  "con b: lin 2*x - y + -1*x != 1\n"
                                  "con c: clause x <= 1 | y == 2\n"
                                  "con d: clause y != 0\n"
                                  "con e: or(clause x >= 3; lin x + y <= 0)\n");
        EXPECT_TRUE(std::holds_alternative<AllDifferent>(m.constraints[0].body.node));
        const auto& b = std::get<Linear>(m.constraints[1].body.node);
        EXPECT_EQ(b.terms.size(), 3u);
        EXPECT_EQ(b.terms[1].coeff, -1);
        EXPECT_EQ(b.op, RelOp::Ne);
        EXPECT_TRUE(std::holds_alternative<Clause>(m.constraints[2].body.node));
        EXPECT_TRUE(std::holds_alternative<Atomic>(m.constraints[3].body.node));
        EXPECT_EQ(std::get<Disjunction>(m.constraints[4].body.node).parts.size(), 2u);
    }

    TEST(Parse, CommentsAndBlankLines)
    {
        UserModel m = parse_model("# header\n\nvar x 0..1 # trailing\n   \ncon k: clause x >= 1\n");
        EXPECT_EQ(m.vars.size(), 1u);
        EXPECT_EQ(m.constraints.size(), 1u);
    }

    struct BadModel {
        const char* text;
        std::size_t line;
    };

    class ParseErrors : public ::testing::TestWithParam<BadModel> {};

    TEST_P(ParseErrors, ReportsLine)
    {
        try {
            parse_model(GetParam().text);
            FAIL() << "expected a parse error";
        }
        catch (const ParseError& e) {
            EXPECT_EQ(e.line(), GetParam().line);
            EXPECT_GT(e.column(), 0u);
        }
    }

    INSTANTIATE_TEST_SUITE_P(Model, ParseErrors,
        ::testing::Values(BadModel{"var x 0..3\ncon a: clause y <= 1\n", 2}, BadModel{"var x 0..3\nvar x 0..2\n", 2},
            BadModel{"var x 0..3\ncon a: clause x <= 1\ncon a: clause x >= 1\n", 3},
            BadModel{"var x 0..3\ncon a: clause x < 1\n", 2}, BadModel{"var x 0..3 junk\n", 1},
            BadModel{"bogus\n", 1}, BadModel{"var x 0..3\ncon a: or(clause x <= 1\n", 2},
            BadModel{"var x 0..3\ncon a: lin 2 x <= 1\n", 2}),
        [](const auto& info) { return "case" + std::to_string(info.index); });

    TEST(Parse, EmptyDomainWarns)
    {
        std::vector<std::string> warnings;
        UserModel m = parse_model("var x 3..1\n", &warnings);
        ASSERT_EQ(warnings.size(), 1u);
        EXPECT_NE(warnings[0].find("line 1"), std::string::npos);
        EXPECT_TRUE(m.vars[0].domain.is_empty());
    }

    TEST(Serialize, GoldenRoundTrip)
    {
        UserModel m = testing::golden_model();
        std::string text = serialize_model(m);
        EXPECT_EQ(parse_model(text), m);
        EXPECT_EQ(serialize_model(parse_model(text)), text);
    }

    TEST(Serialize, RandomRoundTrip)
    {
        for (std::uint64_t seed = 0; seed < 200; ++seed) {
            UserModel m = testing::random_user_model(seed, 3, 4);
            for (auto& c : m.constraints)
                c.body = canonical(c.body);
            EXPECT_EQ(parse_model(serialize_model(m)), m) << serialize_model(m);
        }
    }

    TEST(Eval, AgreesWithReferenceOnRandomBodies)
    {
        BodyFuzzer fz(7, 3, -1, 3);
        std::vector<Domain> doms(3, Domain(-1, 3));
        for (int k = 0; k < 300; ++k) {
            Body b = fz.body(2);
            testing::enumerate(doms, [&](const std::vector<Value>& x) {
                Assignment a(3);
                for (std::uint32_t i = 0; i < 3; ++i)
                    a.set(VarId{i}, x[i]);
                EXPECT_EQ(eval(b, a), ref_eval(b, x));
                return true;
            });
        }
    }

    TEST(Eval, PartialAssignmentThrows)
    {
        UserModel m = testing::golden_model();
        Assignment a(4);
        a.set(VarId{0}, 1);
        EXPECT_THROW(eval(m.constraints[2].body, a), EvalError);
        a.set(VarId{1}, 5);
        EXPECT_TRUE(eval(m.constraints[2].body, a));
    }

    TEST(Eval, EmptyClauseAndConjunction)
    {
        Assignment a;
        EXPECT_FALSE(eval(falsity(), a));
        EXPECT_TRUE(eval(truth(), a));
        EXPECT_TRUE(falsity().is_false());
        EXPECT_TRUE(truth().is_true());
    }

    TEST(Scope, SortedUnique)
    {
        UserModel m = parse_model("var x 0..3\nvar y 0..3\nvar z 0..3\ncon a: or(clause z <= 1 | x == 2; lin y + z <= 2)\n");
        EXPECT_EQ(scope(m.constraints[0].body), (std::vector<VarId>{VarId{0}, VarId{1}, VarId{2}}));
    }

    TEST(Canonical, PreservesMeaning)
    {
        BodyFuzzer fz(11, 3, 0, 2);
        std::vector<Domain> doms(3, Domain(0, 2));
        for (int k = 0; k < 200; ++k) {
            Body b = fz.body(1);
            Body c = canonical(b);
            EXPECT_EQ(canonical(c), c);
            testing::enumerate(doms, [&](const std::vector<Value>& x) {
                EXPECT_EQ(ref_eval(b, x), ref_eval(c, x));
                return true;
            });
        }
    }

    TEST(Canonical, OrdersClauseAtoms)
    {
        Clause x{{{VarId{1}, RelOp::Le, 2}, {VarId{0}, RelOp::Ge, 1}}};
        Clause y{{{VarId{0}, RelOp::Ge, 1}, {VarId{1}, RelOp::Le, 2}}};
        EXPECT_EQ(canonical(x), canonical(y));
    }

    TEST(Format, Atoms)
    {
        UserModel m = testing::golden_model();
        EXPECT_EQ(format_atom({VarId{0}, RelOp::Le, 3}, m.vars), "a<=3");
        EXPECT_EQ(format_atom({VarId{3}, RelOp::Ne, -1}, m.vars), "d!=-1");
    }

} // namespace
} // namespace p2s
