#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "oracles.hpp"
#include "qapswarm/qaplib_io.hpp"

using namespace qapswarm;

TEST(ParseInstance, SmallestWellFormed) {
    const auto inst = parse_instance("2  0 1  1 0   0 3  3 0");
    EXPECT_EQ(inst.n, 2u);
    EXPECT_EQ(inst.flow, (SquareMatrix<double>{{0, 1}, {1, 0}}));
    EXPECT_EQ(inst.distance, (SquareMatrix<double>{{0, 3}, {3, 0}}));
    EXPECT_TRUE(inst.integral);
    EXPECT_FALSE(inst.known_best.has_value());
}

TEST(ParseInstance, LineBreaksAreNotSignificant) {
    const auto a = parse_instance("3\n\n1 2 3\n4 5 6\n7 8 9\n\n9 8 7\n6 5 4\n3 2 1\n");
    const auto b = parse_instance("3 1 2 3 4 5 6 7 8 9 9 8 7 6 5 4 3 2 1");
    EXPECT_EQ(a.flow, b.flow);
    EXPECT_EQ(a.distance, b.distance);
    EXPECT_EQ(a.flow(1, 2), 6);
    EXPECT_EQ(a.distance(2, 0), 3);
}

TEST(ParseInstance, TruncatedInputIsTokenCountMismatch) {
    try {
        parse_instance("3  0 1");
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_NE(std::string(e.what()).find("token count mismatch"), std::string::npos);
    }
}

TEST(ParseInstance, ExtraTokenReportsItsPosition) {
    try {
        parse_instance("2 0 1 1 0 0 3 3 0 7");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.token_index(), 10u);
    }
}

TEST(ParseInstance, NonNumericTokenReportsPosition) {
    try {
        parse_instance("2\n0 1 x 0\n0 3 3 0");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.token_index(), 4u);
        EXPECT_EQ(e.line(), 2u);
        EXPECT_NE(std::string(e.what()).find("non-numeric"), std::string::npos);
    }
}

TEST(ParseInstance, RejectsNegativeEntryAndTinySize) {
    EXPECT_THROW(parse_instance("2 0 1 -1 0 0 3 3 0"), ParseError);
    EXPECT_THROW(parse_instance("1 0 0"), ParseError);
    EXPECT_THROW(parse_instance(""), ParseError);
    EXPECT_THROW(parse_instance("2.5 0 0 0 0 0 0 0 0"), ParseError);
}

TEST(ParseInstance, RealEntriesClearIntegralFlag) {
    const auto inst = parse_instance("2 0 1.5 1 0 0 3 3 0");
    EXPECT_FALSE(inst.integral);
    EXPECT_DOUBLE_EQ(inst.flow(0, 1), 1.5);
}

TEST(ParseInstance, RoundTripThroughFormat) {
    for (std::uint32_t seed = 0; seed < 20; ++seed) {
        const auto inst = oracle::random_instance(2 + seed % 9, seed, 1000);
        const auto again = parse_instance(format_instance(inst));
        EXPECT_EQ(again.n, inst.n);
        EXPECT_EQ(again.flow, inst.flow);
        EXPECT_EQ(again.distance, inst.distance);
    }
}

// Random token streams: the parser accepts exactly the inputs that are well formed.
TEST(ParseInstance, FuzzAcceptsOnlyWellFormedStreams) {
    std::mt19937 gen(7);
    std::uniform_int_distribution<int> coin(0, 9);
    int accepted = 0;
    for (int trial = 0; trial < 3000; ++trial) {
        const int n = std::uniform_int_distribution<int>(0, 4)(gen);
        const int want = 1 + 2 * n * n;
        const int count = coin(gen) < 6 ? want : std::uniform_int_distribution<int>(0, want + 3)(gen);
        std::ostringstream text;
        text << n;
        bool negative = false, garbage = false;
        for (int i = 1; i < count; ++i) {
            const int r = coin(gen);
            if (r == 0) {
                text << " -" << (1 + coin(gen));
                negative = true;
            } else if (r == 1 && coin(gen) == 0) {
                text << " a" << coin(gen);
                garbage = true;
            } else {
                text << (coin(gen) < 5 ? "\n" : " ") << coin(gen);
            }
        }
        const bool well_formed = n >= 2 && count == want && !negative && !garbage;
        bool ok = true;
        QapInstance inst;
        try {
            inst = parse_instance(text.str());
        } catch (const ParseError&) {
            ok = false;
        }
        ASSERT_EQ(ok, well_formed) << text.str();
        if (ok) {
            ++accepted;
            ASSERT_EQ(inst.flow.size(), static_cast<std::size_t>(n));
            ASSERT_EQ(inst.distance.size(), static_cast<std::size_t>(n));
            for (double v : inst.flow.values()) ASSERT_GE(v, 0);
            for (double v : inst.distance.values()) ASSERT_GE(v, 0);
        }
    }
    EXPECT_GT(accepted, 100);
}

TEST(ParseReferenceSolution, IdentityPermutation) {
    const auto s = parse_reference_solution("2 6 1 2");
    EXPECT_EQ(s.n, 2u);
    EXPECT_EQ(s.cost, 6);
    EXPECT_EQ(s.permutation, (std::vector<std::int32_t>{0, 1}));
}

TEST(ParseReferenceSolution, ShiftsToZeroBased) {
    const auto s = parse_reference_solution("3 17\n3 1 2\n");
    EXPECT_EQ(s.cost, 17);
    EXPECT_EQ(s.permutation, (std::vector<std::int32_t>{2, 0, 1}));
}

TEST(ParseReferenceSolution, Errors) {
    try {
        parse_reference_solution("2 6 1 1");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_NE(std::string(e.what()).find("duplicate"), std::string::npos);
        EXPECT_EQ(e.token_index(), 4u);
    }
    EXPECT_THROW(parse_reference_solution("3 6 1 2"), ParseError);
    EXPECT_THROW(parse_reference_solution("2 6 1 3"), ParseError);
    EXPECT_THROW(parse_reference_solution("2 6 0 1"), ParseError);
    EXPECT_THROW(parse_reference_solution("2"), ParseError);
}

TEST(LoadInstance, MissingFileAndNameFromPath) {
    EXPECT_THROW(load_instance("/nonexistent/file.dat"), std::runtime_error);
    const auto dir = oracle::temp_dir("io");
    write_text(dir / "tiny.dat", "2 0 1 1 0 0 3 3 0\n");
    EXPECT_EQ(load_instance((dir / "tiny.dat").string()).name, "tiny");
    write_text(dir / "bad.dat", "2 0 1 1 0 0 3 3\n");
    try {
        load_instance((dir / "bad.dat").string());
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_NE(std::string(e.what()).find("bad.dat"), std::string::npos);
    }
}

TEST(FormatSolution, QaplibLayout) {
    const std::vector<std::int32_t> perm{2, 0, 1};
    EXPECT_EQ(format_solution(perm, 17), "3 17\n3 1 2\n");
    const auto back = parse_reference_solution(format_solution(perm, 17));
    EXPECT_EQ(back.permutation, perm);
}
