#include <catch2/catch_amalgamated.hpp>

#include <string>

#include "kwsum/rouge.hpp"
#include "rouge_oracles.hpp"

using namespace kwsum;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

std::string join(const oracle::Seq& seq) {
    std::string s;
    for (const auto& t : seq) {
        if (!s.empty()) s.push_back(' ');
        s += t;
    }
    return s;
}

} // namespace

TEST_CASE("rouge_n: hand-counted unigram case") {
    const RougeScore s = rouge_n("the cat", "the cat sat", 1);
    CHECK_THAT(s.precision, WithinRel(1.0, 1e-12));
    CHECK_THAT(s.recall, WithinRel(2.0 / 3.0, 1e-12));
    CHECK_THAT(s.f, WithinRel(0.8, 1e-12));
}

TEST_CASE("rouge_n: identity and disjoint inputs") {
    for (const int n : {1, 2, 3}) {
        const RougeScore s = rouge_n("a b c d", "a b c d", n);
        CHECK(s.precision == 1.0);
        CHECK(s.recall == 1.0);
        CHECK(s.f == 1.0);
    }
    const RougeScore d = rouge_n("a b", "c d", 1);
    CHECK(d.precision == 0.0);
    CHECK(d.recall == 0.0);
    CHECK(d.f == 0.0);
    // n exceeding both lengths: zero denominators give zero scores
    const RougeScore z = rouge_n("a", "b", 2);
    CHECK(z.f == 0.0);
    CHECK_THROWS_AS(rouge_n("a", "b", 0), std::invalid_argument);
}

TEST_CASE("rouge_n: clipping counts repeated grams") {
    // cand repeats "the" 3x, ref has it 1x: clipped overlap 1 of 3
    const RougeScore s = rouge_n("the the the", "the cat", 1);
    CHECK_THAT(s.precision, WithinRel(1.0 / 3.0, 1e-12));
    CHECK_THAT(s.recall, WithinRel(0.5, 1e-12));
}

TEST_CASE("rouge_l: reordering drops the LCS") {
    const RougeScore s = rouge_l("A C B D", "A B C D");
    CHECK_THAT(s.precision, WithinRel(0.75, 1e-12));
    CHECK_THAT(s.recall, WithinRel(0.75, 1e-12));
    CHECK_THAT(s.f, WithinRel(0.75, 1e-12));

    const RougeScore id = rouge_l("same text here", "same text here");
    CHECK(id.f == 1.0);
    const RougeScore e = rouge_l("", "a b");
    CHECK(e.precision == 0.0);
    CHECK(e.recall == 0.0);
    CHECK(e.f == 0.0);
}

TEST_CASE("rouge_w: identity, empty, and alpha validation") {
    const RougeScore id = rouge_w("a b c d e", "a b c d e");
    CHECK_THAT(id.precision, WithinRel(1.0, 1e-12));
    CHECK_THAT(id.recall, WithinRel(1.0, 1e-12));
    CHECK_THAT(id.f, WithinRel(1.0, 1e-12));

    CHECK(rouge_w("", "a").f == 0.0);
    CHECK(rouge_w("a", "").f == 0.0);
    CHECK_THROWS_AS(rouge_w("a", "a", 1.0), std::invalid_argument);
    CHECK_THROWS_AS(rouge_w("a", "a", 0.5), std::invalid_argument);
}

TEST_CASE("rouge_w: consecutive matches outweigh scattered ones") {
    // same unigram overlap, different adjacency
    const RougeScore consecutive = rouge_w("a b c x x", "a b c y y");
    const RougeScore scattered = rouge_w("a x b x c", "a y b y c");
    CHECK(consecutive.f > scattered.f);
}

TEST_CASE("LCS DP matches the naive recursion up to length 4") {
    const auto seqs = oracle::all_sequences(4);
    for (const auto& a : seqs) {
        for (const auto& b : seqs) {
            const long naive = oracle::lcs_naive(a, b);
            REQUIRE(detail::lcs_length(a, b) == naive);
            REQUIRE(oracle::lcs_memo(a, b) == naive); // memo == no-memo
        }
    }
}

TEST_CASE("WLCS DP matches the naive recursion up to length 4") {
    const double alpha = 1.2;
    const auto seqs = oracle::all_sequences(4);
    for (const auto& a : seqs) {
        for (const auto& b : seqs) {
            const double naive = oracle::wlcs_naive(a, b, alpha);
            REQUIRE_THAT(detail::wlcs_score(a, b, alpha), WithinAbs(naive, 1e-9));
            REQUIRE_THAT(oracle::wlcs_memo(a, b, alpha), WithinAbs(naive, 1e-12));
        }
    }
}

TEST_CASE("DP equals memoized recursion up to length 5") {
    const double alpha = 1.2;
    const auto seqs = oracle::all_sequences(5);
    for (const auto& a : seqs) {
        for (const auto& b : seqs) {
            REQUIRE(detail::lcs_length(a, b) == oracle::lcs_memo(a, b));
            REQUIRE_THAT(detail::wlcs_score(a, b, alpha),
                         WithinAbs(oracle::wlcs_memo(a, b, alpha), 1e-9));
        }
    }
}

TEST_CASE("scores of all variants are bounded and consistent on extremes") {
    const std::vector<RougeVariant> variants = {
        RougeVariant::parse("1"), RougeVariant::parse("2"), RougeVariant::parse("l"),
        RougeVariant::parse("w")};
    const std::string same = "tokens all equal here now";
    const std::string other = "completely different words instead";
    for (const auto& v : variants) {
        const RougeScore s1 = score_variant(same, same, v);
        CHECK_THAT(s1.f, WithinRel(1.0, 1e-12));
        const RougeScore s0 = score_variant(same, other, v);
        CHECK(s0.f == 0.0);
    }

    // F stays within [0, max(P, R)] on assorted pairs
    const std::vector<std::pair<std::string, std::string>> pairs = {
        {"the cat", "the cat sat"},
        {"a b c", "c b a"},
        {"x y", "x y z w"},
        {"one two three", "one three"},
    };
    for (const auto& v : variants) {
        for (const auto& [c, r] : pairs) {
            const RougeScore s = score_variant(c, r, v);
            CHECK(s.f >= 0.0);
            CHECK(s.f <= std::max(s.precision, s.recall) + 1e-12);
            CHECK(s.precision <= 1.0);
            CHECK(s.recall <= 1.0);
        }
    }
}

TEST_CASE("evaluate_corpus: arithmetic means per variant") {
    const std::vector<RougeVariant> v1 = {RougeVariant::parse("1")};
    const std::pair<std::string, std::string> p1 = {"the cat", "the cat sat"}; // F = 0.8
    const std::pair<std::string, std::string> p2 = {"same", "same"};           // F = 1.0

    const auto single = evaluate_corpus({p1}, v1);
    REQUIRE(single.size() == 1);
    CHECK_THAT(single[0].f, WithinRel(0.8, 1e-12));

    const auto both = evaluate_corpus({p1, p2}, v1);
    CHECK_THAT(both[0].f, WithinRel(0.9, 1e-12));
    CHECK_THAT(both[0].precision, WithinRel(1.0, 1e-12));
    CHECK_THAT(both[0].recall, WithinRel((2.0 / 3.0 + 1.0) / 2.0, 1e-12));

    const auto identical = evaluate_corpus({p2, p2, p2}, v1);
    CHECK(identical[0].f == 1.0);

    CHECK_THROWS_AS(evaluate_corpus({}, v1), DataError);
}

TEST_CASE("variant parsing") {
    CHECK(RougeVariant::parse("1").name() == "1");
    CHECK(RougeVariant::parse("2").name() == "2");
    CHECK(RougeVariant::parse("l").name() == "l");
    CHECK(RougeVariant::parse("w").name() == "w");
    CHECK_THROWS_AS(RougeVariant::parse("bogus"), std::invalid_argument);
    CHECK_THROWS_AS(RougeVariant::parse("0"), std::invalid_argument);
}

TEST_CASE("tokenization for scoring matches the generator normalization") {
    // case and punctuation differences do not matter
    const RougeScore s = rouge_n("The CAT.", "the cat", 1);
    CHECK(s.f == 1.0);
    const std::string joined = join({"x", "y"});
    CHECK(joined == "x y");
}
