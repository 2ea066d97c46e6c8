#include <gtest/gtest.h>

#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "bubblelab/error.hpp"
#include "bubblelab/io/config.hpp"

using namespace bubblelab;
using namespace bubblelab::io;

namespace {

std::string error_of(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST(Config, MinimalParseUsesDefaults) {
    ExperimentConfig c = parse_config("experiment = greens\n");
    EXPECT_EQ(c.kind, ExperimentKind::Greens);
    EXPECT_EQ(c.n, 3);
    EXPECT_DOUBLE_EQ(c.h, 1.0 / 32);
    EXPECT_EQ(c.seed, 0x5eedu);
}

TEST(Config, SectionsCommentsAndLists) {
    ExperimentConfig c = parse_config(
        "experiment = correction-sweep  # trailing comment\n"
        "eps = 0.1, 0.05,0.025\n"
        "[reduction]\n"
        "linear_tol = 1e-6\n");
    ASSERT_EQ(c.eps.size(), 3u);
    EXPECT_DOUBLE_EQ(c.eps[2], 0.025);
    EXPECT_DOUBLE_EQ(c.reduction.linear_tol, 1e-6);
}

TEST(Config, NonPositiveEpsNamesTheEntry) {
    const std::string e = error_of("experiment = correction-sweep\neps = 0.1,-0.2\n");
    EXPECT_NE(e.find("eps[1]"), std::string::npos) << e;
    EXPECT_NE(e.find("positive"), std::string::npos) << e;
}

// Expected suggestions computed with a plain Levenshtein implementation in Python
// over the help-config key list; ties go to the alphabetically first key.
TEST(Config, UnknownKeySuggestsNearest) {
    EXPECT_EQ(suggest_key("epsilon_"), "eps_min");
    EXPECT_EQ(suggest_key("hopf.sampels"), "hopf.samples");
    EXPECT_EQ(suggest_key("reduction.linear_tl"), "reduction.linear_tol");
    EXPECT_EQ(suggest_key("tol.grean"), "tol.grad");
    const std::string e = error_of("experiment = greens\nepsilon_ = 0.1\n");
    EXPECT_NE(e.find("unknown key 'epsilon_' (did you mean 'eps_min'?)"), std::string::npos) << e;
}

TEST(Config, EditDistance) {
    EXPECT_EQ(edit_distance("kitten", "sitting"), 3u);
    EXPECT_EQ(edit_distance("", "abc"), 3u);
    EXPECT_EQ(edit_distance("flaw", "lawn"), 2u);
}

TEST(Config, AllViolationsAreReported) {
    const std::string e = error_of("experiment = greens\nh = -1\nn = 2\nbogus = 1\nh = 0.1\n");
    EXPECT_NE(e.find("bogus"), std::string::npos) << e;
    EXPECT_NE(e.find("duplicate"), std::string::npos) << e;
    EXPECT_NE(e.find("n "), std::string::npos) << e;
    EXPECT_NE(error_of("n = 3\n").find("missing required key 'experiment'"), std::string::npos);
    EXPECT_NE(error_of("experiment = nonsense\n").find("nonsense"), std::string::npos);
}

TEST(Config, PreconditionsChecked) {
    // pole outside the domain
    EXPECT_FALSE(error_of("experiment = greens\npoles = 2,0,0\n").empty());
    // xi0 not fixed by the group
    EXPECT_FALSE(error_of("experiment = project\ngroup = orthogonal\ngroup.m = 2\nxi0 = 0,0.1,0\n").empty());
    // Q not positive on the domain
    EXPECT_FALSE(error_of("experiment = project\nq = affine\nq.c = 0.1\nq.slope = 1,0,0\n").empty());
}

// Every tunable that appears in the help dump must be settable, and vice versa.
TEST(Config, HelpDumpListsEveryKey) {
    const std::string help = "\n" + help_config();
    const std::vector<std::string> keys = known_keys();
    const std::set<std::string> ks(keys.begin(), keys.end());
    for (const auto& k : keys) EXPECT_NE(help.find("\n" + k + " = "), std::string::npos) << k;
    // a sample of numerical tunables that must not be hidden
    for (const char* k : {"reduction.linear_tol", "reduction.min_hole_cells", "tol.expansion", "fd_step_rel",
                          "quad_tol", "eig_floor", "hessian_step", "collar_cells", "seed", "threads"}) {
        if (std::string(k) == "threads") {
            EXPECT_EQ(ks.count(k), 0u);  // a run option, not part of the config hash
            continue;
        }
        EXPECT_EQ(ks.count(k), 1u) << k;
    }
}

// Property: canonical text is a fixed point of parse . canonical.
TEST(Config, CanonicalRoundTrip) {
    ExperimentConfig c = parse_config(
        "experiment = reduced-energy-sweep\nq = affine\nq.slope = 0.5,0,0\neps = 0.01,0.02,0.03,0.04\n"
        "eta = 0,0,0 ; 0.1,0,0\nd = 1,0.9\n");
    const std::string t1 = canonical_text(c);
    const std::string t2 = canonical_text(parse_config(t1));
    EXPECT_EQ(t1, t2);
}

// Every shipped config must parse and validate.
TEST(Config, ShippedConfigsLoad) {
    std::size_t count = 0;
    for (const char* sub : {"/examples", "/acceptance"}) {
        for (const auto& e : std::filesystem::directory_iterator(std::string(BUBBLELAB_CONFIG_DIR) + sub)) {
            if (e.path().extension() != ".cfg") continue;
            EXPECT_NO_THROW(load_config(e.path().string())) << e.path();
            ++count;
        }
    }
    EXPECT_GE(count, 20u);
}
