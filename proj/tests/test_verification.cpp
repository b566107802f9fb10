#include "grds/verification.hpp"
#include "test_util.hpp"

#include <algorithm>
#include <set>

using namespace grds;

namespace {

VerifyConfig small_config(std::vector<std::string> checks) {
    VerifyConfig cfg;
    cfg.audit.samples = 200;
    cfg.audit.dims = {4, 8};
    cfg.checks = std::move(checks);
    return cfg;
}

}  // namespace

TEST(Registry, SortedWithUniqueReferences) {
    const auto& reg = check_registry();
    ASSERT_FALSE(reg.empty());
    std::set<std::string> names, refs;
    for (const CheckInfo& c : reg) {
        EXPECT_TRUE(names.insert(c.name).second) << c.name;
        EXPECT_TRUE(refs.insert(c.reference).second) << c.reference;
        EXPECT_TRUE(static_cast<bool>(c.run));
    }
    EXPECT_TRUE(std::is_sorted(reg.begin(), reg.end(),
                               [](const CheckInfo& a, const CheckInfo& b) { return a.name < b.name; }));
}

TEST(Registry, ResultsCarryTheirReference) {
    const Scorecard sc = run_all(small_config({"grassmann.group_law", "norm.helpers"}), 3);
    ASSERT_EQ(sc.checks.size(), 2u);
    for (const CheckResult& r : sc.checks) {
        const auto& reg = check_registry();
        const auto it = std::find_if(reg.begin(), reg.end(), [&](const CheckInfo& c) { return c.name == r.name; });
        ASSERT_NE(it, reg.end());
        EXPECT_EQ(r.reference, it->reference);
    }
}

TEST(RunAll, EmptyListGivesEmptyScorecard) {
    const Scorecard sc = run_all(small_config({}), 1);
    EXPECT_TRUE(sc.checks.empty());
    EXPECT_EQ(sc.total_violations(), 0);
    EXPECT_TRUE(sc.passed());
}

TEST(RunAll, UnknownNameThrows) {
    EXPECT_THROW(run_all(small_config({"grassmann.group_law", "no.such.check"}), 1), std::invalid_argument);
}

TEST(RunAll, SmallDefaultRunIsClean) {
    VerifyConfig cfg;
    cfg.audit.samples = 100;
    cfg.audit.dims = {4, 6};
    cfg.audit.movement_trajectories = 8;
    cfg.audit.third_order_triples = 30;
    cfg.audit.beta_inner = 500;
    const Scorecard sc = run_all(cfg, 2024);
    EXPECT_EQ(sc.checks.size(), check_registry().size());
    for (const CheckResult& r : sc.checks) {
        EXPECT_GT(r.samples, 0) << r.name;
        EXPECT_EQ(r.violations, 0) << r.name << " worst margin " << r.worst_margin;
    }
}

TEST(RunAll, ScorecardIsIndependentOfThreadCount) {
    VerifyConfig cfg = small_config({"contraction.norm", "expansion.bounds", "grassmann.gauge_invariance",
                                     "lyapunov.step_estimate", "vector.expansion"});
    cfg.threads = 1;
    const Scorecard one = run_all(cfg, 77);
    cfg.threads = 4;
    const Scorecard four = run_all(cfg, 77);
    ASSERT_EQ(one.checks.size(), four.checks.size());
    for (std::size_t i = 0; i < one.checks.size(); ++i) {
        EXPECT_EQ(one.checks[i].name, four.checks[i].name);
        EXPECT_EQ(one.checks[i].samples, four.checks[i].samples);
        EXPECT_EQ(one.checks[i].violations, four.checks[i].violations);
        EXPECT_EQ(one.checks[i].worst_margin, four.checks[i].worst_margin);
        EXPECT_EQ(one.checks[i].parameters, four.checks[i].parameters);
    }
}

TEST(RunAll, SubsetDrawsSameNumbersAsFullRun) {
    const Scorecard alone = run_all(small_config({"norm.helpers"}), 5);
    const Scorecard pair = run_all(small_config({"grassmann.group_law", "norm.helpers"}), 5);
    ASSERT_NE(pair.find("norm.helpers"), nullptr);
    EXPECT_EQ(alone.checks[0].worst_margin, pair.find("norm.helpers")->worst_margin);
    EXPECT_EQ(pair.find("absent"), nullptr);
}

TEST(Mutation, WeakerYBoundIsCaught) {
    VerifyConfig cfg = small_config({"expansion.bounds"});
    cfg.audit.samples = 1000;
    cfg.audit.y_norm_bound = 1.0;
    const Scorecard sc = run_all(cfg, 1);
    EXPECT_GT(sc.total_violations(), 0);
    EXPECT_FALSE(sc.passed());
}

TEST(Mutation, WeakerXBoundIsCaught) {
    VerifyConfig cfg = small_config({"expansion.bounds"});
    cfg.audit.x_norm_bound = 0.9;
    EXPECT_GT(run_all(cfg, 1).total_violations(), 0);
}

TEST(Mutation, RemovedStepSlackIsCaught) {
    VerifyConfig cfg = small_config({"lyapunov.step_estimate"});
    cfg.audit.samples = 1000;
    cfg.audit.step_slack_scale = 0.0;
    EXPECT_GT(run_all(cfg, 1).total_violations(), 0);
}

TEST(CheckStreamId, DistinctPerName) {
    std::set<std::uint64_t> ids;
    for (const CheckInfo& c : check_registry()) ids.insert(check_stream_id(c.name));
    EXPECT_EQ(ids.size(), check_registry().size());
}
