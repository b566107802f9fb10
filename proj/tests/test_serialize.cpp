#include "grds/serialize.hpp"
#include "test_util.hpp"

#include <sstream>

using namespace grds;
using grds::test::near;

TEST(Serialize, MatrixRoundTrip) {
    Stream s(1);
    const cmat m = s.gaussian_matrix(3, 4);
    const json j = to_json(m);
    EXPECT_EQ(j.size(), 3u);
    EXPECT_EQ(j[0].size(), 4u);
    EXPECT_TRUE(near(cmat_from_json(json::parse(j.dump())), m, 0.0));
}

TEST(Serialize, MatrixAcceptsRealEntries) {
    const cmat m = cmat_from_json(json::parse("[[1, 2], [3, [4, -1]]]"));
    EXPECT_EQ(m(0, 1), cplx(2.0, 0.0));
    EXPECT_EQ(m(1, 1), cplx(4.0, -1.0));
    EXPECT_THROW(cmat_from_json(json::parse("[[1, 2], [3]]")), std::invalid_argument);
    EXPECT_THROW(cmat_from_json(json::parse("[[\"x\"]]")), std::invalid_argument);
}

TEST(Serialize, StabilityRoundTrip) {
    const StabilitySpec stability = make_stability({4.0, 3.0, 2.0, 1.0}, 1, 2, 1);
    const json j = to_json(stability);
    EXPECT_EQ(j, json::parse(R"({"kappa": [4.0, 3.0, 2.0, 1.0], "la": 1, "lb": 2, "lc": 1})"));
    const StabilitySpec back = stability_from_json(j);
    EXPECT_EQ(back.kappa, stability.kappa);
    EXPECT_EQ(back.la, 1);
    EXPECT_EQ(back.lb, 2);
    EXPECT_EQ(back.lc, 1);
}

TEST(Serialize, StabilityErrorsNameTheField) {
    try {
        stability_from_json(json::parse(R"({"kappa": [2.0, 1.0], "la": 1, "lc": 1})"));
        FAIL() << "expected an error";
    } catch (const std::invalid_argument& e) {
        EXPECT_NE(std::string(e.what()).find("lb"), std::string::npos);
    }
    EXPECT_THROW(stability_from_json(json::parse(R"({"kappa": [1.0, 2.0], "la": 1, "lb": 0, "lc": 1})")),
                 std::invalid_argument);
}

TEST(Serialize, EnsembleRoundTrips) {
    Stream s(2);
    std::vector<Ensemble> ensembles;
    ensembles.push_back(make_toeplitz_model(5, 3.0, OmegaLaw::bernoulli_pm1, 0.3).ensemble);
    ensembles.push_back(make_iid_ensemble(4));
    ensembles.push_back(make_zero_ensemble(3));
    ensembles.push_back(make_haar_ensemble(0.5 * haar_unitary(3, s), haar_unitary(3, s)));
    for (const Ensemble& e : ensembles) {
        const Ensemble back = ensemble_from_json(json::parse(to_json(e).dump()));
        EXPECT_EQ(back.kind, e.kind);
        EXPECT_EQ(back.dim, e.dim);
        EXPECT_EQ(to_json(back), to_json(e));
        // Same law: identical draws from identical streams.
        Stream a(9), b(9);
        EXPECT_TRUE(near(back.draw(a), e.draw(b), 1e-15));
    }
}

TEST(Serialize, CustomSamplerIsRejected) {
    const Ensemble e = make_custom_ensemble(2, "mine", [](Stream&) { return cmat(cmat::Zero(2, 2)); });
    EXPECT_EQ(to_json(e)["name"], "mine");
    EXPECT_THROW(ensemble_from_json(to_json(e)), std::invalid_argument);
}

TEST(Serialize, ModelRoundTrip) {
    const ToeplitzModel t = make_toeplitz_model(7, 3.0, OmegaLaw::uniform_pm1);
    const ModelSpec m = make_model(t.kappa, 1, 4, 2, t.ensemble, 1e-4, 2);
    const json j = to_json(m);
    const ModelSpec back = model_from_json(json::parse(dump(j)));
    EXPECT_EQ(to_json(back), j);
    EXPECT_EQ(back.q, 2);
    EXPECT_EQ(back.lambda, 1e-4);
}

TEST(Serialize, HypothesisReportHasOneEntryPerHypothesis) {
    const HypothesisReport r = check_hypotheses_eta(0.5, 2e-14, 1, 0.5);
    const json j = to_json(r);
    for (const char* key : {"H1", "H2", "H3", "H4", "H5", "H5_middle"}) EXPECT_TRUE(j.contains(key)) << key;
    EXPECT_FALSE(j["H5"]["evaluated"].get<bool>());
    EXPECT_EQ(j["all_pass"].get<bool>(), r.all_pass());
    EXPECT_EQ(j["T0"].get<double>(), r.t0);
}

TEST(Serialize, BoundsWithoutUpperUseNull) {
    LyapunovBounds b;
    b.lower = 0.5;
    b.upper = std::numeric_limits<double>::quiet_NaN();
    const json j = to_json(b);
    EXPECT_TRUE(j["upper"].is_null());
    EXPECT_EQ(j["lower"].get<double>(), 0.5);
}

TEST(Serialize, AuditConfigRoundTripAndValidation) {
    AuditConfig c;
    c.samples = 123;
    c.dims = {4, 16};
    c.y_norm_bound = 1.0;
    const AuditConfig back = audit_config_from_json(to_json(c));
    EXPECT_EQ(to_json(back), to_json(c));
    json bad = to_json(c);
    bad["dims"] = {3};
    EXPECT_THROW(audit_config_from_json(bad), std::invalid_argument);
    bad["dims"] = {17};
    EXPECT_THROW(audit_config_from_json(bad), std::invalid_argument);
}

TEST(Serialize, RegionFlags) {
    RegionLabel l;
    EXPECT_EQ(region_flags(l), "");
    l.in_overwhelming = true;
    l.cone_index = 2;
    l.anticone_index = 1;
    l.steps = {1, 2};
    EXPECT_EQ(region_flags(l), "O|C2|A1|S1|S2");
    l.interspace = 0;
    EXPECT_EQ(region_flags(l), "O|C2|A1|S1|S2|I0");
}

TEST(Serialize, TrajectoryCsv) {
    TrajectoryRecord rec;
    rec.times = {0, 10};
    rec.d_values = {1.0, 0.25};
    rec.norm_a = {1.0, 0.5};
    rec.norm_gup = {0.0, 0.125};
    RegionLabel l;
    l.in_overwhelming = true;
    rec.labels = {RegionLabel{}, l};
    std::ostringstream os;
    write_trajectory_csv(os, rec);
    EXPECT_EQ(os.str(), "time,d,norm_a,norm_gup,flags\n0,1,1,0,\n10,0.25,0.5,0.125,O\n");
}

TEST(Serialize, DumpIsStable) {
    const json j = json::parse(R"({"b": 1, "a": [1.5, 2]})");
    EXPECT_EQ(dump(j), "{\n  \"a\": [\n    1.5,\n    2\n  ],\n  \"b\": 1\n}\n");
}

TEST(Serialize, ScorecardJson) {
    Scorecard sc;
    sc.seed = 7;
    CheckResult r;
    r.name = "x";
    r.reference = "ref";
    r.record(-1.0);
    r.record(2.0);
    sc.checks.push_back(r);
    const json j = to_json(sc);
    EXPECT_EQ(j["seed"].get<std::uint64_t>(), 7u);
    EXPECT_EQ(j["checks"][0]["violations"].get<long>(), 1);
    EXPECT_EQ(j["checks"][0]["worst_margin"].get<double>(), 2.0);
}
