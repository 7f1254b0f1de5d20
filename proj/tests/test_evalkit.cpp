// Matching and scoring semantics: rule dimensions, greedy pairing,
// per-kind partition, exact-arithmetic metrics, latency profile.

#include "tieout/tieout.hpp"

#include "fixtures.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <set>
#include <string>

using namespace tieout;

namespace {

Anomaly anom(AnomalyKind kind, const std::string& sub, const std::string& sec,
             std::set<std::string> docs) {
    Anomaly a;
    a.kind = kind;
    a.sub_label = sub;
    a.affected.security_ids.insert(sec);
    a.evidence.doc_ids = std::move(docs);
    return a;
}

GroundTruthEntry tru(AnomalyKind kind, const std::string& sub, const std::string& sec,
                     std::set<std::string> docs) {
    GroundTruthEntry t;
    t.kind = kind;
    t.sub_label = sub;
    t.security_id = sec;
    t.designated_doc_ids = std::move(docs);
    return t;
}

AnomalyReport report_of(std::vector<Anomaly> anomalies) {
    AnomalyReport r;
    r.anomalies = std::move(anomalies);
    return r;
}

GroundTruth truth_of(std::vector<GroundTruthEntry> entries) {
    GroundTruth g;
    g.entries = std::move(entries);
    return g;
}

} // namespace

TEST_CASE("evidence mode names round trip") {
    for (EvidenceMode m : {EvidenceMode::ignore, EvidenceMode::subset, EvidenceMode::exact})
        CHECK(evidence_mode_from_string(to_string(m)) == m);
    CHECK_THROWS_AS(evidence_mode_from_string("fuzzy"), std::invalid_argument);
}

TEST_CASE("matches checks each rule dimension independently") {
    Anomaly a = anom(AnomalyKind::MissingDocumentation, "Missing Information", "CS-1",
                     {"D1", "D2"});
    GroundTruthEntry t = tru(AnomalyKind::MissingDocumentation, "Missing Information", "CS-1",
                             {"D1"});
    MatchRule rule;

    SECTION("default rule accepts an aligned pair") {
        CHECK(matches(a, t, rule));
    }

    SECTION("kind gate") {
        t.kind = AnomalyKind::MissingFromCapTable;
        CHECK_FALSE(matches(a, t, rule));
        rule.require_kind = false;
        CHECK(matches(a, t, rule));
    }

    SECTION("sub-label gate is off by default") {
        t.sub_label = "Board Approval Missing";
        CHECK(matches(a, t, rule));
        rule.require_sublabel = true;
        CHECK_FALSE(matches(a, t, rule));
        t.sub_label = "Missing Information";
        CHECK(matches(a, t, rule));
    }

    SECTION("security gate") {
        t.security_id = "CS-2";
        CHECK_FALSE(matches(a, t, rule));
        rule.require_security = false;
        CHECK(matches(a, t, rule));
    }

    SECTION("subset evidence requires every designated doc") {
        t.designated_doc_ids = {"D1", "D2"};
        CHECK(matches(a, t, rule));
        t.designated_doc_ids = {"D3"};
        CHECK_FALSE(matches(a, t, rule));
        t.designated_doc_ids = {"D1", "D3"};
        CHECK_FALSE(matches(a, t, rule));
        t.designated_doc_ids.clear();
        CHECK(matches(a, t, rule));
    }

    SECTION("exact evidence requires set equality") {
        rule.evidence = EvidenceMode::exact;
        CHECK_FALSE(matches(a, t, rule));
        t.designated_doc_ids = {"D1", "D2"};
        CHECK(matches(a, t, rule));
        t.designated_doc_ids.clear();
        CHECK_FALSE(matches(a, t, rule));
        a.evidence.doc_ids.clear();
        CHECK(matches(a, t, rule));
    }

    SECTION("ignore evidence never looks at docs") {
        rule.evidence = EvidenceMode::ignore;
        t.designated_doc_ids = {"D9"};
        CHECK(matches(a, t, rule));
    }

    SECTION("event evidence does not satisfy doc designations") {
        a.evidence.doc_ids.clear();
        a.evidence.event_ids = {"D1"};
        CHECK_FALSE(matches(a, t, rule));
    }
}

TEST_CASE("greedy pairing walks the report in order") {
    MatchRule rule;
    rule.evidence = EvidenceMode::ignore;

    SECTION("one truth entry is consumed by the first matching anomaly") {
        AnomalyReport r = report_of({
            anom(AnomalyKind::InconsistentTerms, "Data Discrepancy", "CS-1", {}),
            anom(AnomalyKind::InconsistentTerms, "Data Discrepancy", "CS-1", {}),
        });
        GroundTruth g = truth_of({
            tru(AnomalyKind::InconsistentTerms, "Data Discrepancy", "CS-1", {}),
        });
        MatchResult m = match(r, g, rule);
        REQUIRE(m.pairs.size() == 1);
        CHECK(m.pairs[0] == std::pair<std::size_t, std::size_t>{0, 0});
        CHECK(m.unmatched_anomalies == std::vector<std::size_t>{1});
        CHECK(m.unmatched_truth.empty());
    }

    SECTION("pairs cross-index when report and truth orders differ") {
        AnomalyReport r = report_of({
            anom(AnomalyKind::MissingFromCapTable, "Unrecorded Position", "CS-2", {}),
            anom(AnomalyKind::MissingDocumentation, "Missing Information", "CS-1", {}),
        });
        GroundTruth g = truth_of({
            tru(AnomalyKind::MissingDocumentation, "Missing Information", "CS-1", {}),
            tru(AnomalyKind::MissingFromCapTable, "Unrecorded Position", "CS-2", {}),
        });
        MatchResult m = match(r, g, rule);
        REQUIRE(m.pairs.size() == 2);
        CHECK(m.pairs[0] == std::pair<std::size_t, std::size_t>{0, 1});
        CHECK(m.pairs[1] == std::pair<std::size_t, std::size_t>{1, 0});
        CHECK(m.unmatched_anomalies.empty());
        CHECK(m.unmatched_truth.empty());
    }

    SECTION("leftover truth entries surface as unmatched") {
        AnomalyReport r = report_of({});
        GroundTruth g = truth_of({
            tru(AnomalyKind::InconsistentTerms, "Data Discrepancy", "CS-1", {}),
            tru(AnomalyKind::MissingFromCapTable, "Unrecorded Position", "CS-2", {}),
        });
        MatchResult m = match(r, g, rule);
        CHECK(m.pairs.empty());
        CHECK(m.unmatched_anomalies.empty());
        CHECK(m.unmatched_truth == std::vector<std::size_t>{0, 1});
    }
}

TEST_CASE("score partitions by kind with exact metrics") {
    MatchRule rule;
    rule.evidence = EvidenceMode::ignore;
    AnomalyReport r = report_of({
        anom(AnomalyKind::MissingDocumentation, "Missing Information", "CS-1", {}),
        anom(AnomalyKind::InconsistentTerms, "Data Discrepancy", "CS-9", {}),
    });
    GroundTruth g = truth_of({
        tru(AnomalyKind::MissingDocumentation, "Missing Information", "CS-1", {}),
        tru(AnomalyKind::MissingFromCapTable, "Unrecorded Position", "CS-2", {}),
    });
    ScoreCard card = score(r, g, rule);

    CHECK(card.overall.true_positives == 1);
    CHECK(card.overall.false_positives == 1);
    CHECK(card.overall.false_negatives == 1);
    CHECK(card.overall.precision() == Rational(1, 2));
    CHECK(card.overall.recall() == Rational(1, 2));
    CHECK(card.overall.f1() == Rational(1, 2));

    REQUIRE(card.by_kind.size() == 3);
    const CategoryScore& md = card.by_kind.at("MissingDocumentation");
    CHECK(md.true_positives == 1);
    CHECK(md.false_positives == 0);
    CHECK(md.false_negatives == 0);
    CHECK(md.f1() == Rational(1));

    // A false positive lands under the anomaly's kind, a miss under the
    // truth entry's kind.
    const CategoryScore& it = card.by_kind.at("InconsistentTerms");
    CHECK(it.true_positives == 0);
    CHECK(it.false_positives == 1);
    CHECK(it.false_negatives == 0);
    const CategoryScore& mfct = card.by_kind.at("MissingFromCapTable");
    CHECK(mfct.false_negatives == 1);
    CHECK(mfct.f1() == Rational(0));
}

TEST_CASE("zero-denominator metrics collapse to zero") {
    CategoryScore empty;
    CHECK(empty.precision() == Rational(0));
    CHECK(empty.recall() == Rational(0));
    CHECK(empty.f1() == Rational(0));

    ScoreCard card = score(AnomalyReport{}, GroundTruth{}, MatchRule{});
    CHECK(card.overall.f1() == Rational(0));
    for (const auto& [kind, s] : card.by_kind) {
        CHECK(s.f1() == Rational(0));
    }
}

TEST_CASE("empty report against real faults scores zero recall") {
    CleanCompany clean = generate_clean(stage_preset("seed"), 4);
    InjectionSpec spec = make_injection_spec(stage_preset("seed"), 6, 4);
    InjectedCompany faulty = inject(clean.graph, clean.ref, spec);

    ScoreCard card = score(AnomalyReport{}, faulty.truth, MatchRule{});
    CHECK(card.overall.true_positives == 0);
    CHECK(card.overall.false_positives == 0);
    CHECK(card.overall.false_negatives == 6);
    CHECK(card.overall.recall() == Rational(0));
    CHECK(card.overall.f1() == Rational(0));
}

TEST_CASE("end-to-end recovery pairs every injected fault") {
    CleanCompany clean = generate_clean(stage_preset("seed"), 4);
    InjectionSpec spec = make_injection_spec(stage_preset("seed"), 6, 4);
    InjectedCompany faulty = inject(clean.graph, clean.ref, spec);

    AnomalyReport r = tie_out(faulty.graph, faulty.ref);
    MatchResult m = match(r, faulty.truth, MatchRule{});
    CHECK(m.pairs.size() == faulty.truth.entries.size());
    CHECK(m.unmatched_anomalies.empty());
    CHECK(m.unmatched_truth.empty());

    ScoreCard card = score(r, faulty.truth, MatchRule{});
    CHECK(card.overall.f1() == Rational(1));

    SECTION("tightening the rule to exact sub-labels still pairs everything") {
        MatchRule strict;
        strict.require_sublabel = true;
        strict.evidence = EvidenceMode::subset;
        CHECK(score(r, faulty.truth, strict).overall.f1() == Rational(1));
    }
}

TEST_CASE("latency profile reflects the checked span") {
    EventGraph g = fixtures::sample_matching_graph();
    ReferenceCapTable ref =
        make_reference({parse_ledger_csv(fixtures::sample_ledger_csv(), "Common (CS)")});

    LatencyProfile full = latency_profile(g, ref);
    CHECK(full.checks == 145);
    CHECK(full.flagged == 0);
    CHECK(full.build_seconds >= 0.0);
    CHECK(full.check_seconds >= 0.0);
    CHECK(full.per_check_micros >= 0.0);

    LatencyProfile partial = latency_profile(g, ref, 10);
    CHECK(partial.checks == 10);

    LatencyProfile clamped = latency_profile(g, ref, 100000);
    CHECK(clamped.checks == 145);

    SECTION("a seeded discrepancy shows up in the flagged count") {
        Ledger bad = parse_ledger_csv(fixtures::sample_ledger_csv(), "Common (CS)");
        bad.entries[0].quantity_issued += 1;
        bad.declared_grand_total = *bad.declared_grand_total + 1;
        LatencyProfile p = latency_profile(g, make_reference({bad}));
        CHECK(p.flagged >= 1);
    }
}
