#include "tieout/tieout.hpp"

#include "fixtures.hpp"
#include "oracles.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace tieout;

namespace {

const PositionRecord& lot(const CapState& s, const std::string& id) {
    REQUIRE(s.positions.count(id) == 1);
    return s.positions.at(id);
}

bool has_doc(const PositionRecord& p, const std::string& doc) {
    return p.provenance.doc_ids.count(doc) > 0;
}

} // namespace

TEST_CASE("lifecycle replay: reprice, split, exercise, expire, transfer") {
    EventGraph g = fixtures::lifecycle_graph();
    CapState s = build_virtual_captable(g);

    REQUIRE(s.positions.size() == 5);

    const PositionRecord& opt = lot(s, "OPT-1");
    CHECK(opt.quantity == Rational(0));
    CHECK(opt.price == Rational(1, 25));  // 1.00 repriced to 0.40, then split 10:1
    CHECK(opt.status == PositionStatus::expired);
    CHECK(opt.vesting == VestingSpec::of(48, 12));
    CHECK(opt.acceleration == Acceleration::double_trigger);

    const PositionRecord& cs9 = lot(s, "CS-9");
    CHECK(cs9.quantity == Rational(0));
    CHECK(cs9.holder_key == "S-ALICE");
    CHECK(cs9.status == PositionStatus::outstanding);  // fully transferred, never disposed

    for (const char* holder : {"S-BOB", "S-CAROL", "S-DAVE"}) {
        const PositionRecord& p = lot(s, std::string("CS-9@") + holder);
        CHECK(p.quantity == Rational(200000));
        CHECK(p.price == Rational(1, 25));
        CHECK(p.holder_key == holder);
        CHECK(p.class_name == "Common (CS)");
        CHECK(p.parent_security_id == "CS-9");
    }

    CHECK(s.class_totals.at("Options (OPT)") == Rational(0));
    CHECK(s.class_totals.at("Common (CS)") == Rational(600000));
    CHECK((s.holder_totals.at({"S-BOB", "Common (CS)"}) == Rational(200000)));
    CHECK((s.holder_totals.at({"S-ALICE", "Common (CS)"}) == Rational(0)));
    CHECK(s.findings.empty());
    for (const auto& [id, p] : s.positions) CHECK_FALSE(p.under_evidenced);
}

TEST_CASE("lifecycle replay matches the naive fold oracle") {
    EventGraph g = fixtures::lifecycle_graph();
    CHECK(oracle::diff_states(build_virtual_captable(g), oracle::naive_fold(g)) == "");
}

TEST_CASE("derived and transferred lots accumulate provenance") {
    EventGraph g = fixtures::lifecycle_graph();
    CapState s = build_virtual_captable(g);

    // the exercised common lot reaches back to the original grant
    const PositionRecord& cs9 = lot(s, "CS-9");
    for (const char* d : {"D1", "D3", "D4", "D5"}) CHECK(has_doc(cs9, d));
    CHECK(cs9.provenance.event_ids.count("E1") == 1);
    CHECK(cs9.provenance.event_ids.count("E4") == 1);
    CHECK(cs9.root_event_id == "E5");

    // sub-lots copy the source provenance as of their creation: Bob's lot
    // precedes the Carol transfer, Dave's follows it
    CHECK_FALSE(has_doc(lot(s, "CS-9@S-BOB"), "D8"));
    CHECK(has_doc(lot(s, "CS-9@S-CAROL"), "D8"));
    CHECK(has_doc(lot(s, "CS-9@S-DAVE"), "D8"));
    CHECK(has_doc(lot(s, "CS-9@S-DAVE"), "D7"));
    CHECK(has_doc(lot(s, "CS-9@S-BOB"), "D7"));
}

TEST_CASE("a missing cited document marks dependent lots under-evidenced") {
    EventGraph g = fixtures::lifecycle_graph(true);  // D8 absent from the corpus
    CHECK(g.event_under_evidenced("E8"));
    CapState s = build_virtual_captable(g);

    CHECK_FALSE(lot(s, "OPT-1").under_evidenced);
    CHECK_FALSE(lot(s, "CS-9@S-BOB").under_evidenced);
    CHECK(lot(s, "CS-9").under_evidenced);
    CHECK(lot(s, "CS-9@S-CAROL").under_evidenced);
    CHECK(lot(s, "CS-9@S-DAVE").under_evidenced);

    bool unresolved_reported = false;
    for (const auto& f : s.findings)
        unresolved_reported |= f.code == "UnresolvedEvidence" && f.event_id == "E8";
    CHECK(unresolved_reported);
}

TEST_CASE("prefix folds conserve class totals step by step") {
    EventGraph g = fixtures::lifecycle_graph();
    auto totals_at = [&](std::size_t n, const char* cls) {
        CapState s = detail::fold_prefix(g, n);
        auto it = s.class_totals.find(cls);
        return it == s.class_totals.end() ? Rational(0) : it->second;
    };

    CHECK(totals_at(0, "Options (OPT)") == Rational(0));
    CHECK(totals_at(1, "Options (OPT)") == Rational(100000));
    CHECK(totals_at(2, "Options (OPT)") == Rational(100000));    // reprice: no quantity change
    CHECK(totals_at(3, "Options (OPT)") == Rational(1000000));   // 10:1 split
    CHECK(totals_at(4, "Options (OPT)") == Rational(400000));    // 600,000 exercised
    CHECK(totals_at(5, "Common (CS)") == Rational(600000));      // resulting share lot
    CHECK(totals_at(6, "Options (OPT)") == Rational(0));         // remainder expired
    for (std::size_t n = 5; n <= 9; ++n)
        CHECK(totals_at(n, "Common (CS)") == Rational(600000));  // transfers conserve
}

TEST_CASE("point-in-time positions honor the as-of date") {
    EventGraph g = fixtures::lifecycle_graph();

    PositionResult bob_before = position(g, "S-BOB", "CLS-CS", {2021, 8, 31});
    CHECK_FALSE(bob_before.defined);
    CHECK(bob_before.quantity == Rational(0));

    PositionResult bob_on = position(g, "S-BOB", "CLS-CS", {2021, 9, 1});
    CHECK(bob_on.defined);
    CHECK(bob_on.quantity == Rational(200000));

    PositionResult alice_mid = position(g, "S-ALICE", "CLS-CS", {2021, 8, 31});
    CHECK(alice_mid.defined);
    CHECK(alice_mid.quantity == Rational(600000));

    PositionResult alice_end = position(g, "S-ALICE", "CLS-CS");
    CHECK(alice_end.defined);
    CHECK(alice_end.quantity == Rational(0));

    PositionResult opt_before_split = position(g, "S-ALICE", "CLS-OPT", {2020, 8, 31});
    CHECK(opt_before_split.quantity == Rational(100000));

    CHECK_FALSE(position(g, "S-ALICE", "CLS-OPT", {2020, 1, 9}).defined);
    CHECK_FALSE(position(g, "S-NOBODY", "CLS-CS", {2021, 9, 1}).defined);
    CHECK_FALSE(position(g, "S-BOB", "CLS-NONE", {2021, 9, 1}).defined);
}

TEST_CASE("effective terms fold amendments and splits in order") {
    EventGraph g = fixtures::lifecycle_graph();

    EffectiveTerms opt = effective_terms(g, "OPT-1");
    CHECK(opt.price == Rational(1, 25));
    CHECK(opt.vesting == VestingSpec::of(48, 12));
    CHECK(opt.acceleration == Acceleration::double_trigger);
    CHECK(opt.evidence.event_ids == std::set<std::string>{"E1", "E2", "E3"});
    CHECK(opt.evidence.doc_ids == std::set<std::string>{"D1", "D3", "D4"});

    EffectiveTerms cs9 = effective_terms(g, "CS-9");
    CHECK(cs9.price == Rational(1, 25));
    CHECK(cs9.vesting == VestingSpec::parse(""));
    CHECK(cs9.acceleration == Acceleration::none);

    CHECK_THROWS_AS(effective_terms(g, "ZZZ"), UnknownSecurity);
}

namespace {

struct Mini {
    std::vector<DocumentRef> docs = {
        {"D1", DocCategory::stock_purchase_agreement, {2020, 1, 1}, "spa", 2},
    };
    std::vector<Stakeholder> people = {
        {"S1", "Ann Lee", {}, StakeholderKind::individual},
        {"S2", "Raj Patel", {}, StakeholderKind::individual},
    };
    std::vector<SecurityClass> classes = {
        {"C1", "Common (CS)", SecurityKind::common, std::nullopt},
        {"C2", "SAFEs", SecurityKind::safe, std::nullopt},
    };
    std::vector<Event> events;
    std::vector<GraphEdge> edges;

    void issue(const char* id, const char* sec, std::int64_t qty, Date d, std::uint32_t seq,
               const char* cls = "C1") {
        Issuance p;
        p.security_id = sec;
        p.stakeholder_id = "S1";
        p.class_id = cls;
        p.quantity = qty;
        p.price_per_share = Rational(1, 2);
        events.push_back({id, EventKind::issuance, d, seq, {{"D1", ""}}, p});
    }

    EventGraph build() {
        return build_graph(docs, people, classes, std::move(events), std::move(edges));
    }
};

} // namespace

TEST_CASE("replay tolerates conflicting histories with findings") {
    SECTION("transfer of a never-issued security") {
        Mini m;
        Transfer t;
        t.security_id = "GHOST";
        t.from_stakeholder = "S1";
        t.to_stakeholder = "S2";
        t.quantity = 10;
        m.events.push_back({"E1", EventKind::transfer, {2020, 2, 1}, 1, {{"D1", ""}}, t});
        CapState s = build_virtual_captable(m.build());
        CHECK(s.positions.empty());
        REQUIRE(s.findings.size() == 1);
        CHECK(s.findings[0].code == "ReplayConflict");
    }
    SECTION("over-transfer clamps at the outstanding quantity") {
        Mini m;
        m.issue("E1", "CS-1", 100, {2020, 1, 2}, 1);
        Transfer t;
        t.security_id = "CS-1";
        t.from_stakeholder = "S1";
        t.to_stakeholder = "S2";
        t.quantity = 150;
        m.events.push_back({"E2", EventKind::transfer, {2020, 2, 1}, 2, {{"D1", ""}}, t});
        EventGraph g = m.build();
        CapState s = build_virtual_captable(g);
        CHECK(s.positions.at("CS-1").quantity == Rational(0));
        CHECK(s.positions.at("CS-1@S2").quantity == Rational(100));
        REQUIRE_FALSE(s.findings.empty());
        CHECK(s.findings[0].code == "ReplayConflict");
        CHECK(oracle::diff_states(s, oracle::naive_fold(g)) == "");
    }
    SECTION("duplicate issuance keeps the first lot") {
        Mini m;
        m.issue("E1", "CS-1", 100, {2020, 1, 2}, 1);
        m.issue("E2", "CS-1", 999, {2020, 1, 3}, 2);
        EventGraph g = m.build();
        CapState s = build_virtual_captable(g);
        CHECK(s.positions.at("CS-1").quantity == Rational(100));
        REQUIRE(s.findings.size() == 1);
        CHECK(s.findings[0].code == "ReplayConflict");
        CHECK(oracle::diff_states(s, oracle::naive_fold(g)) == "");
    }
    SECTION("amendment after disposal still applies, with a finding") {
        Mini m;
        m.issue("E1", "CS-1", 100, {2020, 1, 2}, 1);
        Cancellation c;
        c.security_id = "CS-1";
        m.events.push_back({"E2", EventKind::cancellation, {2020, 2, 1}, 2, {{"D1", ""}}, c});
        Amendment a;
        a.target_security_id = "CS-1";
        a.field_changes["price_per_share"] = "0.75";
        m.events.push_back({"E3", EventKind::amendment, {2020, 3, 1}, 3, {{"D1", ""}}, a});
        EventGraph g = m.build();
        CapState s = build_virtual_captable(g);
        CHECK(s.positions.at("CS-1").status == PositionStatus::cancelled);
        CHECK(s.positions.at("CS-1").price == Rational(3, 4));
        bool flagged = false;
        for (const auto& f : s.findings) flagged |= f.code == "AmendmentAfterDisposal";
        CHECK(flagged);
        CHECK(oracle::diff_states(s, oracle::naive_fold(g)) == "");
    }
    SECTION("fractional split result is flagged") {
        Mini m;
        m.issue("E1", "CS-1", 5, {2020, 1, 2}, 1);
        CorporateAction ca;
        ca.ratio = Rational(3, 2);
        ca.affected_class_ids = {"C1"};
        m.events.push_back({"E2", EventKind::corporate_action, {2020, 2, 1}, 2, {{"D1", ""}}, ca});
        EventGraph g = m.build();
        CapState s = build_virtual_captable(g);
        CHECK(s.positions.at("CS-1").quantity == Rational(15, 2));
        bool flagged = false;
        for (const auto& f : s.findings) flagged |= f.code == "FractionalShares";
        CHECK(flagged);
        CHECK(oracle::diff_states(s, oracle::naive_fold(g)) == "");
    }
}

TEST_CASE("conversion zeroes the source and births the result") {
    Mini m;
    m.issue("E1", "SAFE-1", 500000, {2020, 1, 2}, 1, "C2");
    Conversion c;
    c.source_security_id = "SAFE-1";
    c.result_class_id = "C1";
    c.result_quantity = 125000;
    c.result_security_id = "CS-1";
    m.events.push_back({"E2", EventKind::conversion, {2021, 1, 2}, 2, {{"D1", ""}}, c});
    EventGraph g = m.build();
    CapState s = build_virtual_captable(g);

    CHECK(s.positions.at("SAFE-1").quantity == Rational(0));
    CHECK(s.positions.at("SAFE-1").status == PositionStatus::converted);
    const PositionRecord& out = s.positions.at("CS-1");
    CHECK(out.quantity == Rational(125000));
    CHECK(out.holder_key == "S1");
    CHECK(out.class_name == "Common (CS)");
    CHECK(out.price == Rational(1, 2));
    CHECK(out.root_event_id == "E2");
    CHECK(out.parent_security_id == "SAFE-1");
    CHECK(out.provenance.event_ids.count("E1") == 1);
    CHECK(s.class_totals.at("SAFEs") == Rational(0));
    CHECK(s.class_totals.at("Common (CS)") == Rational(125000));
    CHECK(oracle::diff_states(s, oracle::naive_fold(g)) == "");
}

TEST_CASE("authorized bounds scale with splits") {
    Mini m;
    m.classes[0].authorized = 1000000;
    m.issue("E1", "CS-1", 600, {2020, 1, 2}, 1);
    CorporateAction ca;
    ca.ratio = Rational(10);
    ca.affected_class_ids = {"C1"};
    m.events.push_back({"E2", EventKind::corporate_action, {2020, 2, 1}, 2, {{"D1", ""}}, ca});
    EventGraph g = m.build();
    CapState s = build_virtual_captable(g);
    CHECK(s.authorized.at("Common (CS)") == Rational(10000000));
    CHECK(s.positions.at("CS-1").quantity == Rational(6000));
    CHECK(oracle::diff_states(s, oracle::naive_fold(g)) == "");
}
