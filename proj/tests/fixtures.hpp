#pragma once

// Hand-built fixtures shared across the test suite.
//
// The lifecycle fixture follows one option grant through a reprice, a 10:1
// split, a partial exercise, expiration of the remainder, and transfers of
// the resulting shares to three holders. The ledger fixture is a trimmed
// common-stock ledger whose declared grand total deliberately exceeds the
// sum of its rows.

#include "tieout/tieout.hpp"

#include <string>
#include <vector>

namespace fixtures {

using namespace tieout;

// --- lifecycle: OPT-1 repriced, split, partially exercised, transferred ----

inline EventGraph lifecycle_graph(bool drop_d8 = false) {
    std::vector<DocumentRef> docs = {
        {"D1", DocCategory::stock_purchase_agreement, {2020, 1, 10}, "option grant OPT-1", 12},
        {"D2", DocCategory::board_shareholder_consent, {2020, 1, 10}, "board consent", 3},
        {"D3", DocCategory::amendment, {2020, 6, 1}, "repricing amendment OPT-1", 4},
        {"D4", DocCategory::charter_bylaws, {2020, 9, 1}, "certificate of amendment, 10:1 split", 6},
        {"D5", DocCategory::ancillary_equity_agreement, {2021, 3, 15}, "exercise notice OPT-1", 2},
        {"D6", DocCategory::ancillary_equity_agreement, {2021, 7, 1}, "expiration notice OPT-1", 1},
        {"D7", DocCategory::stock_purchase_agreement, {2021, 9, 1}, "transfer agreement CS-9/Bob", 8},
        {"D8", DocCategory::stock_purchase_agreement, {2021, 9, 15}, "transfer agreement CS-9/Carol", 8},
        {"D9", DocCategory::stock_purchase_agreement, {2021, 10, 1}, "transfer agreement CS-9/Dave", 8},
    };
    if (drop_d8)
        docs.erase(docs.begin() + 7);

    std::vector<Stakeholder> people = {
        {"S-ALICE", "Alice Zhang", {}, StakeholderKind::individual},
        {"S-BOB", "Bob Marsh", {}, StakeholderKind::individual},
        {"S-CAROL", "Carol Diaz", {}, StakeholderKind::individual},
        {"S-DAVE", "Dave Okafor", {}, StakeholderKind::individual},
    };

    std::vector<SecurityClass> classes = {
        {"CLS-OPT", "Options (OPT)", SecurityKind::option, std::nullopt},
        {"CLS-CS", "Common (CS)", SecurityKind::common, std::nullopt},
    };

    std::vector<Event> events;
    {
        Issuance p;
        p.security_id = "OPT-1";
        p.stakeholder_id = "S-ALICE";
        p.class_id = "CLS-OPT";
        p.quantity = 100000;
        p.price_per_share = Rational(1);
        p.vesting = VestingSpec::of(48, 12);
        p.acceleration = Acceleration::double_trigger;
        events.push_back({"E1", EventKind::issuance, {2020, 1, 10}, 1, {{"D1", ""}}, p});
    }
    {
        Amendment p;
        p.target_security_id = "OPT-1";
        p.field_changes["price_per_share"] = "0.40";
        events.push_back({"E2", EventKind::amendment, {2020, 6, 1}, 2, {{"D3", ""}}, p});
    }
    {
        CorporateAction p;
        p.action_kind = "stock_split";
        p.ratio = Rational(10);
        p.affected_class_ids = {"CLS-OPT", "CLS-CS"};
        events.push_back({"E3", EventKind::corporate_action, {2020, 9, 1}, 3, {{"D4", ""}}, p});
    }
    {
        Exercise p;
        p.option_security_id = "OPT-1";
        p.quantity_exercised = 600000;
        p.result_security_id = "CS-9";
        events.push_back({"E4", EventKind::exercise, {2021, 3, 15}, 4, {{"D5", ""}}, p});
    }
    {
        Issuance p;
        p.security_id = "CS-9";
        p.stakeholder_id = "S-ALICE";
        p.class_id = "CLS-CS";
        p.quantity = 600000;
        p.price_per_share = Rational(1, 25);  // 0.04
        events.push_back({"E5", EventKind::issuance, {2021, 3, 15}, 5, {{"D5", ""}}, p});
    }
    {
        Expiration p;
        p.security_id = "OPT-1";
        p.quantity = 400000;
        events.push_back({"E6", EventKind::expiration, {2021, 7, 1}, 6, {{"D6", ""}}, p});
    }
    auto transfer = [](const char* id, Date d, std::uint32_t seq, const char* to,
                       const char* doc) {
        Transfer p;
        p.security_id = "CS-9";
        p.from_stakeholder = "S-ALICE";
        p.to_stakeholder = to;
        p.quantity = 200000;
        return Event{id, EventKind::transfer, d, seq, {{doc, ""}}, p};
    };
    events.push_back(transfer("E7", {2021, 9, 1}, 7, "S-BOB", "D7"));
    events.push_back(transfer("E8", {2021, 9, 15}, 8, "S-CAROL", "D8"));
    events.push_back(transfer("E9", {2021, 10, 1}, 9, "S-DAVE", "D9"));

    std::vector<GraphEdge> edges = {
        {"E1", EdgeKind::approved_by, "D2"},
        {"E2", EdgeKind::amends, "E1"},
        {"E4", EdgeKind::derives_from, "E1"},
        {"E5", EdgeKind::derives_from, "E4"},
    };

    return build_graph(std::move(docs), std::move(people), std::move(classes), std::move(events),
                       std::move(edges));
}

inline LedgerEntry sub_lot_row(const char* holder_suffix, const char* name, std::int64_t qty,
                               const Rational& price) {
    LedgerEntry e;
    e.security_id = std::string("CS-9@S-") + holder_suffix;
    e.stakeholder_name = name;
    e.quantity_issued = qty;
    e.share_class = "Common (CS)";
    e.price_per_share = price;
    e.vesting = VestingSpec::parse("");
    e.acceleration = Acceleration::none;
    return e;
}

// Exactly matches the replayed lifecycle state.
inline ReferenceCapTable lifecycle_reference() {
    Ledger l;
    l.class_name = "Common (CS)";
    l.entries = {
        sub_lot_row("BOB", "Bob Marsh", 200000, Rational(1, 25)),
        sub_lot_row("CAROL", "Carol Diaz", 200000, Rational(1, 25)),
        sub_lot_row("DAVE", "Dave Okafor", 200000, Rational(1, 25)),
    };
    l.declared_grand_total = 600000;
    return make_reference({l});
}

// Three independent faults, one per anomaly kind: Dave's row is gone
// (missing from cap table), Bob's price is stale (inconsistent terms), and
// the graph side drops D8 so Carol's chain is under-evidenced (missing
// documentation). Pair with lifecycle_graph(true).
inline ReferenceCapTable lifecycle_reference_three_faults() {
    Ledger l;
    l.class_name = "Common (CS)";
    l.entries = {
        sub_lot_row("BOB", "Bob Marsh", 200000, Rational(1, 10)),
        sub_lot_row("CAROL", "Carol Diaz", 200000, Rational(1, 25)),
    };
    l.declared_grand_total = 400000;
    return make_reference({l});
}

// --- trimmed common-stock ledger -------------------------------------------

inline const char* sample_ledger_csv() {
    return
        "Security ID,Stakeholder Name,Quantity Issued,Share Class,Price Per Share,"
        "Vesting Schedule,Acceleration\n"
        "CS-01,Paul Reynolds,\"3,162,500\",Common (CS),$0.00001,\"1/60th monthly, 1 year cliff\",Double Trigger\n"
        "CS-02,Sarah Lawson,\"700,000\",Common (CS),$0.00001,\"1/60th monthly, 1 year cliff\",Double Trigger\n"
        "CS-03,Thomas Alvarez,\"262,500\",Common (CS),$0.00001,\"1/60th monthly, 1 year cliff\",Double Trigger\n"
        "CS-04,Julien Moreau,\"262,500\",Common (CS),$0.00001,\"1/60th monthly, 1 year cliff\",Double Trigger\n"
        "CS-05,Zara Ryman,\"200,000\",Common (CS),$0.00001,\"1/60th monthly, 1 year cliff\",Double Trigger\n"
        "CS-06,Leigh Bartlett,\"150,000\",Common (CS),$0.00001,\"1/60th monthly, 1 year cliff\",Double Trigger\n"
        "CS-07,Tim Branson,\"150,000\",Common (CS),$0.00001,\"1/60th monthly, 1 year cliff\",Double Trigger\n"
        "CS-08,Lucas Costa,\"50,000\",Common (CS),$0.00001,\"1/30th monthly, no cliff\",Double Trigger\n"
        "CS-09,David Velner,\"37,500\",Common (CS),$0.00001,\"1/60th monthly, 1 year cliff\",Double Trigger\n"
        "CS-10,John Jackson,\"5,000\",Common (CS),$0.00001,\"1/48th monthly, 1 year cliff\",Yes\n"
        "CS-11,Nadia Mansouri,\"5,000\",Common (CS),$0.00001,\"1/48th monthly, 1 year cliff\",Yes\n"
        "CS-12,Monica Phillips,\"10,000\",Common (CS),$0.00001,\"1/48th monthly, 1 year cliff\",Yes\n"
        "CS-13,Christopher Knight,\"15,000\",Common (CS),$0.00001,\"1/48th monthly, 1 year cliff\",Yes\n"
        "CS-14,James Smith,\"10,000\",Common (CS),$0.00001,\"1/12 monthly, no cliff\",Yes\n"
        "CS-15,Hassan Murphy,\"125,000\",Common (CS),$0.00001,\"1/48th monthly, 1 year cliff\",Yes\n"
        "CS-16,Keisha Young,\"15,000\",Common (CS),$0.00001,\"1/48th monthly, 1 year cliff\",Yes\n"
        "CS-17,Daniel Brown,\"20,000\",Common (CS),$0.00001,\"1/48th monthly, 1 year cliff\",Yes\n"
        "CS-18,Michael Gray,\"8,000\",Common (CS),$0.00001,\"1/48th monthly, 1 year cliff\",Yes\n"
        "Grand Total,,\"8,355,000\",,,,\n";
}

inline constexpr std::int64_t kSampleComputedTotal = 5188000;
inline constexpr std::int64_t kSampleDeclaredTotal = 8355000;

// A graph that exactly evidences the trimmed ledger: one issuance per row,
// all approved by one consent, one purchase agreement per grant.
inline EventGraph sample_matching_graph() {
    Ledger ledger = parse_ledger_csv(sample_ledger_csv(), "Common (CS)");

    std::vector<DocumentRef> docs;
    std::vector<Stakeholder> people;
    std::vector<SecurityClass> classes = {
        {"CLS-CS", "Common (CS)", SecurityKind::common, std::nullopt}};
    std::vector<Event> events;
    std::vector<GraphEdge> edges;

    docs.push_back({"D-CONSENT", DocCategory::board_shareholder_consent, {2018, 2, 1},
                    "unanimous written consent of the board", 4});

    int n = 0;
    for (const auto& row : ledger.entries) {
        ++n;
        std::string sid = "S-" + std::to_string(n);
        people.push_back({sid, row.stakeholder_name, {}, StakeholderKind::individual});
        std::string doc_id = "D-SPA-" + std::to_string(n);
        docs.push_back({doc_id, DocCategory::stock_purchase_agreement, {2018, 2, 1},
                        "stock purchase agreement " + row.security_id, 10});

        Issuance p;
        p.security_id = row.security_id;
        p.stakeholder_id = sid;
        p.class_id = "CLS-CS";
        p.quantity = row.quantity_issued;
        p.price_per_share = row.price_per_share;
        p.vesting = row.vesting;
        p.acceleration = row.acceleration;
        std::string eid = "E-" + std::to_string(n);
        events.push_back({eid, EventKind::issuance, {2018, 2, 1},
                          static_cast<std::uint32_t>(n), {{doc_id, ""}}, p});
        edges.push_back({eid, EdgeKind::approved_by, "D-CONSENT"});
    }

    return build_graph(std::move(docs), std::move(people), std::move(classes), std::move(events),
                       std::move(edges));
}

} // namespace fixtures
