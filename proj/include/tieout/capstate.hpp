#pragma once

// Capitalization state shared by both reconciliation sides: the virtual
// state produced by replaying the event graph, and the reference state
// parsed from ledger spreadsheets. One record type serves both; reference
// positions simply leave the replay-only fields (status, lineage,
// provenance) at their defaults.

#include "tieout/domain.hpp"
#include "tieout/rational.hpp"

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace tieout {

// Events that support a value, plus the documents those events cite.
// doc_ids is derived from event evidence; it never contains ids of
// documents absent from the corpus.
struct EvidenceSet {
    std::set<std::string> event_ids;
    std::set<std::string> doc_ids;

    bool empty() const { return event_ids.empty() && doc_ids.empty(); }

    void merge(const EvidenceSet& o) {
        event_ids.insert(o.event_ids.begin(), o.event_ids.end());
        doc_ids.insert(o.doc_ids.begin(), o.doc_ids.end());
    }

    bool operator==(const EvidenceSet&) const = default;
};

enum class PositionStatus {
    outstanding,
    exercised,
    expired,
    cancelled,
    converted,
    partially_disposed,
};

inline const char* to_string(PositionStatus s) {
    switch (s) {
        case PositionStatus::outstanding: return "outstanding";
        case PositionStatus::exercised: return "exercised";
        case PositionStatus::expired: return "expired";
        case PositionStatus::cancelled: return "cancelled";
        case PositionStatus::converted: return "converted";
        case PositionStatus::partially_disposed: return "partially_disposed";
    }
    return "?";
}

// One lot. holder_key is a stakeholder_id when the holder resolves against
// the graph, else "raw:" + normalize_name(name) so unresolved reference
// rows still compare deterministically.
struct PositionRecord {
    std::string security_id;
    std::string holder_key;
    std::string holder_display;
    std::string class_name;
    Rational quantity;
    Rational price;
    VestingSpec vesting;
    Acceleration acceleration = Acceleration::none;
    PositionStatus status = PositionStatus::outstanding;
    std::vector<std::string> lineage;  // events applied to this lot, in order
    EvidenceSet provenance;
    std::string root_event_id;         // creation event of the root lot
    std::string parent_security_id;    // set for transfer-derived sub-lots
    bool under_evidenced = false;      // some provenance doc is not in the corpus

    bool disposed() const {
        return status == PositionStatus::exercised || status == PositionStatus::expired ||
               status == PositionStatus::cancelled || status == PositionStatus::converted;
    }
};

inline std::string raw_holder_key(const std::string& display_name) {
    return "raw:" + normalize_name(display_name);
}

// Findings surfaced during replay instead of crashing; the state stays
// total so verification can still compare it.
struct ReplayFinding {
    std::string code;  // ReplayConflict | FractionalShares | AmendmentAfterDisposal | UnresolvedEvidence
    std::string event_id;
    std::string security_id;
    std::string detail;

    auto operator<=>(const ReplayFinding&) const = default;
};

struct CapState {
    std::map<std::string, PositionRecord> positions;
    std::map<std::pair<std::string, std::string>, Rational> holder_totals;  // (holder_key, class)
    std::map<std::string, Rational> class_totals;
    std::map<std::string, Rational> authorized;  // only classes with a stated bound
    std::vector<ReplayFinding> findings;

    void recompute_aggregates() {
        holder_totals.clear();
        class_totals.clear();
        for (const auto& [id, p] : positions) {
            holder_totals[{p.holder_key, p.class_name}] += p.quantity;
            class_totals[p.class_name] += p.quantity;
        }
    }
};

} // namespace tieout
