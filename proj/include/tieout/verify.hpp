#pragma once

// Transform enumeration and checking. Each transform address names one
// comparable aspect of a capitalization state; checking extracts the value
// from both sides and classifies any failure into the anomaly taxonomy.
//
// Precedence: a security whose presence check fails produces no further
// field or approval anomalies, and aggregate checks over a flagged
// component are skipped; one root cause yields one anomaly.

#include "tieout/capstate.hpp"
#include "tieout/captable.hpp"
#include "tieout/domain.hpp"
#include "tieout/replay.hpp"

#include <algorithm>
#include <cstdlib>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

namespace tieout {

// ---------------------------------------------------------------------------
// Addresses
// ---------------------------------------------------------------------------

enum class TransformKind {
    presence,
    security_field,
    approval,
    holder_total,
    class_total,
    authorized_bound,
};

inline const char* to_string(TransformKind k) {
    switch (k) {
        case TransformKind::presence: return "presence";
        case TransformKind::security_field: return "security_field";
        case TransformKind::approval: return "approval";
        case TransformKind::holder_total: return "holder_total";
        case TransformKind::class_total: return "class_total";
        case TransformKind::authorized_bound: return "authorized_bound";
    }
    return "?";
}

enum class SecurityField { quantity, price_per_share, vesting, acceleration, holder, share_class };

inline constexpr SecurityField kSecurityFields[] = {
    SecurityField::quantity,     SecurityField::price_per_share, SecurityField::vesting,
    SecurityField::acceleration, SecurityField::holder,          SecurityField::share_class,
};

inline const char* to_string(SecurityField f) {
    switch (f) {
        case SecurityField::quantity: return "quantity";
        case SecurityField::price_per_share: return "price_per_share";
        case SecurityField::vesting: return "vesting";
        case SecurityField::acceleration: return "acceleration";
        case SecurityField::holder: return "holder";
        case SecurityField::share_class: return "class";
    }
    return "?";
}

enum class PresenceDirection { ref_side, virt_side };

struct TransformAddress {
    TransformKind kind = TransformKind::presence;
    std::string security_id;                                    // presence, security_field, approval
    SecurityField field = SecurityField::quantity;              // security_field
    std::string holder_key;                                     // holder_total
    std::string class_name;                                     // holder_total, class_total, authorized_bound
    PresenceDirection direction = PresenceDirection::ref_side;  // presence

    std::string to_string() const {
        switch (kind) {
            case TransformKind::presence:
                return std::string("presence/") + security_id + "/" +
                       (direction == PresenceDirection::ref_side ? "ref" : "virt");
            case TransformKind::security_field:
                return std::string("security_field/") + security_id + "/" +
                       tieout::to_string(field);
            case TransformKind::approval: return std::string("approval/") + security_id;
            case TransformKind::holder_total:
                return std::string("holder_total/") + holder_key + "/" + class_name;
            case TransformKind::class_total: return std::string("class_total/") + class_name;
            case TransformKind::authorized_bound:
                return std::string("authorized_bound/") + class_name;
        }
        return "?";
    }
};

// ---------------------------------------------------------------------------
// Values
// ---------------------------------------------------------------------------

// One extracted value. Undefined means "present but not establishable from
// the documents"; Absent means "no such entry at all". The two never
// compare equal to each other or to a zero quantity.
struct FieldValue {
    enum class Tag { quantity, money, vesting, acceleration, identifier, boolean, undefined, absent };

    Tag tag = Tag::absent;
    Rational number;
    VestingSpec vest;
    Acceleration accel = Acceleration::none;
    std::string ident;
    bool truth = false;

    static FieldValue of_quantity(const Rational& q) {
        FieldValue v;
        v.tag = Tag::quantity;
        v.number = q;
        return v;
    }
    static FieldValue of_money(const Rational& m) {
        FieldValue v;
        v.tag = Tag::money;
        v.number = m;
        return v;
    }
    static FieldValue of_vesting(const VestingSpec& s) {
        FieldValue v;
        v.tag = Tag::vesting;
        v.vest = s;
        return v;
    }
    static FieldValue of_acceleration(Acceleration a) {
        FieldValue v;
        v.tag = Tag::acceleration;
        v.accel = a;
        return v;
    }
    static FieldValue of_identifier(const std::string& id) {
        FieldValue v;
        v.tag = Tag::identifier;
        v.ident = id;
        return v;
    }
    static FieldValue of_boolean(bool b) {
        FieldValue v;
        v.tag = Tag::boolean;
        v.truth = b;
        return v;
    }
    static FieldValue undefined() {
        FieldValue v;
        v.tag = Tag::undefined;
        return v;
    }
    static FieldValue absent() { return FieldValue{}; }

    bool is_undefined() const { return tag == Tag::undefined; }
    bool is_absent() const { return tag == Tag::absent; }
    bool is_defined() const { return !is_undefined() && !is_absent(); }

    bool operator==(const FieldValue& o) const {
        if (tag != o.tag) return false;
        switch (tag) {
            case Tag::quantity:
            case Tag::money: return number == o.number;
            case Tag::vesting: return vest == o.vest;
            case Tag::acceleration: return accel == o.accel;
            case Tag::identifier: return ident == o.ident;
            case Tag::boolean: return truth == o.truth;
            case Tag::undefined:
            case Tag::absent: return true;
        }
        return false;
    }

    const char* tag_name() const {
        switch (tag) {
            case Tag::quantity: return "quantity";
            case Tag::money: return "money";
            case Tag::vesting: return "vesting";
            case Tag::acceleration: return "acceleration";
            case Tag::identifier: return "identifier";
            case Tag::boolean: return "boolean";
            case Tag::undefined: return "undefined";
            case Tag::absent: return "absent";
        }
        return "?";
    }

    std::string display() const {
        switch (tag) {
            case Tag::quantity: return number.to_string();
            case Tag::money: return number.to_decimal_string();
            case Tag::vesting: return vest.to_string();
            case Tag::acceleration: return tieout::to_string(accel);
            case Tag::identifier: return ident;
            case Tag::boolean: return truth ? "true" : "false";
            case Tag::undefined: return "undefined";
            case Tag::absent: return "absent";
        }
        return "?";
    }
};

// ---------------------------------------------------------------------------
// Anomalies
// ---------------------------------------------------------------------------

enum class AnomalyKind { MissingFromCapTable, MissingDocumentation, InconsistentTerms };

inline const char* to_string(AnomalyKind k) {
    switch (k) {
        case AnomalyKind::MissingFromCapTable: return "MissingFromCapTable";
        case AnomalyKind::MissingDocumentation: return "MissingDocumentation";
        case AnomalyKind::InconsistentTerms: return "InconsistentTerms";
    }
    return "?";
}

inline AnomalyKind anomaly_kind_from_string(const std::string& s) {
    if (s == "MissingFromCapTable") return AnomalyKind::MissingFromCapTable;
    if (s == "MissingDocumentation") return AnomalyKind::MissingDocumentation;
    if (s == "InconsistentTerms") return AnomalyKind::InconsistentTerms;
    throw std::invalid_argument("unknown anomaly kind: " + s);
}

inline constexpr const char* kSubLabelUnrecorded = "Unrecorded Position";
inline constexpr const char* kSubLabelMissingInfo = "Missing Information";
inline constexpr const char* kSubLabelBoardApproval = "Board Approval Missing";
inline constexpr const char* kSubLabelDataDiscrepancy = "Data Discrepancy";
inline constexpr const char* kSubLabelAuthorizedExceeded = "Authorized Shares Exceeded";

struct Affected {
    std::set<std::string> security_ids;
    std::set<std::string> stakeholder_ids;
};

struct Anomaly {
    AnomalyKind kind = AnomalyKind::InconsistentTerms;
    std::string sub_label;
    TransformAddress address;
    FieldValue virt_value;
    FieldValue ref_value;
    EvidenceSet evidence;
    Affected affected;
};

struct AnomalyReport {
    std::vector<Anomaly> anomalies;
    std::size_t checked_transform_count = 0;
    std::size_t passes = 0;
    std::size_t both_absent = 0;
    std::vector<ReplayFinding> replay_findings;

    std::map<std::string, std::size_t> anomaly_counts_by_kind() const {
        std::map<std::string, std::size_t> out;
        for (const auto& a : anomalies) ++out[to_string(a.kind)];
        return out;
    }
};

// ---------------------------------------------------------------------------
// Enumeration
// ---------------------------------------------------------------------------

inline std::vector<TransformAddress> enumerate_transforms(const CapState& virt,
                                                          const CapState& ref) {
    std::vector<TransformAddress> out;

    std::set<std::string> all_securities;
    for (const auto& [id, _] : virt.positions) all_securities.insert(id);
    for (const auto& [id, _] : ref.positions) all_securities.insert(id);
    for (const auto& id : all_securities) {
        TransformAddress a;
        a.kind = TransformKind::presence;
        a.security_id = id;
        a.direction = ref.positions.count(id) ? PresenceDirection::ref_side
                                              : PresenceDirection::virt_side;
        out.push_back(std::move(a));
    }

    for (const auto& [id, _] : ref.positions) {
        for (SecurityField f : kSecurityFields) {
            TransformAddress a;
            a.kind = TransformKind::security_field;
            a.security_id = id;
            a.field = f;
            out.push_back(std::move(a));
        }
    }

    for (const auto& [id, _] : ref.positions) {
        TransformAddress a;
        a.kind = TransformKind::approval;
        a.security_id = id;
        out.push_back(std::move(a));
    }

    // A per-holder total only says more than the per-lot quantity checks
    // when several lots aggregate into it on some side.
    std::map<std::pair<std::string, std::string>, int> virt_pairs, ref_pairs;
    for (const auto& [id, p] : virt.positions) ++virt_pairs[{p.holder_key, p.class_name}];
    for (const auto& [id, p] : ref.positions) ++ref_pairs[{p.holder_key, p.class_name}];
    std::set<std::pair<std::string, std::string>> pair_keys;
    for (const auto& [key, _] : virt_pairs) pair_keys.insert(key);
    for (const auto& [key, _] : ref_pairs) pair_keys.insert(key);
    for (const auto& key : pair_keys) {
        auto vit = virt_pairs.find(key);
        auto rit = ref_pairs.find(key);
        int n = std::max(vit == virt_pairs.end() ? 0 : vit->second,
                         rit == ref_pairs.end() ? 0 : rit->second);
        if (n < 2) continue;
        TransformAddress a;
        a.kind = TransformKind::holder_total;
        a.holder_key = key.first;
        a.class_name = key.second;
        out.push_back(std::move(a));
    }

    std::set<std::string> all_classes;
    for (const auto& [c, _] : virt.class_totals) all_classes.insert(c);
    for (const auto& [c, _] : ref.class_totals) all_classes.insert(c);
    for (const auto& c : all_classes) {
        TransformAddress a;
        a.kind = TransformKind::class_total;
        a.class_name = c;
        out.push_back(std::move(a));
    }

    for (const auto& [c, _] : virt.authorized) {
        TransformAddress a;
        a.kind = TransformKind::authorized_bound;
        a.class_name = c;
        out.push_back(std::move(a));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Extraction
// ---------------------------------------------------------------------------

inline FieldValue extract(const CapState& state, const TransformAddress& addr) {
    switch (addr.kind) {
        case TransformKind::presence:
        case TransformKind::approval: {
            auto it = state.positions.find(addr.security_id);
            if (it == state.positions.end()) return FieldValue::absent();
            if (it->second.under_evidenced) return FieldValue::undefined();
            return FieldValue::of_boolean(true);
        }
        case TransformKind::security_field: {
            auto it = state.positions.find(addr.security_id);
            if (it == state.positions.end()) return FieldValue::absent();
            const PositionRecord& p = it->second;
            if (p.under_evidenced) return FieldValue::undefined();
            switch (addr.field) {
                case SecurityField::quantity: return FieldValue::of_quantity(p.quantity);
                case SecurityField::price_per_share: return FieldValue::of_money(p.price);
                case SecurityField::vesting: return FieldValue::of_vesting(p.vesting);
                case SecurityField::acceleration:
                    return FieldValue::of_acceleration(p.acceleration);
                case SecurityField::holder: return FieldValue::of_identifier(p.holder_key);
                case SecurityField::share_class:
                    return FieldValue::of_identifier(p.class_name);
            }
            return FieldValue::absent();
        }
        case TransformKind::holder_total: {
            auto it = state.holder_totals.find({addr.holder_key, addr.class_name});
            if (it == state.holder_totals.end()) return FieldValue::absent();
            return FieldValue::of_quantity(it->second);
        }
        case TransformKind::class_total: {
            auto it = state.class_totals.find(addr.class_name);
            if (it == state.class_totals.end()) return FieldValue::absent();
            return FieldValue::of_quantity(it->second);
        }
        case TransformKind::authorized_bound: {
            auto it = state.authorized.find(addr.class_name);
            if (it == state.authorized.end()) return FieldValue::absent();
            return FieldValue::of_quantity(it->second);
        }
    }
    return FieldValue::absent();
}

// ---------------------------------------------------------------------------
// Checks
// ---------------------------------------------------------------------------

struct CheckResult {
    enum class Outcome { pass, anomaly, both_absent };
    Outcome outcome = Outcome::pass;
    std::optional<Anomaly> anomaly;

    static CheckResult passed() { return {}; }
    static CheckResult absent() { return {Outcome::both_absent, std::nullopt}; }
    static CheckResult flag(Anomaly a) { return {Outcome::anomaly, std::move(a)}; }
};

namespace detail {

inline EvidenceSet parent_chain_evidence(const CapState& virt, const std::string& security_id) {
    auto at = security_id.find('@');
    if (at == std::string::npos) return {};
    auto it = virt.positions.find(security_id.substr(0, at));
    if (it == virt.positions.end()) return {};
    return it->second.provenance;
}

inline Affected affected_for_lot(const PositionRecord& p) {
    Affected a;
    a.security_ids.insert(p.security_id);
    a.stakeholder_ids.insert(p.holder_key);
    return a;
}

inline EvidenceSet class_evidence(const CapState& virt, const std::string& class_name) {
    EvidenceSet e;
    for (const auto& [id, p] : virt.positions)
        if (p.class_name == class_name) e.merge(p.provenance);
    return e;
}

inline CheckResult check_presence(const TransformAddress& addr, const CapState& virt,
                                  const CapState& ref) {
    auto vit = virt.positions.find(addr.security_id);
    auto rit = ref.positions.find(addr.security_id);
    bool in_virt = vit != virt.positions.end();
    bool in_ref = rit != ref.positions.end();

    if (in_virt && in_ref) {
        if (!vit->second.under_evidenced) return CheckResult::passed();
        Anomaly a;
        a.kind = AnomalyKind::MissingDocumentation;
        a.sub_label = kSubLabelMissingInfo;
        a.address = addr;
        a.virt_value = FieldValue::undefined();
        a.ref_value = FieldValue::of_quantity(rit->second.quantity);
        a.evidence = vit->second.provenance;  // the part of the chain still on file
        a.affected = affected_for_lot(vit->second);
        return CheckResult::flag(std::move(a));
    }
    if (in_virt) {
        if (vit->second.quantity.is_zero()) return CheckResult::passed();
        Anomaly a;
        a.kind = AnomalyKind::MissingFromCapTable;
        a.sub_label = kSubLabelUnrecorded;
        a.address = addr;
        a.virt_value = FieldValue::of_quantity(vit->second.quantity);
        a.ref_value = FieldValue::absent();
        a.evidence = vit->second.provenance;
        a.affected = affected_for_lot(vit->second);
        return CheckResult::flag(std::move(a));
    }
    Anomaly a;
    a.kind = AnomalyKind::MissingDocumentation;
    a.sub_label = kSubLabelMissingInfo;
    a.address = addr;
    a.virt_value = FieldValue::undefined();
    a.ref_value = FieldValue::of_quantity(rit->second.quantity);
    a.evidence = parent_chain_evidence(virt, addr.security_id);
    a.affected = affected_for_lot(rit->second);
    return CheckResult::flag(std::move(a));
}

inline CheckResult check_field(const TransformAddress& addr, const CapState& virt,
                               const CapState& ref) {
    FieldValue v = extract(virt, addr);
    FieldValue r = extract(ref, addr);
    if (v.is_absent() && r.is_absent()) return CheckResult::absent();
    if (v == r) return CheckResult::passed();

    auto rit = ref.positions.find(addr.security_id);
    auto vit = virt.positions.find(addr.security_id);
    Anomaly a;
    a.address = addr;
    a.virt_value = v.is_absent() ? FieldValue::undefined() : v;
    a.ref_value = r;
    if (!v.is_defined()) {
        a.kind = AnomalyKind::MissingDocumentation;
        a.sub_label = kSubLabelMissingInfo;
        a.evidence = vit != virt.positions.end() ? vit->second.provenance
                                                 : parent_chain_evidence(virt, addr.security_id);
    } else {
        a.kind = AnomalyKind::InconsistentTerms;
        a.sub_label = kSubLabelDataDiscrepancy;
        a.evidence = vit->second.provenance;
    }
    if (vit != virt.positions.end()) a.affected = affected_for_lot(vit->second);
    if (rit != ref.positions.end()) {
        a.affected.security_ids.insert(rit->second.security_id);
        a.affected.stakeholder_ids.insert(rit->second.holder_key);
    }
    return CheckResult::flag(std::move(a));
}

// An approval anywhere up the derivation chain covers the lot: the board
// consents to the original grant, not to each mechanical exercise of it.
inline bool approval_in_chain(const EventGraph& graph, const std::string& event_id) {
    std::set<std::string> seen;
    std::vector<std::string> stack{event_id};
    while (!stack.empty()) {
        std::string id = std::move(stack.back());
        stack.pop_back();
        if (!seen.insert(id).second) continue;
        if (graph.has_approval(id)) return true;
        for (const auto& e : graph.edges_from(id))
            if (e.kind == EdgeKind::derives_from) stack.push_back(e.dst_id);
    }
    return false;
}

inline CheckResult check_approval(const TransformAddress& addr, const CapState& virt,
                                  const CapState& ref, const EventGraph& graph) {
    auto vit = virt.positions.find(addr.security_id);
    auto rit = ref.positions.find(addr.security_id);
    if (vit == virt.positions.end()) {
        // no lot to trace a creation event from; the presence check already
        // reported this security
        return CheckResult::passed();
    }
    const PositionRecord& lot = vit->second;
    const Event* root = graph.find_event(lot.root_event_id);
    if (root && approval_in_chain(graph, root->event_id)) return CheckResult::passed();

    Anomaly a;
    a.kind = AnomalyKind::MissingDocumentation;
    a.sub_label = kSubLabelBoardApproval;
    a.address = addr;
    a.virt_value = FieldValue::undefined();
    a.ref_value = FieldValue::of_boolean(true);
    if (root) {
        a.evidence.event_ids.insert(root->event_id);
        auto docs = resolved_doc_ids(graph, *root);
        a.evidence.doc_ids.insert(docs.begin(), docs.end());
    } else {
        a.evidence = lot.provenance;
    }
    a.affected = affected_for_lot(lot);
    if (rit != ref.positions.end()) a.affected.stakeholder_ids.insert(rit->second.holder_key);
    return CheckResult::flag(std::move(a));
}

inline CheckResult check_total(const TransformAddress& addr, const CapState& virt,
                               const CapState& ref) {
    FieldValue v = extract(virt, addr);
    FieldValue r = extract(ref, addr);
    if (v.is_absent() && r.is_absent()) return CheckResult::absent();
    // a side with no entries contributes an empty total, not an undefined one
    if (v.is_absent()) v = FieldValue::of_quantity(Rational(0));
    if (r.is_absent()) r = FieldValue::of_quantity(Rational(0));
    if (v == r) return CheckResult::passed();

    Anomaly a;
    a.kind = AnomalyKind::InconsistentTerms;
    a.sub_label = kSubLabelDataDiscrepancy;
    a.address = addr;
    a.virt_value = v;
    a.ref_value = r;
    for (const auto& [id, p] : virt.positions) {
        bool in_scope = addr.kind == TransformKind::class_total
                            ? p.class_name == addr.class_name
                            : p.class_name == addr.class_name && p.holder_key == addr.holder_key;
        if (!in_scope) continue;
        a.evidence.merge(p.provenance);
        a.affected.security_ids.insert(id);
        a.affected.stakeholder_ids.insert(p.holder_key);
    }
    if (addr.kind == TransformKind::holder_total) a.affected.stakeholder_ids.insert(addr.holder_key);
    return CheckResult::flag(std::move(a));
}

inline CheckResult check_authorized(const TransformAddress& addr, const CapState& virt,
                                    const CapState& ref) {
    auto bound_it = virt.authorized.find(addr.class_name);
    if (bound_it == virt.authorized.end()) return CheckResult::absent();
    const Rational& bound = bound_it->second;

    Rational worst(0);
    bool exceeded = false;
    for (const CapState* side : {&virt, &ref}) {
        auto it = side->class_totals.find(addr.class_name);
        if (it == side->class_totals.end()) continue;
        if (it->second > bound && it->second > worst) {
            worst = it->second;
            exceeded = true;
        }
    }
    if (!exceeded) return CheckResult::passed();

    Anomaly a;
    a.kind = AnomalyKind::InconsistentTerms;
    a.sub_label = kSubLabelAuthorizedExceeded;
    a.address = addr;
    a.virt_value = FieldValue::of_quantity(worst);
    a.ref_value = FieldValue::of_quantity(bound);
    a.evidence = class_evidence(virt, addr.class_name);
    for (const auto& [id, p] : virt.positions)
        if (p.class_name == addr.class_name) a.affected.security_ids.insert(id);
    return CheckResult::flag(std::move(a));
}

} // namespace detail

inline CheckResult check(const TransformAddress& addr, const CapState& virt, const CapState& ref,
                         const EventGraph& graph) {
    switch (addr.kind) {
        case TransformKind::presence: return detail::check_presence(addr, virt, ref);
        case TransformKind::security_field: return detail::check_field(addr, virt, ref);
        case TransformKind::approval: return detail::check_approval(addr, virt, ref, graph);
        case TransformKind::holder_total:
        case TransformKind::class_total: return detail::check_total(addr, virt, ref);
        case TransformKind::authorized_bound: return detail::check_authorized(addr, virt, ref);
    }
    return CheckResult::passed();
}

// ---------------------------------------------------------------------------
// Tie-out
// ---------------------------------------------------------------------------

namespace detail {

inline unsigned tieout_thread_budget() {
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    if (const char* env = std::getenv("TIEOUT_THREADS")) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end != env && v >= 1) return static_cast<unsigned>(std::min<long>(v, 64));
    }
    return std::min(hw, 8u);
}

} // namespace detail

inline AnomalyReport tie_out_states(const EventGraph& graph, const CapState& virt,
                                    const CapState& ref_state) {
    auto addrs = enumerate_transforms(virt, ref_state);

    AnomalyReport report;
    report.checked_transform_count = addrs.size();
    report.replay_findings = virt.findings;

    // Presence first: its outcomes gate everything else on the same
    // security. The enumeration puts presence checks at the front.
    std::size_t presence_end = 0;
    while (presence_end < addrs.size() && addrs[presence_end].kind == TransformKind::presence)
        ++presence_end;

    std::set<std::string> flagged;
    std::vector<CheckResult> results(addrs.size());
    for (std::size_t i = 0; i < presence_end; ++i) {
        results[i] = check(addrs[i], virt, ref_state, graph);
        if (results[i].outcome == CheckResult::Outcome::anomaly)
            flagged.insert(addrs[i].security_id);
    }

    // Field and approval checks run next, possibly in parallel; results are
    // merged in enumeration order so any thread count yields one report.
    std::size_t detail_end = presence_end;
    while (detail_end < addrs.size() && (addrs[detail_end].kind == TransformKind::security_field ||
                                         addrs[detail_end].kind == TransformKind::approval))
        ++detail_end;

    auto run_range = [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            if (flagged.count(addrs[i].security_id)) {
                results[i] = CheckResult::passed();  // suppressed by presence
                continue;
            }
            results[i] = check(addrs[i], virt, ref_state, graph);
        }
    };
    unsigned threads = detail::tieout_thread_budget();
    std::size_t span = detail_end - presence_end;
    if (threads <= 1 || span < 64) {
        run_range(presence_end, detail_end);
    } else {
        std::vector<std::thread> pool;
        std::size_t chunk = (span + threads - 1) / threads;
        for (unsigned t = 0; t < threads; ++t) {
            std::size_t lo = presence_end + t * chunk;
            std::size_t hi = std::min(detail_end, lo + chunk);
            if (lo >= hi) break;
            pool.emplace_back(run_range, lo, hi);
        }
        for (auto& th : pool) th.join();
    }
    for (std::size_t i = presence_end; i < detail_end; ++i)
        if (results[i].outcome == CheckResult::Outcome::anomaly)
            flagged.insert(addrs[i].security_id);

    // Aggregates last: skip any total with an already-flagged component, so
    // a single bad lot does not echo through its holder and class sums.
    for (std::size_t i = detail_end; i < addrs.size(); ++i) {
        const auto& addr = addrs[i];
        bool suppressed = false;
        for (const CapState* side : {&virt, &ref_state}) {
            for (const auto& [id, p] : side->positions) {
                if (p.class_name != addr.class_name) continue;
                if (addr.kind == TransformKind::holder_total && p.holder_key != addr.holder_key)
                    continue;
                if (flagged.count(id)) { suppressed = true; break; }
            }
            if (suppressed) break;
        }
        results[i] = suppressed ? CheckResult::passed() : check(addr, virt, ref_state, graph);
    }

    for (auto& r : results) {
        switch (r.outcome) {
            case CheckResult::Outcome::pass: ++report.passes; break;
            case CheckResult::Outcome::both_absent: ++report.both_absent; break;
            case CheckResult::Outcome::anomaly:
                report.anomalies.push_back(std::move(*r.anomaly));
                break;
        }
    }
    return report;
}

inline AnomalyReport tie_out(const EventGraph& graph, const ReferenceCapTable& ref) {
    CapState virt = build_virtual_captable(graph);
    CapState ref_state = reference_to_capstate(ref, graph);
    return tie_out_states(graph, virt, ref_state);
}

} // namespace tieout
