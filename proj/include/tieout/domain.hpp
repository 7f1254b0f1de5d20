#pragma once

// Core domain model: documents, stakeholders, security classes, lifecycle
// events, and the temporally ordered Event Graph they form.
//
// The graph is the engine's world model. It is validated once at
// construction (build_graph) and immutable afterwards; readers may share it
// freely. Ordering is total: (effective_date, seq, event_id).

#include "tieout/date.hpp"
#include "tieout/rational.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace tieout {

// ---------------------------------------------------------------------------
// Documents
// ---------------------------------------------------------------------------

enum class DocCategory {
    cap_table,
    stock_purchase_agreement,
    convertible_security,
    employment_contract,
    amendment,
    charter_bylaws,
    board_shareholder_consent,
    term_sheet,
    ancillary_equity_agreement,
};

inline constexpr int kDocCategoryCount = 9;

inline const char* to_string(DocCategory c) {
    switch (c) {
        case DocCategory::cap_table: return "cap_table";
        case DocCategory::stock_purchase_agreement: return "stock_purchase_agreement";
        case DocCategory::convertible_security: return "convertible_security";
        case DocCategory::employment_contract: return "employment_contract";
        case DocCategory::amendment: return "amendment";
        case DocCategory::charter_bylaws: return "charter_bylaws";
        case DocCategory::board_shareholder_consent: return "board_shareholder_consent";
        case DocCategory::term_sheet: return "term_sheet";
        case DocCategory::ancillary_equity_agreement: return "ancillary_equity_agreement";
    }
    return "?";
}

inline DocCategory doc_category_from_string(const std::string& s) {
    for (int i = 0; i < kDocCategoryCount; ++i) {
        auto c = static_cast<DocCategory>(i);
        if (s == to_string(c)) return c;
    }
    throw std::invalid_argument("unknown document category: " + s);
}

struct DocumentRef {
    std::string doc_id;
    DocCategory category = DocCategory::ancillary_equity_agreement;
    Date date;
    std::string title;
    int page_count = 1;
};

// ---------------------------------------------------------------------------
// Parties and classes
// ---------------------------------------------------------------------------

enum class StakeholderKind { individual, fund, entity };

inline const char* to_string(StakeholderKind k) {
    switch (k) {
        case StakeholderKind::individual: return "individual";
        case StakeholderKind::fund: return "fund";
        case StakeholderKind::entity: return "entity";
    }
    return "?";
}

inline StakeholderKind stakeholder_kind_from_string(const std::string& s) {
    if (s == "individual") return StakeholderKind::individual;
    if (s == "fund") return StakeholderKind::fund;
    if (s == "entity") return StakeholderKind::entity;
    throw std::invalid_argument("unknown stakeholder kind: " + s);
}

struct Stakeholder {
    std::string stakeholder_id;
    std::string canonical_name;
    std::vector<std::string> aliases;
    StakeholderKind kind = StakeholderKind::individual;
};

enum class SecurityKind { common, preferred_series, option, safe, warrant, convertible_note };

inline const char* to_string(SecurityKind k) {
    switch (k) {
        case SecurityKind::common: return "common";
        case SecurityKind::preferred_series: return "preferred_series";
        case SecurityKind::option: return "option";
        case SecurityKind::safe: return "safe";
        case SecurityKind::warrant: return "warrant";
        case SecurityKind::convertible_note: return "convertible_note";
    }
    return "?";
}

inline SecurityKind security_kind_from_string(const std::string& s) {
    if (s == "common") return SecurityKind::common;
    if (s == "preferred_series") return SecurityKind::preferred_series;
    if (s == "option") return SecurityKind::option;
    if (s == "safe") return SecurityKind::safe;
    if (s == "warrant") return SecurityKind::warrant;
    if (s == "convertible_note") return SecurityKind::convertible_note;
    throw std::invalid_argument("unknown security kind: " + s);
}

struct SecurityClass {
    std::string class_id;
    std::string name;  // e.g. "Common (CS)"
    SecurityKind kind = SecurityKind::common;
    std::optional<std::int64_t> authorized;
};

// ---------------------------------------------------------------------------
// Terms
// ---------------------------------------------------------------------------

// "1/60th monthly, 1 year cliff". Only monthly periods exist in the corpus;
// anything outside the grammar is carried verbatim and compared as an
// opaque normalized string.
struct VestingTerms {
    int fraction_denominator = 0;
    int cliff_months = 0;

    auto operator<=>(const VestingTerms&) const = default;

    std::string to_string() const {
        std::string s = "1/" + std::to_string(fraction_denominator) + "th monthly, ";
        if (cliff_months == 0) return s + "no cliff";
        if (cliff_months % 12 == 0) {
            int years = cliff_months / 12;
            return s + std::to_string(years) + (years == 1 ? " year cliff" : " years cliff");
        }
        return s + std::to_string(cliff_months) +
               (cliff_months == 1 ? " month cliff" : " months cliff");
    }
};

// Parsed terms plus the original text. `parsed` is empty for out-of-grammar
// strings (including the empty string, meaning "no vesting stated").
struct VestingSpec {
    std::optional<VestingTerms> parsed;
    std::string raw;

    bool operator==(const VestingSpec& o) const;

    std::string to_string() const { return parsed ? parsed->to_string() : raw; }

    static VestingSpec of(int denom, int cliff) {
        VestingSpec v;
        v.parsed = VestingTerms{denom, cliff};
        v.raw = v.parsed->to_string();
        return v;
    }

    static VestingSpec parse(const std::string& s);
};

enum class Acceleration { none, single_trigger, double_trigger, yes_unspecified };

inline const char* to_string(Acceleration a) {
    switch (a) {
        case Acceleration::none: return "none";
        case Acceleration::single_trigger: return "single_trigger";
        case Acceleration::double_trigger: return "double_trigger";
        case Acceleration::yes_unspecified: return "yes_unspecified";
    }
    return "?";
}

inline Acceleration acceleration_from_string(const std::string& s) {
    if (s == "none") return Acceleration::none;
    if (s == "single_trigger") return Acceleration::single_trigger;
    if (s == "double_trigger") return Acceleration::double_trigger;
    if (s == "yes_unspecified") return Acceleration::yes_unspecified;
    throw std::invalid_argument("unknown acceleration: " + s);
}

// ---------------------------------------------------------------------------
// Name normalization
// ---------------------------------------------------------------------------

// Case-folded, punctuation stripped to spaces, whitespace collapsed.
// Matching is exact after normalization; there is no fuzzy matching, and
// variant spellings resolve only through the explicit alias table.
inline std::string normalize_name(const std::string& raw) {
    std::string out;
    out.reserve(raw.size());
    bool pending_space = false;
    for (unsigned char c : raw) {
        if (std::isalnum(c)) {
            if (pending_space && !out.empty()) out.push_back(' ');
            pending_space = false;
            out.push_back(static_cast<char>(std::tolower(c)));
        } else {
            pending_space = true;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Events
// ---------------------------------------------------------------------------

struct EvidenceRef {
    std::string doc_id;
    std::string locator;  // optional page/span descriptor

    auto operator<=>(const EvidenceRef&) const = default;
};

enum class EventKind {
    issuance,
    transfer,
    amendment,
    conversion,
    exercise,
    expiration,
    repurchase,
    cancellation,
    corporate_action,
};

inline const char* to_string(EventKind k) {
    switch (k) {
        case EventKind::issuance: return "Issuance";
        case EventKind::transfer: return "Transfer";
        case EventKind::amendment: return "Amendment";
        case EventKind::conversion: return "Conversion";
        case EventKind::exercise: return "Exercise";
        case EventKind::expiration: return "Expiration";
        case EventKind::repurchase: return "Repurchase";
        case EventKind::cancellation: return "Cancellation";
        case EventKind::corporate_action: return "CorporateAction";
    }
    return "?";
}

inline EventKind event_kind_from_string(const std::string& s) {
    if (s == "Issuance") return EventKind::issuance;
    if (s == "Transfer") return EventKind::transfer;
    if (s == "Amendment") return EventKind::amendment;
    if (s == "Conversion") return EventKind::conversion;
    if (s == "Exercise") return EventKind::exercise;
    if (s == "Expiration") return EventKind::expiration;
    if (s == "Repurchase") return EventKind::repurchase;
    if (s == "Cancellation") return EventKind::cancellation;
    if (s == "CorporateAction") return EventKind::corporate_action;
    throw std::invalid_argument("unknown event kind: " + s);
}

struct Issuance {
    std::string security_id;
    std::string stakeholder_id;
    std::string class_id;
    std::int64_t quantity = 0;
    Rational price_per_share;
    VestingSpec vesting;
    Acceleration acceleration = Acceleration::none;
};

struct Transfer {
    std::string security_id;
    std::string from_stakeholder;
    std::string to_stakeholder;
    std::int64_t quantity = 0;
};

struct Amendment {
    std::string target_security_id;
    std::map<std::string, std::string> field_changes;  // field name -> new value
};

struct Conversion {
    std::string source_security_id;
    std::string result_class_id;
    std::int64_t result_quantity = 0;
    std::string result_security_id;
};

struct Exercise {
    std::string option_security_id;
    std::int64_t quantity_exercised = 0;
    std::string result_security_id;  // the resulting common lot
};

struct Expiration {
    std::string security_id;
    std::int64_t quantity = 0;
};

struct Repurchase {
    std::string security_id;
    std::int64_t quantity = 0;
};

struct Cancellation {
    std::string security_id;
};

struct CorporateAction {
    std::string action_kind = "stock_split";  // only supported kind
    Rational ratio;                           // e.g. 10:1
    std::vector<std::string> affected_class_ids;
};

using EventPayload = std::variant<Issuance, Transfer, Amendment, Conversion, Exercise,
                                  Expiration, Repurchase, Cancellation, CorporateAction>;

struct Event {
    std::string event_id;
    EventKind kind = EventKind::issuance;
    Date effective_date;
    std::uint32_t seq = 0;  // resolves same-date ordering; never guessed
    std::vector<EvidenceRef> evidence;
    EventPayload payload;
};

// Total order over events. Same-date order is explicit via seq, with
// event_id as the final tiebreak so sorting is reproducible.
inline bool event_order_less(const Event& a, const Event& b) {
    if (a.effective_date != b.effective_date) return a.effective_date < b.effective_date;
    if (a.seq != b.seq) return a.seq < b.seq;
    return a.event_id < b.event_id;
}

// ---------------------------------------------------------------------------
// Edges
// ---------------------------------------------------------------------------

enum class EdgeKind { amends, derives_from, approved_by };

inline const char* to_string(EdgeKind k) {
    switch (k) {
        case EdgeKind::amends: return "AMENDS";
        case EdgeKind::derives_from: return "DERIVES_FROM";
        case EdgeKind::approved_by: return "APPROVED_BY";
    }
    return "?";
}

inline EdgeKind edge_kind_from_string(const std::string& s) {
    if (s == "AMENDS") return EdgeKind::amends;
    if (s == "DERIVES_FROM") return EdgeKind::derives_from;
    if (s == "APPROVED_BY") return EdgeKind::approved_by;
    throw std::invalid_argument("unknown edge kind: " + s);
}

struct GraphEdge {
    std::string src_event_id;
    EdgeKind kind = EdgeKind::amends;
    std::string dst_id;  // event id (AMENDS, DERIVES_FROM) or doc id (APPROVED_BY)

    auto operator<=>(const GraphEdge&) const = default;
};

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

struct DanglingReference : std::runtime_error {
    std::string missing_id;
    DanglingReference(const std::string& id, const std::string& context)
        : std::runtime_error("dangling reference to '" + id + "' (" + context + ")"),
          missing_id(id) {}
};

struct CycleDetected : std::runtime_error {
    std::vector<std::string> cycle;  // one offending event-id cycle
    explicit CycleDetected(std::vector<std::string> c)
        : std::runtime_error(describe(c)), cycle(std::move(c)) {}

private:
    static std::string describe(const std::vector<std::string>& c) {
        std::string s = "cycle detected:";
        for (const auto& id : c) s += " " + id;
        return s;
    }
};

struct InvalidPayload : std::runtime_error {
    std::string event_id;
    std::string field;
    InvalidPayload(const std::string& ev, const std::string& fld, const std::string& msg)
        : std::runtime_error("invalid payload" + (ev.empty() ? "" : " in " + ev) + ": " + fld +
                             ": " + msg),
          event_id(ev),
          field(fld) {}
};

// ---------------------------------------------------------------------------
// EventGraph
// ---------------------------------------------------------------------------

struct ResolveResult {
    enum class Status { found, not_found, ambiguous };
    Status status = Status::not_found;
    std::string stakeholder_id;

    bool found() const { return status == Status::found; }
};

class EventGraph {
public:
    const std::vector<DocumentRef>& documents() const { return documents_; }
    const std::vector<Stakeholder>& stakeholders() const { return stakeholders_; }
    const std::vector<SecurityClass>& classes() const { return classes_; }
    const std::vector<Event>& events() const { return events_; }  // in total order
    const std::vector<GraphEdge>& edges() const { return edges_; }

    const DocumentRef* find_document(const std::string& id) const {
        auto it = doc_index_.find(id);
        return it == doc_index_.end() ? nullptr : &documents_[it->second];
    }
    const Stakeholder* find_stakeholder(const std::string& id) const {
        auto it = stakeholder_index_.find(id);
        return it == stakeholder_index_.end() ? nullptr : &stakeholders_[it->second];
    }
    const SecurityClass* find_class(const std::string& id) const {
        auto it = class_index_.find(id);
        return it == class_index_.end() ? nullptr : &classes_[it->second];
    }
    const Event* find_event(const std::string& id) const {
        auto it = event_index_.find(id);
        return it == event_index_.end() ? nullptr : &events_[it->second];
    }

    // Outgoing edges of an event, sorted.
    std::vector<GraphEdge> edges_from(const std::string& event_id) const {
        std::vector<GraphEdge> out;
        auto range = edges_by_src_.equal_range(event_id);
        for (auto it = range.first; it != range.second; ++it) out.push_back(edges_[it->second]);
        std::sort(out.begin(), out.end());
        return out;
    }

    bool has_approval(const std::string& event_id) const {
        for (const auto& e : edges_from(event_id))
            if (e.kind == EdgeKind::approved_by) return true;
        return false;
    }

    // Evidence doc ids that do not resolve within the corpus, per event.
    // A dataroom missing a cited document is a defect to surface, not a
    // malformed input; replay marks the affected lots under-evidenced.
    const std::map<std::string, std::set<std::string>>& unresolved_evidence() const {
        return unresolved_evidence_;
    }
    bool event_under_evidenced(const std::string& event_id) const {
        return unresolved_evidence_.count(event_id) > 0;
    }

    // Exact match on canonical name or any alias, after normalization.
    ResolveResult resolve_stakeholder(const std::string& name) const {
        auto it = name_index_.find(normalize_name(name));
        if (it == name_index_.end()) return {ResolveResult::Status::not_found, ""};
        if (it->second.size() > 1) return {ResolveResult::Status::ambiguous, ""};
        return {ResolveResult::Status::found, *it->second.begin()};
    }

    Date max_event_date() const {
        return events_.empty() ? Date{} : events_.back().effective_date;
    }

    friend EventGraph build_graph(std::vector<DocumentRef> documents,
                                  std::vector<Stakeholder> stakeholders,
                                  std::vector<SecurityClass> classes, std::vector<Event> events,
                                  std::vector<GraphEdge> edges);

private:
    std::vector<DocumentRef> documents_;
    std::vector<Stakeholder> stakeholders_;
    std::vector<SecurityClass> classes_;
    std::vector<Event> events_;
    std::vector<GraphEdge> edges_;
    std::map<std::string, std::size_t> doc_index_;
    std::map<std::string, std::size_t> stakeholder_index_;
    std::map<std::string, std::size_t> class_index_;
    std::map<std::string, std::size_t> event_index_;
    std::multimap<std::string, std::size_t> edges_by_src_;
    std::map<std::string, std::set<std::string>> name_index_;
    std::map<std::string, std::set<std::string>> unresolved_evidence_;
};

namespace detail {

inline void validate_payload(const Event& ev) {
    auto positive = [&](std::int64_t q, const char* field) {
        if (q <= 0) throw InvalidPayload(ev.event_id, field, "must be strictly positive");
    };
    if (ev.evidence.empty())
        throw InvalidPayload(ev.event_id, "evidence", "must be non-empty");
    if (!ev.effective_date.valid())
        throw InvalidPayload(ev.event_id, "effective_date", "invalid calendar date");

    switch (ev.kind) {
        case EventKind::issuance: {
            const auto& p = std::get<Issuance>(ev.payload);
            positive(p.quantity, "quantity");
            if (p.price_per_share.is_negative())
                throw InvalidPayload(ev.event_id, "price_per_share", "must be non-negative");
            if (p.security_id.empty())
                throw InvalidPayload(ev.event_id, "security_id", "must be non-empty");
            break;
        }
        case EventKind::transfer: {
            const auto& p = std::get<Transfer>(ev.payload);
            positive(p.quantity, "quantity");
            if (p.from_stakeholder == p.to_stakeholder)
                throw InvalidPayload(ev.event_id, "to_stakeholder",
                                     "transfer endpoints must differ");
            break;
        }
        case EventKind::amendment: {
            const auto& p = std::get<Amendment>(ev.payload);
            if (p.field_changes.empty())
                throw InvalidPayload(ev.event_id, "field_changes", "must be non-empty");
            for (const auto& [field, value] : p.field_changes) {
                if (field == "price_per_share") {
                    Rational r;
                    try {
                        r = Rational::parse_decimal(value);
                    } catch (const std::exception& e) {
                        throw InvalidPayload(ev.event_id, field, e.what());
                    }
                    if (r.is_negative())
                        throw InvalidPayload(ev.event_id, field, "must be non-negative");
                } else if (field == "vesting") {
                    // any string is allowed; out-of-grammar values stay opaque
                } else if (field == "acceleration") {
                    try {
                        acceleration_from_string(value);
                    } catch (const std::exception& e) {
                        throw InvalidPayload(ev.event_id, field, e.what());
                    }
                } else {
                    throw InvalidPayload(ev.event_id, field, "unknown amendable field");
                }
            }
            break;
        }
        case EventKind::conversion: {
            const auto& p = std::get<Conversion>(ev.payload);
            positive(p.result_quantity, "result_quantity");
            if (p.result_security_id.empty() || p.source_security_id.empty())
                throw InvalidPayload(ev.event_id, "security_id", "must be non-empty");
            break;
        }
        case EventKind::exercise:
            positive(std::get<Exercise>(ev.payload).quantity_exercised, "quantity_exercised");
            break;
        case EventKind::expiration:
            positive(std::get<Expiration>(ev.payload).quantity, "quantity");
            break;
        case EventKind::repurchase:
            positive(std::get<Repurchase>(ev.payload).quantity, "quantity");
            break;
        case EventKind::cancellation:
            if (std::get<Cancellation>(ev.payload).security_id.empty())
                throw InvalidPayload(ev.event_id, "security_id", "must be non-empty");
            break;
        case EventKind::corporate_action: {
            const auto& p = std::get<CorporateAction>(ev.payload);
            if (p.action_kind != "stock_split")
                throw InvalidPayload(ev.event_id, "kind",
                                     "unsupported corporate action: " + p.action_kind);
            if (!(p.ratio > Rational(0)))
                throw InvalidPayload(ev.event_id, "ratio", "must be positive");
            if (p.affected_class_ids.empty())
                throw InvalidPayload(ev.event_id, "affected_class_ids", "must be non-empty");
            break;
        }
    }

    // payload variant must agree with the declared kind
    static constexpr EventKind kind_of[] = {
        EventKind::issuance,   EventKind::transfer,   EventKind::amendment,
        EventKind::conversion, EventKind::exercise,   EventKind::expiration,
        EventKind::repurchase, EventKind::cancellation, EventKind::corporate_action};
    if (kind_of[ev.payload.index()] != ev.kind)
        throw InvalidPayload(ev.event_id, "payload", "payload does not match event kind");
}

} // namespace detail

// Validates and assembles the immutable graph. Inputs may arrive unordered;
// events are sorted into the (effective_date, seq, event_id) total order.
inline EventGraph build_graph(std::vector<DocumentRef> documents,
                              std::vector<Stakeholder> stakeholders,
                              std::vector<SecurityClass> classes, std::vector<Event> events,
                              std::vector<GraphEdge> edges) {
    EventGraph g;
    g.documents_ = std::move(documents);
    g.stakeholders_ = std::move(stakeholders);
    g.classes_ = std::move(classes);
    g.events_ = std::move(events);
    g.edges_ = std::move(edges);

    for (std::size_t i = 0; i < g.documents_.size(); ++i) {
        const auto& d = g.documents_[i];
        if (d.doc_id.empty()) throw InvalidPayload(d.doc_id, "doc_id", "must be non-empty");
        if (d.page_count <= 0)
            throw InvalidPayload(d.doc_id, "page_count", "must be positive");
        if (!g.doc_index_.emplace(d.doc_id, i).second)
            throw InvalidPayload(d.doc_id, "doc_id", "duplicate document id");
    }
    for (std::size_t i = 0; i < g.stakeholders_.size(); ++i) {
        const auto& s = g.stakeholders_[i];
        if (s.canonical_name.empty())
            throw InvalidPayload(s.stakeholder_id, "canonical_name", "must be non-empty");
        if (!g.stakeholder_index_.emplace(s.stakeholder_id, i).second)
            throw InvalidPayload(s.stakeholder_id, "stakeholder_id", "duplicate stakeholder id");
        std::set<std::string> seen;
        for (const auto& a : s.aliases)
            if (!seen.insert(normalize_name(a)).second)
                throw InvalidPayload(s.stakeholder_id, "aliases",
                                     "aliases not pairwise distinct after normalization");
    }
    for (std::size_t i = 0; i < g.classes_.size(); ++i) {
        const auto& c = g.classes_[i];
        if (c.authorized && *c.authorized <= 0)
            throw InvalidPayload(c.class_id, "authorized", "must be positive when present");
        if (!g.class_index_.emplace(c.class_id, i).second)
            throw InvalidPayload(c.class_id, "class_id", "duplicate class id");
    }

    std::sort(g.events_.begin(), g.events_.end(), event_order_less);
    for (std::size_t i = 0; i < g.events_.size(); ++i) {
        const auto& ev = g.events_[i];
        if (ev.event_id.empty()) throw InvalidPayload("", "event_id", "must be non-empty");
        if (!g.event_index_.emplace(ev.event_id, i).second)
            throw InvalidPayload(ev.event_id, "event_id", "duplicate event id");
        detail::validate_payload(ev);
    }

    // identifier references must resolve; the one exception is event
    // evidence, where a missing document is itself reconciliation signal
    auto need_stakeholder = [&](const std::string& id, const std::string& ctx) {
        if (!g.stakeholder_index_.count(id)) throw DanglingReference(id, ctx);
    };
    auto need_class = [&](const std::string& id, const std::string& ctx) {
        if (!g.class_index_.count(id)) throw DanglingReference(id, ctx);
    };
    for (const auto& ev : g.events_) {
        for (const auto& ref : ev.evidence)
            if (!g.doc_index_.count(ref.doc_id))
                g.unresolved_evidence_[ev.event_id].insert(ref.doc_id);
        if (const auto* p = std::get_if<Issuance>(&ev.payload)) {
            need_stakeholder(p->stakeholder_id, "issuance " + ev.event_id);
            need_class(p->class_id, "issuance " + ev.event_id);
        } else if (const auto* t = std::get_if<Transfer>(&ev.payload)) {
            need_stakeholder(t->from_stakeholder, "transfer " + ev.event_id);
            need_stakeholder(t->to_stakeholder, "transfer " + ev.event_id);
        } else if (const auto* c = std::get_if<Conversion>(&ev.payload)) {
            need_class(c->result_class_id, "conversion " + ev.event_id);
        } else if (const auto* a = std::get_if<CorporateAction>(&ev.payload)) {
            for (const auto& cid : a->affected_class_ids)
                need_class(cid, "corporate action " + ev.event_id);
        }
    }

    for (std::size_t i = 0; i < g.edges_.size(); ++i) {
        const auto& e = g.edges_[i];
        auto src_it = g.event_index_.find(e.src_event_id);
        if (src_it == g.event_index_.end())
            throw DanglingReference(e.src_event_id, "edge source");
        const Event& src = g.events_[src_it->second];
        switch (e.kind) {
            case EdgeKind::amends:
                if (src.kind != EventKind::amendment)
                    throw InvalidPayload(e.src_event_id, "edge",
                                         "AMENDS source must be an Amendment event");
                if (!g.event_index_.count(e.dst_id))
                    throw DanglingReference(e.dst_id, "AMENDS target");
                break;
            case EdgeKind::derives_from:
                if (src.kind != EventKind::issuance && src.kind != EventKind::exercise &&
                    src.kind != EventKind::conversion)
                    throw InvalidPayload(e.src_event_id, "edge",
                                         "DERIVES_FROM source must be an Issuance, Exercise, or "
                                         "Conversion event");
                if (!g.event_index_.count(e.dst_id))
                    throw DanglingReference(e.dst_id, "DERIVES_FROM target");
                break;
            case EdgeKind::approved_by: {
                auto doc_it = g.doc_index_.find(e.dst_id);
                if (doc_it == g.doc_index_.end())
                    throw DanglingReference(e.dst_id, "APPROVED_BY target");
                if (g.documents_[doc_it->second].category !=
                    DocCategory::board_shareholder_consent)
                    throw InvalidPayload(e.src_event_id, "edge",
                                         "APPROVED_BY target must be a board/shareholder consent "
                                         "document");
                break;
            }
        }
        g.edges_by_src_.emplace(e.src_event_id, i);
    }

    // AMENDS + DERIVES_FROM must be acyclic (event-to-event edges only)
    {
        std::map<std::string, std::vector<std::string>> adj;
        for (const auto& e : g.edges_)
            if (e.kind != EdgeKind::approved_by) adj[e.src_event_id].push_back(e.dst_id);
        std::map<std::string, int> state;  // 0 new, 1 on stack, 2 done
        std::vector<std::string> stack;
        auto dfs = [&](auto&& self, const std::string& node) -> void {
            state[node] = 1;
            stack.push_back(node);
            for (const auto& next : adj[node]) {
                if (state[next] == 1) {
                    auto begin = std::find(stack.begin(), stack.end(), next);
                    std::vector<std::string> cycle(begin, stack.end());
                    cycle.push_back(next);
                    throw CycleDetected(std::move(cycle));
                }
                if (state[next] == 0) self(self, next);
            }
            stack.pop_back();
            state[node] = 2;
        };
        for (const auto& [node, _] : adj)
            if (state[node] == 0) dfs(dfs, node);
    }

    for (const auto& s : g.stakeholders_) {
        g.name_index_[normalize_name(s.canonical_name)].insert(s.stakeholder_id);
        for (const auto& a : s.aliases) g.name_index_[normalize_name(a)].insert(s.stakeholder_id);
    }
    return g;
}

// --- VestingSpec impl ------------------------------------------------------

inline bool VestingSpec::operator==(const VestingSpec& o) const {
    if (parsed && o.parsed) return *parsed == *o.parsed;
    if (parsed || o.parsed) return false;
    return normalize_name(raw) == normalize_name(o.raw);
}

// Grammar: "1/N[th|st|nd|rd] monthly" + optional ", no cliff" | ", N year[s]
// cliff" | ", N month[s] cliff". Everything else is preserved verbatim.
inline VestingSpec VestingSpec::parse(const std::string& s) {
    VestingSpec out;
    out.raw = s;

    std::string t;
    t.reserve(s.size());
    for (char c : s) t.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));

    std::size_t i = 0;
    auto skip_ws = [&] { while (i < t.size() && t[i] == ' ') ++i; };
    auto read_int = [&]() -> int {
        std::size_t start = i;
        while (i < t.size() && std::isdigit(static_cast<unsigned char>(t[i]))) ++i;
        if (i == start) return -1;
        return std::stoi(t.substr(start, i - start));
    };
    auto eat = [&](const char* word) {
        std::size_t n = std::string(word).size();
        if (t.compare(i, n, word) == 0) { i += n; return true; }
        return false;
    };

    skip_ws();
    if (!eat("1/")) return out;
    int denom = read_int();
    if (denom <= 0) return out;
    eat("th") || eat("st") || eat("nd") || eat("rd");
    skip_ws();
    if (!eat("monthly")) return out;
    skip_ws();

    int cliff = 0;
    if (i < t.size()) {
        if (!eat(",")) return out;
        skip_ws();
        if (eat("no cliff")) {
            cliff = 0;
        } else {
            int n = read_int();
            if (n < 0) return out;
            skip_ws();
            if (eat("year")) cliff = n * 12;
            else if (eat("month")) cliff = n;
            else return out;
            eat("s");
            skip_ws();
            if (!eat("cliff")) return out;
        }
        skip_ws();
    }
    if (i != t.size()) return out;

    out.parsed = VestingTerms{denom, cliff};
    return out;
}

} // namespace tieout
