#pragma once

// JSON and JSONL serialization for every artifact the tool reads or writes:
// event bundles, anomaly reports, ground truth, scorecards, manifests.
// Output is canonical (sorted keys, two-space indent, trailing newline) so
// byte comparison doubles as semantic comparison. Dates are ISO-8601,
// rationals are "N:M" strings, money is an exact decimal string.

#include "tieout/captable.hpp"
#include "tieout/domain.hpp"
#include "tieout/evalkit.hpp"
#include "tieout/rng.hpp"
#include "tieout/synth.hpp"
#include "tieout/verify.hpp"

#include <json.hpp>

#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace tieout {

using json = nlohmann::json;

inline constexpr const char* kGeneratorVersion = "tieout-synth/1.0.0";

struct IoError : std::runtime_error {
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

// nlohmann::json keeps object keys sorted; dump() is therefore canonical.
inline std::string canonical_dump(const json& j) { return j.dump(2) + "\n"; }

namespace io_detail {

inline std::string ratio_string(const Rational& r) {
    return std::to_string(r.num()) + ":" + std::to_string(r.den());
}

inline const json& need(const json& j, const char* key, const char* ctx) {
    auto it = j.find(key);
    if (it == j.end())
        throw IoError(std::string(ctx) + ": missing key \"" + key + "\"");
    return *it;
}

inline std::string need_string(const json& j, const char* key, const char* ctx) {
    const json& v = need(j, key, ctx);
    if (!v.is_string())
        throw IoError(std::string(ctx) + ": key \"" + key + "\" must be a string");
    return v.get<std::string>();
}

inline std::int64_t need_int(const json& j, const char* key, const char* ctx) {
    const json& v = need(j, key, ctx);
    if (!v.is_number_integer())
        throw IoError(std::string(ctx) + ": key \"" + key + "\" must be an integer");
    return v.get<std::int64_t>();
}

} // namespace io_detail

// ---------------------------------------------------------------------------
// Bundle: documents, stakeholders, classes, events, edges
// ---------------------------------------------------------------------------

inline json document_to_json(const DocumentRef& d) {
    return json{{"doc_id", d.doc_id},
                {"category", to_string(d.category)},
                {"date", d.date.to_string()},
                {"title", d.title},
                {"page_count", d.page_count}};
}

inline DocumentRef document_from_json(const json& j) {
    DocumentRef d;
    d.doc_id = io_detail::need_string(j, "doc_id", "document");
    d.category = doc_category_from_string(io_detail::need_string(j, "category", "document"));
    d.date = Date::parse(io_detail::need_string(j, "date", "document"));
    d.title = j.value("title", "");
    d.page_count = static_cast<int>(j.value("page_count", 1));
    return d;
}

inline json stakeholder_to_json(const Stakeholder& s) {
    return json{{"stakeholder_id", s.stakeholder_id},
                {"canonical_name", s.canonical_name},
                {"aliases", s.aliases},
                {"kind", to_string(s.kind)}};
}

inline Stakeholder stakeholder_from_json(const json& j) {
    Stakeholder s;
    s.stakeholder_id = io_detail::need_string(j, "stakeholder_id", "stakeholder");
    s.canonical_name = io_detail::need_string(j, "canonical_name", "stakeholder");
    if (j.contains("aliases")) s.aliases = j.at("aliases").get<std::vector<std::string>>();
    s.kind = stakeholder_kind_from_string(j.value("kind", "individual"));
    return s;
}

inline json class_to_json(const SecurityClass& c) {
    json j{{"class_id", c.class_id}, {"name", c.name}, {"kind", to_string(c.kind)}};
    if (c.authorized) j["authorized"] = *c.authorized;
    return j;
}

inline SecurityClass class_from_json(const json& j) {
    SecurityClass c;
    c.class_id = io_detail::need_string(j, "class_id", "class");
    c.name = io_detail::need_string(j, "name", "class");
    c.kind = security_kind_from_string(io_detail::need_string(j, "kind", "class"));
    if (j.contains("authorized") && !j.at("authorized").is_null())
        c.authorized = j.at("authorized").get<std::int64_t>();
    return c;
}

inline json payload_to_json(const EventPayload& payload) {
    json j;
    std::visit(
        [&](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, Issuance>) {
                j["security_id"] = p.security_id;
                j["stakeholder_id"] = p.stakeholder_id;
                j["class_id"] = p.class_id;
                j["quantity"] = p.quantity;
                j["price_per_share"] = p.price_per_share.to_decimal_string();
                j["vesting"] = p.vesting.to_string();
                j["acceleration"] = to_string(p.acceleration);
            } else if constexpr (std::is_same_v<T, Transfer>) {
                j["security_id"] = p.security_id;
                j["from_stakeholder"] = p.from_stakeholder;
                j["to_stakeholder"] = p.to_stakeholder;
                j["quantity"] = p.quantity;
            } else if constexpr (std::is_same_v<T, Amendment>) {
                j["target_security_id"] = p.target_security_id;
                j["field_changes"] = p.field_changes;
            } else if constexpr (std::is_same_v<T, Conversion>) {
                j["source_security_id"] = p.source_security_id;
                j["result_class_id"] = p.result_class_id;
                j["result_quantity"] = p.result_quantity;
                j["result_security_id"] = p.result_security_id;
            } else if constexpr (std::is_same_v<T, Exercise>) {
                j["option_security_id"] = p.option_security_id;
                j["quantity_exercised"] = p.quantity_exercised;
                j["result_security_id"] = p.result_security_id;
            } else if constexpr (std::is_same_v<T, Expiration>) {
                j["security_id"] = p.security_id;
                j["quantity"] = p.quantity;
            } else if constexpr (std::is_same_v<T, Repurchase>) {
                j["security_id"] = p.security_id;
                j["quantity"] = p.quantity;
            } else if constexpr (std::is_same_v<T, Cancellation>) {
                j["security_id"] = p.security_id;
            } else {
                j["kind"] = p.action_kind;
                j["ratio"] = io_detail::ratio_string(p.ratio);
                j["affected_class_ids"] = p.affected_class_ids;
            }
        },
        payload);
    return j;
}

inline EventPayload payload_from_json(EventKind kind, const json& j) {
    using io_detail::need_int;
    using io_detail::need_string;
    switch (kind) {
        case EventKind::issuance: {
            Issuance p;
            p.security_id = need_string(j, "security_id", "Issuance");
            p.stakeholder_id = need_string(j, "stakeholder_id", "Issuance");
            p.class_id = need_string(j, "class_id", "Issuance");
            p.quantity = need_int(j, "quantity", "Issuance");
            p.price_per_share =
                Rational::parse_decimal(need_string(j, "price_per_share", "Issuance"));
            p.vesting = VestingSpec::parse(j.value("vesting", ""));
            p.acceleration = acceleration_from_string(j.value("acceleration", "none"));
            return p;
        }
        case EventKind::transfer: {
            Transfer p;
            p.security_id = need_string(j, "security_id", "Transfer");
            p.from_stakeholder = need_string(j, "from_stakeholder", "Transfer");
            p.to_stakeholder = need_string(j, "to_stakeholder", "Transfer");
            p.quantity = need_int(j, "quantity", "Transfer");
            return p;
        }
        case EventKind::amendment: {
            Amendment p;
            p.target_security_id = need_string(j, "target_security_id", "Amendment");
            if (j.contains("field_changes"))
                p.field_changes =
                    j.at("field_changes").get<std::map<std::string, std::string>>();
            return p;
        }
        case EventKind::conversion: {
            Conversion p;
            p.source_security_id = need_string(j, "source_security_id", "Conversion");
            p.result_class_id = need_string(j, "result_class_id", "Conversion");
            p.result_quantity = need_int(j, "result_quantity", "Conversion");
            p.result_security_id = need_string(j, "result_security_id", "Conversion");
            return p;
        }
        case EventKind::exercise: {
            Exercise p;
            p.option_security_id = need_string(j, "option_security_id", "Exercise");
            p.quantity_exercised = need_int(j, "quantity_exercised", "Exercise");
            p.result_security_id = need_string(j, "result_security_id", "Exercise");
            return p;
        }
        case EventKind::expiration: {
            Expiration p;
            p.security_id = need_string(j, "security_id", "Expiration");
            p.quantity = need_int(j, "quantity", "Expiration");
            return p;
        }
        case EventKind::repurchase: {
            Repurchase p;
            p.security_id = need_string(j, "security_id", "Repurchase");
            p.quantity = need_int(j, "quantity", "Repurchase");
            return p;
        }
        case EventKind::cancellation: {
            Cancellation p;
            p.security_id = need_string(j, "security_id", "Cancellation");
            return p;
        }
        case EventKind::corporate_action: {
            CorporateAction p;
            p.action_kind = j.value("kind", "stock_split");
            p.ratio = Rational::parse(need_string(j, "ratio", "CorporateAction"));
            if (j.contains("affected_class_ids"))
                p.affected_class_ids =
                    j.at("affected_class_ids").get<std::vector<std::string>>();
            return p;
        }
    }
    throw IoError("unknown event kind in payload");
}

inline json event_to_json(const Event& e) {
    json evidence = json::array();
    for (const auto& ref : e.evidence) {
        json r{{"doc_id", ref.doc_id}};
        if (!ref.locator.empty()) r["locator"] = ref.locator;
        evidence.push_back(std::move(r));
    }
    return json{{"event_id", e.event_id},
                {"kind", to_string(e.kind)},
                {"effective_date", e.effective_date.to_string()},
                {"seq", e.seq},
                {"evidence", std::move(evidence)},
                {"payload", payload_to_json(e.payload)}};
}

inline Event event_from_json(const json& j) {
    Event e;
    e.event_id = io_detail::need_string(j, "event_id", "event");
    e.kind = event_kind_from_string(io_detail::need_string(j, "kind", "event"));
    e.effective_date = Date::parse(io_detail::need_string(j, "effective_date", "event"));
    e.seq = static_cast<std::uint32_t>(io_detail::need_int(j, "seq", "event"));
    if (j.contains("evidence")) {
        for (const auto& r : j.at("evidence")) {
            EvidenceRef ref;
            ref.doc_id = io_detail::need_string(r, "doc_id", "evidence");
            ref.locator = r.value("locator", "");
            e.evidence.push_back(std::move(ref));
        }
    }
    e.payload = payload_from_json(e.kind, io_detail::need(j, "payload", "event"));
    return e;
}

inline json edge_to_json(const GraphEdge& e) {
    return json{{"src_event_id", e.src_event_id}, {"kind", to_string(e.kind)},
                {"dst_id", e.dst_id}};
}

inline GraphEdge edge_from_json(const json& j) {
    GraphEdge e;
    e.src_event_id = io_detail::need_string(j, "src_event_id", "edge");
    e.kind = edge_kind_from_string(io_detail::need_string(j, "kind", "edge"));
    e.dst_id = io_detail::need_string(j, "dst_id", "edge");
    return e;
}

inline json bundle_to_json(const EventGraph& graph) {
    json j;
    j["documents"] = json::array();
    for (const auto& d : graph.documents()) j["documents"].push_back(document_to_json(d));
    j["stakeholders"] = json::array();
    for (const auto& s : graph.stakeholders()) j["stakeholders"].push_back(stakeholder_to_json(s));
    j["classes"] = json::array();
    for (const auto& c : graph.classes()) j["classes"].push_back(class_to_json(c));
    j["events"] = json::array();
    for (const auto& e : graph.events()) j["events"].push_back(event_to_json(e));
    j["edges"] = json::array();
    for (const auto& e : graph.edges()) j["edges"].push_back(edge_to_json(e));
    return j;
}

inline EventGraph bundle_from_json(const json& j) {
    if (!j.is_object()) throw IoError("bundle: top level must be an object");
    std::vector<DocumentRef> documents;
    std::vector<Stakeholder> stakeholders;
    std::vector<SecurityClass> classes;
    std::vector<Event> events;
    std::vector<GraphEdge> edges;
    for (const auto& d : io_detail::need(j, "documents", "bundle"))
        documents.push_back(document_from_json(d));
    for (const auto& s : io_detail::need(j, "stakeholders", "bundle"))
        stakeholders.push_back(stakeholder_from_json(s));
    for (const auto& c : io_detail::need(j, "classes", "bundle"))
        classes.push_back(class_from_json(c));
    for (const auto& e : io_detail::need(j, "events", "bundle"))
        events.push_back(event_from_json(e));
    if (j.contains("edges"))
        for (const auto& e : j.at("edges")) edges.push_back(edge_from_json(e));
    return build_graph(std::move(documents), std::move(stakeholders), std::move(classes),
                       std::move(events), std::move(edges));
}

// One event object per line.
inline std::string events_to_jsonl(const std::vector<Event>& events) {
    std::ostringstream out;
    for (const auto& e : events) out << event_to_json(e).dump() << "\n";
    return out.str();
}

inline std::vector<Event> events_from_jsonl(const std::string& text) {
    std::vector<Event> events;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            events.push_back(event_from_json(json::parse(line)));
        } catch (const json::exception& ex) {
            throw IoError("events line " + std::to_string(line_no) + ": " + ex.what());
        }
    }
    return events;
}

// ---------------------------------------------------------------------------
// Report
// ---------------------------------------------------------------------------

inline json field_value_to_json(const FieldValue& v) {
    return json{{"type", v.tag_name()}, {"value", v.display()}};
}

inline json evidence_set_to_json(const EvidenceSet& e) {
    return json{{"doc_ids", std::vector<std::string>(e.doc_ids.begin(), e.doc_ids.end())},
                {"event_ids", std::vector<std::string>(e.event_ids.begin(), e.event_ids.end())}};
}

inline json anomaly_to_json(const Anomaly& a) {
    return json{
        {"kind", to_string(a.kind)},
        {"sub_label", a.sub_label},
        {"address", a.address.to_string()},
        {"virt_value", field_value_to_json(a.virt_value)},
        {"ref_value", field_value_to_json(a.ref_value)},
        {"evidence", evidence_set_to_json(a.evidence)},
        {"affected",
         json{{"security_ids", std::vector<std::string>(a.affected.security_ids.begin(),
                                                        a.affected.security_ids.end())},
              {"stakeholder_ids", std::vector<std::string>(a.affected.stakeholder_ids.begin(),
                                                           a.affected.stakeholder_ids.end())}}}};
}

inline json report_to_json(const AnomalyReport& report) {
    json counts = json::object();
    for (const auto& [kind, n] : report.anomaly_counts_by_kind()) counts[kind] = n;
    json anomalies = json::array();
    for (const auto& a : report.anomalies) anomalies.push_back(anomaly_to_json(a));
    json findings = json::array();
    for (const auto& f : report.replay_findings)
        findings.push_back(json{{"code", f.code},
                                {"event_id", f.event_id},
                                {"security_id", f.security_id},
                                {"detail", f.detail}});
    return json{{"summary",
                 json{{"checked", report.checked_transform_count},
                      {"passed", report.passes},
                      {"anomaly_counts_by_kind", std::move(counts)}}},
                {"anomalies", std::move(anomalies)},
                {"replay_findings", std::move(findings)}};
}

/// Parses back just what scoring needs: kind, sub_label, evidence, affected.
inline AnomalyReport report_from_json(const json& j) {
    AnomalyReport report;
    const json& summary = io_detail::need(j, "summary", "report");
    report.checked_transform_count =
        static_cast<std::size_t>(io_detail::need_int(summary, "checked", "report summary"));
    report.passes = static_cast<std::size_t>(io_detail::need_int(summary, "passed", "report summary"));
    for (const auto& a : io_detail::need(j, "anomalies", "report")) {
        Anomaly out;
        out.kind = anomaly_kind_from_string(io_detail::need_string(a, "kind", "anomaly"));
        out.sub_label = a.value("sub_label", "");
        if (a.contains("evidence")) {
            const json& ev = a.at("evidence");
            if (ev.contains("doc_ids"))
                for (const auto& d : ev.at("doc_ids")) out.evidence.doc_ids.insert(d.get<std::string>());
            if (ev.contains("event_ids"))
                for (const auto& e : ev.at("event_ids"))
                    out.evidence.event_ids.insert(e.get<std::string>());
        }
        if (a.contains("affected")) {
            const json& af = a.at("affected");
            if (af.contains("security_ids"))
                for (const auto& s : af.at("security_ids"))
                    out.affected.security_ids.insert(s.get<std::string>());
            if (af.contains("stakeholder_ids"))
                for (const auto& s : af.at("stakeholder_ids"))
                    out.affected.stakeholder_ids.insert(s.get<std::string>());
        }
        report.anomalies.push_back(std::move(out));
    }
    return report;
}

// ---------------------------------------------------------------------------
// Ground truth
// ---------------------------------------------------------------------------

inline json ground_truth_to_json(const GroundTruth& truth) {
    json entries = json::array();
    for (const auto& e : truth.entries)
        entries.push_back(
            json{{"kind", to_string(e.kind)},
                 {"sub_label", e.sub_label},
                 {"security_id", e.security_id},
                 {"stakeholder_id", e.stakeholder_id},
                 {"designated_doc_ids", std::vector<std::string>(e.designated_doc_ids.begin(),
                                                                 e.designated_doc_ids.end())}});
    return json{{"entries", std::move(entries)}};
}

inline GroundTruth ground_truth_from_json(const json& j) {
    GroundTruth truth;
    for (const auto& e : io_detail::need(j, "entries", "ground truth")) {
        GroundTruthEntry out;
        out.kind = anomaly_kind_from_string(io_detail::need_string(e, "kind", "ground truth"));
        out.sub_label = e.value("sub_label", "");
        out.security_id = io_detail::need_string(e, "security_id", "ground truth");
        out.stakeholder_id = e.value("stakeholder_id", "");
        if (e.contains("designated_doc_ids"))
            for (const auto& d : e.at("designated_doc_ids"))
                out.designated_doc_ids.insert(d.get<std::string>());
        truth.entries.push_back(std::move(out));
    }
    return truth;
}

// ---------------------------------------------------------------------------
// Injection spec
// ---------------------------------------------------------------------------

// Two accepted shapes: {"rng_seed", "operators": [{"op", "target_security"?,
// "field"?}, ...]} for explicit plans, or {"rng_seed", "count"} to draw the
// preset's default operator mix.
inline InjectionSpec injection_spec_from_json(const json& j, const StagePreset& preset) {
    InjectionSpec spec;
    spec.rng_seed = j.value("rng_seed", std::uint64_t{0});
    if (j.contains("operators")) {
        for (const auto& op : j.at("operators")) {
            InjectionOperator out;
            out.kind = inject_op_from_string(io_detail::need_string(op, "op", "injection spec"));
            out.target_security = op.value("target_security", "");
            out.field = op.value("field", "");
            spec.operators.push_back(std::move(out));
        }
        return spec;
    }
    if (j.contains("count")) {
        auto count = static_cast<std::size_t>(j.at("count").get<std::int64_t>());
        return make_injection_spec(preset, count, spec.rng_seed);
    }
    throw IoError("injection spec: expected \"operators\" or \"count\"");
}

inline json injection_spec_to_json(const InjectionSpec& spec) {
    json ops = json::array();
    for (const auto& op : spec.operators) {
        json o{{"op", to_string(op.kind)}};
        if (!op.target_security.empty()) o["target_security"] = op.target_security;
        if (!op.field.empty()) o["field"] = op.field;
        ops.push_back(std::move(o));
    }
    return json{{"rng_seed", spec.rng_seed}, {"operators", std::move(ops)}};
}

// ---------------------------------------------------------------------------
// ScoreCard and manifest
// ---------------------------------------------------------------------------

inline json category_score_to_json(const CategoryScore& s) {
    return json{{"true_positives", s.true_positives},
                {"false_positives", s.false_positives},
                {"false_negatives", s.false_negatives},
                {"precision", io_detail::ratio_string(s.precision())},
                {"recall", io_detail::ratio_string(s.recall())},
                {"f1", io_detail::ratio_string(s.f1())}};
}

inline json scorecard_to_json(const ScoreCard& card) {
    json by_kind = json::object();
    for (const auto& [kind, s] : card.by_kind) by_kind[kind] = category_score_to_json(s);
    return json{{"overall", category_score_to_json(card.overall)},
                {"by_kind", std::move(by_kind)}};
}

inline json manifest_to_json(const StagePreset& preset, std::uint64_t seed,
                             const RealizedStats& realized, std::size_t injected_count) {
    return json{{"generator_version", kGeneratorVersion},
                {"rng_algorithm", kRngAlgorithm},
                {"preset",
                 json{{"name", preset.name},
                      {"target_documents", preset.target_documents},
                      {"target_securities", preset.target_securities},
                      {"target_stakeholders", preset.target_stakeholders},
                      {"target_steps", preset.target_steps},
                      {"category_exponent", preset.category_exponent}}},
                {"seed", seed},
                {"injected_issue_count", injected_count},
                {"realized",
                 json{{"documents", realized.documents},
                      {"stakeholders", realized.stakeholders},
                      {"securities", realized.securities},
                      {"ref_rows", realized.ref_rows},
                      {"events", realized.events},
                      {"steps", realized.steps}}}};
}

// ---------------------------------------------------------------------------
// CapState debug dump
// ---------------------------------------------------------------------------

inline json capstate_to_json(const CapState& state) {
    json positions = json::array();
    for (const auto& [id, p] : state.positions) {
        positions.push_back(json{{"security_id", p.security_id},
                                 {"holder", p.holder_key},
                                 {"class", p.class_name},
                                 {"quantity", io_detail::ratio_string(p.quantity)},
                                 {"price", p.price.to_decimal_string()},
                                 {"vesting", p.vesting.to_string()},
                                 {"acceleration", to_string(p.acceleration)},
                                 {"status", to_string(p.status)},
                                 {"under_evidenced", p.under_evidenced}});
    }
    json holder_totals = json::array();
    for (const auto& [key, total] : state.holder_totals)
        holder_totals.push_back(json{{"holder", key.first},
                                     {"class", key.second},
                                     {"total", io_detail::ratio_string(total)}});
    json class_totals = json::object();
    for (const auto& [cls, total] : state.class_totals)
        class_totals[cls] = io_detail::ratio_string(total);
    return json{{"positions", std::move(positions)},
                {"holder_totals", std::move(holder_totals)},
                {"class_totals", std::move(class_totals)}};
}

} // namespace tieout
