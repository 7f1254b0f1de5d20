#pragma once

// Eager replay of the event graph into a virtual capitalization state.
// The fold is total: events that do not apply cleanly to the accumulated
// state produce findings and a best-effort application, never a crash.

#include "tieout/capstate.hpp"
#include "tieout/domain.hpp"
#include "tieout/rational.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace tieout {

struct UnknownSecurity : std::runtime_error {
    std::string security_id;
    explicit UnknownSecurity(const std::string& id)
        : std::runtime_error("unknown security: " + id), security_id(id) {}
};

struct SplitResult {
    Rational quantity;
    Rational price;
    bool fractional = false;
};

inline SplitResult apply_split(const Rational& quantity, const Rational& price,
                               const Rational& ratio) {
    SplitResult r;
    r.quantity = quantity * ratio;
    r.price = price / ratio;
    r.fractional = !r.quantity.is_integral();
    return r;
}

// Sub-lots created by transfers get a derived id so both sides of the
// reconciliation can address them; the reference table lists the same ids.
inline std::string sub_lot_id(const std::string& parent_security_id,
                              const std::string& recipient_stakeholder_id) {
    return parent_security_id + "@" + recipient_stakeholder_id;
}

namespace detail {

inline std::set<std::string> resolved_doc_ids(const EventGraph& g, const Event& ev) {
    std::set<std::string> out;
    for (const auto& ref : ev.evidence)
        if (g.find_document(ref.doc_id)) out.insert(ref.doc_id);
    return out;
}

class ReplayFold {
public:
    explicit ReplayFold(const EventGraph& graph) : g_(graph) {
        for (const auto& c : g_.classes())
            if (c.authorized) state_.authorized[c.name] = Rational(*c.authorized);
    }

    void apply(const Event& ev) {
        std::visit([&](const auto& payload) { this->on(ev, payload); }, ev.payload);
    }

    CapState finish() {
        for (auto& [id, lot] : state_.positions) {
            for (const auto& eid : lot.provenance.event_ids) {
                if (g_.event_under_evidenced(eid)) {
                    lot.under_evidenced = true;
                    break;
                }
            }
        }
        for (const auto& [eid, docs] : g_.unresolved_evidence())
            for (const auto& d : docs)
                state_.findings.push_back(
                    {"UnresolvedEvidence", eid, "", "cited document " + d + " is not in the corpus"});
        std::sort(state_.findings.begin(), state_.findings.end());
        state_.recompute_aggregates();
        return std::move(state_);
    }

private:
    const EventGraph& g_;
    CapState state_;

    void finding(const std::string& code, const Event& ev, const std::string& security,
                 const std::string& detail) {
        state_.findings.push_back({code, ev.event_id, security, detail});
    }

    void touch(PositionRecord& lot, const Event& ev) {
        lot.lineage.push_back(ev.event_id);
        lot.provenance.event_ids.insert(ev.event_id);
        auto docs = resolved_doc_ids(g_, ev);
        lot.provenance.doc_ids.insert(docs.begin(), docs.end());
    }

    PositionRecord* find_lot(const std::string& id) {
        auto it = state_.positions.find(id);
        return it == state_.positions.end() ? nullptr : &it->second;
    }

    // Decrements a lot for a disposal-style event; returns the amount
    // actually removed (clamped at the outstanding quantity).
    Rational draw_down(PositionRecord& lot, const Event& ev, std::int64_t quantity,
                       const char* verb) {
        Rational want(quantity);
        Rational take = want;
        if (want > lot.quantity) {
            take = lot.quantity;
            finding("ReplayConflict", ev, lot.security_id,
                    std::string(verb) + " of " + want.to_string() + " exceeds outstanding " +
                        lot.quantity.to_string() + "; clamped");
        }
        lot.quantity -= take;
        touch(lot, ev);
        return take;
    }

    void on(const Event& ev, const Issuance& p) {
        if (find_lot(p.security_id)) {
            finding("ReplayConflict", ev, p.security_id,
                    "issuance for an already-issued security id; first issuance kept");
            return;
        }
        PositionRecord lot;
        lot.security_id = p.security_id;
        lot.holder_key = p.stakeholder_id;
        lot.holder_display = g_.find_stakeholder(p.stakeholder_id)->canonical_name;
        lot.class_name = g_.find_class(p.class_id)->name;
        lot.quantity = Rational(p.quantity);
        lot.price = p.price_per_share;
        lot.vesting = p.vesting;
        lot.acceleration = p.acceleration;
        lot.root_event_id = ev.event_id;
        // a lot born from an exercise or conversion inherits that chain's
        // history, so its provenance reaches back to the original grant
        for (const auto& edge : g_.edges_from(ev.event_id)) {
            if (edge.kind != EdgeKind::derives_from) continue;
            if (const Event* src = g_.find_event(edge.dst_id)) {
                if (const auto* ex = std::get_if<Exercise>(&src->payload)) {
                    if (const auto* source_lot = find_lot(ex->option_security_id))
                        lot.provenance.merge(source_lot->provenance);
                }
                lot.provenance.event_ids.insert(src->event_id);
                auto docs = resolved_doc_ids(g_, *src);
                lot.provenance.doc_ids.insert(docs.begin(), docs.end());
            }
        }
        touch(lot, ev);
        state_.positions.emplace(p.security_id, std::move(lot));
    }

    void on(const Event& ev, const Transfer& p) {
        PositionRecord* src = find_lot(p.security_id);
        if (!src) {
            finding("ReplayConflict", ev, p.security_id, "transfer of a security never issued");
            return;
        }
        if (src->holder_key != p.from_stakeholder)
            finding("ReplayConflict", ev, p.security_id,
                    "transfer from " + p.from_stakeholder + " but lot is held by " +
                        src->holder_key);
        Rational moved = draw_down(*src, ev, p.quantity, "transfer");

        std::string child_id = sub_lot_id(p.security_id, p.to_stakeholder);
        if (PositionRecord* child = find_lot(child_id)) {
            child->quantity += moved;
            child->provenance.merge(src->provenance);
            touch(*child, ev);
            return;
        }
        PositionRecord child;
        child.security_id = child_id;
        child.holder_key = p.to_stakeholder;
        child.holder_display = g_.find_stakeholder(p.to_stakeholder)->canonical_name;
        child.class_name = src->class_name;
        child.quantity = moved;
        child.price = src->price;
        child.vesting = src->vesting;
        child.acceleration = src->acceleration;
        child.root_event_id = src->root_event_id;
        child.parent_security_id = p.security_id;
        child.provenance = src->provenance;  // includes this transfer via touch on src
        touch(child, ev);
        state_.positions.emplace(child_id, std::move(child));
    }

    void on(const Event& ev, const Amendment& p) {
        PositionRecord* lot = find_lot(p.target_security_id);
        if (!lot) {
            finding("ReplayConflict", ev, p.target_security_id,
                    "amendment of a security never issued");
            return;
        }
        if (lot->disposed())
            finding("AmendmentAfterDisposal", ev, p.target_security_id,
                    "amendment applies to a lot already " + std::string(to_string(lot->status)));
        for (const auto& [field, value] : p.field_changes) {
            if (field == "price_per_share") lot->price = Rational::parse_decimal(value);
            else if (field == "vesting") lot->vesting = VestingSpec::parse(value);
            else if (field == "acceleration") lot->acceleration = acceleration_from_string(value);
        }
        touch(*lot, ev);
    }

    void on(const Event& ev, const Conversion& p) {
        PositionRecord* src = find_lot(p.source_security_id);
        if (!src) {
            finding("ReplayConflict", ev, p.source_security_id,
                    "conversion of a security never issued");
            return;
        }
        src->quantity = Rational(0);
        src->status = PositionStatus::converted;
        touch(*src, ev);

        if (find_lot(p.result_security_id)) {
            finding("ReplayConflict", ev, p.result_security_id,
                    "conversion result collides with an existing security id");
            return;
        }
        PositionRecord out;
        out.security_id = p.result_security_id;
        out.holder_key = src->holder_key;
        out.holder_display = src->holder_display;
        out.class_name = g_.find_class(p.result_class_id)->name;
        out.quantity = Rational(p.result_quantity);
        out.price = src->price;
        out.vesting = src->vesting;
        out.acceleration = src->acceleration;
        out.root_event_id = ev.event_id;
        out.parent_security_id = p.source_security_id;
        out.provenance = src->provenance;
        touch(out, ev);
        state_.positions.emplace(p.result_security_id, std::move(out));
    }

    void on(const Event& ev, const Exercise& p) {
        PositionRecord* lot = find_lot(p.option_security_id);
        if (!lot) {
            finding("ReplayConflict", ev, p.option_security_id,
                    "exercise of a security never issued");
            return;
        }
        draw_down(*lot, ev, p.quantity_exercised, "exercise");
        lot->status = lot->quantity.is_zero() ? PositionStatus::exercised
                                              : PositionStatus::partially_disposed;
        // the resulting share lot is born by its own Issuance event, linked
        // back here by a DERIVES_FROM edge
    }

    void on(const Event& ev, const Expiration& p) {
        PositionRecord* lot = find_lot(p.security_id);
        if (!lot) {
            finding("ReplayConflict", ev, p.security_id,
                    "expiration of a security never issued");
            return;
        }
        draw_down(*lot, ev, p.quantity, "expiration");
        lot->status = lot->quantity.is_zero() ? PositionStatus::expired
                                              : PositionStatus::partially_disposed;
    }

    void on(const Event& ev, const Repurchase& p) {
        PositionRecord* lot = find_lot(p.security_id);
        if (!lot) {
            finding("ReplayConflict", ev, p.security_id,
                    "repurchase of a security never issued");
            return;
        }
        draw_down(*lot, ev, p.quantity, "repurchase");
        lot->status = lot->quantity.is_zero() ? PositionStatus::cancelled
                                              : PositionStatus::partially_disposed;
    }

    void on(const Event& ev, const Cancellation& p) {
        PositionRecord* lot = find_lot(p.security_id);
        if (!lot) {
            finding("ReplayConflict", ev, p.security_id,
                    "cancellation of a security never issued");
            return;
        }
        lot->quantity = Rational(0);
        lot->status = PositionStatus::cancelled;
        touch(*lot, ev);
    }

    void on(const Event& ev, const CorporateAction& p) {
        std::set<std::string> class_names;
        for (const auto& cid : p.affected_class_ids) class_names.insert(g_.find_class(cid)->name);
        for (auto& [id, lot] : state_.positions) {
            if (!class_names.count(lot.class_name)) continue;
            SplitResult r = apply_split(lot.quantity, lot.price, p.ratio);
            if (r.fractional)
                finding("FractionalShares", ev, lot.security_id,
                        "split leaves a non-integral quantity " + r.quantity.to_string());
            lot.quantity = r.quantity;
            lot.price = r.price;
            touch(lot, ev);
        }
        for (auto& [name, bound] : state_.authorized)
            if (class_names.count(name)) bound = bound * p.ratio;
    }
};

// Folds the first n events of the graph's total order.
inline CapState fold_prefix(const EventGraph& graph, std::size_t n) {
    ReplayFold fold(graph);
    const auto& events = graph.events();
    for (std::size_t i = 0; i < n && i < events.size(); ++i) fold.apply(events[i]);
    return fold.finish();
}

} // namespace detail

inline CapState build_virtual_captable(const EventGraph& graph) {
    return detail::fold_prefix(graph, graph.events().size());
}

struct PositionResult {
    Rational quantity;
    EvidenceSet evidence;
    bool defined = false;  // false when nothing in the graph was consulted
};

inline PositionResult position(const EventGraph& graph, const std::string& stakeholder_id,
                               const std::string& class_id, const Date& as_of) {
    PositionResult out;
    const SecurityClass* cls = graph.find_class(class_id);
    if (!graph.find_stakeholder(stakeholder_id) || !cls) return out;

    const auto& events = graph.events();
    std::size_t n = 0;
    while (n < events.size() && !(as_of < events[n].effective_date)) ++n;
    CapState state = detail::fold_prefix(graph, n);

    for (const auto& [id, lot] : state.positions) {
        if (lot.holder_key != stakeholder_id || lot.class_name != cls->name) continue;
        out.quantity += lot.quantity;
        out.evidence.merge(lot.provenance);
        out.defined = true;
    }
    return out;
}

inline PositionResult position(const EventGraph& graph, const std::string& stakeholder_id,
                               const std::string& class_id) {
    return position(graph, stakeholder_id, class_id, graph.max_event_date());
}

struct EffectiveTerms {
    Rational price;
    VestingSpec vesting;
    Acceleration acceleration = Acceleration::none;
    EvidenceSet evidence;
};

namespace detail {

// Folds the terms chain of one security over events [birth, end). A
// conversion-born security inherits the source's terms as they stood at
// the conversion, so the recursion is bounded by the birth index.
inline EffectiveTerms terms_upto(const EventGraph& graph, const std::string& security_id,
                                 std::size_t end) {
    const auto& events = graph.events();

    std::size_t birth = end;
    for (std::size_t i = 0; i < end; ++i) {
        if (const auto* iss = std::get_if<Issuance>(&events[i].payload)) {
            if (iss->security_id == security_id) { birth = i; break; }
        } else if (const auto* conv = std::get_if<Conversion>(&events[i].payload)) {
            if (conv->result_security_id == security_id) { birth = i; break; }
        }
    }
    if (birth == end) throw UnknownSecurity(security_id);

    EffectiveTerms t;
    std::string class_name;
    auto consult = [&](const Event& ev) {
        t.evidence.event_ids.insert(ev.event_id);
        auto docs = resolved_doc_ids(graph, ev);
        t.evidence.doc_ids.insert(docs.begin(), docs.end());
    };

    if (const auto* iss = std::get_if<Issuance>(&events[birth].payload)) {
        t.price = iss->price_per_share;
        t.vesting = iss->vesting;
        t.acceleration = iss->acceleration;
        class_name = graph.find_class(iss->class_id)->name;
    } else {
        const auto& conv = std::get<Conversion>(events[birth].payload);
        EffectiveTerms source = terms_upto(graph, conv.source_security_id, birth);
        t.price = source.price;
        t.vesting = source.vesting;
        t.acceleration = source.acceleration;
        t.evidence = source.evidence;
        class_name = graph.find_class(conv.result_class_id)->name;
    }
    consult(events[birth]);

    for (std::size_t i = birth + 1; i < end; ++i) {
        const Event& ev = events[i];
        if (const auto* am = std::get_if<Amendment>(&ev.payload)) {
            if (am->target_security_id != security_id) continue;
            for (const auto& [field, value] : am->field_changes) {
                if (field == "price_per_share") t.price = Rational::parse_decimal(value);
                else if (field == "vesting") t.vesting = VestingSpec::parse(value);
                else if (field == "acceleration")
                    t.acceleration = acceleration_from_string(value);
            }
            consult(ev);
        } else if (const auto* ca = std::get_if<CorporateAction>(&ev.payload)) {
            bool affected = false;
            for (const auto& cid : ca->affected_class_ids)
                affected = affected || graph.find_class(cid)->name == class_name;
            if (!affected) continue;
            t.price = t.price / ca->ratio;
            consult(ev);
        }
    }
    return t;
}

} // namespace detail

// Terms of one security derived from its creation payload plus the
// amendment chain and class-level splits, in total order. Last writer wins.
inline EffectiveTerms effective_terms(const EventGraph& graph, const std::string& security_id) {
    return detail::terms_upto(graph, security_id, graph.events().size());
}

} // namespace tieout
