#pragma once

// Synthetic company generation and fault injection. Generation is a pure
// function of (preset, seed): a clean event graph plus the reference table
// that replaying it produces. Injection then plants one labeled defect per
// operator, each on its own security, so a recovery run has unambiguous
// ground truth.

#include "tieout/capstate.hpp"
#include "tieout/captable.hpp"
#include "tieout/domain.hpp"
#include "tieout/replay.hpp"
#include "tieout/rng.hpp"
#include "tieout/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace tieout {

// ---------------------------------------------------------------------------
// Presets
// ---------------------------------------------------------------------------

struct StagePreset {
    std::string name;
    std::size_t target_documents = 0;
    std::size_t target_securities = 0;
    std::size_t target_stakeholders = 0;
    std::size_t target_steps = 0;
    double category_exponent = 1.0;
};

inline StagePreset stage_preset(const std::string& name) {
    if (name == "seed") return {"seed", 320, 184, 48, 1350, 1.0};
    if (name == "series_a") return {"series_a", 1000, 600, 140, 3300, 1.0};
    if (name == "series_b") return {"series_b", 2500, 1292, 330, 4200, 1.0};
    throw std::invalid_argument("unknown preset: " + name);
}

inline const std::vector<std::string>& stage_preset_names() {
    static const std::vector<std::string> names = {"seed", "series_a", "series_b"};
    return names;
}

inline std::size_t default_injection_count(const StagePreset& p) {
    if (p.name == "seed") return 20;
    if (p.name == "series_a") return 32;
    return 50;
}

// ---------------------------------------------------------------------------
// Category sampling
// ---------------------------------------------------------------------------

// Rank assignment over the document taxonomy, most frequent first.
inline const std::vector<DocCategory>& category_ranks() {
    static const std::vector<DocCategory> ranks = {
        DocCategory::ancillary_equity_agreement,
        DocCategory::board_shareholder_consent,
        DocCategory::stock_purchase_agreement,
        DocCategory::employment_contract,
        DocCategory::amendment,
        DocCategory::convertible_security,
        DocCategory::term_sheet,
        DocCategory::charter_bylaws,
        DocCategory::cap_table,
    };
    return ranks;
}

inline std::vector<DocCategory> sample_categories(std::size_t n, double exponent, Rng& rng) {
    const auto& ranks = category_ranks();
    std::vector<double> weights(ranks.size());
    for (std::size_t r = 0; r < ranks.size(); ++r)
        weights[r] = 1.0 / std::pow(static_cast<double>(r + 1), exponent);
    std::vector<DocCategory> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(ranks[rng.weighted(weights)]);
    return out;
}

// ---------------------------------------------------------------------------
// Clean generation
// ---------------------------------------------------------------------------

struct CleanCompany {
    EventGraph graph;
    ReferenceCapTable ref;
};

namespace detail {

inline const std::vector<std::string>& first_names() {
    static const std::vector<std::string> v = {
        "Paul",  "Dana",   "Miguel", "Sofia",  "Arjun", "Grace",  "Viktor", "Nora",
        "Henry", "Yuki",   "Omar",   "Qing",   "Lena",  "Marco",  "Priya",  "Jonas",
        "Tara",  "Felix",  "Ivy",    "Samuel", "Rosa",  "Dmitri", "Aisha",  "Carl",
        "Mei",   "Stefan", "Laila",  "Victor", "June",  "Tomas",  "Greta",  "Ben",
    };
    return v;
}

inline const std::vector<std::string>& last_names() {
    static const std::vector<std::string> v = {
        "Reynolds", "Okafor",  "Lindqvist", "Marchetti", "Novak",   "Iyer",    "Fontaine",
        "Kowalski", "Tanaka",  "Beaumont",  "Hassan",    "Petrov",  "Alvarez", "Brandt",
        "Chen",     "Duarte",  "Eriksen",   "Falk",      "Gupta",   "Hollis",  "Ibanez",
        "Jansen",   "Keller",  "Laurent",   "Mbeki",     "Nilsson", "Oduya",   "Price",
        "Quinn",    "Rahman",  "Silva",     "Thorne",
    };
    return v;
}

inline const std::vector<std::string>& fund_words() {
    static const std::vector<std::string> v = {
        "Harbor",   "Summit",  "Meridian", "Granite",  "Aurora", "Cascade",
        "Foxglove", "Juniper", "Latitude", "Vanguard", "Basalt", "Northgate",
    };
    return v;
}

// Lifecycle template applied to one root grant. Incompatible draws are
// remapped per class kind, so every event kind stays reachable.
enum class LotTemplate {
    keep,
    amend,
    transfer_partial,
    transfer_full,
    exercise_full,
    exercise_partial,  // exercise part, expire the remainder
    convert,
    dispose,           // expire, repurchase, or cancel the whole lot
};

struct TemplateWeights {
    double keep, amend, transfer_partial, transfer_full, exercise_full, exercise_partial, convert,
        dispose;
    std::vector<double> as_vector() const {
        return {keep,          amend,            transfer_partial, transfer_full,
                exercise_full, exercise_partial, convert,          dispose};
    }
};

inline TemplateWeights template_weights(const std::string& preset_name) {
    if (preset_name == "seed")
        return {0.72, 0.10, 0.05, 0.02, 0.02, 0.02, 0.02, 0.05};
    if (preset_name == "series_a")
        return {0.40, 0.08, 0.05, 0.06, 0.07, 0.03, 0.06, 0.25};
    return {0.03, 0.02, 0.02, 0.06, 0.08, 0.04, 0.08, 0.67};
}

struct ClassPlan {
    std::string class_id;
    std::string name;
    SecurityKind kind;
    std::string id_prefix;
    double weight;  // share of root grants
};

inline std::vector<ClassPlan> class_plans(const std::string& preset_name) {
    std::vector<ClassPlan> v;
    v.push_back({"CLS-CS", "Common (CS)", SecurityKind::common, "CS", 0.50});
    v.push_back({"CLS-OPT", "Options (OPT)", SecurityKind::option, "OPT", 0.32});
    v.push_back({"CLS-SAFE", "SAFE", SecurityKind::safe, "SAFE", 0.18});
    if (preset_name == "series_a" || preset_name == "series_b") {
        v[0].weight = 0.38;
        v[1].weight = 0.28;
        v[2].weight = 0.12;
        v.push_back(
            {"CLS-PA", "Series A Preferred (PA)", SecurityKind::preferred_series, "PA", 0.22});
    }
    if (preset_name == "series_b") {
        v[0].weight = 0.34;
        v[1].weight = 0.24;
        v[2].weight = 0.08;
        v[3].weight = 0.16;
        v.push_back(
            {"CLS-PB", "Series B Preferred (PB)", SecurityKind::preferred_series, "PB", 0.12});
        v.push_back(
            {"CLS-NOTE", "Convertible Notes", SecurityKind::convertible_note, "NOTE", 0.06});
    }
    return v;
}

class CompanyBuilder {
public:
    CompanyBuilder(const StagePreset& preset, std::uint64_t seed)
        : preset_(preset), rng_(mix_seed(preset.name, seed)) {}

    CleanCompany build() {
        make_stakeholders();
        make_classes();
        plan_roots();
        make_root_events();
        make_splits();
        make_lifecycles();
        make_consents();
        make_filler_documents();
        assign_authorized();

        EventGraph graph = build_graph(documents_, stakeholders_, classes_, events_, edges_);
        CapState virt = build_virtual_captable(graph);
        if (!virt.findings.empty())
            throw std::logic_error("generator produced a non-clean graph: " +
                                   virt.findings.front().detail);

        ReferenceCapTable ref = reference_from_state(virt);
        return {std::move(graph), std::move(ref)};
    }

private:
    static std::uint64_t mix_seed(const std::string& name, std::uint64_t seed) {
        std::uint64_t h = 1469598103934665603ull;
        for (char c : name) {
            h ^= static_cast<unsigned char>(c);
            h *= 1099511628211ull;
        }
        return h ^ (seed * 0x9E3779B97F4A7C15ull + 0x243F6A8885A308D3ull);
    }

    const StagePreset& preset_;
    Rng rng_;

    std::vector<DocumentRef> documents_;
    std::vector<Stakeholder> stakeholders_;
    std::vector<SecurityClass> classes_;
    std::vector<Event> events_;
    std::vector<GraphEdge> edges_;

    std::vector<ClassPlan> plans_;
    std::map<std::string, const ClassPlan*> plan_by_class_id_;
    std::map<std::string, int> id_counters_;
    int doc_counter_ = 0;
    int event_counter_ = 0;
    std::uint32_t seq_ = 0;
    Date cursor_{2016, 3, 1};
    std::vector<std::string> creation_events_;  // receive APPROVED_BY edges
    std::map<std::string, Date> event_dates_;

    struct Root {
        std::string security_id;
        std::string class_id;
        std::string holder;
        std::int64_t quantity = 0;
        Rational price;
        VestingSpec vesting;
        Acceleration acceleration = Acceleration::none;
        LotTemplate tmpl = LotTemplate::keep;
        std::string birth_event;
    };
    std::vector<Root> roots_;
    std::map<std::string, Rational> split_product_;  // class_id -> cumulative ratio

    // --- id and date helpers -------------------------------------------------

    std::string next_security_id(const ClassPlan& plan) {
        int n = ++id_counters_[plan.id_prefix];
        char buf[24];
        std::snprintf(buf, sizeof buf, "%s-%04d", plan.id_prefix.c_str(), n);
        return buf;
    }

    std::string next_doc_id() {
        char buf[16];
        std::snprintf(buf, sizeof buf, "D-%05d", ++doc_counter_);
        return buf;
    }

    std::string next_event_id() {
        char buf[16];
        std::snprintf(buf, sizeof buf, "E-%05d", ++event_counter_);
        return buf;
    }

    Date advance_date(int max_step) {
        cursor_ = cursor_.plus_days(1 + static_cast<int>(rng_.below(max_step)));
        return cursor_;
    }

    int page_count() {
        if (preset_.name == "seed") return 2 + static_cast<int>(rng_.below(4));
        if (preset_.name == "series_a") return 4 + static_cast<int>(rng_.below(9));
        return 8 + static_cast<int>(rng_.below(14));
    }

    std::string add_document(DocCategory cat, const Date& date, const std::string& title) {
        DocumentRef d;
        d.doc_id = next_doc_id();
        d.category = cat;
        d.date = date;
        d.title = title;
        d.page_count = page_count();
        documents_.push_back(std::move(d));
        return documents_.back().doc_id;
    }

    std::string add_event(EventKind kind, const Date& date, const std::string& doc_id,
                          EventPayload payload) {
        Event e;
        e.event_id = next_event_id();
        e.kind = kind;
        e.effective_date = date;
        e.seq = ++seq_;
        e.evidence.push_back({doc_id, ""});
        e.payload = std::move(payload);
        event_dates_[e.event_id] = date;
        events_.push_back(std::move(e));
        return events_.back().event_id;
    }

    // --- construction phases -------------------------------------------------

    void make_stakeholders() {
        const auto& fn = first_names();
        const auto& ln = last_names();
        std::set<std::string> used;
        // Collision retries are capped; past the cap a numeric suffix keeps
        // names unique even when the combination pool is denser than the
        // request.
        auto unique_name = [&](auto&& draw) {
            for (int attempt = 0; attempt < 64; ++attempt) {
                std::string name = draw();
                if (used.insert(normalize_name(name)).second) return name;
            }
            std::string name = draw() + " " + std::to_string(stakeholders_.size() + 1);
            used.insert(normalize_name(name));
            return name;
        };
        std::size_t fund_count = std::max<std::size_t>(2, preset_.target_stakeholders / 12);
        std::size_t person_count = preset_.target_stakeholders - fund_count;
        for (std::size_t i = 0; i < person_count; ++i) {
            Stakeholder s;
            s.stakeholder_id = "S-" + std::to_string(stakeholders_.size() + 1);
            s.canonical_name = unique_name(
                [&] { return fn[rng_.below(fn.size())] + " " + ln[rng_.below(ln.size())]; });
            s.kind = StakeholderKind::individual;
            stakeholders_.push_back(std::move(s));
        }
        const auto& fw = fund_words();
        for (std::size_t i = 0; i < fund_count; ++i) {
            Stakeholder s;
            s.stakeholder_id = "S-" + std::to_string(stakeholders_.size() + 1);
            s.canonical_name = unique_name([&] {
                return fw[rng_.below(fw.size())] + " Ventures " + std::to_string(1 + rng_.below(4));
            });
            s.kind = StakeholderKind::fund;
            stakeholders_.push_back(std::move(s));
        }
    }

    void make_classes() {
        plans_ = class_plans(preset_.name);
        for (const auto& p : plans_) {
            SecurityClass c;
            c.class_id = p.class_id;
            c.name = p.name;
            c.kind = p.kind;
            classes_.push_back(std::move(c));
            split_product_[p.class_id] = Rational(1);
        }
        for (const auto& p : plans_) plan_by_class_id_[p.class_id] = &p;
    }

    const std::string& random_stakeholder() {
        return stakeholders_[rng_.below(stakeholders_.size())].stakeholder_id;
    }
    const std::string& random_other_stakeholder(const std::string& not_this) {
        for (;;) {
            const std::string& s = random_stakeholder();
            if (s != not_this) return s;
        }
    }

    Rational pick_price(SecurityKind kind) {
        static const char* cheap[] = {"0.00001", "0.0001", "0.001", "0.01"};
        static const char* mid[] = {"0.05", "0.10", "0.25", "0.50"};
        static const char* rich[] = {"1.00", "1.25", "2.50", "4.00"};
        switch (kind) {
            case SecurityKind::common: return Rational::parse_decimal(cheap[rng_.below(4)]);
            case SecurityKind::option: return Rational::parse_decimal(mid[rng_.below(4)]);
            default: return Rational::parse_decimal(rich[rng_.below(4)]);
        }
    }

    VestingSpec pick_vesting(SecurityKind kind) {
        if (kind != SecurityKind::common && kind != SecurityKind::option) return VestingSpec{};
        switch (rng_.below(5)) {
            case 0: return VestingSpec::of(48, 12);
            case 1: return VestingSpec::of(60, 12);
            case 2: return VestingSpec::of(30, 0);
            case 3: return VestingSpec::of(12, 0);
            default: return VestingSpec{};
        }
    }

    Acceleration pick_acceleration() {
        switch (rng_.below(6)) {
            case 0: return Acceleration::double_trigger;
            case 1: return Acceleration::single_trigger;
            case 2: return Acceleration::yes_unspecified;
            default: return Acceleration::none;
        }
    }

    LotTemplate pick_template(SecurityKind kind) {
        auto weights = template_weights(preset_.name).as_vector();
        auto t = static_cast<LotTemplate>(rng_.weighted(weights));
        switch (kind) {
            case SecurityKind::option:
                if (t == LotTemplate::transfer_partial) return LotTemplate::exercise_partial;
                if (t == LotTemplate::transfer_full) return LotTemplate::exercise_full;
                if (t == LotTemplate::convert) return LotTemplate::exercise_full;
                return t;
            case SecurityKind::safe:
            case SecurityKind::convertible_note:
                if (t == LotTemplate::transfer_partial || t == LotTemplate::transfer_full ||
                    t == LotTemplate::exercise_full || t == LotTemplate::exercise_partial)
                    return LotTemplate::convert;
                return t;
            default:
                if (t == LotTemplate::exercise_full) return LotTemplate::transfer_full;
                if (t == LotTemplate::exercise_partial) return LotTemplate::transfer_partial;
                if (t == LotTemplate::convert) return LotTemplate::transfer_full;
                return t;
        }
    }

    double expected_lots_per_root() const {
        auto w = template_weights(preset_.name);
        // templates that leave a second lot behind
        return 1.0 + w.transfer_partial + w.transfer_full + w.exercise_full + w.exercise_partial +
               w.convert;
    }

    void plan_roots() {
        auto n = static_cast<std::size_t>(
            static_cast<double>(preset_.target_securities) / expected_lots_per_root() + 0.5);
        std::vector<double> class_weights;
        for (const auto& p : plans_) class_weights.push_back(p.weight);
        for (std::size_t i = 0; i < n; ++i) {
            const ClassPlan& plan = plans_[rng_.weighted(class_weights)];
            Root r;
            r.security_id = next_security_id(plan);
            r.class_id = plan.class_id;
            r.holder = random_stakeholder();
            r.quantity = 1000 * static_cast<std::int64_t>(1 + rng_.below(500));
            r.price = pick_price(plan.kind);
            r.vesting = pick_vesting(plan.kind);
            r.acceleration = pick_acceleration();
            r.tmpl = pick_template(plan.kind);
            roots_.push_back(std::move(r));
        }
    }

    void make_root_events() {
        for (auto& r : roots_) {
            Date d = advance_date(3);
            const ClassPlan& plan = *plan_by_class_id_.at(r.class_id);
            DocCategory cat =
                plan.kind == SecurityKind::option ? DocCategory::employment_contract
                : plan.kind == SecurityKind::safe || plan.kind == SecurityKind::convertible_note
                    ? DocCategory::convertible_security
                    : DocCategory::stock_purchase_agreement;
            std::string doc = add_document(cat, d, plan.name + " issuance " + r.security_id);
            Issuance p;
            p.security_id = r.security_id;
            p.stakeholder_id = r.holder;
            p.class_id = r.class_id;
            p.quantity = r.quantity;
            p.price_per_share = r.price;
            p.vesting = r.vesting;
            p.acceleration = r.acceleration;
            r.birth_event = add_event(EventKind::issuance, d, doc, std::move(p));
            creation_events_.push_back(r.birth_event);
        }
    }

    void make_splits() {
        int splits = 0;
        if (preset_.name == "seed") splits = rng_.chance(0.25) ? 1 : 0;
        else if (preset_.name == "series_a") splits = rng_.chance(0.5) ? 1 : 0;
        else splits = 1 + (rng_.chance(0.3) ? 1 : 0);
        static const std::pair<int, int> ratios[] = {{2, 1}, {4, 1}, {5, 1}, {10, 1}};
        for (int i = 0; i < splits; ++i) {
            auto [num, den] = ratios[rng_.below(4)];
            Rational ratio(num, den);
            Date d = advance_date(20);
            std::string doc = add_document(DocCategory::charter_bylaws, d,
                                           "charter amendment: " + std::to_string(num) + ":" +
                                               std::to_string(den) + " stock split");
            CorporateAction p;
            p.action_kind = "stock_split";
            p.ratio = ratio;
            for (const auto& plan : plans_) {
                p.affected_class_ids.push_back(plan.class_id);
                split_product_[plan.class_id] = split_product_[plan.class_id] * ratio;
            }
            add_event(EventKind::corporate_action, d, doc, std::move(p));
        }
    }

    // post-split outstanding quantity of a root
    std::int64_t scaled_quantity(const Root& r) {
        return (Rational(r.quantity) * split_product_.at(r.class_id)).to_int();
    }

    // a part that divides evenly: base quantities are multiples of 1000
    std::int64_t partial_of(std::int64_t quantity) {
        static const std::pair<int, int> fractions[] = {{1, 2}, {1, 4}, {3, 4}, {2, 5}};
        auto [num, den] = fractions[rng_.below(4)];
        std::int64_t part = quantity / den * num;
        if (part <= 0 || part >= quantity) part = quantity / 2;
        return part > 0 ? part : 1;
    }

    void make_lifecycles() {
        for (auto& r : roots_) {
            switch (r.tmpl) {
                case LotTemplate::keep: break;
                case LotTemplate::amend: lifecycle_amend(r); break;
                case LotTemplate::transfer_partial: lifecycle_transfer(r, false); break;
                case LotTemplate::transfer_full: lifecycle_transfer(r, true); break;
                case LotTemplate::exercise_full: lifecycle_exercise(r, true); break;
                case LotTemplate::exercise_partial: lifecycle_exercise(r, false); break;
                case LotTemplate::convert: lifecycle_convert(r); break;
                case LotTemplate::dispose: lifecycle_dispose(r); break;
            }
        }
    }

    void lifecycle_amend(Root& r) {
        Date d = advance_date(6);
        std::string doc =
            add_document(DocCategory::amendment, d, "amendment to " + r.security_id + " terms");
        Amendment p;
        p.target_security_id = r.security_id;
        switch (rng_.below(3)) {
            case 0: {
                static const std::pair<int, int> factors[] = {{1, 2}, {1, 4}, {2, 1}};
                auto [num, den] = factors[rng_.below(3)];
                Rational next = r.price * Rational(num, den);
                p.field_changes["price_per_share"] = next.to_decimal_string();
                break;
            }
            case 1:
                p.field_changes["vesting"] =
                    (rng_.chance(0.5) ? VestingSpec::of(48, 12) : VestingSpec::of(60, 12))
                        .to_string();
                break;
            default:
                p.field_changes["acceleration"] = to_string(
                    rng_.chance(0.5) ? Acceleration::double_trigger : Acceleration::single_trigger);
                break;
        }
        std::string ev = add_event(EventKind::amendment, d, doc, std::move(p));
        edges_.push_back({ev, EdgeKind::amends, r.birth_event});
    }

    void lifecycle_transfer(Root& r, bool full) {
        Date d = advance_date(6);
        std::int64_t outstanding = scaled_quantity(r);
        std::int64_t qty = full ? outstanding : partial_of(outstanding);
        std::string doc = add_document(DocCategory::ancillary_equity_agreement, d,
                                       "stock transfer agreement " + r.security_id);
        Transfer p;
        p.security_id = r.security_id;
        p.from_stakeholder = r.holder;
        p.to_stakeholder = random_other_stakeholder(r.holder);
        p.quantity = qty;
        add_event(EventKind::transfer, d, doc, std::move(p));
    }

    void lifecycle_exercise(Root& r, bool full) {
        Date d = advance_date(6);
        std::int64_t outstanding = scaled_quantity(r);
        std::int64_t qty = full ? outstanding : partial_of(outstanding);
        const ClassPlan* common = &plans_[0];
        std::string result_id = next_security_id(*common);
        std::string doc = add_document(DocCategory::ancillary_equity_agreement, d,
                                       "notice of exercise " + r.security_id);
        Exercise p;
        p.option_security_id = r.security_id;
        p.quantity_exercised = qty;
        p.result_security_id = result_id;
        std::string exercise_ev = add_event(EventKind::exercise, d, doc, std::move(p));
        edges_.push_back({exercise_ev, EdgeKind::derives_from, r.birth_event});

        Issuance out;
        out.security_id = result_id;
        out.stakeholder_id = r.holder;
        out.class_id = common->class_id;
        out.quantity = qty;
        out.price_per_share = r.price / split_product_.at(r.class_id);
        out.vesting = VestingSpec{};
        out.acceleration = Acceleration::none;
        std::string issue_ev = add_event(EventKind::issuance, d, doc, std::move(out));
        edges_.push_back({issue_ev, EdgeKind::derives_from, exercise_ev});
        creation_events_.push_back(issue_ev);

        if (!full) {
            Date d2 = advance_date(4);
            std::string doc2 = add_document(DocCategory::ancillary_equity_agreement, d2,
                                            "expiration notice " + r.security_id);
            Expiration rem;
            rem.security_id = r.security_id;
            rem.quantity = outstanding - qty;
            add_event(EventKind::expiration, d2, doc2, std::move(rem));
        }
    }

    void lifecycle_convert(Root& r) {
        Date d = advance_date(6);
        const ClassPlan* target = &plans_[0];
        for (const auto& p : plans_)
            if (p.kind == SecurityKind::preferred_series) {
                target = &p;
                break;
            }
        std::string result_id = next_security_id(*target);
        std::string doc = add_document(DocCategory::convertible_security, d,
                                       "conversion notice " + r.security_id);
        Conversion p;
        p.source_security_id = r.security_id;
        p.result_class_id = target->class_id;
        p.result_quantity = scaled_quantity(r);
        p.result_security_id = result_id;
        std::string ev = add_event(EventKind::conversion, d, doc, std::move(p));
        edges_.push_back({ev, EdgeKind::derives_from, r.birth_event});
        creation_events_.push_back(ev);
    }

    void lifecycle_dispose(Root& r) {
        Date d = advance_date(6);
        std::int64_t outstanding = scaled_quantity(r);
        switch (rng_.below(3)) {
            case 0: {
                std::string doc = add_document(DocCategory::ancillary_equity_agreement, d,
                                               "expiration notice " + r.security_id);
                Expiration p;
                p.security_id = r.security_id;
                p.quantity = outstanding;
                add_event(EventKind::expiration, d, doc, std::move(p));
                break;
            }
            case 1: {
                std::string doc = add_document(DocCategory::stock_purchase_agreement, d,
                                               "repurchase agreement " + r.security_id);
                Repurchase p;
                p.security_id = r.security_id;
                p.quantity = outstanding;
                add_event(EventKind::repurchase, d, doc, std::move(p));
                break;
            }
            default: {
                std::string doc = add_document(DocCategory::board_shareholder_consent, d,
                                               "consent to cancellation " + r.security_id);
                Cancellation p;
                p.security_id = r.security_id;
                add_event(EventKind::cancellation, d, doc, std::move(p));
                break;
            }
        }
    }

    void make_consents() {
        // board consents are batched: one written consent authorizes a run
        // of consecutive creation events
        std::size_t i = 0;
        while (i < creation_events_.size()) {
            std::size_t batch =
                std::min<std::size_t>(creation_events_.size() - i, 1 + rng_.below(6));
            Date d = event_dates_.count(creation_events_[i]) ? event_dates_[creation_events_[i]]
                                                             : cursor_;
            std::string doc = add_document(DocCategory::board_shareholder_consent, d,
                                           "unanimous written consent of the board");
            for (std::size_t k = 0; k < batch; ++k)
                edges_.push_back({creation_events_[i + k], EdgeKind::approved_by, doc});
            i += batch;
        }
    }

    void make_filler_documents() {
        if (documents_.size() >= preset_.target_documents) return;
        std::size_t need = preset_.target_documents - documents_.size();
        auto cats = sample_categories(need, preset_.category_exponent, rng_);
        for (std::size_t i = 0; i < need; ++i) {
            Date d = Date{2016, 1, 1}.plus_days(static_cast<int>(rng_.below(2000)));
            add_document(cats[i], d, "corporate record " + std::to_string(i + 1));
        }
    }

    void assign_authorized() {
        // generous bounds computed from what will actually be issued, so a
        // clean company never trips the authorized check
        std::map<std::string, Rational> issued;  // class_id -> post-split total
        for (const auto& r : roots_) issued[r.class_id] += Rational(scaled_quantity(r));
        for (auto& c : classes_) {
            if (c.kind != SecurityKind::common && c.kind != SecurityKind::preferred_series)
                continue;
            Rational total = issued.count(c.class_id) ? issued[c.class_id] : Rational(0);
            // common also receives exercise results, preferred receives
            // conversions; triple headroom covers both
            Rational bound =
                (total * Rational(3) / split_product_.at(c.class_id)) + Rational(1000);
            c.authorized = bound.is_integral() ? bound.to_int() : (bound + Rational(1)).to_int();
        }
    }

    ReferenceCapTable reference_from_state(const CapState& virt) {
        std::map<std::string, Ledger> by_class;
        for (const auto& [id, lot] : virt.positions) {
            if (lot.quantity.is_zero()) continue;
            LedgerEntry e;
            e.security_id = lot.security_id;
            e.stakeholder_name = lot.holder_display;
            e.quantity_issued = lot.quantity.to_int();
            e.share_class = lot.class_name;
            e.price_per_share = lot.price;
            e.vesting = lot.vesting;
            e.acceleration = lot.acceleration;
            auto& ledger = by_class[lot.class_name];
            ledger.class_name = lot.class_name;
            ledger.entries.push_back(std::move(e));
        }
        std::vector<Ledger> ledgers;
        for (auto& [name, ledger] : by_class) {
            std::int64_t total = 0;
            for (const auto& e : ledger.entries) total += e.quantity_issued;
            ledger.declared_grand_total = total;
            ledgers.push_back(std::move(ledger));
        }
        return make_reference(std::move(ledgers));
    }
};

} // namespace detail

inline CleanCompany generate_clean(const StagePreset& preset, std::uint64_t seed) {
    return detail::CompanyBuilder(preset, seed).build();
}

// Realized corpus measurements, recorded in manifests alongside the preset
// targets they are meant to track.
struct RealizedStats {
    std::size_t documents = 0;
    std::size_t stakeholders = 0;
    std::size_t securities = 0;
    std::size_t ref_rows = 0;
    std::size_t events = 0;
    std::size_t steps = 0;
};

inline RealizedStats realized_stats(const EventGraph& graph, const ReferenceCapTable& ref) {
    RealizedStats s;
    s.documents = graph.documents().size();
    s.stakeholders = graph.stakeholders().size();
    s.events = graph.events().size();
    for (const auto& l : ref.ledgers) s.ref_rows += l.entries.size();
    CapState virt = build_virtual_captable(graph);
    CapState rstate = reference_to_capstate(ref, graph);
    s.securities = virt.positions.size();
    s.steps = enumerate_transforms(virt, rstate).size();
    return s;
}

// ---------------------------------------------------------------------------
// Injection
// ---------------------------------------------------------------------------

enum class InjectOpKind {
    drop_ref_row,
    drop_evidence_doc,
    drop_approval_edge,
    perturb_field,
    omit_event_from_ref,
};

inline const char* to_string(InjectOpKind k) {
    switch (k) {
        case InjectOpKind::drop_ref_row: return "drop_ref_row";
        case InjectOpKind::drop_evidence_doc: return "drop_evidence_doc";
        case InjectOpKind::drop_approval_edge: return "drop_approval_edge";
        case InjectOpKind::perturb_field: return "perturb_field";
        case InjectOpKind::omit_event_from_ref: return "omit_event_from_ref";
    }
    return "?";
}

inline InjectOpKind inject_op_from_string(const std::string& s) {
    if (s == "drop_ref_row") return InjectOpKind::drop_ref_row;
    if (s == "drop_evidence_doc") return InjectOpKind::drop_evidence_doc;
    if (s == "drop_approval_edge") return InjectOpKind::drop_approval_edge;
    if (s == "perturb_field") return InjectOpKind::perturb_field;
    if (s == "omit_event_from_ref") return InjectOpKind::omit_event_from_ref;
    throw std::invalid_argument("unknown injection operator: " + s);
}

struct InjectionOperator {
    InjectOpKind kind = InjectOpKind::drop_ref_row;
    std::string target_security;  // empty = pick deterministically from the eligible pool
    std::string field;            // perturb_field only; empty = pick
};

struct InjectionSpec {
    std::uint64_t rng_seed = 0;
    std::vector<InjectionOperator> operators;
};

struct GroundTruthEntry {
    AnomalyKind kind = AnomalyKind::InconsistentTerms;
    std::string sub_label;
    std::string security_id;
    std::string stakeholder_id;
    std::set<std::string> designated_doc_ids;
};

struct GroundTruth {
    std::vector<GroundTruthEntry> entries;
};

struct InjectedCompany {
    EventGraph graph;
    ReferenceCapTable ref;
    GroundTruth truth;
};

struct TargetNotFound : std::runtime_error {
    explicit TargetNotFound(const std::string& what_target)
        : std::runtime_error("injection target not found: " + what_target) {}
};

struct OverlappingTargets : std::runtime_error {
    explicit OverlappingTargets(const std::string& security)
        : std::runtime_error("injection targets overlap on security: " + security) {}
};

inline AnomalyKind expected_kind(InjectOpKind op) {
    switch (op) {
        case InjectOpKind::drop_ref_row: return AnomalyKind::MissingFromCapTable;
        case InjectOpKind::perturb_field: return AnomalyKind::InconsistentTerms;
        default: return AnomalyKind::MissingDocumentation;
    }
}

// Per-anomaly-kind weights used when composing an unspecified operator mix:
// {MissingDocumentation, MissingFromCapTable, InconsistentTerms}.
inline std::vector<double> issue_mix(const StagePreset& p) {
    if (p.name == "seed") return {0.45, 0.30, 0.25};
    if (p.name == "series_a") return {0.40, 0.27, 0.33};
    return {0.35, 0.25, 0.40};
}

inline InjectionSpec make_injection_spec(const StagePreset& preset, std::size_t count,
                                         std::uint64_t rng_seed) {
    InjectionSpec spec;
    spec.rng_seed = rng_seed;
    Rng rng(rng_seed ^ 0xA24BAED4963EE407ull);
    auto mix = issue_mix(preset);
    static const InjectOpKind doc_ops[] = {InjectOpKind::drop_evidence_doc,
                                           InjectOpKind::drop_approval_edge,
                                           InjectOpKind::omit_event_from_ref};
    std::size_t doc_round = 0;
    for (std::size_t i = 0; i < count; ++i) {
        std::size_t k = rng.weighted(mix);
        InjectionOperator op;
        if (k == 0) op.kind = doc_ops[doc_round++ % 3];
        else if (k == 1) op.kind = InjectOpKind::drop_ref_row;
        else op.kind = InjectOpKind::perturb_field;
        spec.operators.push_back(op);
    }
    return spec;
}

namespace detail {

// Working copy of a company, mutated by operators and rebuilt at the end.
struct InjectState {
    std::vector<DocumentRef> documents;
    std::vector<Stakeholder> stakeholders;
    std::vector<SecurityClass> classes;
    std::vector<Event> events;
    std::vector<GraphEdge> edges;
    std::vector<Ledger> ledgers;

    CapState virt;                 // clean state, used for eligibility analysis
    std::set<std::string> listed;  // ref-listed securities with quantity > 0
    std::set<std::string> targeted;
    std::set<std::string> removed_docs;

    const PositionRecord& lot(const std::string& id) const { return virt.positions.at(id); }

    void erase_row(const std::string& security_id) {
        for (auto& l : ledgers) {
            for (std::size_t i = 0; i < l.entries.size(); ++i) {
                if (l.entries[i].security_id != security_id) continue;
                if (l.declared_grand_total)
                    *l.declared_grand_total -= l.entries[i].quantity_issued;
                l.entries.erase(l.entries.begin() + static_cast<std::ptrdiff_t>(i));
                return;
            }
        }
    }
};

inline std::set<std::string> root_event_docs(const InjectState& st, const std::string& security_id,
                                             const EventGraph& graph) {
    const auto& lot = st.lot(security_id);
    std::set<std::string> docs;
    if (const Event* root = graph.find_event(lot.root_event_id))
        for (const auto& ref : root->evidence)
            if (graph.find_document(ref.doc_id)) docs.insert(ref.doc_id);
    return docs;
}

// The reference row keeps its value shape, only the content is wrong.
inline void apply_perturbation(InjectState& st, const std::string& security_id,
                               const std::string& field, const EventGraph& graph) {
    for (auto& l : st.ledgers) {
        for (auto& e : l.entries) {
            if (e.security_id != security_id) continue;
            if (field == "quantity") {
                std::int64_t next = e.quantity_issued * 2 + 1000;
                if (l.declared_grand_total) *l.declared_grand_total += next - e.quantity_issued;
                e.quantity_issued = next;
            } else if (field == "price_per_share") {
                e.price_per_share = e.price_per_share * Rational(10);
            } else if (field == "vesting") {
                static const std::pair<int, int> alts[] = {{48, 12}, {60, 12}, {30, 0}};
                for (auto [denom, cliff] : alts) {
                    VestingSpec v = VestingSpec::of(denom, cliff);
                    if (!(v == e.vesting)) {
                        e.vesting = v;
                        break;
                    }
                }
            } else if (field == "acceleration") {
                e.acceleration = e.acceleration == Acceleration::double_trigger
                                     ? Acceleration::single_trigger
                                     : Acceleration::double_trigger;
            } else if (field == "holder") {
                for (const auto& s : graph.stakeholders()) {
                    if (normalize_name(s.canonical_name) != normalize_name(e.stakeholder_name)) {
                        e.stakeholder_name = s.canonical_name;
                        break;
                    }
                }
            } else if (field == "share_class") {
                for (const auto& c : graph.classes()) {
                    if (c.name != e.share_class) {
                        e.share_class = c.name;
                        break;
                    }
                }
            } else {
                throw std::invalid_argument("field is not perturbable: " + field);
            }
            return;
        }
    }
    throw TargetNotFound("perturb_field row for " + security_id);
}

inline bool omit_eligible(const std::string& id, const EventGraph& graph, const InjectState& st,
                          const std::map<std::string, std::set<std::string>>& root_usage) {
    const auto& lot = st.lot(id);
    if (!lot.parent_security_id.empty()) return false;
    auto usage = root_usage.find(lot.root_event_id);
    if (usage == root_usage.end() || usage->second.size() != 1) return false;
    const Event* root = graph.find_event(lot.root_event_id);
    if (!root || root->kind != EventKind::issuance) return false;
    for (const auto& eid : lot.lineage) {
        if (eid == lot.root_event_id) continue;
        const Event* ev = graph.find_event(eid);
        if (!ev || ev->kind != EventKind::corporate_action) return false;
    }
    return true;
}

} // namespace detail

// Applies an injection plan to a clean company. Each operator claims a
// distinct security; explicit targets that collide raise OverlappingTargets,
// ineligible or unknown ones raise TargetNotFound.
inline InjectedCompany inject(const EventGraph& graph, const ReferenceCapTable& ref,
                              const InjectionSpec& spec) {
    detail::InjectState st;
    st.documents = graph.documents();
    st.stakeholders = graph.stakeholders();
    st.classes = graph.classes();
    st.events = graph.events();
    st.edges = graph.edges();
    st.ledgers = ref.ledgers;
    st.virt = build_virtual_captable(graph);
    for (const auto& l : ref.ledgers)
        for (const auto& e : l.entries)
            if (e.quantity_issued > 0 && st.virt.positions.count(e.security_id))
                st.listed.insert(e.security_id);

    Rng rng(spec.rng_seed * 0x9E3779B97F4A7C15ull + 0xD1B54A32D192ED03ull);

    // doc -> ref-listed securities whose provenance cites it
    std::map<std::string, std::set<std::string>> doc_taint;
    // creation event -> ref-listed securities rooted at it
    std::map<std::string, std::set<std::string>> root_usage;
    for (const auto& id : st.listed) {
        const auto& lot = st.lot(id);
        root_usage[lot.root_event_id].insert(id);
        for (const auto& eid : lot.provenance.event_ids)
            if (const Event* ev = graph.find_event(eid))
                for (const auto& eref : ev->evidence) doc_taint[eref.doc_id].insert(id);
    }
    // security -> docs cited only by its own provenance, so removing one
    // under-evidences exactly that security
    std::map<std::string, std::vector<std::string>> sole_taint;
    for (const auto& [doc_id, tainted] : doc_taint)
        if (tainted.size() == 1) sole_taint[*tainted.begin()].push_back(doc_id);

    auto removable_doc = [&](const std::string& id) -> std::string {
        auto it = sole_taint.find(id);
        if (it == sole_taint.end()) return "";
        for (const auto& doc_id : it->second) {
            if (st.removed_docs.count(doc_id)) continue;
            const DocumentRef* d = graph.find_document(doc_id);
            if (d && d->category != DocCategory::board_shareholder_consent) return doc_id;
        }
        return "";
    };

    auto pick_listed = [&](auto&& eligible, const std::string& requested,
                           const char* op_name) -> std::string {
        if (!requested.empty()) {
            if (st.targeted.count(requested)) throw OverlappingTargets(requested);
            if (!st.listed.count(requested) || !eligible(requested))
                throw TargetNotFound(std::string(op_name) + " on " + requested);
            st.targeted.insert(requested);
            return requested;
        }
        std::vector<std::string> pool;
        for (const auto& id : st.listed)
            if (!st.targeted.count(id) && eligible(id)) pool.push_back(id);
        if (pool.empty()) throw TargetNotFound(std::string(op_name) + " (pool exhausted)");
        std::string chosen = pool[rng.below(pool.size())];
        st.targeted.insert(chosen);
        return chosen;
    };

    GroundTruth truth;

    for (const auto& op : spec.operators) {
        GroundTruthEntry entry;
        entry.kind = expected_kind(op.kind);

        switch (op.kind) {
            case InjectOpKind::drop_ref_row: {
                auto any = [&](const std::string&) { return true; };
                std::string target = pick_listed(any, op.target_security, "drop_ref_row");
                st.erase_row(target);
                entry.sub_label = kSubLabelUnrecorded;
                entry.security_id = target;
                entry.stakeholder_id = st.lot(target).holder_key;
                entry.designated_doc_ids = detail::root_event_docs(st, target, graph);
                break;
            }

            case InjectOpKind::drop_evidence_doc: {
                auto eligible = [&](const std::string& id) { return !removable_doc(id).empty(); };
                std::string target =
                    pick_listed(eligible, op.target_security, "drop_evidence_doc");
                std::string doc = removable_doc(target);
                st.removed_docs.insert(doc);
                std::erase_if(st.documents,
                              [&](const DocumentRef& d) { return d.doc_id == doc; });
                entry.sub_label = kSubLabelMissingInfo;
                entry.security_id = target;
                entry.stakeholder_id = st.lot(target).holder_key;
                break;
            }

            case InjectOpKind::drop_approval_edge: {
                // derivation-chain approval would cover a derived lot even
                // after its own edge is gone, so only original grants qualify
                auto eligible = [&](const std::string& id) {
                    const auto& lot = st.lot(id);
                    auto usage = root_usage.find(lot.root_event_id);
                    if (usage == root_usage.end() || usage->second.size() != 1) return false;
                    if (!graph.has_approval(lot.root_event_id)) return false;
                    for (const auto& e : graph.edges_from(lot.root_event_id))
                        if (e.kind == EdgeKind::derives_from) return false;
                    return true;
                };
                std::string target =
                    pick_listed(eligible, op.target_security, "drop_approval_edge");
                const std::string& root = st.lot(target).root_event_id;
                std::erase_if(st.edges, [&](const GraphEdge& e) {
                    return e.kind == EdgeKind::approved_by && e.src_event_id == root;
                });
                entry.sub_label = kSubLabelBoardApproval;
                entry.security_id = target;
                entry.stakeholder_id = st.lot(target).holder_key;
                entry.designated_doc_ids = detail::root_event_docs(st, target, graph);
                break;
            }

            case InjectOpKind::omit_event_from_ref: {
                auto eligible = [&](const std::string& id) {
                    return detail::omit_eligible(id, graph, st, root_usage);
                };
                std::string target =
                    pick_listed(eligible, op.target_security, "omit_event_from_ref");
                const std::string root = st.lot(target).root_event_id;
                std::erase_if(st.events, [&](const Event& e) { return e.event_id == root; });
                std::erase_if(st.edges, [&](const GraphEdge& e) {
                    return e.src_event_id == root || e.dst_id == root;
                });
                entry.sub_label = kSubLabelMissingInfo;
                entry.security_id = target;
                entry.stakeholder_id = st.lot(target).holder_key;
                break;
            }

            case InjectOpKind::perturb_field: {
                auto any = [&](const std::string&) { return true; };
                std::string target = pick_listed(any, op.target_security, "perturb_field");
                std::string field = op.field;
                if (field.empty()) {
                    static const char* fields[] = {"quantity", "price_per_share", "vesting",
                                                   "acceleration"};
                    field = fields[rng.below(4)];
                }
                detail::apply_perturbation(st, target, field, graph);
                entry.sub_label = kSubLabelDataDiscrepancy;
                entry.security_id = target;
                entry.stakeholder_id = st.lot(target).holder_key;
                entry.designated_doc_ids = detail::root_event_docs(st, target, graph);
                break;
            }
        }
        truth.entries.push_back(std::move(entry));
    }

    InjectedCompany out;
    out.graph = build_graph(std::move(st.documents), std::move(st.stakeholders),
                            std::move(st.classes), std::move(st.events), std::move(st.edges));
    out.ref = ReferenceCapTable{std::move(st.ledgers)};
    out.truth = std::move(truth);
    return out;
}

} // namespace tieout
