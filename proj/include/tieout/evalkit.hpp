#pragma once

// Recovery scoring: pairs reported anomalies against injected ground truth
// and reduces the pairing to precision/recall/F1, overall and per anomaly
// kind. All metric arithmetic is exact.

#include "tieout/rational.hpp"
#include "tieout/synth.hpp"
#include "tieout/verify.hpp"

#include <chrono>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace tieout {

// ---------------------------------------------------------------------------
// Matching
// ---------------------------------------------------------------------------

enum class EvidenceMode { ignore, subset, exact };

inline const char* to_string(EvidenceMode m) {
    switch (m) {
        case EvidenceMode::ignore: return "ignore";
        case EvidenceMode::subset: return "subset";
        case EvidenceMode::exact: return "exact";
    }
    return "?";
}

inline EvidenceMode evidence_mode_from_string(const std::string& s) {
    if (s == "ignore") return EvidenceMode::ignore;
    if (s == "subset") return EvidenceMode::subset;
    if (s == "exact") return EvidenceMode::exact;
    throw std::invalid_argument("unknown evidence mode: " + s);
}

struct MatchRule {
    bool require_kind = true;
    bool require_security = true;  // anomaly must name the injected security
    bool require_sublabel = false;
    EvidenceMode evidence = EvidenceMode::subset;  // designated docs vs anomaly evidence
};

inline bool matches(const Anomaly& a, const GroundTruthEntry& t, const MatchRule& rule) {
    if (rule.require_kind && a.kind != t.kind) return false;
    if (rule.require_sublabel && a.sub_label != t.sub_label) return false;
    if (rule.require_security && !a.affected.security_ids.count(t.security_id)) return false;
    switch (rule.evidence) {
        case EvidenceMode::ignore: break;
        case EvidenceMode::subset:
            for (const auto& d : t.designated_doc_ids)
                if (!a.evidence.doc_ids.count(d)) return false;
            break;
        case EvidenceMode::exact:
            if (a.evidence.doc_ids != t.designated_doc_ids) return false;
            break;
    }
    return true;
}

struct MatchResult {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (anomaly index, truth index)
    std::vector<std::size_t> unmatched_anomalies;
    std::vector<std::size_t> unmatched_truth;
};

// Greedy one-to-one pairing in report order; each truth entry is consumed
// at most once.
inline MatchResult match(const AnomalyReport& report, const GroundTruth& truth,
                         const MatchRule& rule) {
    MatchResult out;
    std::vector<bool> consumed(truth.entries.size(), false);
    for (std::size_t a = 0; a < report.anomalies.size(); ++a) {
        bool paired = false;
        for (std::size_t t = 0; t < truth.entries.size(); ++t) {
            if (consumed[t] || !matches(report.anomalies[a], truth.entries[t], rule)) continue;
            consumed[t] = true;
            out.pairs.emplace_back(a, t);
            paired = true;
            break;
        }
        if (!paired) out.unmatched_anomalies.push_back(a);
    }
    for (std::size_t t = 0; t < truth.entries.size(); ++t)
        if (!consumed[t]) out.unmatched_truth.push_back(t);
    return out;
}

// ---------------------------------------------------------------------------
// Scoring
// ---------------------------------------------------------------------------

struct CategoryScore {
    std::size_t true_positives = 0;
    std::size_t false_positives = 0;
    std::size_t false_negatives = 0;

    Rational precision() const {
        std::size_t denom = true_positives + false_positives;
        return denom == 0 ? Rational(0)
                          : Rational(static_cast<std::int64_t>(true_positives),
                                     static_cast<std::int64_t>(denom));
    }
    Rational recall() const {
        std::size_t denom = true_positives + false_negatives;
        return denom == 0 ? Rational(0)
                          : Rational(static_cast<std::int64_t>(true_positives),
                                     static_cast<std::int64_t>(denom));
    }
    Rational f1() const {
        Rational p = precision(), r = recall();
        Rational denom = p + r;
        return denom.is_zero() ? Rational(0) : Rational(2) * p * r / denom;
    }
};

struct ScoreCard {
    CategoryScore overall;
    std::map<std::string, CategoryScore> by_kind;  // keyed by anomaly kind name
};

inline ScoreCard score(const AnomalyReport& report, const GroundTruth& truth,
                       const MatchRule& rule) {
    MatchResult m = match(report, truth, rule);
    ScoreCard card;
    for (AnomalyKind k : {AnomalyKind::MissingFromCapTable, AnomalyKind::MissingDocumentation,
                          AnomalyKind::InconsistentTerms})
        card.by_kind[to_string(k)];
    for (const auto& [a, t] : m.pairs) {
        ++card.overall.true_positives;
        ++card.by_kind[to_string(truth.entries[t].kind)].true_positives;
    }
    for (std::size_t a : m.unmatched_anomalies) {
        ++card.overall.false_positives;
        ++card.by_kind[to_string(report.anomalies[a].kind)].false_positives;
    }
    for (std::size_t t : m.unmatched_truth) {
        ++card.overall.false_negatives;
        ++card.by_kind[to_string(truth.entries[t].kind)].false_negatives;
    }
    return card;
}

// ---------------------------------------------------------------------------
// Latency
// ---------------------------------------------------------------------------

struct LatencyProfile {
    std::size_t checks = 0;
    std::size_t flagged = 0;
    double build_seconds = 0;  // one-time: replay, normalization, enumeration
    double check_seconds = 0;  // extraction + comparison over the checked span
    double per_check_micros = 0;
};

// Runs the first n_checks enumerated checks (0 = all) against states built
// once up front. The build cost is reported separately so the per-check mean
// reflects only extraction and comparison.
inline LatencyProfile latency_profile(const EventGraph& graph, const ReferenceCapTable& ref,
                                      std::size_t n_checks = 0) {
    LatencyProfile p;
    auto t0 = std::chrono::steady_clock::now();
    CapState virt = build_virtual_captable(graph);
    CapState ref_state = reference_to_capstate(ref, graph);
    auto addrs = enumerate_transforms(virt, ref_state);
    auto t1 = std::chrono::steady_clock::now();

    std::size_t n = n_checks == 0 ? addrs.size() : std::min(n_checks, addrs.size());
    for (std::size_t i = 0; i < n; ++i) {
        CheckResult r = check(addrs[i], virt, ref_state, graph);
        if (r.outcome == CheckResult::Outcome::anomaly) ++p.flagged;
    }
    auto t2 = std::chrono::steady_clock::now();

    p.checks = n;
    p.build_seconds = std::chrono::duration<double>(t1 - t0).count();
    p.check_seconds = std::chrono::duration<double>(t2 - t1).count();
    if (n > 0) p.per_check_micros = p.check_seconds * 1e6 / static_cast<double>(n);
    return p;
}

} // namespace tieout
