#pragma once

// Reference cap table ingestion: CSV ledgers in, normalized CapState out,
// plus ledger-internal consistency findings. Parsing is strict about the
// schema (header and column count) but deliberately lax about values a
// defective spreadsheet could hold (negative quantities parse and are
// flagged by the self check, not rejected).

#include "tieout/capstate.hpp"
#include "tieout/domain.hpp"
#include "tieout/rational.hpp"

#include <cstdint>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace tieout {

struct LedgerEntry {
    std::string security_id;
    std::string stakeholder_name;
    std::int64_t quantity_issued = 0;
    std::string share_class;
    Rational price_per_share;
    VestingSpec vesting;
    Acceleration acceleration = Acceleration::none;

    bool operator==(const LedgerEntry&) const = default;
};

struct Ledger {
    std::string class_name;  // tab label; rows carry their own share_class
    std::vector<LedgerEntry> entries;
    std::optional<std::int64_t> declared_grand_total;
};

struct ReferenceCapTable {
    std::vector<Ledger> ledgers;
};

// --- parse errors ----------------------------------------------------------

struct HeaderMismatch : std::runtime_error {
    explicit HeaderMismatch(const std::string& got)
        : std::runtime_error("ledger header mismatch: got \"" + got + "\"") {}
};

struct RowParseError : std::runtime_error {
    int row;  // 1-based, counting the header as row 1
    std::string column;
    RowParseError(int r, const std::string& col, const std::string& msg)
        : std::runtime_error("row " + std::to_string(r) + ", column \"" + col + "\": " + msg),
          row(r),
          column(col) {}
};

struct DuplicateSecurityId : std::runtime_error {
    std::string security_id;
    explicit DuplicateSecurityId(const std::string& id)
        : std::runtime_error("duplicate security id: " + id), security_id(id) {}
};

// --- CSV -------------------------------------------------------------------

inline constexpr const char* kLedgerHeader =
    "Security ID,Stakeholder Name,Quantity Issued,Share Class,Price Per Share,"
    "Vesting Schedule,Acceleration";

inline constexpr int kLedgerColumnCount = 7;

inline const char* ledger_column_name(int i) {
    static constexpr const char* names[] = {"Security ID",     "Stakeholder Name",
                                            "Quantity Issued", "Share Class",
                                            "Price Per Share", "Vesting Schedule",
                                            "Acceleration"};
    return names[i];
}

namespace detail {

// Minimal CSV: comma-separated, double quotes may wrap a field, "" inside a
// quoted field is a literal quote. CRLF and LF both end records.
inline std::vector<std::vector<std::string>> split_csv(const std::string& bytes) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false;
    bool row_has_content = false;
    auto end_field = [&] {
        row.push_back(field);
        field.clear();
    };
    auto end_row = [&] {
        end_field();
        rows.push_back(std::move(row));
        row.clear();
        row_has_content = false;
    };
    for (std::size_t i = 0; i < bytes.size(); ++i) {
        char c = bytes[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < bytes.size() && bytes[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(c);
            }
            continue;
        }
        switch (c) {
            case '"': quoted = true; row_has_content = true; break;
            case ',': end_field(); row_has_content = true; break;
            case '\r': break;
            case '\n':
                if (row_has_content || !field.empty() || !row.empty()) end_row();
                break;
            default: field.push_back(c); row_has_content = true; break;
        }
    }
    if (row_has_content || !field.empty() || !row.empty()) end_row();
    return rows;
}

inline std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out.push_back('"');
    return out;
}

inline std::string ascii_lower(const std::string& s) {
    std::string out = s;
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

inline std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

inline std::int64_t parse_quantity(const std::string& raw, int row, const char* column) {
    std::string digits;
    bool negative = false;
    std::string t = trim(raw);
    for (std::size_t i = 0; i < t.size(); ++i) {
        char c = t[i];
        if (c == '-' && i == 0) { negative = true; continue; }
        if (c == ',') continue;  // thousands separator
        if (!std::isdigit(static_cast<unsigned char>(c)))
            throw RowParseError(row, column, "not a whole number: \"" + raw + "\"");
        digits.push_back(c);
    }
    if (digits.empty()) throw RowParseError(row, column, "empty quantity");
    try {
        std::int64_t v = std::stoll(digits);
        return negative ? -v : v;
    } catch (const std::exception&) {
        throw RowParseError(row, column, "quantity out of range: \"" + raw + "\"");
    }
}

inline Acceleration parse_acceleration(const std::string& raw, int row) {
    std::string n = normalize_name(raw);
    if (n.empty() || n == "none" || n == "no") return Acceleration::none;
    if (n == "double trigger") return Acceleration::double_trigger;
    if (n == "single trigger") return Acceleration::single_trigger;
    if (n == "yes") return Acceleration::yes_unspecified;
    throw RowParseError(row, "Acceleration", "unrecognized value: \"" + raw + "\"");
}

} // namespace detail

inline std::string acceleration_csv_label(Acceleration a) {
    switch (a) {
        case Acceleration::none: return "None";
        case Acceleration::single_trigger: return "Single Trigger";
        case Acceleration::double_trigger: return "Double Trigger";
        case Acceleration::yes_unspecified: return "Yes";
    }
    return "?";
}

inline Ledger parse_ledger_csv(const std::string& bytes, const std::string& class_name) {
    auto rows = detail::split_csv(bytes);
    if (rows.empty()) throw HeaderMismatch("<empty file>");

    {
        const auto& header = rows[0];
        bool ok = header.size() == kLedgerColumnCount;
        for (int i = 0; ok && i < kLedgerColumnCount; ++i)
            ok = detail::ascii_lower(detail::trim(header[i])) ==
                 detail::ascii_lower(ledger_column_name(i));
        if (!ok) {
            std::string got;
            for (std::size_t i = 0; i < header.size(); ++i)
                got += (i ? "," : "") + header[i];
            throw HeaderMismatch(got);
        }
    }

    Ledger ledger;
    ledger.class_name = class_name;
    std::set<std::string> seen_ids;
    bool total_seen = false;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        int row_no = static_cast<int>(r) + 1;
        const auto& cells = rows[r];
        if (cells.size() == 1 && detail::trim(cells[0]).empty()) continue;
        if (total_seen)
            throw RowParseError(row_no, "Security ID", "row after grand-total row");
        if (cells.size() != kLedgerColumnCount)
            throw RowParseError(row_no, "Security ID",
                                "expected " + std::to_string(kLedgerColumnCount) +
                                    " columns, got " + std::to_string(cells.size()));

        std::string first = detail::trim(cells[0]);
        if (normalize_name(first) == "grand total") {
            ledger.declared_grand_total =
                detail::parse_quantity(cells[2], row_no, "Quantity Issued");
            total_seen = true;
            continue;
        }

        LedgerEntry e;
        e.security_id = first;
        if (e.security_id.empty())
            throw RowParseError(row_no, "Security ID", "must be non-empty");
        if (!seen_ids.insert(e.security_id).second) throw DuplicateSecurityId(e.security_id);
        e.stakeholder_name = detail::trim(cells[1]);
        e.quantity_issued = detail::parse_quantity(cells[2], row_no, "Quantity Issued");
        e.share_class = detail::trim(cells[3]);
        try {
            e.price_per_share = Rational::parse_decimal(cells[4]);
        } catch (const std::exception& ex) {
            throw RowParseError(row_no, "Price Per Share", ex.what());
        }
        e.vesting = VestingSpec::parse(detail::trim(cells[5]));
        e.acceleration = detail::parse_acceleration(cells[6], row_no);
        ledger.entries.push_back(std::move(e));
    }
    return ledger;
}

inline std::string serialize_ledger_csv(const Ledger& ledger) {
    std::ostringstream out;
    out << kLedgerHeader << "\n";
    for (const auto& e : ledger.entries) {
        out << detail::csv_escape(e.security_id) << ','
            << detail::csv_escape(e.stakeholder_name) << ',' << e.quantity_issued << ','
            << detail::csv_escape(e.share_class) << ',' << e.price_per_share.to_decimal_string()
            << ',' << detail::csv_escape(e.vesting.to_string()) << ','
            << acceleration_csv_label(e.acceleration) << "\n";
    }
    if (ledger.declared_grand_total)
        out << "Grand Total,," << *ledger.declared_grand_total << ",,,,\n";
    return out.str();
}

// --- self check -------------------------------------------------------------

struct InternalFinding {
    std::string code;  // GrandTotalMismatch | DuplicateSecurityId | NegativeQuantity
    std::string security_id;
    std::int64_t declared = 0;
    std::int64_t computed = 0;
    std::string detail;
};

inline std::vector<InternalFinding> ledger_self_check(const Ledger& ledger) {
    std::vector<InternalFinding> findings;
    std::set<std::string> seen;
    std::int64_t computed = 0;
    for (const auto& e : ledger.entries) {
        computed += e.quantity_issued;
        if (!seen.insert(e.security_id).second) {
            InternalFinding f;
            f.code = "DuplicateSecurityId";
            f.security_id = e.security_id;
            f.detail = "security id appears more than once";
            findings.push_back(std::move(f));
        }
        if (e.quantity_issued < 0) {
            InternalFinding f;
            f.code = "NegativeQuantity";
            f.security_id = e.security_id;
            f.computed = e.quantity_issued;
            f.detail = "quantity issued is negative";
            findings.push_back(std::move(f));
        }
    }
    if (ledger.declared_grand_total && *ledger.declared_grand_total != computed) {
        InternalFinding f;
        f.code = "GrandTotalMismatch";
        f.declared = *ledger.declared_grand_total;
        f.computed = computed;
        f.detail = "declared grand total does not equal the sum of listed rows";
        findings.push_back(std::move(f));
    }
    return findings;
}

// Assembles ledgers into a reference table, enforcing cross-ledger
// security-id uniqueness.
inline ReferenceCapTable make_reference(std::vector<Ledger> ledgers) {
    std::set<std::string> ids;
    for (const auto& l : ledgers)
        for (const auto& e : l.entries)
            if (!ids.insert(e.security_id).second) throw DuplicateSecurityId(e.security_id);
    return ReferenceCapTable{std::move(ledgers)};
}

// Reference rows become positions with empty provenance. Stakeholder names
// resolve through the graph's alias table where possible; unresolved names
// are carried as raw keys, never dropped.
inline CapState reference_to_capstate(const ReferenceCapTable& ref, const EventGraph& graph) {
    CapState state;
    for (const auto& ledger : ref.ledgers) {
        for (const auto& e : ledger.entries) {
            PositionRecord p;
            p.security_id = e.security_id;
            p.holder_display = e.stakeholder_name;
            auto resolved = graph.resolve_stakeholder(e.stakeholder_name);
            p.holder_key =
                resolved.found() ? resolved.stakeholder_id : raw_holder_key(e.stakeholder_name);
            p.class_name = e.share_class;
            p.quantity = Rational(e.quantity_issued);
            p.price = e.price_per_share;
            p.vesting = e.vesting;
            p.acceleration = e.acceleration;
            state.positions.emplace(p.security_id, std::move(p));
        }
    }
    state.recompute_aggregates();
    return state;
}

} // namespace tieout
