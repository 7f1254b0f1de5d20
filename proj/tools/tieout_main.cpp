// Command-line front end: one binary, four subcommands.
//
//   tieout   replay a bundle, reconcile against ledgers, emit the report
//   synth    generate a synthetic company (optionally with injected faults)
//   eval     score a report against ground truth
//   inspect  summarize a bundle; optionally dump the replayed state
//
// Exit codes: 0 success (tieout: no anomalies), 1 anomalies found,
// 2 bad input (unreadable file, schema mismatch, bad flags).

#include "tieout/tieout.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw tieout::IoError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const fs::path& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw tieout::IoError("cannot write " + path.string());
    out << bytes;
}

tieout::json parse_json_file(const fs::path& path) {
    try {
        return tieout::json::parse(read_file(path));
    } catch (const tieout::json::exception& ex) {
        throw tieout::IoError(path.string() + ": " + ex.what());
    }
}

void emit(const std::string& out_path, const std::string& bytes) {
    if (out_path.empty()) std::cout << bytes;
    else write_file(out_path, bytes);
}

// "Label=path" names the ledger tab explicitly; a bare path uses the
// file stem. Rows carry their own share class, so the label is cosmetic.
std::pair<std::string, std::string> split_ledger_arg(const std::string& arg) {
    auto eq = arg.find('=');
    if (eq != std::string::npos && eq > 0)
        return {arg.substr(0, eq), arg.substr(eq + 1)};
    return {fs::path(arg).stem().string(), arg};
}

std::string slug(const std::string& name) {
    std::string out;
    for (char c : name) {
        if (std::isalnum(static_cast<unsigned char>(c)))
            out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        else if (!out.empty() && out.back() != '_')
            out.push_back('_');
    }
    while (!out.empty() && out.back() == '_') out.pop_back();
    return out.empty() ? "ledger" : out;
}

// Cuts the graph at a date: events after it vanish, along with any edge
// touching a dropped event.
tieout::EventGraph filter_as_of(const tieout::EventGraph& g, const tieout::Date& as_of) {
    std::vector<tieout::Event> events;
    std::set<std::string> kept;
    for (const auto& e : g.events()) {
        if (as_of < e.effective_date) continue;
        kept.insert(e.event_id);
        events.push_back(e);
    }
    std::vector<tieout::GraphEdge> edges;
    for (const auto& e : g.edges()) {
        if (!kept.count(e.src_event_id)) continue;
        if (e.kind != tieout::EdgeKind::approved_by && !kept.count(e.dst_id)) continue;
        edges.push_back(e);
    }
    return tieout::build_graph(g.documents(), g.stakeholders(), g.classes(), std::move(events),
                               std::move(edges));
}

std::vector<tieout::Ledger> load_ledgers(const std::vector<std::string>& args) {
    std::vector<tieout::Ledger> ledgers;
    for (const auto& arg : args) {
        auto [label, path] = split_ledger_arg(arg);
        ledgers.push_back(tieout::parse_ledger_csv(read_file(path), label));
    }
    return ledgers;
}

int cmd_tieout(const std::string& bundle_path, const std::vector<std::string>& ledger_args,
               const std::string& out_path, const std::string& as_of) {
    tieout::EventGraph graph = tieout::bundle_from_json(parse_json_file(bundle_path));
    if (!as_of.empty()) graph = filter_as_of(graph, tieout::Date::parse(as_of));

    auto ledgers = load_ledgers(ledger_args);
    for (const auto& l : ledgers)
        for (const auto& f : tieout::ledger_self_check(l))
            std::cerr << "ledger " << l.class_name << ": " << f.code << " " << f.detail << "\n";
    tieout::ReferenceCapTable ref = tieout::make_reference(std::move(ledgers));

    tieout::AnomalyReport report = tieout::tie_out(graph, ref);
    emit(out_path, tieout::canonical_dump(tieout::report_to_json(report)));
    return report.anomalies.empty() ? 0 : 1;
}

int cmd_synth(const std::string& preset_name, std::uint64_t seed, const std::string& out_dir,
              const std::string& inject_arg) {
    tieout::StagePreset preset = tieout::stage_preset(preset_name);
    tieout::CleanCompany clean = tieout::generate_clean(preset, seed);

    tieout::EventGraph graph = std::move(clean.graph);
    tieout::ReferenceCapTable ref = std::move(clean.ref);
    tieout::GroundTruth truth;
    std::size_t injected = 0;

    if (!inject_arg.empty()) {
        tieout::InjectionSpec spec;
        bool numeric = !inject_arg.empty() &&
                       inject_arg.find_first_not_of("0123456789") == std::string::npos;
        if (numeric)
            spec = tieout::make_injection_spec(preset, std::stoull(inject_arg), seed);
        else
            spec = tieout::injection_spec_from_json(parse_json_file(inject_arg), preset);
        tieout::InjectedCompany company = tieout::inject(graph, ref, spec);
        graph = std::move(company.graph);
        ref = std::move(company.ref);
        truth = std::move(company.truth);
        injected = truth.entries.size();
    }

    fs::create_directories(out_dir);
    write_file(fs::path(out_dir) / "bundle.json",
               tieout::canonical_dump(tieout::bundle_to_json(graph)));

    tieout::json ledger_files = tieout::json::object();
    for (const auto& ledger : ref.ledgers) {
        std::string file = "ledger_" + slug(ledger.class_name) + ".csv";
        ledger_files[ledger.class_name] = file;
        write_file(fs::path(out_dir) / file, tieout::serialize_ledger_csv(ledger));
    }

    write_file(fs::path(out_dir) / "ground_truth.json",
               tieout::canonical_dump(tieout::ground_truth_to_json(truth)));

    tieout::RealizedStats stats = tieout::realized_stats(graph, ref);
    tieout::json manifest = tieout::manifest_to_json(preset, seed, stats, injected);
    manifest["ledgers"] = std::move(ledger_files);
    write_file(fs::path(out_dir) / "manifest.json", tieout::canonical_dump(manifest));
    return 0;
}

int cmd_eval(const std::string& report_path, const std::string& truth_path,
             const std::string& match_mode, bool strict_sublabel, const std::string& out_path) {
    tieout::AnomalyReport report = tieout::report_from_json(parse_json_file(report_path));
    tieout::GroundTruth truth = tieout::ground_truth_from_json(parse_json_file(truth_path));

    tieout::MatchRule rule;
    rule.evidence = tieout::evidence_mode_from_string(match_mode);
    rule.require_sublabel = strict_sublabel;

    tieout::ScoreCard card = tieout::score(report, truth, rule);
    emit(out_path, tieout::canonical_dump(tieout::scorecard_to_json(card)));
    return 0;
}

int cmd_inspect(const std::string& bundle_path, const std::vector<std::string>& ledger_args,
                const std::string& as_of, bool dump_state, const std::string& out_path) {
    tieout::EventGraph graph = tieout::bundle_from_json(parse_json_file(bundle_path));
    if (!as_of.empty()) graph = filter_as_of(graph, tieout::Date::parse(as_of));

    tieout::CapState state = tieout::build_virtual_captable(graph);
    tieout::json j{{"documents", graph.documents().size()},
                   {"stakeholders", graph.stakeholders().size()},
                   {"classes", graph.classes().size()},
                   {"events", graph.events().size()},
                   {"edges", graph.edges().size()},
                   {"positions", state.positions.size()},
                   {"replay_findings", state.findings.size()}};

    if (!ledger_args.empty()) {
        auto ledgers = load_ledgers(ledger_args);
        tieout::json checks = tieout::json::array();
        for (const auto& l : ledgers) {
            for (const auto& f : tieout::ledger_self_check(l))
                checks.push_back(tieout::json{{"ledger", l.class_name},
                                              {"code", f.code},
                                              {"security_id", f.security_id},
                                              {"declared", f.declared},
                                              {"computed", f.computed}});
        }
        j["ledger_findings"] = std::move(checks);
        tieout::ReferenceCapTable ref = tieout::make_reference(std::move(ledgers));
        tieout::CapState ref_state = tieout::reference_to_capstate(ref, graph);
        j["checked_transforms"] = tieout::enumerate_transforms(state, ref_state).size();
    }
    if (dump_state) j["state"] = tieout::capstate_to_json(state);

    emit(out_path, tieout::canonical_dump(j));
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"deterministic capitalization tie-out engine"};
    app.require_subcommand(1);

    std::string bundle_path, out_path, as_of;
    std::vector<std::string> ledger_args;

    auto* run = app.add_subcommand("tieout", "replay a bundle and reconcile it against ledgers");
    run->add_option("--bundle", bundle_path, "event bundle JSON")->required();
    run->add_option("--ledger", ledger_args, "ledger CSV, as Label=path or a bare path")
        ->required()
        ->take_all();
    run->add_option("--out", out_path, "write the report here instead of stdout");
    run->add_option("--as-of", as_of, "ignore events after this date (YYYY-MM-DD)");

    std::string preset_name, inject_arg, synth_out;
    std::uint64_t seed = 0;
    auto* synth = app.add_subcommand("synth", "generate a synthetic company corpus");
    synth->add_option("--preset", preset_name, "one of: seed, series_a, series_b")->required();
    synth->add_option("--seed", seed, "generator seed");
    synth->add_option("--out", synth_out, "output directory")->required();
    synth->add_option("--inject", inject_arg,
                      "fault count, or path to an injection spec JSON");

    std::string report_path, truth_path, match_mode = "subset", eval_out;
    bool strict_sublabel = false;
    auto* eval = app.add_subcommand("eval", "score a report against ground truth");
    eval->add_option("--report", report_path, "anomaly report JSON")->required();
    eval->add_option("--truth", truth_path, "ground truth JSON")->required();
    eval->add_option("--match", match_mode, "evidence matching: subset, exact, or ignore");
    eval->add_flag("--strict-sublabel", strict_sublabel, "require sub-label equality");
    eval->add_option("--out", eval_out, "write the scorecard here instead of stdout");

    std::string ins_bundle, ins_as_of, ins_out;
    std::vector<std::string> ins_ledgers;
    bool dump_state = false;
    auto* inspect = app.add_subcommand("inspect", "summarize a bundle");
    inspect->add_option("--bundle", ins_bundle, "event bundle JSON")->required();
    inspect->add_option("--ledger", ins_ledgers, "ledger CSV, as Label=path or a bare path")
        ->take_all();
    inspect->add_option("--as-of", ins_as_of, "ignore events after this date");
    inspect->add_flag("--dump-state", dump_state, "include the replayed state");
    inspect->add_option("--out", ins_out, "write the summary here instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*run) return cmd_tieout(bundle_path, ledger_args, out_path, as_of);
        if (*synth) return cmd_synth(preset_name, seed, synth_out, inject_arg);
        if (*eval) return cmd_eval(report_path, truth_path, match_mode, strict_sublabel, eval_out);
        if (*inspect) return cmd_inspect(ins_bundle, ins_ledgers, ins_as_of, dump_state, ins_out);
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 2;
    }
    return 2;
}
