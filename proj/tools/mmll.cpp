// Batch experiment runner: survival, eliminate, graphgen, verify, simulate,
// pmf. Every run echoes its resolved configuration next to the results so an
// experiment is reproducible from its outputs alone. Exit codes: 0 success,
// 1 property/audit failure, 2 usage or IO error, 3 capacity.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <numeric>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "mmll/cert_algorithms.hpp"
#include "mmll/equivalences.hpp"
#include "mmll/graph_lab.hpp"
#include "mmll/label_algebra.hpp"
#include "mmll/round_elim.hpp"
#include "mmll/simulator.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct GlobalOpts {
    uint64_t seed = 0;
    int workers = 1;
    uint64_t budget = 0;  // 0 = leave default / env
    std::string out_dir = ".";
    std::string format = "json";
    std::string config_path;
};

json g_resolved;  // filled as options resolve, echoed to out-dir

void emit_file(const GlobalOpts& g, const std::string& name, const std::string& content) {
    fs::create_directories(g.out_dir);
    std::ofstream os(fs::path(g.out_dir) / name, std::ios::binary);
    if (!os) throw mmll::validation_error("cannot write output file " + name);
    os << content;
}

void emit_resolved(const GlobalOpts& g) { emit_file(g, "resolved_config.json", g_resolved.dump(2) + "\n"); }

int fail_with(const GlobalOpts& g, const std::string& kind, const std::string& message, int code,
              json extra = json::object()) {
    json err{{"error", kind}, {"message", message}};
    err.update(extra);
    try {
        emit_file(g, "error.json", err.dump(2) + "\n");
    } catch (...) {
    }
    std::cerr << "error(" << kind << "): " << message << "\n";
    return code;
}

// Fill an option's bound variable from the config file when the flag was not
// passed on the command line (flags win over file values).
template <class T>
void cfg_fill(CLI::App* app, const json& section, const std::string& key, T& var) {
    if (!section.is_object() || !section.contains(key)) return;
    CLI::Option* opt = app->get_option_no_throw("--" + key);
    if (opt && opt->count() > 0) return;
    var = section.at(key).get<T>();
}

mmll::LabelModel parse_model(const std::string& spec) {
    if (spec == "continuous") return mmll::LabelModel::continuous();
    if (spec.rfind("discrete:", 0) == 0)
        return mmll::LabelModel::discrete(uint32_t(std::stoul(spec.substr(9))));
    throw mmll::validation_error("model must be 'continuous' or 'discrete:L', got " + spec);
}

struct AlgoSpec {
    std::string algo = "greedy";
    int delta = 2;
    int radius = 1;
    std::string model = "discrete:2";
    int lift = 0;  // when > radius, lift to this radius
};

mmll::CertifiedAlgorithm build_algo(const AlgoSpec& spec) {
    using mmll::CertifiedAlgorithm;
    mmll::LabelModel model = parse_model(spec.model);
    CertifiedAlgorithm f;
    if (spec.algo == "greedy") {
        f = CertifiedAlgorithm::greedy_min_label(mmll::Shape(spec.delta, 1), model);
    } else if (spec.algo == "zero") {
        f = CertifiedAlgorithm::constant_zero(mmll::Shape(spec.delta, spec.radius), model);
    } else if (spec.algo.rfind("table:", 0) == 0) {
        f = mmll::read_table_file(spec.algo.substr(6));
    } else {
        throw mmll::validation_error("algo must be greedy, zero, or table:<path>");
    }
    if (spec.lift > f.shape.radius) f = CertifiedAlgorithm::lift(f, spec.lift);
    return f;
}

json survival_json(const mmll::SurvivalEstimate& est) {
    json j{{"value", est.value}};
    if (est.exact) {
        j["method"] = "exact";
        j["num"] = est.num;
        j["den"] = est.den;
        j["exact"] = std::to_string(est.num) + "/" + std::to_string(est.den);
    } else {
        j["method"] = "monte_carlo";
        j["trials"] = est.trials;
        j["half_width_95"] = est.half_width_95;
    }
    return j;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"mmll: maximal-matching lower-bound laboratory"};
    app.require_subcommand(1);
    app.fallthrough(true);  // global flags may follow the subcommand

    GlobalOpts g;
    app.add_option("--seed", g.seed, "master seed");
    app.add_option("--workers", g.workers, "worker threads (results are worker-count independent)");
    app.add_option("--budget", g.budget, "state-count budget (default 2^32 or MMLL_BUDGET)");
    app.add_option("--out-dir", g.out_dir, "output directory");
    app.add_option("--format", g.format, "report format: csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--config", g.config_path, "JSON config file (flags win over file values)");

    // ------------------------------------------------------------ survival
    auto* sc_survival = app.add_subcommand("survival", "exact/MC vertex survival probability");
    AlgoSpec sv_algo;
    std::string sv_mode = "exact";
    uint64_t sv_trials = 1000000;
    sc_survival->add_option("--algo", sv_algo.algo, "greedy | zero | table:<path>");
    sc_survival->add_option("--delta", sv_algo.delta, "degree");
    sc_survival->add_option("--radius", sv_algo.radius, "radius (zero builtin)");
    sc_survival->add_option("--model", sv_algo.model, "discrete:L | continuous");
    sc_survival->add_option("--lift", sv_algo.lift, "lift the algorithm to this radius");
    sc_survival->add_option("--mode", sv_mode, "exact | mc")->check(CLI::IsMember({"exact", "mc"}));
    sc_survival->add_option("--trials", sv_trials, "MC trial count");

    // ------------------------------------------------------------ eliminate
    auto* sc_elim = app.add_subcommand("eliminate", "round elimination f -> g plus audit ledger");
    AlgoSpec el_algo;
    double el_c5 = -1.0;
    bool el_chain = false;
    bool el_mc = false;
    uint64_t el_trials = 200000;
    sc_elim->add_option("--algo", el_algo.algo, "greedy | zero | table:<path>");
    sc_elim->add_option("--delta", el_algo.delta, "degree");
    sc_elim->add_option("--radius", el_algo.radius, "radius (zero builtin)");
    sc_elim->add_option("--model", el_algo.model, "discrete:L");
    sc_elim->add_option("--lift", el_algo.lift, "lift the algorithm to this radius");
    sc_elim->add_option("--c5-override", el_c5, "replace C5 for the g construction (in (0,1])");
    sc_elim->add_flag("--chain", el_chain, "eliminate repeatedly down to radius 0");
    sc_elim->add_flag("--mc", el_mc, "allow MC survival when the exact scan exceeds budget");
    sc_elim->add_option("--trials", el_trials, "MC trial count under --mc");

    // ------------------------------------------------------------ graphgen
    auto* sc_gen = app.add_subcommand("graphgen", "configuration-model hard instances");
    int gg_n = 100, gg_delta = 3, gg_girth = 3;
    long long gg_tries = 10000;
    std::string gg_method = "auto";
    sc_gen->add_option("--n", gg_n, "vertex count");
    sc_gen->add_option("--delta", gg_delta, "degree");
    sc_gen->add_option("--girth", gg_girth, "girth target");
    sc_gen->add_option("--max-tries", gg_tries, "rejection budget");
    sc_gen->add_option("--method", gg_method, "auto | reject | repair")
        ->check(CLI::IsMember({"auto", "reject", "repair"}));
    int gg_spot = 8;
    sc_gen->add_option("--spot-checks", gg_spot, "sampled subgraph/expansion checks per size");

    // ------------------------------------------------------------ verify
    auto* sc_verify = app.add_subcommand("verify", "distributional equivalence suite");
    int vf_delta = 3, vf_radius = 1;
    std::string vf_model = "discrete:2";
    uint64_t vf_samples = 1000000;
    double vf_significance = 1e-3;
    sc_verify->add_option("--delta", vf_delta, "degree");
    sc_verify->add_option("--radius", vf_radius, "radius");
    sc_verify->add_option("--model", vf_model, "discrete:L | continuous");
    sc_verify->add_option("--samples", vf_samples, "continuous-mode sample count");
    sc_verify->add_option("--significance", vf_significance, "continuous-mode significance");

    // ------------------------------------------------------------ simulate
    auto* sc_sim = app.add_subcommand("simulate", "LOCAL-model runs on a port graph");
    AlgoSpec sm_algo;
    sm_algo.model = "continuous";
    std::string sm_graph;
    uint64_t sm_trials = 100;
    std::string sm_boundary = "pad";
    sc_sim->add_option("--graph", sm_graph, "graph file (mmll-graph v1)")->required();
    sc_sim->add_option("--algo", sm_algo.algo, "greedy | zero | table:<path>");
    sc_sim->add_option("--delta", sm_algo.delta, "degree");
    sc_sim->add_option("--radius", sm_algo.radius, "radius (zero builtin)");
    sc_sim->add_option("--model", sm_algo.model, "discrete:L | continuous");
    sc_sim->add_option("--lift", sm_algo.lift, "lift the algorithm to this radius");
    sc_sim->add_option("--trials", sm_trials, "number of seeded trials");
    sc_sim->add_option("--boundary", sm_boundary, "pad | interior")
        ->check(CLI::IsMember({"pad", "interior"}));
    bool sm_trace = false;
    sc_sim->add_flag("--trace-views", sm_trace, "log trial-0 flower views in binary form");

    // ------------------------------------------------------------ pmf
    auto* sc_pmf = app.add_subcommand("pmf", "matching-intersection pmf and tail bounds");
    int pm_n = 4, pm_k = 2, pm_t = -1;
    double pm_tail = -1.0;
    sc_pmf->add_option("--n", pm_n, "vertex count (even)");
    sc_pmf->add_option("--k", pm_k, "subset size");
    sc_pmf->add_option("--t", pm_t, "single intersection size (default: all)");
    sc_pmf->add_option("--tail-delta", pm_tail, "also emit tail bounds at this delta");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    // merge config file values into options the command line left unset
    if (!g.config_path.empty()) {
        std::ifstream is(g.config_path);
        if (!is) return fail_with(g, "io", "cannot read config file " + g.config_path, 2);
        json cfg = json::parse(is, nullptr, false);
        if (cfg.is_discarded()) return fail_with(g, "config", "config file is not valid JSON", 2);
        cfg_fill(&app, cfg, "seed", g.seed);
        cfg_fill(&app, cfg, "workers", g.workers);
        cfg_fill(&app, cfg, "budget", g.budget);
        cfg_fill(&app, cfg, "out-dir", g.out_dir);
        cfg_fill(&app, cfg, "format", g.format);
        if (sc_survival->parsed() && cfg.contains("survival")) {
            const json& c = cfg["survival"];
            cfg_fill(sc_survival, c, "algo", sv_algo.algo);
            cfg_fill(sc_survival, c, "delta", sv_algo.delta);
            cfg_fill(sc_survival, c, "radius", sv_algo.radius);
            cfg_fill(sc_survival, c, "model", sv_algo.model);
            cfg_fill(sc_survival, c, "lift", sv_algo.lift);
            cfg_fill(sc_survival, c, "mode", sv_mode);
            cfg_fill(sc_survival, c, "trials", sv_trials);
        }
        if (sc_elim->parsed() && cfg.contains("eliminate")) {
            const json& c = cfg["eliminate"];
            cfg_fill(sc_elim, c, "algo", el_algo.algo);
            cfg_fill(sc_elim, c, "delta", el_algo.delta);
            cfg_fill(sc_elim, c, "radius", el_algo.radius);
            cfg_fill(sc_elim, c, "model", el_algo.model);
            cfg_fill(sc_elim, c, "lift", el_algo.lift);
            cfg_fill(sc_elim, c, "c5-override", el_c5);
            cfg_fill(sc_elim, c, "chain", el_chain);
            cfg_fill(sc_elim, c, "mc", el_mc);
            cfg_fill(sc_elim, c, "trials", el_trials);
        }
        if (sc_gen->parsed() && cfg.contains("graphgen")) {
            const json& c = cfg["graphgen"];
            cfg_fill(sc_gen, c, "n", gg_n);
            cfg_fill(sc_gen, c, "delta", gg_delta);
            cfg_fill(sc_gen, c, "girth", gg_girth);
            cfg_fill(sc_gen, c, "max-tries", gg_tries);
            cfg_fill(sc_gen, c, "method", gg_method);
        }
        if (sc_verify->parsed() && cfg.contains("verify")) {
            const json& c = cfg["verify"];
            cfg_fill(sc_verify, c, "delta", vf_delta);
            cfg_fill(sc_verify, c, "radius", vf_radius);
            cfg_fill(sc_verify, c, "model", vf_model);
            cfg_fill(sc_verify, c, "samples", vf_samples);
            cfg_fill(sc_verify, c, "significance", vf_significance);
        }
        if (sc_sim->parsed() && cfg.contains("simulate")) {
            const json& c = cfg["simulate"];
            cfg_fill(sc_sim, c, "graph", sm_graph);
            cfg_fill(sc_sim, c, "algo", sm_algo.algo);
            cfg_fill(sc_sim, c, "radius", sm_algo.radius);
            cfg_fill(sc_sim, c, "model", sm_algo.model);
            cfg_fill(sc_sim, c, "lift", sm_algo.lift);
            cfg_fill(sc_sim, c, "trials", sm_trials);
            cfg_fill(sc_sim, c, "boundary", sm_boundary);
        }
        if (sc_pmf->parsed() && cfg.contains("pmf")) {
            const json& c = cfg["pmf"];
            cfg_fill(sc_pmf, c, "n", pm_n);
            cfg_fill(sc_pmf, c, "k", pm_k);
            cfg_fill(sc_pmf, c, "t", pm_t);
            cfg_fill(sc_pmf, c, "tail-delta", pm_tail);
        }
    }

    if (g.budget > 0) mmll::set_state_budget(g.budget);
    g_resolved = {{"seed", g.seed},
                  {"workers", g.workers},
                  {"budget", mmll::state_budget()},
                  {"out_dir", g.out_dir},
                  {"format", g.format}};

    try {
        // -------------------------------------------------------- survival
        if (sc_survival->parsed()) {
            g_resolved["survival"] = {{"algo", sv_algo.algo}, {"delta", sv_algo.delta},
                                      {"radius", sv_algo.radius}, {"model", sv_algo.model},
                                      {"lift", sv_algo.lift}, {"mode", sv_mode},
                                      {"trials", sv_trials}};
            emit_resolved(g);
            auto f = build_algo(sv_algo);
            mmll::SurvivalEstimate est;
            if (sv_mode == "exact")
                est = mmll::survival_probability_exact(f, g.workers);
            else
                est = mmll::survival_probability_mc(f, sv_trials, mmll::Rng(g.seed, 1), g.workers);
            json out = survival_json(est);
            out["algo"] = f.provenance;
            out["delta"] = f.shape.delta;
            out["radius"] = f.shape.radius;
            if (g.format == "json") {
                emit_file(g, "survival.json", out.dump(2) + "\n");
            } else {
                std::ostringstream csv;
                csv << "value,method,num,den,trials,half_width_95\n"
                    << out["value"].get<double>() << ","
                    << (est.exact ? "exact" : "monte_carlo") << "," << est.num << "," << est.den
                    << "," << est.trials << "," << est.half_width_95 << "\n";
                emit_file(g, "survival.csv", csv.str());
            }
            std::cout << "P_f = " << est.value;
            if (est.exact) std::cout << " (" << est.num << "/" << est.den << ")";
            std::cout << "\n";
            return 0;
        }

        // -------------------------------------------------------- eliminate
        if (sc_elim->parsed()) {
            if (el_c5 != -1.0 && (el_c5 <= 0.0 || el_c5 > 1.0))
                return fail_with(g, "validation", "--c5-override must lie in (0, 1]", 2);
            g_resolved["eliminate"] = {{"algo", el_algo.algo}, {"delta", el_algo.delta},
                                       {"radius", el_algo.radius}, {"model", el_algo.model},
                                       {"lift", el_algo.lift}, {"c5_override", el_c5},
                                       {"chain", el_chain}, {"mc", el_mc}};
            emit_resolved(g);
            auto f = build_algo(el_algo);
            if (!f.model.is_discrete())
                return fail_with(g, "validation", "eliminate requires a discrete model", 2);

            bool all_pass = true;
            json steps = json::array();
            mmll::CertifiedAlgorithm cur = f.to_table();
            while (cur.shape.radius >= 1) {
                auto res = mmll::eliminate(cur, el_c5, g.workers);
                auto rep = mmll::verify_matching_certified(res.g, g.workers);
                if (!rep.ok) return fail_with(g, "property", "eliminate output failed verification", 1);
                res.g.status = mmll::CertifiedStatus::verified_exhaustive;
                std::string table_name = "g_r" + std::to_string(res.g.shape.radius) + ".mmca";
                mmll::write_table_file((fs::path(g.out_dir) / table_name).string(), res.g);
                {
                    json profiles = json::array();
                    for (const auto& pr : res.profiles) {
                        json ps = json::array();
                        for (const auto& p : pr.p) ps.push_back(mmll::to_double(p));
                        profiles.push_back({{"p", ps},
                                            {"p_max", mmll::to_double(pr.p_max)},
                                            {"i_max", pr.i_max},
                                            {"comp", mmll::to_double(pr.comp)}});
                    }
                    json arts{{"c5_used", res.c5_used},
                              {"good_bitmap", res.good_bitmap},
                              {"profiles", profiles}};
                    emit_file(g, "artifacts_r" + std::to_string(cur.shape.radius) + ".json",
                              arts.dump(2) + "\n");
                }
                auto report = mmll::audit(cur, mmll::default_delta_grid(), g.workers);
                all_pass = all_pass && report.all_pass;
                emit_file(g, "audit_r" + std::to_string(cur.shape.radius) + ".json",
                          mmll::audit_to_json(report));
                emit_file(g, "audit_r" + std::to_string(cur.shape.radius) + ".csv",
                          mmll::audit_to_csv(report));
                mmll::SurvivalEstimate pg;
                if (el_mc)
                    pg = mmll::survival_probability_mc(res.g, el_trials, mmll::Rng(g.seed, 2), g.workers);
                else
                    pg = mmll::survival_probability_exact(res.g, g.workers);
                steps.push_back({{"radius", res.g.shape.radius},
                                 {"table", table_name},
                                 {"c5_used", res.c5_used},
                                 {"survival", survival_json(pg)},
                                 {"audit_pass", report.all_pass}});
                std::cout << "eliminated to radius " << res.g.shape.radius << ", P_g = " << pg.value
                          << ", audit " << (report.all_pass ? "pass" : "FAIL") << "\n";
                cur = res.g;
                if (!el_chain) break;
            }
            emit_file(g, "eliminate.json", json{{"steps", steps}, {"all_pass", all_pass}}.dump(2) + "\n");
            return all_pass ? 0 : 1;
        }

        // -------------------------------------------------------- graphgen
        if (sc_gen->parsed()) {
            g_resolved["graphgen"] = {{"n", gg_n}, {"delta", gg_delta}, {"girth", gg_girth},
                                      {"max_tries", gg_tries}, {"method", gg_method}};
            emit_resolved(g);
            std::pair<mmll::PortGraph, mmll::InstanceCertificate> out;
            if (gg_method == "reject")
                out = mmll::sample_hard_instance(gg_n, gg_delta, gg_girth, gg_tries, g.seed);
            else
                out = mmll::build_hard_instance(gg_n, gg_delta, gg_girth, gg_tries, g.seed);
            if (gg_spot > 0 && out.first.n >= 20) {
                mmll::Rng rng(g.seed, 0x53504f54ull);
                for (int size : {out.first.n / 2, out.first.n}) {
                    for (int t = 0; t < gg_spot; ++t) {
                        std::vector<int> perm(out.first.n);
                        std::iota(perm.begin(), perm.end(), 0);
                        for (int i = out.first.n - 1; i > 0; --i)
                            std::swap(perm[i], perm[rng.next_below(uint32_t(i + 1))]);
                        perm.resize(size);
                        out.second.subgraph_checks.push_back(mmll::subgraph_size_check(out.first, perm));
                        if (size <= out.first.n / 2)
                            out.second.expansion_checks.push_back(mmll::expansion_check(out.first, perm));
                        if (size == out.first.n) break;  // the full set is deterministic
                    }
                }
            }
            emit_file(g, "graph.txt", mmll::graph_to_text(out.first));
            emit_file(g, "certificate.json", mmll::certificate_to_json(out.second) + "\n");
            std::cout << "generated n=" << out.first.n << " delta=" << out.first.delta << " girth="
                      << (out.second.girth ? std::to_string(*out.second.girth) : "inf")
                      << " method=" << out.second.method << "\n";
            return 0;
        }

        // -------------------------------------------------------- verify
        if (sc_verify->parsed()) {
            g_resolved["verify"] = {{"delta", vf_delta}, {"radius", vf_radius}, {"model", vf_model},
                                    {"samples", vf_samples}, {"significance", vf_significance}};
            emit_resolved(g);
            auto model = parse_model(vf_model);
            std::vector<mmll::EquivalenceResult> results;
            if (model.is_discrete())
                results = mmll::check_equivalences_exact(mmll::Shape(vf_delta, vf_radius), model,
                                                         mmll::splitmix64(g.seed + 1));
            else
                results = mmll::check_equivalences_continuous(mmll::Shape(vf_delta, vf_radius),
                                                              vf_samples, vf_significance, g.seed);
            json arr = json::array();
            int passed = 0;
            std::ostringstream csv;
            csv << "id,exact,lhs,rhs,diff,z,pass\n";
            for (const auto& r : results) {
                passed += r.pass;
                arr.push_back({{"id", r.id}, {"exact", r.exact}, {"lhs", r.lhs}, {"rhs", r.rhs},
                               {"diff", r.diff}, {"z", r.z_stat}, {"pass", r.pass}});
                csv << r.id << "," << r.exact << "," << r.lhs << "," << r.rhs << "," << r.diff
                    << "," << r.z_stat << "," << r.pass << "\n";
                std::cout << (r.pass ? "[pass] " : "[FAIL] ") << r.id
                          << (r.exact ? " diff=" : " z=") << (r.exact ? r.diff : r.z_stat) << "\n";
            }
            if (g.format == "json")
                emit_file(g, "equivalences.json", arr.dump(2) + "\n");
            else
                emit_file(g, "equivalences.csv", csv.str());
            std::cout << passed << "/" << results.size() << " equivalences pass\n";
            return passed == int(results.size()) ? 0 : 1;
        }

        // -------------------------------------------------------- simulate
        if (sc_sim->parsed()) {
            g_resolved["simulate"] = {{"graph", sm_graph}, {"algo", sm_algo.algo},
                                      {"delta", sm_algo.delta}, {"radius", sm_algo.radius},
                                      {"model", sm_algo.model}, {"lift", sm_algo.lift},
                                      {"trials", sm_trials}, {"boundary", sm_boundary}};
            emit_resolved(g);
            std::ifstream is(sm_graph);
            if (!is) return fail_with(g, "io", "cannot read graph file " + sm_graph, 2);
            std::string text((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
            auto graph = mmll::graph_from_text(text);
            sm_algo.delta = graph.delta;
            auto f = build_algo(sm_algo);
            auto policy = sm_boundary == "pad" ? mmll::BoundaryPolicy::pad_virtual
                                               : mmll::BoundaryPolicy::restrict_interior;
            std::vector<double> lambda_grid{graph.n / 20.0, graph.n / 10.0, graph.n / 5.0};
            auto stats =
                mmll::survival_stats(f, graph, sm_trials, g.seed, policy, lambda_grid, g.workers);
            emit_file(g, "outcomes.csv", mmll::outcome_csv(stats));
            if (sm_trace) {
                mmll::TapeAssignment tapes{f.model, mmll::splitmix64(g.seed ^ 1)};
                std::ostringstream views;
                for (size_t e = 0; e < graph.edges.size(); ++e) {
                    try {
                        auto view = mmll::extract_flower_view(graph, int(e), f.shape.radius, tapes,
                                                              policy == mmll::BoundaryPolicy::pad_virtual);
                        mmll::write_binary(views, view.flower);
                    } catch (const mmll::view_error&) {
                    }
                }
                emit_file(g, "views.bin", views.str());
            }
            json conc = json::array();
            bool conc_ok = true;
            for (auto& p : stats.concentration) {
                conc.push_back({{"lambda", p.lambda}, {"empirical", p.empirical},
                                {"bound", p.bound}, {"pass", p.pass}});
                conc_ok = conc_ok && p.pass;
            }
            json summary{{"trials", stats.trials},
                         {"mean_unmatched", stats.mean_unmatched},
                         {"var_unmatched", stats.var_unmatched},
                         {"mean_unmatched_fraction", stats.mean_unmatched_fraction},
                         {"pr_maximal", stats.pr_maximal},
                         {"chi", stats.chi},
                         {"concentration", conc}};
            emit_file(g, "summary.json", summary.dump(2) + "\n");
            std::cout << "mean unmatched fraction = " << stats.mean_unmatched_fraction
                      << ", Pr[maximal] = " << stats.pr_maximal << "\n";
            return conc_ok ? 0 : 1;
        }

        // -------------------------------------------------------- pmf
        if (sc_pmf->parsed()) {
            g_resolved["pmf"] = {{"n", pm_n}, {"k", pm_k}, {"t", pm_t}, {"tail_delta", pm_tail}};
            emit_resolved(g);
            json rows = json::array();
            std::ostringstream csv;
            csv << "t,pmf,exact\n";
            csv.precision(17);
            int lo = pm_t >= 0 ? pm_t : 0;
            int hi = pm_t >= 0 ? pm_t : pm_k / 2;
            for (int t = lo; t <= hi; ++t) {
                double p = mmll::matching_intersection_pmf(pm_n, pm_k, t);
                std::string exact;
                if (pm_n <= 64) exact = mmll::matching_intersection_pmf_exact(pm_n, pm_k, t).str();
                rows.push_back({{"t", t}, {"pmf", p}, {"exact", exact}});
                csv << t << "," << p << "," << exact << "\n";
            }
            json out{{"n", pm_n}, {"k", pm_k}, {"rows", rows}};
            if (pm_tail > 0) {
                auto [up, low] = mmll::matching_tail_bounds(pm_n, pm_k, pm_tail);
                out["tail_upper"] = up;
                out["tail_lower"] = low;
            }
            if (g.format == "json")
                emit_file(g, "pmf.json", out.dump(2) + "\n");
            else
                emit_file(g, "pmf.csv", csv.str());
            std::cout << "pmf rows: " << rows.size() << "\n";
            return 0;
        }
    } catch (const mmll::capacity_error& e) {
        return fail_with(g, "capacity", e.what(), 3, {{"exact_count", e.exact_count}});
    } catch (const mmll::exhaustion_error& e) {
        return fail_with(g, "exhaustion", e.what(), 1,
                         {{"acceptance_rate", e.acceptance_rate}, {"tries", e.tries}});
    } catch (const mmll::validation_error& e) {
        return fail_with(g, "validation", e.what(), 2);
    } catch (const std::exception& e) {
        return fail_with(g, "error", e.what(), 2);
    }
    return 2;
}
