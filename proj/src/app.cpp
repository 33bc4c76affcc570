#include "apfsim/app.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <thread>

#include "apfsim/metrics.hpp"
#include "apfsim/svg_plot.hpp"
#include "apfsim/trace_io.hpp"

namespace apfsim::app {

namespace fs = std::filesystem;

ScenarioConfig resolve_config(const CommonOptions& opt) {
    ScenarioConfig cfg;
    if (!opt.config_path.empty()) {
        cfg = load_scenario(opt.config_path);
    } else {
        validate(cfg);
    }
    if (opt.seed) {
        cfg.seed = *opt.seed;
        validate(cfg);
    }
    return cfg;
}

metrics::EvalWindows eval_windows(const ScenarioConfig& cfg) {
    metrics::EvalWindows e;
    e.settle_start = cfg.settling_time;
    e.q_settle_start = std::max(cfg.settling_time, cfg.converter.apf_on_time + 0.09);
    e.dist_start = cfg.disturbance.start;
    e.dist_end = cfg.disturbance.end;
    e.dist_pad = cfg.control_window + cfg.control_hop;
    e.pre_start = cfg.converter.apf_on_time / 2.0;
    e.pre_end = cfg.converter.apf_on_time;
    e.window_s = cfg.metrics_window;
    e.fundamental_hz = cfg.source.frequency;
    return e;
}

namespace {

std::string summary_text(const ScenarioConfig& cfg, const metrics::CompareRow& row) {
    std::string s;
    s += "strategy: " + row.strategy + "\n";
    char buf[160];
    std::snprintf(buf, sizeof buf, "min PF (disturbance window): %.4f\n", row.min_pf_disturbance);
    s += buf;
    std::snprintf(buf, sizeof buf, "min PF (steady post-APF):    %.4f\n", row.pf_steady);
    s += buf;
    std::snprintf(buf, sizeof buf, "Q excursion in window:       %.2f VA (steady ripple %.2f VA)\n",
                  row.q_excursion, row.q_steady_ripple);
    s += buf;
    std::snprintf(buf, sizeof buf, "mean / max THD post-APF:     %.2f %% / %.2f %%\n",
                  row.mean_thd, row.max_thd);
    s += buf;
    std::snprintf(buf, sizeof buf, "neutral RMS post / pre:      %.4f A / %.4f A\n",
                  row.neutral_rms_post, row.neutral_rms_pre);
    s += buf;
    std::snprintf(buf, sizeof buf, "seed: %llu, dt: %g s, duration: %g s\n",
                  static_cast<unsigned long long>(cfg.seed), cfg.dt, cfg.duration);
    s += buf;
    return s;
}

std::vector<double> phase_column(const std::vector<ThreePhaseSample>& s, int phase) {
    std::vector<double> out(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        out[i] = phase == 0 ? s[i].r : (phase == 1 ? s[i].s : s[i].t);
    }
    return out;
}

void write_plots(const fs::path& dir, const std::string& tag,
                 const plant::SimulationTrace& tr) {
    const auto pf = metrics::power_factor(tr.v_pcc, tr.i_src, 0.02, tr.sample_rate);
    const auto qs = metrics::smoothed_q_norm(tr);
    std::vector<double> pbar(tr.size());
    for (std::size_t i = 0; i < tr.size(); ++i) pbar[i] = tr.source_power[i].p_bar;

    io::write_svg_plot((dir / ("pf_" + tag + ".svg")).string(), "power factor (" + tag + ")",
                       "t [s]", "PF", {{"PF", "#1f6fb2", tr.time, pf}});
    io::write_svg_plot((dir / ("pq_" + tag + ".svg")).string(),
                       "source P and |Q| (" + tag + ")", "t [s]", "[W] / [VA]",
                       {{"P (8 Hz filtered)", "#1f6fb2", tr.time, pbar},
                        {"|Q| (8 Hz filtered)", "#b23a1f", tr.time, qs}});
    io::write_svg_plot((dir / ("source_currents_" + tag + ".svg")).string(),
                       "source currents (" + tag + ")", "t [s]", "[A]",
                       {{"i_R", "#1f6fb2", tr.time, phase_column(tr.i_src, 0)},
                        {"i_S", "#b23a1f", tr.time, phase_column(tr.i_src, 1)},
                        {"i_T", "#3a9a3a", tr.time, phase_column(tr.i_src, 2)}});
}

}  // namespace

int cmd_simulate(const CommonOptions& opt) {
    ScenarioConfig cfg;
    try {
        cfg = resolve_config(opt);
    } catch (const ConfigInvalid& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }
    if (opt.dump_config) {
        std::cout << scenario_to_json_text(cfg);
        return kExitOk;
    }
    try {
        fs::create_directories(opt.out_dir);
        const auto trace = simulate(cfg);
        const auto series = metrics::metrics_series(trace, cfg.source.frequency, cfg.metrics_window);
        const auto row = metrics::evaluate_trace(
            trace, eval_windows(cfg),
            cfg.strategy == control::StrategyKind::EmdHybrid ? "emd_hybrid" : "plain_modified_pq");
        const fs::path dir(opt.out_dir);
        io::write_trace_csv((dir / "trace.csv").string(), trace);
        io::write_metrics_csv((dir / "metrics.csv").string(), series);
        io::write_text_file((dir / "summary.txt").string(), summary_text(cfg, row));
        if (opt.plots) write_plots(dir, row.strategy, trace);
        std::cout << summary_text(cfg, row);
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return kExitRuntime;
    }
}

int cmd_compare(const CommonOptions& opt) {
    ScenarioConfig cfg;
    try {
        cfg = resolve_config(opt);
    } catch (const ConfigInvalid& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }
    if (opt.dump_config) {
        std::cout << scenario_to_json_text(cfg);
        return kExitOk;
    }
    try {
        fs::create_directories(opt.out_dir);
        ScenarioConfig cfg_a = cfg;
        cfg_a.strategy = control::StrategyKind::EmdHybrid;
        ScenarioConfig cfg_b = cfg;
        cfg_b.strategy = control::StrategyKind::PlainModifiedPq;

        plant::SimulationTrace tr_a, tr_b;
        std::exception_ptr err_a, err_b;
        std::thread worker([&] {
            try {
                tr_b = simulate(cfg_b);
            } catch (...) {
                err_b = std::current_exception();
            }
        });
        try {
            tr_a = simulate(cfg_a);
        } catch (...) {
            err_a = std::current_exception();
        }
        worker.join();
        if (err_a) std::rethrow_exception(err_a);
        if (err_b) std::rethrow_exception(err_b);

        const fs::path dir(opt.out_dir);
        io::write_trace_csv((dir / "trace_emd_hybrid.csv").string(), tr_a);
        io::write_trace_csv((dir / "trace_plain_modified_pq.csv").string(), tr_b);
        io::write_metrics_csv((dir / "metrics_emd_hybrid.csv").string(),
                              metrics::metrics_series(tr_a, cfg.source.frequency, cfg.metrics_window));
        io::write_metrics_csv((dir / "metrics_plain_modified_pq.csv").string(),
                              metrics::metrics_series(tr_b, cfg.source.frequency, cfg.metrics_window));

        const auto report = metrics::compare_report(tr_a, tr_b, eval_windows(cfg));
        io::write_text_file((dir / "compare.txt").string(), report.to_text());
        io::write_text_file((dir / "compare.csv").string(), report.to_csv());
        if (opt.plots) {
            write_plots(dir, "emd_hybrid", tr_a);
            write_plots(dir, "plain_modified_pq", tr_b);
        }
        std::cout << report.to_text();
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return kExitRuntime;
    }
}

int cmd_emd(const std::string& input_csv, double sample_rate, const std::string& out_csv) {
    Signal sig;
    try {
        sig = io::read_signal_csv(input_csv, sample_rate);
    } catch (const std::exception& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitConfig;
    }
    try {
        const auto set = emd::decompose(sig);
        io::write_imfs_csv(out_csv, set);
        std::cout << "wrote " << set.imfs.size() << " IMF(s) + residue to " << out_csv << "\n";
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return kExitRuntime;
    }
}

}  // namespace apfsim::app
