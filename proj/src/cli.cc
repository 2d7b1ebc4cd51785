// Copyright 2026 nestmatch Contributors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "nestmatch/cli.h"

#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "nestmatch/analysis.h"
#include "nestmatch/io.h"
#include "nestmatch/matcher.h"
#include "nestmatch/oracle.h"
#include "nestmatch/parallel.h"

namespace nm {
namespace {

constexpr const char* kFormats = R"(Files:
  events.csv    ball_id,t
  matching.csv  event_a,event_b,weight   (event_b = BOUNDARY for boundary matches;
                                          events are 0-based rows of events.csv)
  duals.json    {"singleton_y": [...], "blossoms": [{"members": [...], "y": ...}]}
  metrics.csv   round,events,mean_backlog,max_backlog,stalls,messages,repairs,spills
  histogram.csv size,count
  fit.json      {"A_fit", "x_fit", "r2", "points"}
  scaling.csv   L,events,seconds,seconds_per_event
  dense.csv     n,seconds
Numbers use '.' as decimal separator and 17 significant digits.
Exit codes: 0 success, 1 usage or input error, 2 invariant or certificate failure.)";

std::ofstream open_out(const std::string& dir, const std::string& name) {
    std::filesystem::create_directories(dir);
    std::ofstream out(std::filesystem::path(dir) / name);
    if (!out) throw FormatError("cannot write " + (std::filesystem::path(dir) / name).string());
    return out;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open " + path);
    return in;
}

void write_run_config(const RunConfig& config) {
    LatticeSpec spec = config.lattice;
    spec.seed = config.seed;
    open_out(config.out_dir, "config.json") << lattice_config_json(spec);
}

int report(const Certificate& cert, std::ostream& log) {
    log << certificate_line(cert) << '\n';
    if (!cert.valid)
        for (const std::string& d : cert.diagnostics) log << "  " << d << '\n';
    return cert.valid ? kExitOk : kExitInvariant;
}

int match_and_write(const Nest& nest, const std::vector<DetectionEvent>& events, const RunConfig& config,
                    std::ostream& log) {
    MatchResult result = match_all(nest, events);
    {
        auto out = open_out(config.out_dir, "matching.csv");
        write_matching_csv(out, result.matching);
    }
    {
        auto out = open_out(config.out_dir, "duals.json");
        write_duals_json(out, result.duals);
    }
    Certificate cert = check_certificate(result.matching, result.duals, nest, events);
    open_out(config.out_dir, "certificate.txt") << certificate_line(cert) << '\n';
    return report(cert, log);
}

}  // namespace

int cmd_simulate(const RunConfig& config, std::ostream& log) {
    Nest nest = Nest::lattice(config.lattice);
    std::vector<DetectionEvent> events = detection_events(nest, sample_errors(nest, config.seed));
    write_run_config(config);
    {
        auto out = open_out(config.out_dir, "events.csv");
        write_events_csv(out, events);
    }
    log << "events=" << events.size() << '\n';
    return match_and_write(nest, events, config, log);
}

int cmd_match(const RunConfig& config, std::ostream& log) {
    Nest nest = Nest::lattice(config.lattice);
    auto in = open_in(config.events_path);
    std::vector<DetectionEvent> events = read_events_csv(in);
    for (const DetectionEvent& e : events)
        if (e.ball >= nest.num_balls()) throw FormatError("event ball " + std::to_string(e.ball) + " is not in the nest");
    return match_and_write(nest, events, config, log);
}

int cmd_verify(const RunConfig& config, std::ostream& log) {
    Nest nest = Nest::lattice(config.lattice);
    auto ev_in = open_in(config.events_path);
    auto m_in = open_in(config.matching_path);
    auto d_in = open_in(config.duals_path);
    std::vector<DetectionEvent> events = read_events_csv(ev_in);
    for (const DetectionEvent& e : events)
        if (e.ball >= nest.num_balls()) throw FormatError("event ball " + std::to_string(e.ball) + " is not in the nest");
    Matching matching = read_matching_csv(m_in);
    DualState duals = read_duals_json(d_in);
    if (duals.singleton_y.size() != events.size())
        throw FormatError("duals list " + std::to_string(duals.singleton_y.size()) + " singletons for " +
                          std::to_string(events.size()) + " events");
    return report(check_certificate(matching, duals, nest, events), log);
}

int cmd_parallel_sim(const RunConfig& config, std::ostream& log) {
    GridConfig grid;
    grid.grid_l = config.grid_l;
    grid.patch_n = config.patch_n;
    grid.history_window = config.history_window;
    auto side = static_cast<std::uint32_t>(std::llround(std::sqrt(static_cast<double>(config.patch_n))));
    if (side * side != config.patch_n) throw ConfigError("--patch-n must be a perfect square");
    LatticeSpec spec = config.lattice;
    spec.lx = spec.ly = config.grid_l * side;
    Nest nest = Nest::lattice(spec);
    std::vector<DetectionEvent> events = detection_events(nest, sample_errors(nest, config.seed));
    if (config.burst_round)
        events = inject_burst(nest, events, *config.burst_round, config.burst_width, config.burst_p,
                              derive_seed(config.seed, 1));
    ParallelResult result = run_parallel(nest, events, grid, config.seed);
    RunConfig effective = config;
    effective.lattice = spec;
    write_run_config(effective);
    {
        auto out = open_out(config.out_dir, "metrics.csv");
        write_metrics_csv(out, result.metrics);
    }
    {
        auto out = open_out(config.out_dir, "matching.csv");
        write_matching_csv(out, result.matching);
    }
    double max_backlog = 0;
    for (const RoundMetrics& m : result.metrics) max_backlog = std::max(max_backlog, m.max_backlog);
    log << "events=" << events.size() << " weight=" << format_double(result.matching.total_weight)
        << " t_c=" << format_double(result.t_c) << " t_q=" << format_double(result.t_q)
        << " max_backlog=" << format_double(max_backlog) << " drain=" << format_double(result.drain_time)
        << " idle=" << format_double(result.idle_fraction) << " local=" << result.local_items
        << " neighborhood=" << result.neighborhood_items << " spanning=" << result.spanning_items
        << " repairs=" << result.repairs << '\n';
    if (config.burst_round) {
        auto back = catch_up_rounds(result.metrics, *config.burst_round, config.burst_width);
        log << "catch_up_rounds=" << (back ? std::to_string(*back) : std::string("none")) << '\n';
    }
    if (events.size() <= config.certify_limit) {
        MatchResult serial = match_all(nest, events);
        if (serial.matching != result.matching) {
            log << "parallel matching differs from the serial matching\n";
            return kExitInvariant;
        }
        return report(check_certificate(serial.matching, serial.duals, nest, events), log);
    }
    return kExitOk;
}

int cmd_analyze(const RunConfig& config, std::ostream& log) {
    Nest nest = Nest::lattice(config.lattice);
    ClusterHistogram hist = cluster_stats(nest, config.p, config.trials, config.seed);
    {
        auto out = open_out(config.out_dir, "histogram.csv");
        write_histogram_csv(out, hist);
    }
    {
        auto out = open_out(config.out_dir, "fit.json");
        write_fit_json(out, hist.fit);
    }
    write_run_config(config);
    log << "A_fit=" << format_double(hist.fit.A) << " x_fit=" << format_double(hist.fit.x)
        << " r2=" << format_double(hist.fit.r2) << " points=" << hist.fit.points;
    // The chain bound is stated per starting ball, the fit per sample.
    const double a_ball = hist.fit.A / static_cast<double>(std::max<std::size_t>(nest.num_balls(), 1));
    log << " A_per_ball=" << format_double(a_ball);
    if (nest.num_sticks() == 0) {
        log << " n_av=undefined\n";
        return kExitOk;
    }
    NavParams params{a_ball, hist.fit.x, static_cast<double>(nest.params().b_max),
                     static_cast<double>(compute_R(nest))};
    log << " R=" << params.R;
    try {
        validate_nav_params(params);
        log << " n_av=" << format_double(compute_nav(params)) << '\n';
    } catch (const std::domain_error&) {
        log << " n_av=divergent\n";
    }
    return kExitOk;
}

int cmd_bench(const RunConfig& config, std::ostream& log) {
    ScalingConfig sc;
    sc.sizes = config.sizes;
    sc.p = config.p;
    sc.min_events = config.min_events;
    sc.seed = config.seed;
    ScalingResult result = runtime_scaling(sc);
    {
        auto out = open_out(config.out_dir, "scaling.csv");
        write_scaling_csv(out, result.rows);
    }
    log << "per_event_ratio=" << format_double(result.ratio) << '\n';
    if (!config.dense_sizes.empty()) {
        auto rows = dense_scaling(config.dense_sizes, 3, config.seed);
        auto out = open_out(config.out_dir, "dense.csv");
        out << "n,seconds\n";
        for (const DenseRow& r : rows) out << r.n << ',' << format_double(r.seconds) << '\n';
        log << "dense_loglog_slope=" << format_double(loglog_slope(rows)) << '\n';
    }
    return kExitOk;
}

int run_cli(int argc, char** argv) {
    CLI::App app{"Boundary-aware minimum-weight perfect matching over space-time nests"};
    app.footer(kFormats);
    app.require_subcommand(1);

    RunConfig config;
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::uint32_t size = 8, rounds = 8;
    double p = 0.005;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "lattice config JSON")->check(CLI::ExistingFile);
        sub->add_option("--seed", seed, "master seed (default: the config's seed)");
        sub->add_option("--out", config.out_dir, "output directory")->capture_default_str();
        sub->add_option("--size", size, "lattice side when no config is given")->capture_default_str();
        sub->add_option("--rounds", rounds, "rounds when no config is given")->capture_default_str();
        sub->add_option("--p", p, "stick probability when no config is given")->capture_default_str();
    };

    auto* simulate = app.add_subcommand("simulate", "sample errors, match them and certify the result");
    common(simulate);
    auto* match = app.add_subcommand("match", "match an events file and certify the result");
    common(match);
    match->add_option("--events", config.events_path, "events CSV")->required()->check(CLI::ExistingFile);
    auto* verify = app.add_subcommand("verify", "check a matching and dual dump for optimality");
    common(verify);
    verify->add_option("--events", config.events_path, "events CSV")->required()->check(CLI::ExistingFile);
    verify->add_option("--matching", config.matching_path, "matching CSV")->required()->check(CLI::ExistingFile);
    verify->add_option("--duals", config.duals_path, "duals JSON")->required()->check(CLI::ExistingFile);

    auto* psim = app.add_subcommand("parallel-sim", "simulate the patch-processor grid on a live stream");
    psim->add_option("--config", config_path, "lattice config JSON (stick classes)")->check(CLI::ExistingFile);
    psim->add_option("--seed", seed, "master seed");
    psim->add_option("--out", config.out_dir, "output directory")->capture_default_str();
    psim->add_option("--grid-l", config.grid_l, "patches per side")->capture_default_str()->check(CLI::PositiveNumber);
    psim->add_option("--patch-n", config.patch_n, "balls per patch per round (a square)")->capture_default_str();
    psim->add_option("--rounds", rounds, "rounds to simulate")->capture_default_str();
    psim->add_option("--p", p, "stick probability")->capture_default_str();
    psim->add_option("--history-window", config.history_window, "rounds kept in local memory")->capture_default_str();
    psim->add_option("--burst-round", config.burst_round, "first round of an injected dense burst");
    psim->add_option("--burst-width", config.burst_width, "rounds covered by the burst")->capture_default_str();
    psim->add_option("--burst-p", config.burst_p, "stick probability inside the burst")->capture_default_str();
    psim->add_option("--certify-limit", config.certify_limit, "largest stream also checked against the serial matcher")
        ->capture_default_str();

    auto* analyze = app.add_subcommand("analyze", "cluster-size histogram and exponential fit");
    common(analyze);
    analyze->add_option("--trials", config.trials, "independent samples")->capture_default_str();

    auto* bench = app.add_subcommand("bench", "matching time per event across lattice sizes");
    bench->add_option("--seed", seed, "master seed");
    bench->add_option("--out", config.out_dir, "output directory")->capture_default_str();
    bench->add_option("--sizes", config.sizes, "lattice sides")->capture_default_str();
    bench->add_option("--p", p, "stick probability")->capture_default_str();
    bench->add_option("--min-events", config.min_events, "events matched per size")->capture_default_str();
    bench->add_option("--dense-sizes", config.dense_sizes, "event counts of the dense suite");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (analyze->parsed()) {
            if (!analyze->count("--size")) size = 32;
            if (!analyze->count("--rounds")) rounds = 32;
            if (!analyze->count("--p")) p = 0.001;
        }
        if (!config_path.empty()) config.lattice = load_lattice_config(config_path);
        else config.lattice = surface_code_like_spec(size, size, rounds, p);
        if (psim->parsed()) {
            if (config_path.empty()) config.lattice = surface_code_like_spec(1, 1, rounds, p);
            config.lattice.rounds = rounds;
        }
        // --p 0 means an error-free lattice: no stick can fire, so none is built.
        if (config_path.empty() && p == 0) config.lattice.stick_classes.clear();
        config.seed = seed.value_or(config.lattice.seed);
        config.p = p;

        std::ostream& log = std::cout;
        if (simulate->parsed()) return cmd_simulate(config, log);
        if (match->parsed()) return cmd_match(config, log);
        if (verify->parsed()) return cmd_verify(config, log);
        if (psim->parsed()) return cmd_parallel_sim(config, log);
        if (analyze->parsed()) return cmd_analyze(config, log);
        if (bench->parsed()) return cmd_bench(config, log);
    } catch (const FormatError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::out_of_range& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    return kExitUsage;
}

}  // namespace nm
