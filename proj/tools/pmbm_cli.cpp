#include "pmbm/pmbm.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace {

struct ModelOptions {
    std::string config_path;
    std::optional<double> clutter_rate;
    std::optional<double> pd;
};

struct ScenarioOptions {
    int scenario_case = 1;
    int targets = 6;
    std::uint64_t seed = 1;
};

void add_model_options(CLI::App* app, ModelOptions& o) {
    app->add_option("--config", o.config_path, "Model configuration (JSON); defaults to the benchmark models");
    app->add_option("--clutter-rate", o.clutter_rate, "Override the mean clutter count per scan");
    app->add_option("--pd", o.pd, "Override the detection probability");
}

void add_scenario_options(CLI::App* app, ScenarioOptions& o) {
    app->add_option("--case", o.scenario_case, "Scenario case")->check(CLI::IsMember({1, 2}));
    app->add_option("--targets", o.targets, "Number of targets")->check(CLI::PositiveNumber);
    app->add_option("--seed", o.seed, "Master seed");
}

pmbm::ModelConfig load_models(const ModelOptions& o) {
    pmbm::ModelConfig cfg = o.config_path.empty() ? pmbm::benchmark_config() : pmbm::load_config(o.config_path);
    if (o.clutter_rate) cfg.clutter.rate = *o.clutter_rate;
    if (o.pd) cfg.measurement.Pd = *o.pd;
    pmbm::validate(cfg);
    return cfg;
}

nlohmann::json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return nlohmann::json::parse(in);
}

void write_json(const nlohmann::json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << j.dump(2) << '\n';
}

/// Runs `emit` against the file at `path`, or stdout when the path is empty.
template <class Emit>
void with_output(const std::string& path, Emit emit) {
    if (path.empty()) {
        emit(std::cout);
        return;
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    emit(out);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Poisson multi-Bernoulli mixture tracking: simulation, filtering and scoring"};
    app.require_subcommand(1);

    ModelOptions models;
    ScenarioOptions scenario;
    std::string filter = "tomb";
    std::string out_path;
    bool timing = false;

    auto* gen = app.add_subcommand("gen", "Simulate a scenario and write its truth and scans");
    add_model_options(gen, models);
    add_scenario_options(gen, scenario);
    std::string truth_path;
    gen->add_option("--out", out_path, "Scans file")->required();
    gen->add_option("--truth", truth_path, "Truth file")->required();

    auto* run = app.add_subcommand("run", "Run one filter over a scenario");
    add_model_options(run, models);
    add_scenario_options(run, scenario);
    std::string scans_in;
    std::string truth_in;
    std::string estimates_path;
    run->add_option("--filter", filter, "tomb, momb or exact")->check(CLI::IsMember({"tomb", "momb", "exact"}));
    run->add_option("--scans", scans_in, "Scans file; simulated from --case/--targets/--seed when absent");
    run->add_option("--truth", truth_in, "Truth file matching --scans");
    run->add_option("--out", out_path, "Results CSV (stdout when absent)");
    run->add_option("--estimates", estimates_path, "Per-scan estimates file");
    run->add_flag("--timing", timing, "Record wall-clock time per scan");

    auto* mc = app.add_subcommand("mc", "Monte Carlo sweep");
    add_model_options(mc, models);
    add_scenario_options(mc, scenario);
    int trials = 10;
    mc->add_option("--filter", filter, "tomb, momb or exact")->check(CLI::IsMember({"tomb", "momb", "exact"}));
    mc->add_option("--trials", trials, "Number of trials")->check(CLI::PositiveNumber);
    mc->add_option("--out", out_path, "Aggregated CSV (stdout when absent)");
    mc->add_flag("--timing", timing, "Record wall-clock time per scan");

    auto* score = app.add_subcommand("ospa", "Score an estimates file against a truth or estimates file");
    std::string lhs;
    std::string rhs;
    pmbm::OspaParams ospa_params;
    score->add_option("estimates", lhs, "Estimates file")->required();
    score->add_option("reference", rhs, "Truth or estimates file")->required();
    score->add_option("--cutoff", ospa_params.c, "OSPA cutoff c");
    score->add_option("--order", ospa_params.p, "OSPA order p");
    score->add_option("--out", out_path, "CSV of scan,ospa (stdout when absent)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*gen) {
            const auto cfg = load_models(models);
            const auto truth = pmbm::gen_scenario(scenario.scenario_case, scenario.targets, cfg.motion, pmbm::derive_seed(scenario.seed, 0));
            const auto scans = pmbm::gen_measurements(truth, cfg.measurement, cfg.clutter, pmbm::derive_seed(scenario.seed, 1));
            write_json(pmbm::scans_to_json(scans), out_path);
            write_json(pmbm::truth_to_json(truth), truth_path);
        } else if (*run) {
            const auto cfg = load_models(models);
            pmbm::Trial trial;
            if (scans_in.empty()) {
                pmbm::ScenarioSpec spec{scenario.scenario_case, scenario.targets, cfg};
                trial = pmbm::make_trial(spec, scenario.seed);
            } else {
                if (truth_in.empty()) throw pmbm::InvalidInputError("--scans needs --truth");
                trial.scans = pmbm::scans_from_json(read_json(scans_in));
                trial.truth = pmbm::truth_from_json(read_json(truth_in));
            }
            pmbm::RunOptions opts;
            opts.timing = timing;
            const auto result = pmbm::run_filter(pmbm::parse_filter_kind(filter), trial.scans, trial.truth, cfg, opts);
            with_output(out_path, [&](std::ostream& os) { pmbm::write_csv(os, result.records); });
            if (!estimates_path.empty()) write_json(pmbm::estimates_to_json(result), estimates_path);
        } else if (*mc) {
            const auto cfg = load_models(models);
            pmbm::ScenarioSpec spec{scenario.scenario_case, scenario.targets, cfg};
            pmbm::RunOptions opts;
            opts.timing = timing;
            const auto result = pmbm::monte_carlo(pmbm::parse_filter_kind(filter), spec, trials, scenario.seed, opts);
            for (const auto& f : result.failures) std::cerr << "warning: " << f << '\n';
            if (result.trials_ok == 0) throw std::runtime_error("every trial failed");
            with_output(out_path, [&](std::ostream& os) { pmbm::write_csv(os, result); });
        } else if (*score) {
            const auto a = pmbm::point_sets_from_json(read_json(lhs));
            const auto b = pmbm::point_sets_from_json(read_json(rhs));
            with_output(out_path, [&](std::ostream& os) {
                os << "scan,ospa\n";
                for (const auto& [scan, points] : a) {
                    std::vector<pmbm::Vector> ref;
                    for (const auto& [s, pts] : b)
                        if (s == scan) ref = pts;
                    os << scan << ',' << pmbm::detail::format_number(pmbm::ospa(points, ref, ospa_params)) << '\n';
                }
            });
        }
    } catch (const pmbm::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const pmbm::CapacityError& e) {
        std::cerr << "capacity error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
