// Command-line front end: simulate / infer / predict / intervene /
// calibrate / sweep. Every command is a pure function of (config, seed) at
// the byte level of its outputs; --workers only changes wall time.

#include "kbi/abc.hpp"
#include "kbi/calibrate.hpp"
#include "kbi/csv.hpp"
#include "kbi/errors.hpp"
#include "kbi/intervene.hpp"
#include "kbi/manifest.hpp"
#include "kbi/parallel.hpp"
#include "kbi/predict.hpp"
#include "kbi/synth.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CliArgs {
    std::string config_path;
    std::uint64_t seed = 0;
    unsigned workers = 0;
    std::string out_dir = "out";
};

struct RunFiles {
    std::map<std::string, std::uint64_t> inputs;
    std::map<std::string, std::uint64_t> outputs;

    fs::path track_input(const fs::path& p) {
        inputs[p.string()] = kbi::manifest::hash_file(p);
        return p;
    }
    void track_output(const fs::path& p) { outputs[p.string()] = kbi::manifest::hash_file(p); }
};

json load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw kbi::ConfigError("cannot open config file: " + path);
    json cfg;
    try {
        in >> cfg;
    } catch (const json::exception& e) {
        throw kbi::ConfigError("config " + path + ": " + e.what());
    }
    if (!cfg.is_object()) throw kbi::ConfigError("config " + path + ": not a JSON object");
    return cfg;
}

const json& require_field(const json& cfg, const std::string& key) {
    auto it = cfg.find(key);
    if (it == cfg.end()) throw kbi::ConfigError("config: missing field '" + key + "'");
    return *it;
}

double require_number(const json& cfg, const std::string& key) {
    const auto& v = require_field(cfg, key);
    if (!v.is_number()) throw kbi::ConfigError("config: field '" + key + "' must be a number");
    return v.get<double>();
}

double number_or(const json& cfg, const std::string& key, double fallback) {
    auto it = cfg.find(key);
    if (it == cfg.end()) return fallback;
    if (!it->is_number()) throw kbi::ConfigError("config: field '" + key + "' must be a number");
    return it->get<double>();
}

std::map<std::string, double> parse_multipliers(const json& cfg) {
    std::map<std::string, double> mult;
    auto it = cfg.find("multipliers");
    if (it == cfg.end()) return mult;
    if (!it->is_object()) throw kbi::ConfigError("config: 'multipliers' must be an object");
    for (const auto& [k, v] : it->items()) {
        if (!v.is_number()) throw kbi::ConfigError("config: multiplier '" + k + "' must be a number");
        mult[k] = v.get<double>();
    }
    return mult;
}

kbi::Population load_pop(const json& cfg, RunFiles& files) {
    const auto& spec = require_field(cfg, "population");
    if (spec.is_string())
        return kbi::load_population(files.track_input(spec.get<std::string>()),
                                    parse_multipliers(cfg));
    if (spec.is_object() && spec.contains("grid")) {
        const auto& g = spec.at("grid");
        return kbi::make_grid(static_cast<int>(require_number(g, "side")),
                              static_cast<std::int64_t>(require_number(g, "spins_per_cell")));
    }
    throw kbi::ConfigError("config: 'population' must be a CSV path or {\"grid\": {...}}");
}

kbi::ModelParams parse_params(const json& cfg, const kbi::DimSchema& schema) {
    const auto& p = require_field(cfg, "params");
    kbi::ModelParams mp;
    mp.beta = require_number(p, "beta");
    mp.coupling = require_number(p, "J");
    mp.fields.h0 = number_or(p, "h0", 0.0);
    const auto& h = require_field(p, "h");
    for (const auto& dim : schema.scalar_dims) {
        if (!h.contains(dim)) throw kbi::ConfigError("config: missing field 'h." + dim + "'");
        mp.fields.coef.push_back(h.at(dim).get<double>());
    }
    mp.kernel.bias = require_number(p, "theta0");
    const auto& theta = require_field(p, "theta");
    for (const auto& dim : schema.distance_dims()) {
        if (!theta.contains(dim))
            throw kbi::ConfigError("config: missing field 'theta." + dim + "'");
        mp.kernel.coef.push_back(theta.at(dim).get<double>());
    }
    return mp;
}

kbi::PriorSpec parse_priors(const json& cfg, const kbi::DimSchema& schema) {
    kbi::PriorSpec priors(kbi::ParamLayout::for_schema(schema));
    if (auto it = cfg.find("pins"); it != cfg.end()) {
        if (!it->is_object()) throw kbi::ConfigError("config: 'pins' must be an object");
        for (const auto& [name, v] : it->items()) {
            if (!v.is_number())
                throw kbi::ConfigError("config: pin '" + name + "' must be a number");
            priors.pin(name, v.get<double>());
        }
    }
    if (auto it = cfg.find("priors"); it != cfg.end()) {
        if (!it->is_object()) throw kbi::ConfigError("config: 'priors' must be an object");
        for (const auto& [name, v] : it->items()) {
            if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
                throw kbi::ConfigError("config: prior '" + name + "' must be [lo, hi]");
            priors.range(name, v[0].get<double>(), v[1].get<double>());
        }
    }
    priors.validate();
    return priors;
}

kbi::SamplerConfig parse_sampler(const json& cfg) {
    kbi::SamplerConfig sc;
    sc.sweeps = static_cast<std::int64_t>(number_or(cfg, "sweeps", 2000));
    if (sc.sweeps < 1) throw kbi::ConfigError("config: 'sweeps' must be >= 1");
    if (auto it = cfg.find("init"); it != cfg.end()) {
        const auto mode = it->get<std::string>();
        if (mode == "field")
            sc.init = kbi::SpinInit::field_aligned;
        else if (mode == "random")
            sc.init = kbi::SpinInit::random;
        else
            throw kbi::ConfigError("config: 'init' must be field or random");
    }
    return sc;
}

kbi::Observation load_observation(const json& cfg, const kbi::Population& pop, RunFiles& files) {
    if (auto it = cfg.find("observed"); it != cfg.end())
        return kbi::Observation::from_csv(pop, files.track_input(it->get<std::string>()));
    return kbi::Observation::from_population(pop);
}

kbi::Scenario parse_scenario(const json& cfg) {
    const auto& sc = require_field(cfg, "scenario");
    const auto type = require_field(sc, "type").get<std::string>();
    if (type == "income_redistribution") {
        kbi::IncomeRedistribution s;
        if (sc.contains("dimension")) s.dimension = sc.at("dimension").get<std::string>();
        s.k_low = static_cast<int>(require_number(sc, "k_low"));
        s.k_high = static_cast<int>(require_number(sc, "k_high"));
        return s;
    }
    if (type == "remove_homophily") {
        kbi::RemoveHomophily s;
        const auto& dims = require_field(sc, "dimensions");
        if (!dims.is_array()) throw kbi::ConfigError("config: 'dimensions' must be an array");
        for (const auto& d : dims) s.dimensions.push_back(d.get<std::string>());
        return s;
    }
    if (type == "density_shift") {
        kbi::DensityShift s;
        if (sc.contains("multiplier")) s.multiplier = sc.at("multiplier").get<double>();
        if (sc.contains("delta")) s.delta = sc.at("delta").get<double>();
        return s;
    }
    if (type == "strength_shift") return kbi::StrengthShift{require_number(sc, "multiplier")};
    if (type == "noise_shift") return kbi::NoiseShift{require_number(sc, "beta")};
    if (type == "field_shift")
        return kbi::FieldShift{require_field(sc, "dimension").get<std::string>(),
                               require_number(sc, "delta")};
    if (type == "randomise_links") return kbi::RandomiseLinks{};
    if (type == "pin_spins") {
        kbi::PinSpins s;
        s.unit = require_field(sc, "unit").get<std::string>();
        s.fraction = require_number(sc, "fraction");
        s.value = static_cast<int>(number_or(sc, "value", 1));
        if (auto it = sc.find("exclude_from_summary"); it != sc.end())
            s.exclude_from_summary = it->get<bool>();
        return s;
    }
    throw kbi::ConfigError("config: unknown scenario type '" + type + "'");
}

void write_text(const fs::path& path, const std::string& text, RunFiles& files) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw kbi::DataError("cannot write " + path.string());
    out << text;
    out.close();
    files.track_output(path);
}

void write_json(const fs::path& path, const json& j, RunFiles& files) {
    write_text(path, j.dump(2) + "\n", files);
}

void write_manifest(const CliArgs& args, const std::string& command, const json& cfg,
                    const RunFiles& files) {
    json m;
    m["version"] = kbi::manifest::version;
    m["command"] = command;
    m["seed"] = args.seed;
    m["config"] = cfg;
    json inputs = json::object();
    for (const auto& [p, h] : files.inputs) inputs[p] = kbi::manifest::hex64(h);
    m["inputs"] = inputs;
    json outputs = json::object();
    for (const auto& [p, h] : files.outputs) outputs[p] = kbi::manifest::hex64(h);
    m["outputs"] = outputs;
    std::ofstream out(fs::path(args.out_dir) / "manifest.json", std::ios::binary);
    out << m.dump(2) << "\n";
}

json gaussian_to_json(const kbi::GaussianPosterior& gp, const kbi::DimSchema& schema) {
    json g;
    g["schema"]["scalar_dims"] = schema.scalar_dims;
    g["schema"]["has_spatial"] = schema.has_spatial;
    g["names"] = gp.names();
    g["mean"] = gp.mean();
    const std::size_t d = gp.names().size();
    json cov = json::array();
    for (std::size_t i = 0; i < d; ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < d; ++j) row.push_back(gp.cov()[i * d + j]);
        cov.push_back(row);
    }
    g["cov"] = cov;
    g["template"] = gp.pinned_template();
    return g;
}

kbi::GaussianPosterior gaussian_from_json(const json& g, const kbi::DimSchema& pop_schema) {
    kbi::DimSchema schema;
    schema.scalar_dims = g.at("schema").at("scalar_dims").get<std::vector<std::string>>();
    schema.has_spatial = g.at("schema").at("has_spatial").get<bool>();
    if (schema.scalar_dims != pop_schema.scalar_dims ||
        schema.has_spatial != pop_schema.has_spatial)
        throw kbi::DataError("gaussian file was fitted for a different population schema");
    const auto layout = kbi::ParamLayout::for_schema(schema);
    const auto names = g.at("names").get<std::vector<std::string>>();
    const auto mean = g.at("mean").get<std::vector<double>>();
    const auto tmpl = g.at("template").get<std::vector<double>>();
    std::vector<double> cov;
    for (const auto& row : g.at("cov"))
        for (const auto& v : row) cov.push_back(v.get<double>());
    return kbi::GaussianPosterior(layout, names, tmpl, mean, cov);
}

// -------------------------------------------------------------------------

void cmd_simulate(const CliArgs& args, const json& cfg) {
    RunFiles files;
    const auto pop = load_pop(cfg, files);
    const auto dt = kbi::standardise(kbi::raw_distances(pop));
    const auto mp = parse_params(cfg, pop.schema());
    const auto sampler = parse_sampler(cfg);
    kbi::GlauberOptions opt;
    opt.sweeps = sampler.sweeps;
    opt.init = sampler.init;

    const fs::path out(args.out_dir);
    if (require_field(cfg, "population").is_object()) {
        kbi::save_population(pop, out / "population.csv");
        files.track_output(out / "population.csv");
    }
    const auto summary = kbi::generate_snapshot(pop, dt, mp, opt, args.seed, 0);
    kbi::save_summary(summary, pop, out / "summary.csv");
    files.track_output(out / "summary.csv");

    if (cfg.value("emit_edges", false)) {
        auto graph_rng = kbi::derive_stream(args.seed, 0, kbi::sub::graph);
        const auto g = kbi::sample_graph(pop, dt, mp.kernel, graph_rng);
        kbi::write_edge_list(g, out / "edges.txt");
        files.track_output(out / "edges.txt");
    }
    write_manifest(args, "simulate", cfg, files);
}

void cmd_infer(const CliArgs& args, const json& cfg) {
    RunFiles files;
    const auto pop = load_pop(cfg, files);
    const auto dt = kbi::standardise(kbi::raw_distances(pop));
    const auto priors = parse_priors(cfg, pop.schema());
    const auto observed = load_observation(cfg, pop, files);
    const auto sampler = parse_sampler(cfg);
    const auto budget = static_cast<std::uint64_t>(number_or(cfg, "budget", 50000));
    const auto keep = static_cast<std::uint64_t>(number_or(cfg, "keep", 500));

    const auto ps =
        kbi::run_abc(pop, dt, priors, observed, budget, keep, sampler, args.seed, args.workers);

    const fs::path out(args.out_dir);
    kbi::save_posterior(ps, out / "posterior.csv");
    files.track_output(out / "posterior.csv");

    const int bins = static_cast<int>(number_or(cfg, "bins", 30));
    if (!ps.free_names.empty()) {
        const auto hists = kbi::marginal_histograms(ps, bins);
        std::string hist_csv = "param,bin_lo,bin_hi,count\n";
        std::string kde_csv = "param,x,density\n";
        for (const auto& h : hists) {
            for (std::size_t b = 0; b < h.counts.size(); ++b)
                hist_csv += h.name + "," + kbi::csv::format_double(h.edges[b]) + "," +
                            kbi::csv::format_double(h.edges[b + 1]) + "," +
                            std::to_string(h.counts[b]) + "\n";
            for (std::size_t i = 0; i < h.kde_x.size(); ++i)
                kde_csv += h.name + "," + kbi::csv::format_double(h.kde_x[i]) + "," +
                           kbi::csv::format_double(h.kde_y[i]) + "\n";
        }
        write_text(out / "marginals_hist.csv", hist_csv, files);
        write_text(out / "marginals_kde.csv", kde_csv, files);

        if (ps.samples.size() >= 2) {
            const auto gp = kbi::gaussian_fit(ps);
            write_json(out / "gaussian.json", gaussian_to_json(gp, pop.schema()), files);
        }
    }
    write_manifest(args, "infer", cfg, files);
    std::printf("infer: budget=%llu kept=%zu min_eta=%s\n",
                static_cast<unsigned long long>(budget), ps.samples.size(),
                kbi::csv::format_double(ps.samples.front().eta).c_str());
}

void cmd_predict(const CliArgs& args, const json& cfg) {
    RunFiles files;
    const auto pop = load_pop(cfg, files);
    const auto dt = kbi::standardise(kbi::raw_distances(pop));
    const auto priors = parse_priors(cfg, pop.schema());
    const auto observed = load_observation(cfg, pop, files);
    const auto split =
        kbi::load_split(files.track_input(require_field(cfg, "split").get<std::string>()));
    if (split.train_ids.empty()) throw kbi::DataError("split: empty training set");
    if (split.test_ids.empty()) throw kbi::DataError("split: empty test set");
    const auto sampler = parse_sampler(cfg);

    const auto train_obs = observed.subset(pop, split.train_ids);
    const auto test_obs = observed.subset(pop, split.test_ids);

    const auto budget = static_cast<std::uint64_t>(number_or(cfg, "budget", 50000));
    const auto keep = static_cast<std::uint64_t>(number_or(cfg, "keep", 500));
    const auto T = static_cast<int>(number_or(cfg, "T", 100));
    const auto reps = static_cast<int>(number_or(cfg, "reps", 1));

    const auto ps =
        kbi::run_abc(pop, dt, priors, train_obs, budget, keep, sampler, args.seed, args.workers);
    const fs::path out(args.out_dir);
    kbi::save_posterior(ps, out / "posterior.csv");
    files.track_output(out / "posterior.csv");

    const auto result =
        kbi::predict(pop, dt, ps, test_obs, T, reps, sampler, args.seed + 1, args.workers);

    std::string pred_csv = "unit_id,S_pred_mean,S_pred_std,S_true\n";
    for (const auto& u : result.units) {
        pred_csv += u.id + "," + kbi::csv::format_double(u.mean) + "," +
                    kbi::csv::format_double(u.stddev) + ",";
        if (u.truth) pred_csv += kbi::csv::format_double(*u.truth);
        pred_csv += "\n";
    }
    write_text(out / "predictions.csv", pred_csv, files);

    json metrics;
    metrics["simulations"] = result.simulations;
    if (std::isfinite(result.mean_test_distance)) {
        metrics["mean_test_distance"] = result.mean_test_distance;
        metrics["sem"] = result.sem;
        metrics["null_distance"] = kbi::null_test_distance(test_obs, null_prediction(train_obs));
    }
    metrics["train_eta_threshold"] = ps.samples[static_cast<std::size_t>(T - 1)].eta;
    write_json(out / "metrics.json", metrics, files);
    write_manifest(args, "predict", cfg, files);
}

void cmd_intervene(const CliArgs& args, const json& cfg) {
    RunFiles files;
    const auto pop = load_pop(cfg, files);
    const auto dt = kbi::standardise(kbi::raw_distances(pop));
    const auto scenario = parse_scenario(cfg);
    const auto sampler = parse_sampler(cfg);
    const auto reps = static_cast<int>(number_or(cfg, "reps", 100));

    std::ifstream gin(files.track_input(require_field(cfg, "gaussian").get<std::string>()));
    if (!gin) throw kbi::DataError("cannot open gaussian file");
    json gj;
    gin >> gj;
    const auto gp = gaussian_from_json(gj, pop.schema());

    const auto result =
        kbi::run_scenario(pop, dt, gp, scenario, reps, sampler, args.seed, args.workers);

    const fs::path out(args.out_dir);
    std::string outcomes = "rep,unit_id,S_base,S_scenario\n";
    for (std::size_t r = 0; r < result.outcomes_base.size(); ++r)
        for (std::size_t k = 0; k < result.reported_site_ids.size(); ++k)
            outcomes += std::to_string(r) + "," + result.reported_site_ids[k] + "," +
                        kbi::csv::format_double(result.outcomes_base[r][k]) + "," +
                        kbi::csv::format_double(result.outcomes_scenario[r][k]) + "\n";
    write_text(out / "outcomes.csv", outcomes, files);

    // pooled outcome histogram over [0,1]
    const int hb = 20;
    std::vector<std::int64_t> base_counts(hb, 0), scen_counts(hb, 0);
    auto bin_of = [&](double v) {
        auto b = static_cast<int>(v * hb);
        return static_cast<std::size_t>(std::clamp(b, 0, hb - 1));
    };
    for (std::size_t r = 0; r < result.outcomes_base.size(); ++r)
        for (std::size_t k = 0; k < result.reported_site_ids.size(); ++k) {
            ++base_counts[bin_of(result.outcomes_base[r][k])];
            ++scen_counts[bin_of(result.outcomes_scenario[r][k])];
        }
    std::string hist = "bin_lo,bin_hi,count_base,count_scenario\n";
    for (int b = 0; b < hb; ++b)
        hist += kbi::csv::format_double(static_cast<double>(b) / hb) + "," +
                kbi::csv::format_double(static_cast<double>(b + 1) / hb) + "," +
                std::to_string(base_counts[static_cast<std::size_t>(b)]) + "," +
                std::to_string(scen_counts[static_cast<std::size_t>(b)]) + "\n";
    write_text(out / "outcome_hist.csv", hist, files);

    json summary;
    summary["polarisation_base"] = result.polarisation_base;
    summary["polarisation_scenario"] = result.polarisation_scenario;
    summary["reps"] = reps;
    write_json(out / "summary.json", summary, files);
    write_manifest(args, "intervene", cfg, files);
    std::printf("intervene: polarisation %s -> %s\n",
                kbi::csv::format_double(result.polarisation_base).c_str(),
                kbi::csv::format_double(result.polarisation_scenario).c_str());
}

void cmd_calibrate(const CliArgs& args, const json& cfg) {
    RunFiles files;
    const auto pop = load_pop(cfg, files);
    const auto& dims_json = require_field(cfg, "dims");
    if (!dims_json.is_array()) throw kbi::ConfigError("config: 'dims' must be an array");
    std::vector<std::string> dims;
    for (const auto& d : dims_json) dims.push_back(d.get<std::string>());
    const bool weighted = cfg.value("weighted", false);

    const auto fit = kbi::ols(pop, dims, weighted);
    std::string csv = "dimension,coefficient\n";
    csv += "intercept," + kbi::csv::format_double(fit.intercept) + "\n";
    for (std::size_t k = 0; k < fit.dims.size(); ++k)
        csv += fit.dims[k] + "," + kbi::csv::format_double(fit.coef[k]) + "\n";
    write_text(fs::path(args.out_dir) / "ols.csv", csv, files);
    write_manifest(args, "calibrate", cfg, files);
}

void cmd_sweep(const CliArgs& args, const json& cfg) {
    RunFiles files;
    const auto pop = load_pop(cfg, files);
    const auto dt = kbi::standardise(kbi::raw_distances(pop));
    const auto mp = parse_params(cfg, pop.schema());
    const auto sampler = parse_sampler(cfg);
    kbi::GlauberOptions opt;
    opt.sweeps = sampler.sweeps;
    opt.init = sampler.init;

    std::vector<double> betas;
    const auto& b = require_field(cfg, "betas");
    if (b.is_array()) {
        for (const auto& v : b) betas.push_back(v.get<double>());
    } else if (b.is_object()) {
        const double from = require_number(b, "from");
        const double to = require_number(b, "to");
        const int steps = static_cast<int>(require_number(b, "steps"));
        if (steps < 2) throw kbi::ConfigError("config: 'betas.steps' must be >= 2");
        for (int i = 0; i < steps; ++i)
            betas.push_back(from + (to - from) * i / (steps - 1));
    } else {
        throw kbi::ConfigError("config: 'betas' must be an array or {from,to,steps}");
    }
    const int reps = static_cast<int>(number_or(cfg, "reps", 10));

    const auto curve =
        kbi::magnetisation_sweep(pop, dt, mp, betas, reps, opt, args.seed, args.workers);
    std::string csv = "beta,mean_abs_m\n";
    for (const auto& pt : curve)
        csv += kbi::csv::format_double(pt.beta) + "," + kbi::csv::format_double(pt.mean_abs_m) +
               "\n";
    write_text(fs::path(args.out_dir) / "magnetisation.csv", csv, files);
    write_manifest(args, "sweep", cfg, files);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"kernel-Blau-Ising simulation and snapshot inference toolkit"};
    app.require_subcommand(1);

    CliArgs args;
    std::map<std::string, std::function<void(const CliArgs&, const json&)>> handlers{
        {"simulate", cmd_simulate}, {"infer", cmd_infer},         {"predict", cmd_predict},
        {"intervene", cmd_intervene}, {"calibrate", cmd_calibrate}, {"sweep", cmd_sweep},
    };
    const std::map<std::string, std::string> blurbs{
        {"simulate", "generate a snapshot from explicit parameters"},
        {"infer", "ABC rejection inference from an observed snapshot"},
        {"predict", "train on observed units, predict held-out units"},
        {"intervene", "counterfactual scenarios from a fitted posterior"},
        {"calibrate", "linear regression of outcomes on coordinates"},
        {"sweep", "magnetisation vs inverse temperature"},
    };
    for (const auto& [name, blurb] : blurbs) {
        auto* sub = app.add_subcommand(name, blurb);
        sub->add_option("--config", args.config_path, "JSON config file")->required();
        sub->add_option("--seed", args.seed, "master RNG seed");
        sub->add_option("--workers", args.workers, "worker threads (0 = hardware)");
        sub->add_option("--out", args.out_dir, "output directory");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        app.exit(e);
        return 2;
    }

    try {
        const auto cfg = load_config(args.config_path);
        std::filesystem::create_directories(args.out_dir);
        handlers.at(app.get_subcommands().front()->get_name())(args, cfg);
        return 0;
    } catch (const kbi::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const kbi::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return 4;
    }
}
