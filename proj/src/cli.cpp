#include "covtest/cli.hpp"

#include <chrono>
#include <filesystem>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>
#include <omp.h>

#include "covtest/changemap.hpp"
#include "covtest/detect.hpp"
#include "covtest/errors.hpp"
#include "covtest/io.hpp"
#include "covtest/montecarlo.hpp"
#include "covtest/rmt.hpp"

namespace covtest::cli {

namespace {

namespace fs = std::filesystem;

class UsageError : public Error {
public:
    using Error::Error;
};

// Config files are flat JSON objects whose keys are long option names. Entries
// are turned into arguments and appended unless the same option is already
// present on the command line, so flags always win.
std::vector<std::string> merge_config(const std::vector<std::string>& args) {
    std::optional<std::string> config_path;
    for (std::size_t i = 1; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            config_path = args[i + 1];
        } else if (args[i].rfind("--config=", 0) == 0) {
            config_path = args[i].substr(9);
        }
    }
    if (!config_path) {
        return args;
    }
    const nlohmann::json config = io::read_json(*config_path);
    if (!config.is_object()) {
        throw UsageError("config file must hold a JSON object");
    }
    auto present = [&](const std::string& flag) {
        for (const auto& a : args) {
            if (a == flag || a.rfind(flag + "=", 0) == 0) {
                return true;
            }
        }
        return false;
    };
    auto scalar = [](const nlohmann::json& v) -> std::string {
        if (v.is_string()) {
            return v.get<std::string>();
        }
        if (v.is_number_integer()) {
            return std::to_string(v.get<long long>());
        }
        if (v.is_number()) {
            std::ostringstream s;
            s << std::setprecision(17) << v.get<double>();
            return s.str();
        }
        throw UsageError("config values must be strings, numbers, booleans or arrays of those");
    };
    std::vector<std::string> merged = args;
    for (const auto& [key, value] : config.items()) {
        const std::string flag = "--" + key;
        if (key == "config" || present(flag)) {
            continue;
        }
        if (value.is_boolean()) {
            if (value.get<bool>()) {
                merged.push_back(flag);
            }
        } else if (value.is_array()) {
            merged.push_back(flag);
            for (const auto& item : value) {
                merged.push_back(scalar(item));
            }
        } else {
            merged.push_back(flag);
            merged.push_back(scalar(value));
        }
    }
    return merged;
}

struct Common {
    std::string config;
    std::uint64_t seed = 0;
    int threads = 0;
    bool serial = false;
    std::string out;

    Execution exec() const { return serial ? Execution::serial : Execution::parallel; }
};

void add_common(CLI::App* sub, Common& c, bool with_out = true) {
    sub->add_option("--config", c.config, "JSON file of option values (flags override it)");
    sub->add_option("--seed", c.seed, "Random seed")->capture_default_str();
    sub->add_option("--threads", c.threads, "OpenMP thread count (0 keeps the default)");
    sub->add_flag("--serial", c.serial, "Use the serial reference path");
    if (with_out) {
        sub->add_option("--out", c.out, "Output path");
    }
}

void apply_threads(const Common& c) {
    if (c.threads > 0) {
        omp_set_num_threads(c.threads);
    }
}

void override_groups(ScenarioPair& pair, std::optional<int> n, std::optional<int> groups) {
    for (ScenarioPreset* p : {&pair.h0, &pair.h1}) {
        if (groups) {
            if (*groups < 2) {
                throw UsageError("--L must be at least 2");
            }
            const Eigen::Index old = p->angles.cols();
            RMatrix angles(p->angles.rows(), *groups);
            RMatrix strengths(p->strengths.rows(), *groups);
            for (int g = 0; g < *groups; ++g) {
                const Eigen::Index src = std::min<Eigen::Index>(g, old - 1);
                angles.col(g) = p->angles.col(src);
                strengths.col(g) = p->strengths.col(src);
            }
            p->angles = angles;
            p->strengths = strengths;
            p->dims.N.resize(static_cast<std::size_t>(*groups), p->dims.N.front());
        }
        if (n) {
            std::fill(p->dims.N.begin(), p->dims.N.end(), *n);
        }
        p->validate();
    }
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void emit_table(const std::vector<RateEntry>& rows, const nlohmann::json& details, const Common& c,
                std::ostream& out) {
    const std::string csv = rates_to_csv(rows);
    if (c.out.empty()) {
        out << csv;
        return;
    }
    io::write_text(c.out, csv);
    fs::path json_path = c.out;
    json_path.replace_extension(".json");
    io::write_text(json_path, details.dump(2) + "\n");
}

void emit_json(const nlohmann::json& j, const Common& c, std::ostream& out) {
    if (c.out.empty()) {
        out << j.dump(2) << '\n';
    } else {
        io::write_text(c.out, j.dump(2) + "\n");
    }
}

const std::vector<double> kTableAlphas{0.005, 0.01, 0.02, 0.05, 0.1};

int map_exception(std::ostream& err) {
    try {
        throw;
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const DomainError& e) {
        err << "invalid parameter: " << e.what() << '\n';
        return kExitUsage;
    } catch (const ShapeError& e) {
        err << "data error: " << e.what() << '\n';
        return kExitData;
    } catch (const DataError& e) {
        err << "data error: " << e.what() << '\n';
        return kExitData;
    } catch (const DegenerateSpike& e) {
        err << "numeric degeneracy: " << e.what() << '\n';
        return kExitNumeric;
    } catch (const Error& e) {
        err << "numeric error: " << e.what() << '\n';
        return kExitNumeric;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return kExitInternal;
    }
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
    try {
        const std::vector<std::string> args = merge_config(raw_args);

        CLI::App app{"Change detection between covariance matrices of high-dimensional low-rank signals"};
        app.require_subcommand(1);
        app.set_help_all_flag("--help-all", "Show help for every subcommand");
        Common common;

        // simulate-type1
        auto* type1 = app.add_subcommand("simulate-type1", "Type-I error of the Wishart test");
        std::string t1_scenario = "type1";
        std::string layout = "orthogonal";
        std::vector<int> t1_M{100};
        std::optional<int> n_override;
        std::optional<int> l_override;
        double sigma2 = kDefaultSigma2;
        std::vector<double> alphas = kTableAlphas;
        std::size_t t1_trials = 10'000;
        std::size_t quantile_samples = kDefaultQuantileSamples;
        type1->add_option("--scenario", t1_scenario, "type1, subspace or eigenvalue (null preset)")->capture_default_str();
        type1->add_option("--layout", layout, "Second-spike layout: orthogonal, offset, collinear")->capture_default_str();
        type1->add_option("--M", t1_M, "Dimensions")->capture_default_str();
        type1->add_option("--N", n_override, "Samples per group (overrides the preset)");
        type1->add_option("--L", l_override, "Number of groups (overrides the preset)");
        type1->add_option("--sigma2", sigma2, "Noise variance")->capture_default_str();
        type1->add_option("--alpha", alphas, "Nominal levels")->capture_default_str();
        type1->add_option("--trials", t1_trials, "Monte-Carlo trials")->capture_default_str();
        type1->add_option("--quantile-samples", quantile_samples, "Draws of the Gaussian quadratic form")
            ->capture_default_str();
        add_common(type1, common);

        // simulate-power
        auto* power = app.add_subcommand("simulate-power", "Power with empirically calibrated thresholds");
        std::string p_scenario = "eigenvalue";
        std::vector<int> p_M{20};
        std::size_t p_trials = 2000;
        std::vector<std::string> statistic_names{"glr", "glr-lr", "fisher", "wishart"};
        power->add_option("--scenario", p_scenario, "subspace or eigenvalue")->capture_default_str();
        power->add_option("--layout", layout, "Second-spike layout for the eigenvalue scenario")->capture_default_str();
        power->add_option("--M", p_M, "Dimensions")->capture_default_str();
        power->add_option("--N", n_override, "Samples per group (overrides the preset)");
        power->add_option("--L", l_override, "Number of groups (overrides the preset)");
        power->add_option("--sigma2", sigma2, "Noise variance")->capture_default_str();
        power->add_option("--alpha", alphas, "Levels")->capture_default_str();
        power->add_option("--trials", p_trials, "Trials per hypothesis")->capture_default_str();
        power->add_option("--statistics", statistic_names, "wishart, glr, glr-lr, fisher")->capture_default_str();
        add_common(power, common);

        // clt-check
        auto* clt = app.add_subcommand("clt-check", "Spike limits and joint CLT covariance of top eigenvalues");
        std::string c_scenario = "eigenvalue";
        int c_M = 400;
        std::size_t c_trials = 2000;
        std::size_t limit_trials = 200;
        double tolerance = 0.03;
        clt->add_option("--scenario", c_scenario, "Null preset")->capture_default_str();
        clt->add_option("--layout", layout, "Second-spike layout")->capture_default_str();
        clt->add_option("--M", c_M, "Dimension")->capture_default_str();
        clt->add_option("--N", n_override, "Samples per group (overrides the preset)");
        clt->add_option("--L", l_override, "Number of groups (overrides the preset)");
        clt->add_option("--sigma2", sigma2, "Noise variance")->capture_default_str();
        clt->add_option("--trials", c_trials, "Trials for the covariance comparison")->capture_default_str();
        clt->add_option("--limit-trials", limit_trials, "Trials for the spike-limit check (0 skips it)")
            ->capture_default_str();
        clt->add_option("--tolerance", tolerance, "Relative tolerance of the spike-limit check")->capture_default_str();
        add_common(clt, common);

        // detect
        auto* det = app.add_subcommand("detect", "Run the test on CMX1 sample files, one per group");
        std::vector<std::string> files;
        int K = 1;
        double alpha = 0.05;
        bool as_json = false;
        det->add_option("--files", files, "CMX1 files (M x N_ell each)")->required()->expected(2, -1);
        det->add_option("--K", K, "Spike rank")->required();
        det->add_option("--alpha", alpha, "Level")->capture_default_str();
        det->add_option("--quantile-samples", quantile_samples, "Draws of the Gaussian quadratic form")
            ->capture_default_str();
        det->add_flag("--json", as_json, "Print the report as JSON");
        add_common(det, common);

        // changemap
        auto* cmap = app.add_subcommand("changemap", "Sliding-window change map of an image pair");
        std::string image_a;
        std::string image_b;
        std::string mask_path;
        int window = 5;
        std::string statistic = "wishart";
        bool decide = false;
        std::size_t cm_quantile = 20'000;
        cmap->add_option("--a", image_a, "Sidecar of the first image")->required();
        cmap->add_option("--b", image_b, "Sidecar of the second image")->required();
        cmap->add_option("--window", window, "Odd patch side")->capture_default_str();
        cmap->add_option("--K", K, "Spike rank")->required();
        cmap->add_option("--statistic", statistic, "wishart, glr-lr, glr or fisher")->capture_default_str();
        cmap->add_flag("--decide", decide, "Add per-pixel decisions (wishart only)");
        cmap->add_option("--alpha", alpha, "Level for per-pixel decisions")->capture_default_str();
        cmap->add_option("--quantile-samples", cm_quantile, "Quadratic-form draws per pixel")->capture_default_str();
        cmap->add_option("--mask", mask_path, "Ground-truth mask to embed in the map");
        add_common(cmap, common);
        cmap->get_option("--out")->required();

        // roc
        auto* roc = app.add_subcommand("roc", "ROC curve and AUC of a change map against its mask");
        std::string map_path;
        roc->add_option("--map", map_path, "Change map JSON")->required();
        roc->add_option("--mask", mask_path, "Mask JSON (if not embedded in the map)");
        add_common(roc, common);

        // limits
        auto* lim = app.add_subcommand("limits", "Closed-form limits for given parameters");
        double c = 0.0;
        std::optional<double> gamma;
        std::optional<double> c_group;
        std::optional<double> delta;
        double lim_sigma2 = 1.0;
        lim->add_option("--sigma2", lim_sigma2, "Noise variance")->capture_default_str();
        lim->add_option("--c", c, "Ratio M / N")->required();
        lim->add_option("--gamma", gamma, "Spike strength");
        lim->add_option("--c-group", c_group, "Per-group ratio for the Wachter edges (needs c < c-group < 1)");
        lim->add_option("--delta", delta, "Relative eigenvalue change for the Fisher threshold");
        lim->add_option("--config", common.config, "JSON file of option values (flags override it)");

        // generate
        auto* gen = app.add_subcommand("generate", "Write CMX1 sample files drawn from a preset");
        std::string g_scenario = "eigenvalue";
        std::string hypothesis = "h1";
        int g_M = 100;
        gen->add_option("--scenario", g_scenario, "type1, subspace or eigenvalue")->capture_default_str();
        gen->add_option("--layout", layout, "Second-spike layout")->capture_default_str();
        gen->add_option("--hypothesis", hypothesis, "h0 or h1")->capture_default_str();
        gen->add_option("--M", g_M, "Dimension")->capture_default_str();
        gen->add_option("--N", n_override, "Samples per group (overrides the preset)");
        gen->add_option("--L", l_override, "Number of groups (overrides the preset)");
        gen->add_option("--sigma2", sigma2, "Noise variance")->capture_default_str();
        add_common(gen, common);
        gen->get_option("--out")->required()->description("Output prefix; writes <prefix>_<group>.cmx");

        // make-scene
        auto* scene_cmd = app.add_subcommand("make-scene", "Synthetic image pair with a changed rectangle");
        SceneSpec spec;
        std::vector<int> rect{spec.rect_x, spec.rect_y, spec.rect_width, spec.rect_height};
        scene_cmd->add_option("--M", spec.M, "Channels")->capture_default_str();
        scene_cmd->add_option("--width", spec.width, "Width")->capture_default_str();
        scene_cmd->add_option("--height", spec.height, "Height")->capture_default_str();
        scene_cmd->add_option("--rect", rect, "Changed rectangle x y width height")->expected(4)->capture_default_str();
        scene_cmd->add_option("--sigma2", spec.sigma2, "Noise variance")->capture_default_str();
        add_common(scene_cmd, common);
        scene_cmd->get_option("--out")->required()->description(
            "Output prefix; writes <prefix>_a.json, <prefix>_b.json and <prefix>_mask.json");

        std::vector<const char*> argv;
        argv.reserve(args.size());
        for (const auto& a : args) {
            argv.push_back(a.c_str());
        }
        try {
            app.parse(static_cast<int>(argv.size()), argv.data());
        } catch (const CLI::ParseError& e) {
            const int code = app.exit(e, out, err);
            return code == 0 ? kExitOk : kExitUsage;
        }
        apply_threads(common);
        const auto t0 = std::chrono::steady_clock::now();

        if (*type1) {
            nlohmann::json details = nlohmann::json::array();
            std::vector<RateEntry> rows;
            for (int M : t1_M) {
                ScenarioPair pair = scenario_by_name(t1_scenario, M, sigma2, parse_layout(layout));
                override_groups(pair, n_override, l_override);
                const Type1Result r =
                    run_type1(pair.h0, alphas, t1_trials, common.seed, quantile_samples, common.exec());
                const auto table = r.table();
                rows.insert(rows.end(), table.begin(), table.end());
                details.push_back(r.to_json());
                err << "simulate-type1: M=" << M << " degenerate trials " << r.degenerate << '\n';
            }
            emit_table(rows, details, common, out);
        } else if (*power) {
            std::vector<StatisticKind> kinds;
            for (const auto& s : statistic_names) {
                kinds.push_back(parse_statistic(s));
            }
            nlohmann::json details = nlohmann::json::array();
            std::vector<RateEntry> rows;
            for (int M : p_M) {
                ScenarioPair pair = scenario_by_name(p_scenario, M, sigma2, parse_layout(layout));
                override_groups(pair, n_override, l_override);
                const PowerResult r = run_power(pair, kinds, alphas, p_trials, common.seed, common.exec());
                const auto table = r.table();
                rows.insert(rows.end(), table.begin(), table.end());
                details.push_back(r.to_json());
            }
            emit_table(rows, details, common, out);
        } else if (*clt) {
            ScenarioPair pair = scenario_by_name(c_scenario, c_M, sigma2, parse_layout(layout));
            override_groups(pair, n_override, l_override);
            nlohmann::json report = {{"scenario", pair.h0.name}, {"sigma2", sigma2}};
            report["clt"] = run_clt_check(pair.h0, c_trials, common.seed, common.exec()).to_json();
            if (limit_trials > 0) {
                report["spike_limits"] =
                    run_spike_limits(pair.h0, limit_trials, common.seed, tolerance, common.exec()).to_json();
            }
            emit_json(report, common, out);
        } else if (*det) {
            std::vector<CMatrix> groups;
            for (const auto& f : files) {
                groups.push_back(io::read_cmx1(f));
            }
            const DetectReport report = detect(groups, {K, alpha, quantile_samples, common.seed});
            if (!common.out.empty()) {
                io::write_text(common.out, report.to_json().dump(2) + "\n");
            }
            out << (as_json ? report.to_json().dump(2) + "\n" : report.to_text());
            if (report.decision == Decision::unreliable) {
                err << "detect: " << report.note << '\n';
                return kExitNumeric;
            }
        } else if (*cmap) {
            const io::ComplexImage a = io::read_image(image_a);
            const io::ComplexImage b = io::read_image(image_b);
            ChangeMapOptions options;
            options.window = window;
            options.K = K;
            options.statistic = parse_statistic(statistic);
            options.decide = decide;
            options.alpha = alpha;
            options.quantile_samples = cm_quantile;
            options.seed = common.seed;
            options.exec = common.exec();
            ChangeMap map = compute_changemap(a, b, options);
            if (!mask_path.empty()) {
                map.mask = io::read_mask(mask_path);
                if (map.mask.width != map.width || map.mask.height != map.height) {
                    throw DataError("mask dimensions do not match the images");
                }
            }
            io::write_text(common.out, map.to_json().dump() + "\n");
            std::size_t valid = 0;
            for (char v : map.valid) {
                valid += v ? 1 : 0;
            }
            out << "pixels: " << map.values.size() << "\nvalid: " << valid << "\nfailed: " << map.failed << '\n';
            if (decide) {
                std::size_t rejects = 0;
                for (char d : map.decisions) {
                    rejects += d ? 1 : 0;
                }
                out << "rejections: " << rejects << "\nunreliable: " << map.degenerate << '\n';
            }
        } else if (*roc) {
            ChangeMap map = ChangeMap::from_json(io::read_json(map_path));
            if (!mask_path.empty()) {
                map.mask = io::read_mask(mask_path);
            }
            const RocCurve curve = compute_roc(map);
            if (!common.out.empty()) {
                io::write_text(common.out, curve.to_json().dump(2) + "\n");
            }
            out << "auc: " << std::setprecision(6) << curve.auc << "\npoints: " << curve.false_alarm.size() << '\n';
        } else if (*lim) {
            const rmt::MpParams mp{lim_sigma2, c};
            mp.validate();
            const auto edges = rmt::mp_edges(mp);
            out << std::setprecision(10);
            out << "mp_lower: " << edges.lower << "\nmp_upper: " << edges.upper << '\n';
            out << "detection_threshold: " << rmt::detection_threshold(mp) << '\n';
            if (gamma) {
                const auto loc = rmt::spike_forward(*gamma, mp);
                out << "location: " << loc.location << '\n';
                out << "gamma_recovered: " << rmt::spike_inverse(loc.location, mp) << '\n';
            }
            if (c_group) {
                const auto w = rmt::wachter_edges(*c_group, c);
                out << "wachter_lower: " << w.lower << "\nwachter_upper: " << w.upper << '\n';
                const auto f = fisher_edges(*c_group, *c_group);
                out << "nu_minus: " << f.nu_minus << "\nnu_plus: " << f.nu_plus << '\n';
            }
            if (c > 0.0 && c < 0.5) {
                const FisherParams p = fisher_consistency_thresholds(c, delta.value_or(0.0));
                if (!c_group) {
                    out << "nu_minus: " << p.nu_minus << "\nnu_plus: " << p.nu_plus << '\n';
                }
                out << "beta_subspace: " << p.beta_subspace << "\ndelta_min: " << p.delta_min << '\n';
                if (delta) {
                    out << "beta_eigenvalue: ";
                    if (p.beta_eigenvalue) {
                        out << *p.beta_eigenvalue << '\n';
                    } else {
                        out << "none\n";
                    }
                }
            }
        } else if (*gen) {
            ScenarioPair pair = scenario_by_name(g_scenario, g_M, sigma2, parse_layout(layout));
            override_groups(pair, n_override, l_override);
            if (hypothesis != "h0" && hypothesis != "h1") {
                throw UsageError("--hypothesis must be h0 or h1");
            }
            const ScenarioPreset& preset = hypothesis == "h0" ? pair.h0 : pair.h1;
            NormalSource normal;
            for (int g = 0; g < preset.dims.L(); ++g) {
                const GaussianSampler sampler(build_covariance(preset, g));
                Engine engine = make_engine(common.seed, Stream::data, static_cast<std::uint64_t>(g));
                const CMatrix y = sampler.sample(preset.dims.N[static_cast<std::size_t>(g)], engine, normal);
                const std::string path = common.out + "_" + std::to_string(g + 1) + ".cmx";
                io::write_cmx1(path, y);
                out << path << '\n';
            }
        } else if (*scene_cmd) {
            spec.rect_x = rect[0];
            spec.rect_y = rect[1];
            spec.rect_width = rect[2];
            spec.rect_height = rect[3];
            spec.seed = common.seed;
            const Scene scene = make_scene(spec);
            io::write_image(common.out + "_a.json", scene.a);
            io::write_image(common.out + "_b.json", scene.b);
            io::write_mask(common.out + "_mask.json", scene.mask);
            out << common.out << "_a.json\n" << common.out << "_b.json\n" << common.out << "_mask.json\n";
        }
        err << "elapsed_seconds: " << std::fixed << std::setprecision(3) << seconds_since(t0) << '\n';
        return kExitOk;
    } catch (...) {
        return map_exception(err);
    }
}

}  // namespace covtest::cli
