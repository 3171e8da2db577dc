#include "covtest/changemap.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "covtest/errors.hpp"

namespace covtest {

nlohmann::json ChangeMap::to_json() const {
    nlohmann::json vals = nlohmann::json::array();
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (valid[i]) {
            vals.push_back(values[i]);
        } else {
            vals.push_back(nullptr);
        }
    }
    nlohmann::json j = {{"width", width},
                        {"height", height},
                        {"values", vals},
                        {"failed", failed},
                        {"degenerate", degenerate}};
    if (!decisions.empty()) {
        j["decisions"] = std::vector<int>(decisions.begin(), decisions.end());
    }
    if (has_mask()) {
        j["mask"] = std::vector<int>(mask.values.begin(), mask.values.end());
    }
    return j;
}

ChangeMap ChangeMap::from_json(const nlohmann::json& j) {
    ChangeMap map;
    try {
        map.width = j.at("width").get<int>();
        map.height = j.at("height").get<int>();
        const auto& vals = j.at("values");
        const auto count = static_cast<std::size_t>(map.width) * static_cast<std::size_t>(map.height);
        if (map.width < 1 || map.height < 1 || !vals.is_array() || vals.size() != count) {
            throw DataError("change map dimensions do not match its values");
        }
        map.values.resize(count, std::numeric_limits<double>::quiet_NaN());
        map.valid.assign(count, 0);
        for (std::size_t i = 0; i < count; ++i) {
            if (!vals[i].is_null()) {
                map.values[i] = vals[i].get<double>();
                map.valid[i] = 1;
            }
        }
        if (j.contains("mask")) {
            const auto& m = j.at("mask");
            if (!m.is_array() || m.size() != count) {
                throw DataError("change map mask does not match its dimensions");
            }
            map.mask.width = map.width;
            map.mask.height = map.height;
            for (const auto& v : m) {
                map.mask.values.push_back(v.get<int>() != 0 ? 1 : 0);
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed change map: ") + e.what());
    }
    return map;
}

ChangeMap compute_changemap(const io::ComplexImage& a, const io::ComplexImage& b,
                            const ChangeMapOptions& options) {
    if (a.width != b.width || a.height != b.height || a.channels() != b.channels()) {
        throw DataError("images must share width, height and channel count");
    }
    const int M = a.channels();
    const int w = options.window;
    if (w < 3 || w % 2 == 0) {
        throw DomainError("window must be odd and at least 3");
    }
    const int half = w / 2;
    if (a.width <= 2 * half || a.height <= 2 * half) {
        throw DomainError("image is smaller than the window");
    }
    const int n = w * w;
    const ModelDims dims{M, {n, n}, options.K};
    dims.validate();
    if (needs_inversion(options.statistic) && n <= M) {
        throw DomainError(statistic_name(options.statistic) + " inverts the patch SCM and needs window^2 > M (" +
                          std::to_string(n) + " <= " + std::to_string(M) +
                          "); use wishart or glr-lr, which only need SCM eigenvalues");
    }
    if (options.decide && options.statistic != StatisticKind::wishart) {
        throw DomainError("per-pixel decisions are only available for the wishart statistic");
    }

    ChangeMap map;
    map.width = a.width;
    map.height = a.height;
    const auto total = static_cast<std::size_t>(a.width) * static_cast<std::size_t>(a.height);
    map.values.assign(total, std::numeric_limits<double>::quiet_NaN());
    map.valid.assign(total, 0);
    if (options.decide) {
        map.decisions.assign(total, 0);
    }
    std::vector<std::size_t> failed(static_cast<std::size_t>(a.height), 0);
    std::vector<std::size_t> degenerate(static_cast<std::size_t>(a.height), 0);
    const std::array<double, 1> alphas{options.alpha};

    for_indexed(
        static_cast<std::size_t>(a.height - 2 * half),
        [&](std::size_t row) {
            const int y = static_cast<int>(row) + half;
            CMatrix patch_a(M, n);
            CMatrix patch_b(M, n);
            for (int x = half; x < a.width - half; ++x) {
                int col = 0;
                for (int dy = -half; dy <= half; ++dy) {
                    for (int dx = -half; dx <= half; ++dx) {
                        patch_a.col(col) = a.pixels.col(a.index(x + dx, y + dy));
                        patch_b.col(col) = b.pixels.col(b.index(x + dx, y + dy));
                        ++col;
                    }
                }
                const auto p = static_cast<std::size_t>(a.index(x, y));
                try {
                    const SampleCovariances covs =
                        make_sample_covariances({compute_scm(patch_a), compute_scm(patch_b)}, dims);
                    if (options.statistic == StatisticKind::wishart) {
                        const SpikeEstimates est = spike_estimates(covs, dims);
                        map.values[p] = wishart_statistic(est);
                        if (options.decide) {
                            try {
                                const RMatrix xi = difference_covariance(upsilon_hat(est, dims), dims.K, dims.L());
                                const double eps = calibrate_thresholds(
                                    xi, M, alphas, options.quantile_samples,
                                    derive_seed(options.seed, Stream::calibration, p), Execution::serial)[0];
                                map.decisions[p] = map.values[p] > eps ? 1 : 0;
                            } catch (const DegenerateSpike&) {
                                ++degenerate[row + half];
                            }
                        }
                    } else {
                        map.values[p] = evaluate_statistic(options.statistic, covs, dims);
                    }
                    if (std::isfinite(map.values[p])) {
                        map.valid[p] = 1;
                    } else {
                        ++failed[row + half];
                    }
                } catch (const NumericError&) {
                    ++failed[row + half];
                } catch (const SingularCovariance&) {
                    ++failed[row + half];
                }
                if (!map.valid[p]) {
                    map.values[p] = std::numeric_limits<double>::quiet_NaN();
                }
            }
        },
        options.exec);

    map.failed = std::accumulate(failed.begin(), failed.end(), std::size_t{0});
    map.degenerate = std::accumulate(degenerate.begin(), degenerate.end(), std::size_t{0});
    return map;
}

Scene make_scene(const SceneSpec& spec) {
    if (spec.width < 1 || spec.height < 1) {
        throw DomainError("scene dimensions must be positive");
    }
    if (spec.rect_x < 0 || spec.rect_y < 0 || spec.rect_width < 1 || spec.rect_height < 1 ||
        spec.rect_x + spec.rect_width > spec.width || spec.rect_y + spec.rect_height > spec.height) {
        throw DomainError("change rectangle must lie inside the scene");
    }
    const ScenarioPair pair = eigenvalue_scenario(spec.M, spec.sigma2);
    const GaussianSampler null_sampler(build_covariance(pair.h0, 0));
    const GaussianSampler changed_sampler(build_covariance(pair.h1, 1));

    Scene scene;
    const auto count = static_cast<Eigen::Index>(spec.width) * spec.height;
    for (io::ComplexImage* img : {&scene.a, &scene.b}) {
        img->width = spec.width;
        img->height = spec.height;
        img->pixels.resize(spec.M, count);
    }
    scene.mask.width = spec.width;
    scene.mask.height = spec.height;
    scene.mask.values.assign(static_cast<std::size_t>(count), 0);

    NormalSource normal;
    for (int y = 0; y < spec.height; ++y) {
        for (int image = 0; image < 2; ++image) {
            Engine engine = make_engine(spec.seed, Stream::scene, 2ULL * static_cast<std::uint64_t>(y) + image);
            io::ComplexImage& img = image == 0 ? scene.a : scene.b;
            for (int x = 0; x < spec.width; ++x) {
                const bool inside = x >= spec.rect_x && x < spec.rect_x + spec.rect_width &&
                                    y >= spec.rect_y && y < spec.rect_y + spec.rect_height;
                const GaussianSampler& sampler = (image == 1 && inside) ? changed_sampler : null_sampler;
                img.pixels.col(img.index(x, y)) = sampler.sample(1, engine, normal).col(0);
                if (inside) {
                    scene.mask.values[static_cast<std::size_t>(img.index(x, y))] = 1;
                }
            }
        }
    }
    return scene;
}

nlohmann::json RocCurve::to_json() const {
    nlohmann::json thr = nlohmann::json::array();
    for (double t : thresholds) {
        if (std::isinf(t)) {
            thr.push_back(nullptr);
        } else {
            thr.push_back(t);
        }
    }
    return {{"false_alarm", false_alarm}, {"detection", detection}, {"thresholds", thr}, {"auc", auc}};
}

RocCurve compute_roc(const std::vector<double>& scores, const std::vector<char>& labels) {
    if (scores.size() != labels.size()) {
        throw DataError("scores and labels differ in length");
    }
    std::size_t positives = 0;
    for (char l : labels) {
        positives += l ? 1 : 0;
    }
    const std::size_t negatives = labels.size() - positives;
    if (positives == 0 || negatives == 0) {
        throw DataError("ROC needs both changed and unchanged pixels");
    }
    for (double s : scores) {
        if (!std::isfinite(s)) {
            throw DataError("ROC scores must be finite");
        }
    }
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return scores[i] > scores[j]; });

    RocCurve roc;
    roc.false_alarm.push_back(0.0);
    roc.detection.push_back(0.0);
    roc.thresholds.push_back(std::numeric_limits<double>::infinity());
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        const double level = scores[order[i]];
        while (i < order.size() && scores[order[i]] == level) {
            (labels[order[i]] ? tp : fp) += 1;
            ++i;
        }
        const double fa = static_cast<double>(fp) / static_cast<double>(negatives);
        const double det = static_cast<double>(tp) / static_cast<double>(positives);
        roc.auc += 0.5 * (fa - roc.false_alarm.back()) * (det + roc.detection.back());
        roc.false_alarm.push_back(fa);
        roc.detection.push_back(det);
        roc.thresholds.push_back(level);
    }
    return roc;
}

RocCurve compute_roc(const ChangeMap& map) {
    if (!map.has_mask()) {
        throw DataError("ROC needs a ground-truth mask");
    }
    if (map.mask.width != map.width || map.mask.height != map.height ||
        map.mask.values.size() != map.values.size()) {
        throw DataError("mask dimensions do not match the change map");
    }
    std::vector<double> scores;
    std::vector<char> labels;
    for (std::size_t i = 0; i < map.values.size(); ++i) {
        if (map.valid[i]) {
            scores.push_back(map.values[i]);
            labels.push_back(map.mask.values[i]);
        }
    }
    return compute_roc(scores, labels);
}

}  // namespace covtest
