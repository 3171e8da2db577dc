#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <json.hpp>

#include "covtest/io.hpp"
#include "covtest/montecarlo.hpp"

namespace covtest {

struct ChangeMapOptions {
    int window = 5;  // odd side length of the square patch
    int K = 1;
    StatisticKind statistic = StatisticKind::wishart;
    /// Per-pixel accept/reject from the quadratic-form threshold (Wishart only).
    bool decide = false;
    double alpha = 0.05;
    std::size_t quantile_samples = 20'000;
    std::uint64_t seed = 0;
    Execution exec = Execution::parallel;
};

/// Per-pixel statistic over a co-registered image pair. Pixels closer than
/// window / 2 to the border are invalid; so are pixels where the statistic
/// could not be evaluated (counted in `failed`).
struct ChangeMap {
    int width = 0;
    int height = 0;
    std::vector<double> values;  // NaN where invalid
    std::vector<char> valid;
    std::vector<char> decisions;  // empty unless requested
    std::size_t failed = 0;
    std::size_t degenerate = 0;  // pixels whose decision was unreliable
    io::Mask mask;                // width == 0 when absent

    bool has_mask() const noexcept { return mask.width > 0; }
    nlohmann::json to_json() const;
    static ChangeMap from_json(const nlohmann::json& j);
};

/// Throws DomainError when the window is even or too small, when K >= M,
/// or when an inversion-based statistic gets window^2 <= M samples.
ChangeMap compute_changemap(const io::ComplexImage& a, const io::ComplexImage& b,
                            const ChangeMapOptions& options);

/// Synthetic two-image scene: every pixel is an independent CN(0, R) draw.
/// Both images use the null covariance of the eigenvalue-change preset
/// except inside the rectangle, where the second image uses its altered
/// group-2 covariance.
struct Scene {
    io::ComplexImage a;
    io::ComplexImage b;
    io::Mask mask;
};

struct SceneSpec {
    int width = 64;
    int height = 64;
    int M = 12;
    double sigma2 = kDefaultSigma2;
    int rect_x = 20;
    int rect_y = 20;
    int rect_width = 24;
    int rect_height = 24;
    std::uint64_t seed = 0;
};

Scene make_scene(const SceneSpec& spec);

struct RocCurve {
    std::vector<double> false_alarm;
    std::vector<double> detection;
    std::vector<double> thresholds;  // threshold reached at each point (first point is +inf)
    double auc = 0.0;

    nlohmann::json to_json() const;
};

/// Staircase ROC over valid pixels, sweeping the threshold down through the
/// distinct statistic values; AUC by the trapezoid rule. Throws DataError
/// when the mask is missing, mismatched, or one class is empty.
RocCurve compute_roc(const ChangeMap& map);

/// ROC of raw scores against labels.
RocCurve compute_roc(const std::vector<double>& scores, const std::vector<char>& labels);

}  // namespace covtest
