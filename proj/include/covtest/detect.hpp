#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>

#include <json.hpp>

#include "covtest/statistics.hpp"

namespace covtest {

struct DetectOptions {
    int K = 1;
    double alpha = 0.05;
    std::size_t quantile_samples = kDefaultQuantileSamples;
    std::uint64_t seed = 0;
};

enum class Decision { reject, accept, unreliable };

std::string decision_name(Decision d);

struct DetectReport {
    ModelDims dims;
    SpikeEstimates estimates;
    double statistic = 0.0;
    std::optional<double> epsilon_hat;
    Decision decision = Decision::accept;
    std::string note;
    /// Competitor statistics that could be evaluated on this data.
    std::map<std::string, double> competitors;
    std::map<std::string, std::string> skipped;

    nlohmann::json to_json() const;
    std::string to_text() const;
};

/// Full pipeline on L sample blocks (each M x N_ell). A spike estimate at the
/// detectability edge yields Decision::unreliable instead of an exception.
DetectReport detect(std::span<const CMatrix> groups, const DetectOptions& options);

}  // namespace covtest
