#include "covtest/detect.hpp"

#include <sstream>

#include "covtest/errors.hpp"

namespace covtest {

std::string decision_name(Decision d) {
    switch (d) {
        case Decision::reject:
            return "reject";
        case Decision::accept:
            return "accept";
        case Decision::unreliable:
            return "unreliable";
    }
    return "unreliable";
}

namespace {

nlohmann::json vec(const RVector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

}  // namespace

nlohmann::json DetectReport::to_json() const {
    nlohmann::json per_group = nlohmann::json::array();
    for (Eigen::Index k = 0; k < estimates.gamma_per_group.rows(); ++k) {
        per_group.push_back(vec(estimates.gamma_per_group.row(k).transpose()));
    }
    nlohmann::json j = {{"M", dims.M},
                        {"N", dims.N},
                        {"K", dims.K},
                        {"statistic", statistic},
                        {"decision", decision_name(decision)},
                        {"sigma2_hat", estimates.sigma2_hat},
                        {"gamma_pooled", vec(estimates.gamma_pooled)},
                        {"gamma_per_group", per_group},
                        {"competitors", competitors}};
    j["epsilon_hat"] = epsilon_hat ? nlohmann::json(*epsilon_hat) : nlohmann::json(nullptr);
    if (!note.empty()) {
        j["note"] = note;
    }
    if (!skipped.empty()) {
        j["skipped"] = skipped;
    }
    return j;
}

std::string DetectReport::to_text() const {
    std::ostringstream out;
    out.precision(6);
    out << "decision: " << decision_name(decision) << '\n';
    if (!note.empty()) {
        out << "note: " << note << '\n';
    }
    out << "statistic: " << statistic << '\n';
    out << "epsilon_hat: ";
    if (epsilon_hat) {
        out << *epsilon_hat << '\n';
    } else {
        out << "n/a\n";
    }
    out << "sigma2_hat: " << estimates.sigma2_hat << '\n';
    out << "k,gamma_pooled";
    for (int g = 0; g < dims.L(); ++g) {
        out << ",gamma_group" << g + 1;
    }
    out << '\n';
    for (int k = 0; k < dims.K; ++k) {
        out << k + 1 << ',' << estimates.gamma_pooled(k);
        for (int g = 0; g < dims.L(); ++g) {
            out << ',' << estimates.gamma_per_group(k, g);
        }
        out << '\n';
    }
    for (const auto& [name, value] : competitors) {
        out << name << ": " << value << '\n';
    }
    for (const auto& [name, why] : skipped) {
        out << name << ": skipped (" << why << ")\n";
    }
    return out.str();
}

DetectReport detect(std::span<const CMatrix> groups, const DetectOptions& options) {
    if (groups.size() < 2) {
        throw DomainError("detection needs at least two sample blocks");
    }
    DetectReport report;
    report.dims.M = static_cast<int>(groups.front().rows());
    report.dims.K = options.K;
    for (const auto& g : groups) {
        if (g.rows() != report.dims.M) {
            throw DataError("sample blocks have different dimensions M");
        }
        report.dims.N.push_back(static_cast<int>(g.cols()));
    }
    const ModelDims& dims = report.dims;
    dims.validate();

    const SampleCovariances covs = sample_covariances_from_data(groups, dims);
    report.estimates = spike_estimates(covs, dims);
    report.statistic = wishart_statistic(report.estimates);
    std::optional<Calibration> cal;
    try {
        cal = calibrate(report.estimates, dims, options.alpha, options.quantile_samples, options.seed);
        report.epsilon_hat = cal->epsilon_hat;
        report.decision = report.statistic > cal->epsilon_hat ? Decision::reject : Decision::accept;
    } catch (const DegenerateSpike& e) {
        report.decision = Decision::unreliable;
        report.note = "spike estimate k=" + std::to_string(e.k()) +
                      " is near the detectability edge; decision unreliable";
    }

    try {
        report.competitors["glr-lr"] = glr_lr_statistic(covs, dims);
    } catch (const NumericError& e) {
        report.skipped["glr-lr"] = e.what();
    }
    bool invertible = true;
    for (int n : dims.N) {
        invertible = invertible && n > dims.M;
    }
    for (const char* name : {"glr", "fisher"}) {
        if (!invertible) {
            report.skipped[name] = "needs more samples than the dimension in every group";
            continue;
        }
        try {
            report.competitors[name] = std::string(name) == "glr" ? glr_statistic(covs, dims)
                                                                  : fisher_statistic(covs, dims);
        } catch (const Error& e) {
            report.skipped[name] = e.what();
        }
    }
    if (cal) {
        try {
            report.competitors["chi2"] = chi2_statistic(report.estimates, *cal, dims);
            report.competitors["chi2_threshold"] = chi2_upper_quantile(dims.K * dims.L(), options.alpha);
        } catch (const IllConditioned& e) {
            report.skipped["chi2"] = e.what();
        }
    }
    return report;
}

}  // namespace covtest
