#include "vbs/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace vbs {

double mcae(const std::vector<StepRecord>& records) {
    if (records.empty()) throw std::invalid_argument("mcae: no records");
    double s = 0.0;
    for (const auto& r : records) s += r.abs_error;
    return s / static_cast<double>(records.size());
}

double predictive_ll(const std::vector<StepRecord>& records) {
    if (records.empty()) throw std::invalid_argument("predictive_ll: no records");
    double s = 0.0;
    for (const auto& r : records) {
        if (!r.log_lik) throw std::invalid_argument("predictive_ll: record without log likelihood");
        s += *r.log_lik;
    }
    return s / static_cast<double>(records.size());
}

namespace {
double sample_std(const double* x, std::size_t n) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += x[i];
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = x[i] - mean;
        ss += d * d;
    }
    return std::sqrt(ss / static_cast<double>(n - 1));
}
}  // namespace

double segmented_std(const std::vector<double>& series, int segment_len) {
    if (segment_len < 2) throw std::invalid_argument("segmented_std: segment length must be >= 2");
    if (series.size() < static_cast<std::size_t>(segment_len)) {
        throw std::invalid_argument("segmented_std: series shorter than one segment");
    }
    double acc = 0.0;
    int count = 0;
    const std::size_t l = static_cast<std::size_t>(segment_len);
    for (std::size_t start = 0; start < series.size(); start += l) {
        const std::size_t len = std::min(l, series.size() - start);
        if (len < 2) break;  // trailing singleton is skipped
        acc += sample_std(series.data() + start, len);
        ++count;
    }
    return acc / static_cast<double>(count);
}

}  // namespace vbs
