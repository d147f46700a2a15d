#pragma once

#include <optional>
#include <vector>

namespace vbs {

struct StepRecord {
    int step = 0;
    double prediction = 0.0;
    double truth = 0.0;
    double abs_error = 0.0;
    std::optional<double> log_lik;
    std::optional<int> dominant_bit;
    std::optional<double> beam_entropy;
};

// Mean cumulative absolute error over the records seen so far.
double mcae(const std::vector<StepRecord>& records);

// Time-averaged one-step-ahead log likelihood; every record must carry one.
double predictive_ll(const std::vector<StepRecord>& records);

// Mean over consecutive length-L segments of the within-segment sample
// standard deviation (n-1 denominator); a trailing partial segment counts
// iff it has at least two points.
double segmented_std(const std::vector<double>& series, int segment_len);

// Streaming accumulator used by the run loop.
class RunningMean {
public:
    void add(double x) {
        ++n_;
        sum_ += x;
    }
    double mean() const { return sum_ / static_cast<double>(n_); }
    long count() const { return n_; }

private:
    long n_ = 0;
    double sum_ = 0.0;
};

}  // namespace vbs
