#ifndef CELLSCOPE_STATS_SUMMATION_HPP
#define CELLSCOPE_STATS_SUMMATION_HPP

#include <cmath>

namespace cellscope::stats {

/**
 * Neumaier's variant of Kahan summation.
 */
class CompensatedSum {
public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            compensation_ += (sum_ - t) + x;
        } else {
            compensation_ += (x - t) + sum_;
        }
        sum_ = t;
    }

    double value() const { return sum_ + compensation_; }

private:
    double sum_ = 0;
    double compensation_ = 0;
};

}

#endif
