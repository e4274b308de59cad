#pragma once

#include <cmath>
#include <vector>

namespace zql {

// Exactly rounded floating-point accumulator (Shewchuk partials, the
// algorithm behind Python's math.fsum). The rounded value depends only on
// the exact mathematical sum, never on insertion or merge order, which is
// what lets combined and speculative execution reproduce direct execution
// bit for bit.
class ExactSum {
public:
    void add(double x) {
        std::size_t used = 0;
        for (std::size_t j = 0; j < partials_.size(); ++j) {
            double y = partials_[j];
            if (std::fabs(x) < std::fabs(y)) std::swap(x, y);
            const double hi = x + y;
            const double lo = y - (hi - x);
            if (lo != 0.0) partials_[used++] = lo;
            x = hi;
        }
        partials_.resize(used);
        partials_.push_back(x);
    }

    void merge(const ExactSum& other) {
        for (double p : other.partials_) add(p);
    }

    // Correctly rounded sum of all added terms.
    double value() const {
        if (partials_.empty()) return 0.0;
        std::size_t n = partials_.size();
        double hi = partials_[--n];
        double lo = 0.0;
        while (n > 0) {
            const double x = hi;
            const double y = partials_[--n];
            hi = x + y;
            const double yr = hi - x;
            lo = y - yr;
            if (lo != 0.0) break;
        }
        // Half-ulp tie: look at the sign of the next partial to round correctly.
        if (n > 0 && ((lo < 0.0 && partials_[n - 1] < 0.0) || (lo > 0.0 && partials_[n - 1] > 0.0))) {
            const double y = lo * 2.0;
            const double x = hi + y;
            if (y == x - hi) hi = x;
        }
        return hi;
    }

    bool empty() const { return partials_.empty(); }

private:
    std::vector<double> partials_;
};

}  // namespace zql
