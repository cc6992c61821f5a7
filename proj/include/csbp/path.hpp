#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

namespace csbp {

/// A discretized cadlag trajectory on a strictly increasing time grid.
/// If kill_index is set, values beyond it are not meaningful and consumers
/// must not read them.
struct Path {
    std::vector<double> times;
    std::vector<double> values;
    std::optional<std::size_t> kill_index;
    double x0 = 0.0;

    std::size_t size() const { return times.size(); }

    void validate() const {
        if (times.size() != values.size() || times.empty())
            throw std::invalid_argument("path: times/values size mismatch or empty");
        if (!values.empty() && values.front() != x0)
            throw std::invalid_argument("path: values[0] != x0");
        for (std::size_t i = 1; i < times.size(); ++i)
            if (!(times[i] > times[i - 1]))
                throw std::invalid_argument("path: time grid not strictly increasing");
        if (kill_index && *kill_index >= times.size())
            throw std::invalid_argument("path: kill_index out of range");
    }

    // last index a consumer may read
    std::size_t last_index() const { return kill_index ? *kill_index : times.size() - 1; }
};

}  // namespace csbp
