/*
 * trajectory.hpp — time-indexed record of mode values and scalar metrics
 * produced by a training run, plus its CSV form.
 */
#pragma once

#include "numerics.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace ebmlab {

struct Trajectory {
    std::vector<double> times;               // strictly increasing
    std::vector<Vector> mode_values;         // optional, one row per time
    std::vector<std::string> metric_names;   // column order of metrics
    std::map<std::string, std::vector<double>> metrics;

    std::size_t size() const { return times.size(); }

    bool has_metric(const std::string& name) const { return metrics.count(name) > 0; }

    const std::vector<double>& metric(const std::string& name) const {
        auto it = metrics.find(name);
        if (it == metrics.end())
            throw std::invalid_argument("trajectory: no metric named '" + name + "'");
        return it->second;
    }

    void append(double t, const Vector& modes, const std::map<std::string, double>& row) {
        if (!times.empty() && t <= times.back())
            throw std::invalid_argument("trajectory: times must be strictly increasing");
        times.push_back(t);
        if (modes.size() > 0) {
            if (!mode_values.empty() && mode_values.front().size() != modes.size())
                throw std::invalid_argument("trajectory: inconsistent mode dimension");
            mode_values.push_back(modes);
        }
        for (const auto& [name, value] : row) {
            auto it = metrics.find(name);
            if (it == metrics.end()) {
                metric_names.push_back(name);
                it = metrics.emplace(name, std::vector<double>()).first;
            }
            it->second.push_back(value);
        }
        for (const auto& name : metric_names)
            if (metrics.at(name).size() != times.size())
                throw std::invalid_argument("trajectory: metric '" + name + "' missing at t=" +
                                            std::to_string(t));
    }
};

namespace detail {

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

} // namespace detail

// CSV layout: time, mode_001..mode_N (when recorded), then metric columns.
// Header row is mandatory.
inline void write_trajectory_csv(const std::string& path, const Trajectory& traj,
                                 bool with_modes = true) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_trajectory_csv: cannot open " + path);
    const bool modes = with_modes && !traj.mode_values.empty();
    out << "time";
    if (modes) {
        const Index n = traj.mode_values.front().size();
        char buf[32];
        for (Index a = 0; a < n; ++a) {
            std::snprintf(buf, sizeof(buf), ",mode_%03lld", static_cast<long long>(a + 1));
            out << buf;
        }
    }
    for (const auto& name : traj.metric_names) out << ',' << name;
    out << '\n';
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        out << detail::format_double(traj.times[k]);
        if (modes)
            for (Index a = 0; a < traj.mode_values[k].size(); ++a)
                out << ',' << detail::format_double(traj.mode_values[k](a));
        for (const auto& name : traj.metric_names)
            out << ',' << detail::format_double(traj.metrics.at(name)[k]);
        out << '\n';
    }
}

} // namespace ebmlab
