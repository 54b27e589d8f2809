// Copyright (c) 2026 the nsfstat authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <limits>
#include <stdexcept>
#include <string>

namespace nsf {

// Why a trajectory was censored into the absorbing state.
enum class StopReason { None, ThresholdM, PositivityLoss, Stiffness, NonFinite };

inline const char* to_string(StopReason r) {
    switch (r) {
        case StopReason::None: return "none";
        case StopReason::ThresholdM: return "threshold_m";
        case StopReason::PositivityLoss: return "positivity_loss";
        case StopReason::Stiffness: return "stiffness";
        case StopReason::NonFinite: return "non_finite";
    }
    return "unknown";
}

// Censoring thresholds. M is the sup(rho + theta) threshold of the
// stopping time; the floors and dt_min are numerical proxies for leaving
// X+.
struct StoppingConfig {
    double threshold_m = 1e4;
    double rho_floor = 1e-8;
    double theta_floor = 1e-8;
    double dt_min = 1e-10;

    void validate() const {
        if (threshold_m <= 0.0) throw std::invalid_argument("StoppingConfig: M must be positive");
        if (rho_floor <= 0.0 || theta_floor <= 0.0)
            throw std::invalid_argument("StoppingConfig: floors must be strictly positive");
        if (dt_min <= 0.0) throw std::invalid_argument("StoppingConfig: dt_min must be positive");
    }
};

struct StoppingRecord {
    double t_stop = std::numeric_limits<double>::infinity();
    StopReason reason = StopReason::None;
    double peak_value = 0.0;  // largest observed sup(rho + theta)

    bool triggered() const { return reason != StopReason::None; }
};

}  // namespace nsf
