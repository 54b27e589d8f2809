// Copyright (c) 2026 the nsfstat authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace nsf {

struct NonFiniteField : std::runtime_error {
    explicit NonFiniteField(const std::string& what) : std::runtime_error(what) {}
};

struct NotInXPlus : std::runtime_error {
    explicit NotInXPlus(const std::string& what) : std::runtime_error(what) {}
};

struct OutOfBand : std::runtime_error {
    explicit OutOfBand(const std::string& what) : std::runtime_error(what) {}
};

struct GridMismatch : std::runtime_error {
    explicit GridMismatch(const std::string& what) : std::runtime_error(what) {}
};

struct StepRejected : std::runtime_error {
    explicit StepRejected(const std::string& what) : std::runtime_error(what) {}
};

struct StiffnessBreakdown : std::runtime_error {
    explicit StiffnessBreakdown(const std::string& what) : std::runtime_error(what) {}
};

struct ConfigRejected : std::runtime_error {
    explicit ConfigRejected(const std::string& what) : std::runtime_error(what) {}
};

struct DistributionInfeasible : std::runtime_error {
    explicit DistributionInfeasible(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace nsf
