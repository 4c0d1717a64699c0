#pragma once

#include "sepnet/matrix.hpp"

#include <json.hpp>

#include <optional>
#include <string>

namespace sepnet {

/// WᵀW - I_n for a weight matrix whose columns are the class kernels.
/// Throws OrientationError when W has fewer rows than columns: row-kernel
/// layers must be transposed by the caller.
Matrix error_matrix(const Matrix& w);

/// ε(W) = ‖WᵀW - I_n‖²_F / n.
double separability_metric(const Matrix& w);

/// Same quantity evaluated as Tr((WᵀW - I_n)²) / n.
double separability_metric_trace_form(const Matrix& w);

struct SeparabilityReport {
    double epsilon = 0.0;
    double epsilon_trace = 0.0;
    std::size_t n_classes = 0;
    std::size_t m_features = 0;
    std::optional<Matrix> error_matrix;
};

SeparabilityReport separability_report(const Matrix& w, bool keep_error_matrix = false);

/// Three significant digits in scientific notation, e.g. "6.55e-08".
std::string format_epsilon(double epsilon);

nlohmann::json to_json(const SeparabilityReport& report);

} // namespace sepnet
