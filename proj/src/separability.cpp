#include "sepnet/separability.hpp"

#include "sepnet/error.hpp"
#include "sepnet/linalg.hpp"

#include <json.hpp>

#include <cstdio>

namespace sepnet {

namespace {

void require_column_orientation(const Matrix& w) {
    if (w.rows() < w.cols())
        throw OrientationError("separability expects column kernels (rows >= cols), got " +
                               w.shape_string() + "; pass the transpose for row-kernel layers");
}

} // namespace

Matrix error_matrix(const Matrix& w) {
    require_column_orientation(w);
    Matrix e = matmul_tn(w, w);
    for (std::size_t i = 0; i < e.rows(); ++i) e(i, i) -= 1.0;
    return e;
}

double separability_metric(const Matrix& w) {
    const Matrix e = error_matrix(w);
    return frobenius_norm_sq(e) / static_cast<double>(w.cols());
}

double separability_metric_trace_form(const Matrix& w) {
    const Matrix e = error_matrix(w);
    return trace(matmul(e, e)) / static_cast<double>(w.cols());
}

SeparabilityReport separability_report(const Matrix& w, bool keep_error_matrix) {
    Matrix e = error_matrix(w);
    const double n = static_cast<double>(w.cols());
    SeparabilityReport r;
    r.epsilon = frobenius_norm_sq(e) / n;
    r.epsilon_trace = trace(matmul(e, e)) / n;
    r.n_classes = w.cols();
    r.m_features = w.rows();
    if (keep_error_matrix) r.error_matrix = std::move(e);
    return r;
}

std::string format_epsilon(double epsilon) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2e", epsilon);
    return buf;
}

nlohmann::json to_json(const SeparabilityReport& report) {
    nlohmann::json j{
        {"epsilon", report.epsilon},
        {"epsilon_trace", report.epsilon_trace},
        {"n", report.n_classes},
        {"m", report.m_features},
    };
    if (report.error_matrix) {
        auto rows = nlohmann::json::array();
        for (std::size_t i = 0; i < report.error_matrix->rows(); ++i) {
            const auto r = report.error_matrix->row(i);
            rows.push_back(std::vector<double>(r.begin(), r.end()));
        }
        j["error_matrix"] = std::move(rows);
    }
    return j;
}

} // namespace sepnet
