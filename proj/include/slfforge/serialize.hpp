#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "slfforge/generator.hpp"
#include "slfforge/stability.hpp"

namespace slfforge {

struct BenchRow {
  std::string problem;
  ComparisonRow row;
};

/// Non-finite numbers map to the strings "inf", "-inf" and "nan".
nlohmann::json number_json(double x);
nlohmann::json vector_json(const Vector& v);
nlohmann::json residual_json(const TargetResidual& r);

/// One JSONL line: k, S, DS, h, residuals, q1, q2 (and v1 when present).
nlohmann::json record_json(const IterateRecord& rec);

/// Outcome, counters and the final point.
nlohmann::json summary_json(const Trace& t);

void write_trace_jsonl(std::ostream& os, const Trace& t);

nlohmann::json spectral_json(const SpectralReport& r);
nlohmann::json flow_json(const FlowReport& r);
nlohmann::json derivative_json(const DerivativeReport& r);

inline constexpr const char* kBenchHeader =
    "problem,recipe,outcome,iters,final_S,final_residual,evals,seconds";

/// Rows sorted by (problem, recipe) before writing.
void write_bench_csv(std::ostream& os, std::vector<BenchRow> rows);

}  // namespace slfforge
