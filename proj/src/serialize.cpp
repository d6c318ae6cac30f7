#include "slfforge/serialize.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace slfforge {

using nlohmann::json;

namespace {

std::string csv_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

json number_json(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

json vector_json(const Vector& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(number_json(v[i]));
  return arr;
}

json residual_json(const TargetResidual& r) {
  return {{"grad_norm", number_json(r.grad_norm)},
          {"bound_violation", number_json(r.bound_violation)},
          {"comp_violation", number_json(r.comp_violation)},
          {"total", number_json(r.total)}};
}

json record_json(const IterateRecord& rec) {
  json j = {{"k", rec.k},
            {"S", number_json(rec.S)},
            {"DS", number_json(rec.DS)},
            {"h", number_json(rec.h)},
            {"residuals", residual_json(rec.residual)},
            {"hypersurface", number_json(rec.hypersurface)},
            {"g0", number_json(rec.q.q5)},
            {"q1", vector_json(rec.q.q1)},
            {"q2", vector_json(rec.q.q2)},
            {"u1", vector_json(rec.u.u1)},
            {"u2", vector_json(rec.u.u2)},
            {"evals", rec.evals},
            {"wall_seconds", rec.wall_seconds}};
  if (rec.q.v1) {
    j["v1"] = vector_json(*rec.q.v1);
    j["v1_norm"] = number_json(rec.q.v1->size() ? rec.q.v1->cwiseAbs().maxCoeff() : 0.0);
  }
  if (!rec.jump_mode.empty()) j["jump_mode"] = rec.jump_mode;
  if (!rec.note.empty()) j["note"] = rec.note;
  return j;
}

json summary_json(const Trace& t) {
  json j = {{"problem", t.problem},
            {"recipe", t.recipe},
            {"outcome", to_string(t.outcome)},
            {"detail", t.detail},
            {"iterations", t.iterations},
            {"final_S", number_json(t.final_S)},
            {"final_residual", residual_json(t.final_residual)},
            {"epsilon", number_json(t.epsilon)},
            {"evals", t.evals},
            {"seconds", t.seconds},
            {"cost_increased", t.cost_increased},
            {"max_hypersurface", number_json(t.max_hypersurface)},
            {"q1", vector_json(t.final_state.q1)},
            {"q2", vector_json(t.final_state.q2)},
            {"g0", number_json(t.final_state.q5)},
            {"advisories", t.advisories}};
  if (t.final_state.v1) j["v1"] = vector_json(*t.final_state.v1);
  return j;
}

void write_trace_jsonl(std::ostream& os, const Trace& t) {
  for (const auto& rec : t.records) os << record_json(rec).dump() << '\n';
}

json spectral_json(const SpectralReport& r) {
  json eig = json::array();
  for (const auto& z : r.eigenvalues) {
    eig.push_back({{"re", number_json(z.real())}, {"im", number_json(z.imag())}});
  }
  json j = {{"eigenvalues", eig},
            {"positive_stable", r.positive_stable},
            {"all_real_positive", r.all_real_positive},
            {"benzi_simoncini_holds", r.benzi_simoncini_holds},
            {"hessian_positive_definite", r.hessian_positive_definite},
            {"full_row_rank", r.full_row_rank},
            {"max_abs_real", number_json(r.max_abs_real)},
            {"max_abs_imag", number_json(r.max_abs_imag)},
            {"lambda_min", r.lambda_min ? number_json(*r.lambda_min) : json(nullptr)},
            {"schur_norm", r.schur_norm ? number_json(*r.schur_norm) : json(nullptr)}};
  if (!r.reason.empty()) j["reason"] = r.reason;
  return j;
}

json flow_json(const FlowReport& r) {
  return {{"steps", r.steps},
          {"dt", r.dt},
          {"initial_norm", number_json(r.initial_norm)},
          {"final_norm", number_json(r.final_norm)},
          {"min_norm", number_json(r.min_norm)},
          {"max_norm", number_json(r.max_norm)},
          {"min_relative", number_json(r.min_relative)},
          {"final_relative", number_json(r.final_relative)}};
}

json derivative_json(const DerivativeReport& r) {
  return {{"grad_error", number_json(r.grad_error)},
          {"jac_error", number_json(r.jac_error)},
          {"hess_error", number_json(r.hess_error)},
          {"max_error", number_json(r.max_error)},
          {"threshold", number_json(r.threshold)},
          {"passed", r.passed}};
}

void write_bench_csv(std::ostream& os, std::vector<BenchRow> rows) {
  std::sort(rows.begin(), rows.end(), [](const BenchRow& a, const BenchRow& b) {
    return a.problem != b.problem ? a.problem < b.problem : a.row.recipe < b.row.recipe;
  });
  os << kBenchHeader << '\n';
  for (const auto& r : rows) {
    os << r.problem << ',' << r.row.recipe << ',' << to_string(r.row.outcome) << ','
       << r.row.iterations << ',' << csv_number(r.row.final_S) << ','
       << csv_number(r.row.final_residual) << ',' << r.row.evals << ','
       << csv_number(r.row.seconds) << '\n';
  }
}

}  // namespace slfforge
