#include "slfforge/corpus.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "json.hpp"

namespace slfforge {

namespace {

using nlohmann::json;

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

Matrix row(std::initializer_list<double> xs) { return vec(xs).transpose(); }

CorpusEntry quadratic_entry(const std::string& name, const std::string& desc,
                            const Matrix& Q, const Vector& c, const Matrix& A,
                            const Vector& b, Vector start, Vector kkt_q1,
                            Vector kkt_q2, std::vector<std::string> certified) {
  CorpusEntry e;
  const Vector zero = Vector::Zero(A.rows());
  e.spec = make_quadratic_problem(name, Q, c, A, b, zero, zero);
  e.spec.description = desc;
  e.spec.start_q1 = std::move(start);
  e.spec.start_q2 = Vector::Zero(A.rows());
  e.spec.finalize();
  e.kkt_q1 = std::move(kkt_q1);
  e.kkt_q2 = std::move(kkt_q2);
  e.certified_recipes = std::move(certified);
  return e;
}

CorpusEntry unconstrained_entry(const std::string& name, const std::string& desc,
                                int n, std::function<double(const Vector&)> f,
                                std::function<Vector(const Vector&)> g,
                                std::function<Matrix(const Vector&)> h, Vector start,
                                Vector kkt, std::vector<std::string> certified) {
  CorpusEntry e;
  e.spec.name = name;
  e.spec.description = desc;
  e.spec.n = n;
  e.spec.m = 0;
  e.spec.cost = std::move(f);
  e.spec.cost_grad = std::move(g);
  e.spec.cost_hess = std::move(h);
  e.spec.start_q1 = std::move(start);
  e.spec.finalize();
  e.kkt_q1 = std::move(kkt);
  e.kkt_q2 = Vector(0);
  e.certified_recipes = std::move(certified);
  return e;
}

CorpusEntry separable_quadratic(const std::string& name, const std::string& desc,
                                const Vector& d, const Vector& ctr, Vector start,
                                std::vector<std::string> certified) {
  const Matrix Q = d.asDiagonal();
  CorpusEntry e = quadratic_entry(name, desc, Q, -(d.cwiseProduct(ctr)),
                                  Matrix(0, d.size()), Vector(0), std::move(start),
                                  ctr, Vector(0), std::move(certified));
  // Constant shift so the minimum value is zero.
  const double shift = 0.5 * ctr.dot(d.cwiseProduct(ctr));
  auto base = e.spec.cost;
  e.spec.cost = [base, shift](const Vector& x) { return base(x) + shift; };
  return e;
}

const std::vector<std::string> kUnconstrainedAll = {"gradient", "sqp", "sign_gradient",
                                                    "accelerated"};
const std::vector<std::string> kEquality = {"gradient", "sqp"};

std::vector<CorpusEntry> build_registry() {
  std::vector<CorpusEntry> out;

  out.push_back(separable_quadratic("quad1d", "g0 = x^2 / 2", vec({1.0}), vec({0.0}),
                                    vec({4.0}), kUnconstrainedAll));

  out.push_back(quadratic_entry("eqqp2", "|x|^2 / 2 subject to x1 + x2 = 1",
                                Matrix::Identity(2, 2), Vector::Zero(2), row({1, 1}),
                                vec({1.0}), vec({0, 0}), vec({0.5, 0.5}), vec({-0.5}),
                                kEquality));

  out.push_back(quadratic_entry("lp1", "x subject to x = 1", Matrix::Zero(1, 1),
                                vec({1.0}), row({1.0}), vec({1.0}), vec({0.0}),
                                vec({1.0}), vec({-1.0}), kEquality));

  out.push_back(unconstrained_entry(
      "rosenbrock", "100 (x2 - x1^2)^2 + (1 - x1)^2", 2,
      [](const Vector& x) {
        return 100 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1 - x[0], 2);
      },
      [](const Vector& x) {
        return vec({-400 * x[0] * (x[1] - x[0] * x[0]) - 2 * (1 - x[0]),
                    200 * (x[1] - x[0] * x[0])});
      },
      [](const Vector& x) {
        Matrix h(2, 2);
        h << 1200 * x[0] * x[0] - 400 * x[1] + 2, -400 * x[0], -400 * x[0], 200;
        return h;
      },
      vec({-1.2, 1.0}), vec({1.0, 1.0}), {"sqp"}));

  out.push_back(quadratic_entry("eqqp3", "(x1^2 + 2 x2^2 + 3 x3^2) / 2 subject to sum x = 1",
                                Matrix(vec({1, 2, 3}).asDiagonal()), Vector::Zero(3),
                                row({1, 1, 1}), vec({1.0}), vec({0, 0, 0}),
                                vec({6.0 / 11, 3.0 / 11, 2.0 / 11}), vec({-6.0 / 11}),
                                kEquality));

  out.push_back(quadratic_entry("eqbs2", "5 |x|^2 / 2 subject to x1 = 1",
                                5.0 * Matrix::Identity(2, 2), Vector::Zero(2),
                                row({1, 0}), vec({1.0}), vec({0, 0}), vec({1, 0}),
                                vec({-5.0}), kEquality));

  {
    Matrix Q(4, 4);
    Q << 2, 0.5, 0, 0, 0.5, 1, 0, 0, 0, 0, 3, 0, 0, 0, 0, 1;
    Matrix A(2, 4);
    A << 1, 1, 0, 0, 0, 1, 1, 1;
    out.push_back(quadratic_entry(
        "eqqp4", "coupled 4-variable QP with two equality rows", Q,
        vec({-1, 0, 1, -2}), A, vec({1, 2}), vec({0, 0, 0, 0}),
        vec({8.0 / 11, 3.0 / 11, -7.0 / 22, 45.0 / 22}), vec({-13.0 / 22, -1.0 / 22}),
        kEquality));
  }

  {
    CorpusEntry e;
    ProblemSpec& p = e.spec;
    p.name = "circle";
    p.description = "x1 + x2 subject to x1^2 + x2^2 = 2";
    p.n = 2;
    p.m = 1;
    p.cost = [](const Vector& x) { return x[0] + x[1]; };
    p.cost_grad = [](const Vector&) { return vec({1, 1}); };
    p.cost_hess = [](const Vector&) { return Matrix(Matrix::Zero(2, 2)); };
    p.cons = [](const Vector& x) { return vec({x.squaredNorm() - 2}); };
    p.cons_jac = [](const Vector& x) { return Matrix(2 * x.transpose()); };
    p.cons_hess = [](const Vector&) {
      return std::vector<Matrix>{2 * Matrix::Identity(2, 2)};
    };
    p.lower = p.upper = Vector::Zero(1);
    p.start_q1 = vec({-1.2, -0.8});
    p.finalize();
    e.kkt_q1 = vec({-1, -1});
    e.kkt_q2 = vec({0.5});
    e.certified_recipes = kEquality;
    out.push_back(std::move(e));
  }

  {
    // No analytic constraint Hessian: exercises the finite-difference fallback.
    CorpusEntry e;
    ProblemSpec& p = e.spec;
    p.name = "quadcirc";
    p.description = "|x - (2, 1)|^2 / 2 subject to |x|^2 = 1";
    p.n = 2;
    p.m = 1;
    const Vector a = vec({2, 1});
    p.cost = [a](const Vector& x) { return 0.5 * (x - a).squaredNorm(); };
    p.cost_grad = [a](const Vector& x) { return Vector(x - a); };
    p.cost_hess = [](const Vector&) { return Matrix(Matrix::Identity(2, 2)); };
    p.cons = [](const Vector& x) { return vec({x.squaredNorm() - 1}); };
    p.cons_jac = [](const Vector& x) { return Matrix(2 * x.transpose()); };
    p.lower = p.upper = Vector::Zero(1);
    p.start_q1 = vec({0.8, 0.6});
    p.finalize();
    e.kkt_q1 = a / std::sqrt(5.0);
    e.kkt_q2 = vec({(std::sqrt(5.0) - 1) / 2});
    e.certified_recipes = kEquality;
    out.push_back(std::move(e));
  }

  out.push_back(separable_quadratic("sepquad", "sum d_i (x_i - c_i)^2 / 2, d = (1, 4, 9)",
                                    vec({1, 4, 9}), vec({1, -2, 0.5}), vec({0, 0, 0}),
                                    kUnconstrainedAll));

  {
    const Vector a = vec({2, -0.625, 10});
    out.push_back(unconstrained_entry(
        "sepquartic", "sum x_i^4 / 4 + x_i^2 / 2 - a_i x_i", 3,
        [a](const Vector& x) {
          return (0.25 * x.array().pow(4) + 0.5 * x.array().square() - a.array() * x.array())
              .sum();
        },
        [a](const Vector& x) {
          return Vector(x.array().cube() + x.array() - a.array());
        },
        [](const Vector& x) {
          return Matrix((3 * x.array().square() + 1).matrix().asDiagonal());
        },
        vec({0, 0, 0}), vec({1, -0.5, 2}), kUnconstrainedAll));
  }

  out.push_back(separable_quadratic("illcond2", "(x1^2 + 100 x2^2) / 2", vec({1, 100}),
                                    vec({0, 0}), vec({1, 0.5}), kUnconstrainedAll));
  return out;
}

const std::vector<CorpusEntry>& registry() {
  static const std::vector<CorpusEntry> entries = build_registry();
  return entries;
}

double parse_bound(const json& v, const std::string& where) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf" || s == "+inf") return kInf;
    if (s == "-inf") return -kInf;
  }
  throw ProblemLoadError(where + ": expected a number or \"inf\"/\"-inf\"");
}

Vector parse_vector(const json& doc, const char* key, Eigen::Index size, bool bounds) {
  if (!doc.contains(key)) {
    if (size == 0) return Vector(0);
    throw ProblemLoadError(std::string("missing field '") + key + "'");
  }
  const json& arr = doc.at(key);
  if (!arr.is_array() || static_cast<Eigen::Index>(arr.size()) != size) {
    throw ProblemLoadError(std::string("field '") + key + "' must be an array of length " +
                           std::to_string(size));
  }
  Vector v(size);
  for (Eigen::Index i = 0; i < size; ++i) {
    const std::string where = std::string(key) + "[" + std::to_string(i) + "]";
    if (bounds) {
      v[i] = parse_bound(arr[i], where);
    } else if (arr[i].is_number()) {
      v[i] = arr[i].get<double>();
    } else {
      throw ProblemLoadError(where + ": expected a number");
    }
  }
  return v;
}

Matrix parse_matrix(const json& doc, const char* key, Eigen::Index rows, Eigen::Index cols) {
  if (!doc.contains(key)) {
    if (rows == 0) return Matrix(0, cols);
    throw ProblemLoadError(std::string("missing field '") + key + "'");
  }
  const json& arr = doc.at(key);
  if (!arr.is_array() || static_cast<Eigen::Index>(arr.size()) != rows) {
    throw ProblemLoadError(std::string("field '") + key + "' must have " +
                           std::to_string(rows) + " rows");
  }
  Matrix M(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const json& r = arr[i];
    if (!r.is_array() || static_cast<Eigen::Index>(r.size()) != cols) {
      throw ProblemLoadError(std::string("field '") + key + "' row " + std::to_string(i) +
                             " must have " + std::to_string(cols) + " entries");
    }
    for (Eigen::Index j = 0; j < cols; ++j) {
      if (!r[j].is_number()) {
        throw ProblemLoadError(std::string("field '") + key + "' has a non-numeric entry");
      }
      M(i, j) = r[j].get<double>();
    }
  }
  return M;
}

}  // namespace

std::vector<std::string> registry_names() {
  std::vector<std::string> names;
  for (const auto& e : registry()) names.push_back(e.spec.name);
  return names;
}

CorpusEntry corpus_entry(const std::string& name) {
  for (const auto& e : registry()) {
    if (e.spec.name == name) return e;
  }
  throw ProblemLoadError("unknown problem '" + name + "'");
}

ProblemSpec make_quadratic_problem(const std::string& name, const Matrix& Q,
                                   const Vector& c, const Matrix& A, const Vector& b,
                                   const Vector& gL, const Vector& gU) {
  const Eigen::Index n = c.size(), m = b.size();
  detail::require(Q.rows() == n && Q.cols() == n, "Q must be n x n");
  detail::require(A.rows() == m && A.cols() == n, "A must be m x n");
  const double scale = std::max(1.0, Q.size() ? Q.cwiseAbs().maxCoeff() : 0.0);
  detail::require(Q.size() == 0 || (Q - Q.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale,
                  "Q must be symmetric");

  ProblemSpec p;
  p.name = name;
  p.n = static_cast<int>(n);
  p.m = static_cast<int>(m);
  p.cost = [Q, c](const Vector& x) { return 0.5 * x.dot(Q * x) + c.dot(x); };
  p.cost_grad = [Q, c](const Vector& x) { return Vector(Q * x + c); };
  p.cost_hess = [Q](const Vector&) { return Q; };
  if (m > 0) {
    p.cons = [A, b](const Vector& x) { return Vector(A * x - b); };
    p.cons_jac = [A](const Vector&) { return A; };
    const int nn = p.n;
    p.cons_hess = [m, nn](const Vector&) {
      return std::vector<Matrix>(m, Matrix::Zero(nn, nn));
    };
  }
  p.lower = gL;
  p.upper = gU;
  p.is_quadratic = true;
  p.is_lp = Q.size() == 0 || Q.cwiseAbs().maxCoeff() == 0.0;
  p.finalize();
  return p;
}

ProblemSpec problem_from_json_text(const std::string& text, const std::string& name) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ProblemLoadError("malformed problem file: " + std::string(e.what()));
  }
  if (!doc.is_object()) throw ProblemLoadError("problem file must hold a JSON object");
  for (const char* key : {"n", "m"}) {
    if (!doc.contains(key) || !doc.at(key).is_number_integer()) {
      throw ProblemLoadError(std::string("field '") + key + "' must be an integer");
    }
  }
  const auto n = doc.at("n").get<long long>();
  const auto m = doc.at("m").get<long long>();
  if (n < 1 || m < 0) throw ProblemLoadError("need n >= 1 and m >= 0");

  const Matrix Q = parse_matrix(doc, "Q", n, n);
  const Vector c = parse_vector(doc, "c", n, false);
  const Matrix A = parse_matrix(doc, "A", m, n);
  const Vector b = parse_vector(doc, "b", m, false);
  const Vector gL = parse_vector(doc, "gL", m, true);
  const Vector gU = parse_vector(doc, "gU", m, true);
  try {
    return make_quadratic_problem(name, Q, c, A, b, gL, gU);
  } catch (const ContractViolation& e) {
    throw ProblemLoadError(std::string("invalid problem file: ") + e.what());
  }
}

ProblemSpec load_problem(const std::string& source) {
  for (const auto& e : registry()) {
    if (e.spec.name == source) return e.spec;
  }
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::is_regular_file(source, ec)) {
    throw ProblemLoadError("'" + source + "' is neither a registered problem nor a file");
  }
  std::ifstream in(source);
  if (!in) throw ProblemLoadError("cannot read '" + source + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return problem_from_json_text(ss.str(), fs::path(source).stem().string());
}

}  // namespace slfforge
