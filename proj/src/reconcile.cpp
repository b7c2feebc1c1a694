#include "reconcile.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "common.hpp"
#include "solvers.hpp"

namespace hicast {

ReconcileMethod parse_reconcile_method(const std::string& name) {
  if (name == "base" || name == "none") return ReconcileMethod::base;
  if (name == "bottom-up" || name == "bottom_up") return ReconcileMethod::bottom_up;
  if (name == "ols") return ReconcileMethod::ols;
  if (name == "wls-struct" || name == "wls_struct") return ReconcileMethod::wls_struct;
  if (name == "wls-var" || name == "wls_var") return ReconcileMethod::wls_var;
  if (name == "mint-shrink" || name == "mint_shrink") return ReconcileMethod::mint_shrink;
  if (name == "erm") return ReconcileMethod::erm;
  fail(ErrorCode::invalid_argument,
       "unknown reconciliation method '" + name +
           "' (base|bottom-up|ols|wls-struct|wls-var|mint-shrink|erm)");
}

std::string reconcile_method_name(ReconcileMethod m) {
  switch (m) {
    case ReconcileMethod::base: return "base";
    case ReconcileMethod::bottom_up: return "bottom-up";
    case ReconcileMethod::ols: return "ols";
    case ReconcileMethod::wls_struct: return "wls-struct";
    case ReconcileMethod::wls_var: return "wls-var";
    case ReconcileMethod::mint_shrink: return "mint-shrink";
    case ReconcileMethod::erm: return "erm";
  }
  return "?";
}

namespace {

Reconciler make_shell(ReconcileMethod method, const Hierarchy& h) {
  Reconciler r;
  r.method = method;
  r.S = h.S;
  r.n_a = h.n_a;
  r.n_b = h.n_b;
  return r;
}

// Sample covariance of the rows of a residual panel.
DenseMatrix row_covariance(const DenseMatrix& resid) {
  const std::size_t n = resid.n_rows, t = resid.n_cols;
  DenseMatrix centered = resid;
  for (std::size_t i = 0; i < n; ++i) {
    double mean = 0.0;
    for (std::size_t k = 0; k < t; ++k) mean += resid(i, k);
    mean /= static_cast<double>(t);
    for (std::size_t k = 0; k < t; ++k) centered(i, k) -= mean;
  }
  DenseMatrix cov(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < t; ++k) s += centered(i, k) * centered(j, k);
      s /= static_cast<double>(t - 1);
      cov(i, j) = s;
      cov(j, i) = s;
    }
  }
  return cov;
}

void check_residuals(const Hierarchy& h, const ResidualPanel* residuals,
                     ReconcileMethod method) {
  require(residuals != nullptr, ErrorCode::invalid_argument,
          reconcile_method_name(method) + " requires an in-sample residual panel");
  require(residuals->values.n_rows == h.n_rows(), ErrorCode::invalid_argument,
          "residual panel row count does not match the hierarchy");
  require(residuals->values.n_cols >= 2, ErrorCode::invalid_argument,
          "residual panel needs at least two timesteps");
}

}  // namespace

double shrinkage_intensity(const DenseMatrix& resid) {
  const std::size_t n = resid.n_rows, t = resid.n_cols;
  require(t >= 2, ErrorCode::invalid_argument, "shrinkage: need at least two columns");
  DenseMatrix x = resid;
  std::vector<double> sd(n);
  for (std::size_t i = 0; i < n; ++i) {
    double mean = 0.0;
    for (std::size_t k = 0; k < t; ++k) mean += x(i, k);
    mean /= static_cast<double>(t);
    double var = 0.0;
    for (std::size_t k = 0; k < t; ++k) {
      x(i, k) -= mean;
      var += x(i, k) * x(i, k);
    }
    var /= static_cast<double>(t - 1);
    sd[i] = std::sqrt(std::max(var, 1e-12));
    for (std::size_t k = 0; k < t; ++k) x(i, k) /= sd[i];
  }

  // lambda = sum Var(r_ij) / sum r_ij^2 over off-diagonal pairs, with the
  // unbiased variance estimate of the correlations.
  const double tf = static_cast<double>(t);
  double sum_var = 0.0, sum_sq = 0.0;
  std::vector<double> w(t);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double wbar = 0.0;
      for (std::size_t k = 0; k < t; ++k) {
        w[k] = x(i, k) * x(j, k);
        wbar += w[k];
      }
      wbar /= tf;
      const double r = wbar * tf / (tf - 1.0);
      double var_w = 0.0;
      for (std::size_t k = 0; k < t; ++k) var_w += (w[k] - wbar) * (w[k] - wbar);
      sum_var += tf / ((tf - 1.0) * (tf - 1.0) * (tf - 1.0)) * var_w;
      sum_sq += r * r;
    }
  }
  if (sum_sq <= 0.0) return 1.0;
  return std::min(1.0, std::max(0.0, sum_var / sum_sq));
}

Reconciler fit_with_weight(ReconcileMethod method, const Hierarchy& h, DenseMatrix w) {
  require(w.n_rows == h.n_rows() && w.n_cols == h.n_rows(),
          ErrorCode::invalid_argument, "weight matrix must be n x n");
  Reconciler r = make_shell(method, h);
  const std::size_t n = h.n_rows(), n_a = h.n_a, n_b = h.n_b;

  // J as a dense block for the final subtraction.
  DenseMatrix j(n_b, n);
  for (std::size_t b = 0; b < n_b; ++b) j(b, n_a + b) = 1.0;
  if (n_a == 0) {
    r.G = std::move(j);
    return r;
  }

  Partition part = partition(h);
  DenseMatrix u = to_dense(part.U);                 // n x n_a
  DenseMatrix wu = matmul(w, u);                    // n x n_a
  DenseMatrix m = matmul(transposed(u), wu);        // n_a x n_a, symmetric
  DenseMatrix z = solve_spd(std::move(m), transposed(u));  // n_a x n

  // K = J W U picks the bottom rows of W U.
  DenseMatrix k(n_b, n_a);
  for (std::size_t b = 0; b < n_b; ++b)
    for (std::size_t c = 0; c < n_a; ++c) k(b, c) = wu(n_a + b, c);

  DenseMatrix kz = matmul(k, z);
  r.G = std::move(j);
  for (std::size_t i = 0; i < r.G.values.size(); ++i) r.G.values[i] -= kz.values[i];
  return r;
}

Reconciler fit_reconciler(ReconcileMethod method, const Hierarchy& h,
                          const ResidualPanel* residuals) {
  const std::size_t n = h.n_rows();
  switch (method) {
    case ReconcileMethod::base:
    case ReconcileMethod::bottom_up:
      return make_shell(method, h);
    case ReconcileMethod::ols:
      return fit_with_weight(method, h, DenseMatrix::identity(n));
    case ReconcileMethod::wls_struct: {
      DenseMatrix w(n, n);
      std::vector<double> rs = row_sums(h.S);
      for (std::size_t i = 0; i < n; ++i) w(i, i) = rs[i];
      return fit_with_weight(method, h, std::move(w));
    }
    case ReconcileMethod::wls_var: {
      check_residuals(h, residuals, method);
      const DenseMatrix& resid = residuals->values;
      DenseMatrix w(n, n);
      const std::size_t t = resid.n_cols;
      for (std::size_t i = 0; i < n; ++i) {
        double mean = 0.0;
        for (std::size_t k = 0; k < t; ++k) mean += resid(i, k);
        mean /= static_cast<double>(t);
        double var = 0.0;
        for (std::size_t k = 0; k < t; ++k)
          var += (resid(i, k) - mean) * (resid(i, k) - mean);
        w(i, i) = std::max(var / static_cast<double>(t - 1), 1e-12);
      }
      return fit_with_weight(method, h, std::move(w));
    }
    case ReconcileMethod::mint_shrink: {
      check_residuals(h, residuals, method);
      DenseMatrix cov = row_covariance(residuals->values);
      const double lambda = shrinkage_intensity(residuals->values);
      DenseMatrix w(n, n);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j)
          w(i, j) = i == j ? std::max(cov(i, i), 1e-12)
                           : (1.0 - lambda) * cov(i, j);
      }
      Reconciler r = fit_with_weight(method, h, std::move(w));
      r.shrinkage = lambda;
      return r;
    }
    case ReconcileMethod::erm:
      fail(ErrorCode::invalid_argument,
           "erm needs training matrices; use fit_erm");
  }
  fail(ErrorCode::internal, "unreachable");
}

Reconciler fit_erm(const Hierarchy& h, const DenseMatrix& y_train,
                   const DenseMatrix& yhat_train) {
  require(y_train.n_rows == h.n_rows() && yhat_train.n_rows == h.n_rows(),
          ErrorCode::invalid_argument, "fit_erm: matrices must have n rows");
  require(y_train.n_cols == yhat_train.n_cols, ErrorCode::invalid_argument,
          "fit_erm: column counts differ");
  Reconciler r = make_shell(ReconcileMethod::erm, h);
  if (y_train.n_cols < h.n_rows()) {
    r.warnings.push_back(
        "erm: fewer training columns than hierarchy nodes (" +
        std::to_string(y_train.n_cols) + " < " + std::to_string(h.n_rows()) +
        "); the fit may be underdetermined");
  }

  // min_P ||Y - S P Yhat||_F solved as S+ Y Yhat+ via two least squares.
  DenseMatrix z = lstsq(to_dense(h.S), y_train);  // n_b x T
  bool rank_deficient = false;
  DenseMatrix pt = lstsq(transposed(yhat_train), transposed(z), &rank_deficient);
  r.G = transposed(pt);
  r.used_pseudo_inverse = rank_deficient;
  return r;
}

std::vector<double> reconcile(const Reconciler& r, std::span<const double> base_forecasts) {
  require(base_forecasts.size() == r.n_rows(), ErrorCode::invalid_argument,
          "reconcile: expected " + std::to_string(r.n_rows()) + " base forecasts");
  if (r.method == ReconcileMethod::base)
    return {base_forecasts.begin(), base_forecasts.end()};

  std::vector<double> bottom(r.n_b, 0.0);
  if (r.method == ReconcileMethod::bottom_up) {
    for (std::size_t b = 0; b < r.n_b; ++b) bottom[b] = base_forecasts[r.n_a + b];
  } else {
    for (std::size_t b = 0; b < r.n_b; ++b) {
      double s = 0.0;
      for (std::size_t c = 0; c < r.n_rows(); ++c) s += r.G(b, c) * base_forecasts[c];
      bottom[b] = s;
    }
  }
  DenseMatrix bcol(r.n_b, 1);
  for (std::size_t b = 0; b < r.n_b; ++b) bcol(b, 0) = bottom[b];
  DenseMatrix out = spmm(r.S, bcol);
  return out.values;
}

std::vector<double> bottom_up(const Hierarchy& h, std::span<const double> bottom_forecasts) {
  require(bottom_forecasts.size() == h.n_b, ErrorCode::invalid_argument,
          "bottom_up: expected " + std::to_string(h.n_b) + " bottom forecasts");
  DenseMatrix bcol(h.n_b, 1);
  for (std::size_t b = 0; b < h.n_b; ++b) bcol(b, 0) = bottom_forecasts[b];
  return spmm(h.S, bcol).values;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

std::string reconciler_to_json(const Reconciler& r) {
  nlohmann::json j;
  j["format"] = "hicast-reconciler";
  j["method"] = reconcile_method_name(r.method);
  j["n_a"] = r.n_a;
  j["n_b"] = r.n_b;
  j["shrinkage"] = r.shrinkage;
  j["used_pseudo_inverse"] = r.used_pseudo_inverse;
  nlohmann::json s;
  s["rows"] = nlohmann::json::array();
  s["cols"] = nlohmann::json::array();
  const auto off = r.S.row_offsets();
  const auto cols = r.S.col_indices();
  for (std::size_t i = 0; i < r.S.n_rows(); ++i)
    for (std::size_t p = off[i]; p < off[i + 1]; ++p) {
      s["rows"].push_back(i);
      s["cols"].push_back(cols[p]);
    }
  j["summing_matrix"] = std::move(s);
  if (r.G.values.empty()) j["g"] = nullptr;
  else j["g"] = r.G.values;
  return j.dump();
}

Reconciler reconciler_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::data, std::string("reconciler: invalid JSON: ") + e.what());
  }
  require(j.value("format", "") == "hicast-reconciler", ErrorCode::data,
          "reconciler: not a hicast reconciler file");
  Reconciler r;
  r.method = parse_reconcile_method(j.at("method").get<std::string>());
  r.n_a = j.at("n_a").get<std::size_t>();
  r.n_b = j.at("n_b").get<std::size_t>();
  r.shrinkage = j.value("shrinkage", 0.0);
  r.used_pseudo_inverse = j.value("used_pseudo_inverse", false);
  std::vector<std::size_t> rows = j.at("summing_matrix").at("rows").get<std::vector<std::size_t>>();
  std::vector<std::size_t> cols = j.at("summing_matrix").at("cols").get<std::vector<std::size_t>>();
  std::vector<double> ones(rows.size(), 1.0);
  r.S = SparseMatrix::from_triplets(rows, cols, ones, r.n_a + r.n_b, r.n_b);
  if (!j.at("g").is_null()) {
    r.G = DenseMatrix(r.n_b, r.n_a + r.n_b);
    std::vector<double> vals = j.at("g").get<std::vector<double>>();
    require(vals.size() == r.G.values.size(), ErrorCode::data,
            "reconciler: G size mismatch");
    r.G.values = std::move(vals);
  }
  return r;
}

void save_reconciler(const Reconciler& r, const std::string& path) {
  std::ofstream out(path);
  require(out.good(), ErrorCode::io, "cannot open '" + path + "' for writing");
  out << reconciler_to_json(r) << "\n";
}

Reconciler load_reconciler(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::io, "cannot open reconciler file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return reconciler_from_json(buf.str());
}

}  // namespace hicast
