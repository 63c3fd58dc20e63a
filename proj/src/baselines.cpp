#include "lsearch/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "lsearch/io.hpp"

namespace lsearch {

namespace {

constexpr double kLn2 = 0.69314718055994530942;

struct QMarginals {
  std::vector<double> jxz, jyz, jz;  // marginals of q(z|x,y) p(x,y)
};

QMarginals q_marginals(const Joint2& p, const std::vector<double>& q, std::size_t k) {
  const std::size_t m = p.rows(), n = p.cols();
  QMarginals mg{std::vector<double>(m * k, 0.0), std::vector<double>(n * k, 0.0),
                std::vector<double>(k, 0.0)};
  for (std::size_t x = 0; x < m; ++x) {
    for (std::size_t y = 0; y < n; ++y) {
      const double pxy = p(x, y);
      if (pxy == 0.0) continue;
      const double* cell = q.data() + (x * n + y) * k;
      for (std::size_t z = 0; z < k; ++z) {
        const double e = pxy * cell[z];
        mg.jxz[x * k + z] += e;
        mg.jyz[y * k + z] += e;
        mg.jz[z] += e;
      }
    }
  }
  return mg;
}

void diagnostics_from_marginals(const Joint2& p, const std::vector<double>& q, std::size_t k,
                                const QMarginals& mg, double* cmi_out, double* hz_out) {
  const std::size_t m = p.rows(), n = p.cols();
  double cmi = 0.0;
  for (std::size_t x = 0; x < m; ++x) {
    for (std::size_t y = 0; y < n; ++y) {
      const double pxy = p(x, y);
      if (pxy == 0.0) continue;
      const double* cell = q.data() + (x * n + y) * k;
      for (std::size_t z = 0; z < k; ++z) {
        const double e = pxy * cell[z];
        if (e > 0.0) cmi += e * std::log2(e * mg.jz[z] / (mg.jxz[x * k + z] * mg.jyz[y * k + z]));
      }
    }
  }
  *cmi_out = cmi > 0.0 ? cmi : 0.0;
  *hz_out = entropy_bits(mg.jz.data(), k);
}

}  // namespace

std::vector<double> loss_gradient(const Joint2& p, const PosteriorQ& q, double beta) {
  const std::size_t k = q.k(), m = q.m(), n = q.n();
  if (m != p.rows() || n != p.cols()) {
    throw std::invalid_argument("loss_gradient: shape mismatch");
  }
  QMarginals mg = q_marginals(p, q.data(), k);
  // Conditionals with zero-mass fallbacks, floored inside the log.
  std::vector<double> zgx(m * k), zgy(n * k), zn(k);
  for (std::size_t x = 0; x < m; ++x) {
    double s = 0.0;
    for (std::size_t z = 0; z < k; ++z) s += mg.jxz[x * k + z];
    for (std::size_t z = 0; z < k; ++z) {
      zgx[x * k + z] = s > 0.0 ? std::max(mg.jxz[x * k + z] / s, kMassFloor)
                               : 1.0 / static_cast<double>(k);
    }
  }
  for (std::size_t y = 0; y < n; ++y) {
    double s = 0.0;
    for (std::size_t z = 0; z < k; ++z) s += mg.jyz[y * k + z];
    for (std::size_t z = 0; z < k; ++z) {
      zgy[y * k + z] = s > 0.0 ? std::max(mg.jyz[y * k + z] / s, kMassFloor)
                               : 1.0 / static_cast<double>(k);
    }
  }
  double zsum = 0.0;
  for (std::size_t z = 0; z < k; ++z) zsum += std::max(mg.jz[z], kMassFloor);
  for (std::size_t z = 0; z < k; ++z) zn[z] = std::max(mg.jz[z], kMassFloor) / zsum;

  std::vector<double> grad(k * m * n, 0.0);
  for (std::size_t x = 0; x < m; ++x) {
    for (std::size_t y = 0; y < n; ++y) {
      const double pxy = p(x, y);
      if (pxy == 0.0) continue;  // frozen cells carry no loss gradient
      const std::size_t base = (x * n + y) * k;
      for (std::size_t z = 0; z < k; ++z) {
        const double ratio = q.data()[base + z] * std::pow(zn[z], 1.0 - beta) /
                             (zgx[x * k + z] * zgy[y * k + z]);
        grad[base + z] = pxy * (std::log(ratio) - beta) / kLn2;
      }
    }
  }
  return grad;
}

void project_to_simplex(double* v, std::size_t n) {
  std::vector<double> u(v, v + n);
  std::sort(u.begin(), u.end(), std::greater<double>());
  double cum = 0.0, tau = 0.0;
  std::size_t rho = 0;
  for (std::size_t j = 0; j < n; ++j) {
    cum += u[j];
    const double t = (cum - 1.0) / static_cast<double>(j + 1);
    if (u[j] - t > 0.0) {
      rho = j + 1;
      tau = t;
    }
  }
  for (std::size_t i = 0; i < n; ++i) v[i] = std::max(v[i] - tau, 0.0);
  (void)rho;
}

GdResult gradient_descent_search(const Joint2& p, std::size_t k, double beta,
                                 const BaselineConfig& cfg, std::mt19937_64& rng,
                                 const std::optional<PosteriorQ>& init) {
  if (k == 0) throw std::invalid_argument("gradient_descent_search: k must be positive");
  const std::size_t m = p.rows(), n = p.cols();
  std::vector<double> q =
      init.has_value() ? init->data() : PosteriorQ::random(k, m, n, rng).data();
  if (init.has_value() && (init->k() != k || init->m() != m || init->n() != n)) {
    throw std::invalid_argument("gradient_descent_search: init shape mismatch");
  }

  GdResult out{PosteriorQ::uniform(k, m, n), {}, false};
  double best_loss = std::numeric_limits<double>::infinity();
  auto record = [&](int iteration, double change) {
    QMarginals mg = q_marginals(p, q, k);
    double cmi = 0.0, hz = 0.0;
    diagnostics_from_marginals(p, q, k, mg, &cmi, &hz);
    const double l = cmi + beta * hz;
    out.trace.records.push_back({iteration, l, cmi, hz, change});
    return l;
  };
  best_loss = record(0, 0.0);

  std::vector<double> prev(q.size());
  for (int i = 1; i <= cfg.max_iters; ++i) {
    PosteriorQ cur(k, m, n, q);
    std::vector<double> grad = loss_gradient(p, cur, beta);
    bool finite = true;
    for (double g : grad) {
      if (!std::isfinite(g)) {
        finite = false;
        break;
      }
    }
    if (!finite) {
      out.diverged = true;
      out.trace.iterations_run = i - 1;
      break;
    }
    prev = q;
    for (std::size_t c = 0; c < m * n; ++c) {
      double* cell = q.data() + c * k;
      for (std::size_t z = 0; z < k; ++z) cell[z] -= cfg.step_size * grad[c * k + z];
      project_to_simplex(cell, k);
    }
    double change = 0.0;
    for (std::size_t j = 0; j < q.size(); ++j) change = std::max(change, std::abs(q[j] - prev[j]));
    const double l = record(i, change);
    out.trace.iterations_run = i;
    if (!std::isfinite(l) || l > best_loss + kGdDivergeBits) {
      out.diverged = true;
      break;
    }
    if (l < best_loss) best_loss = l;
    if (change < 1e-14) {
      out.trace.converged = true;
      break;
    }
  }
  out.q = PosteriorQ(k, m, n, std::move(q));
  return out;
}

PlsaFactors plsa_from_posterior(const Joint2& p, const PosteriorQ& q) {
  const std::size_t k = q.k(), m = q.m(), n = q.n();
  QMarginals mg = q_marginals(p, q.data(), k);
  std::vector<Dist1> xz, yz;
  for (std::size_t z = 0; z < k; ++z) {
    std::vector<double> row_x(m), row_y(n);
    if (mg.jz[z] > 0.0) {
      for (std::size_t x = 0; x < m; ++x) row_x[x] = mg.jxz[x * k + z] / mg.jz[z];
      for (std::size_t y = 0; y < n; ++y) row_y[y] = mg.jyz[y * k + z] / mg.jz[z];
    } else {
      std::fill(row_x.begin(), row_x.end(), 1.0 / static_cast<double>(m));
      std::fill(row_y.begin(), row_y.end(), 1.0 / static_cast<double>(n));
    }
    xz.emplace_back(std::move(row_x));
    yz.emplace_back(std::move(row_y));
  }
  double total = std::accumulate(mg.jz.begin(), mg.jz.end(), 0.0);
  for (double& e : mg.jz) e /= total;
  return PlsaFactors{Dist1(std::move(mg.jz)), std::move(xz), std::move(yz)};
}

PosteriorQ plsa_responsibilities(const PlsaFactors& factors, std::size_t m, std::size_t n) {
  const std::size_t k = factors.z_prior.size();
  std::vector<double> q(k * m * n);
  for (std::size_t x = 0; x < m; ++x) {
    for (std::size_t y = 0; y < n; ++y) {
      double* cell = q.data() + (x * n + y) * k;
      double s = 0.0;
      for (std::size_t z = 0; z < k; ++z) {
        cell[z] = factors.z_prior[z] * factors.x_given_z[z][x] * factors.y_given_z[z][y];
        s += cell[z];
      }
      if (s > 0.0) {
        for (std::size_t z = 0; z < k; ++z) cell[z] /= s;
      } else {
        std::fill_n(cell, k, 1.0 / static_cast<double>(k));
      }
    }
  }
  return PosteriorQ(k, m, n, std::move(q));
}

PlsaFactors random_plsa_factors(std::size_t k, std::size_t m, std::size_t n,
                                std::mt19937_64& rng) {
  std::vector<Dist1> xz, yz;
  Dist1 zp = sample_simplex(k, 1.0, rng);
  for (std::size_t z = 0; z < k; ++z) {
    xz.push_back(sample_simplex(m, 1.0, rng));
    yz.push_back(sample_simplex(n, 1.0, rng));
  }
  return PlsaFactors{std::move(zp), std::move(xz), std::move(yz)};
}

EmResult em_plsa(const Joint2& p, std::size_t k, const PlsaFactors& init, int iters) {
  if (init.z_prior.size() != k || init.x_given_z.size() != k || init.y_given_z.size() != k) {
    throw std::invalid_argument("em_plsa: init factor count does not match k");
  }
  const std::size_t m = p.rows(), n = p.cols();
  for (std::size_t z = 0; z < k; ++z) {
    if (init.x_given_z[z].size() != m || init.y_given_z[z].size() != n) {
      throw std::invalid_argument("em_plsa: init factor dimensions do not match the joint");
    }
  }
  EmResult out{init, {}};
  for (int it = 0; it <= iters; ++it) {
    PosteriorQ resp = plsa_responsibilities(out.factors, m, n);
    // Weighted log-likelihood of the current factors.
    double ll = 0.0;
    for (std::size_t x = 0; x < m; ++x) {
      for (std::size_t y = 0; y < n; ++y) {
        const double pxy = p(x, y);
        if (pxy == 0.0) continue;
        double mix = 0.0;
        for (std::size_t z = 0; z < k; ++z) {
          mix += out.factors.z_prior[z] * out.factors.x_given_z[z][x] *
                 out.factors.y_given_z[z][y];
        }
        ll += pxy * std::log2(std::max(mix, 1e-300));
      }
    }
    QMarginals mg = q_marginals(p, resp.data(), k);
    double cmi = 0.0, hz = 0.0;
    diagnostics_from_marginals(p, resp.data(), k, mg, &cmi, &hz);
    out.trace.push_back({it, ll, cmi, hz});
    if (it == iters) break;
    // M-step from the p-weighted responsibilities already in mg.
    out.factors = plsa_from_posterior(p, resp);
  }
  return out;
}

NmfResult nmf_factorize(const Joint2& p, std::size_t k, const BaselineConfig& cfg,
                        std::mt19937_64& rng) {
  if (k == 0) throw std::invalid_argument("nmf_factorize: k must be positive");
  const std::size_t m = p.rows(), n = p.cols();
  const Eigen::MatrixXd& M = p.probs();

  const double scale = std::sqrt(1.0 / static_cast<double>(k * m * n));
  std::uniform_real_distribution<double> unif(0.0, 2.0 * scale);
  Eigen::MatrixXd U(m, k), V(k, n);
  for (std::size_t x = 0; x < m; ++x) {
    for (std::size_t z = 0; z < k; ++z) U(x, z) = unif(rng);
  }
  for (std::size_t z = 0; z < k; ++z) {
    for (std::size_t y = 0; y < n; ++y) V(z, y) = unif(rng);
  }

  auto residual = [&](const Eigen::MatrixXd& u, const Eigen::MatrixXd& v) {
    return (M - u * v).cwiseAbs().sum();
  };
  // Polyak-ratio subgradient steps toward the known optimum 0; the best
  // iterate of each inner run is kept so the outer residual cannot climb.
  auto inner = [&](Eigen::MatrixXd& W, auto grad_fn, auto res_fn) {
    Eigen::MatrixXd best = W;
    double best_f = res_fn(W);
    for (int t = 0; t < cfg.nmf_inner_iters; ++t) {
      const double f = res_fn(W);
      if (f < best_f) {
        best_f = f;
        best = W;
      }
      if (f <= 0.0) break;
      Eigen::MatrixXd g = grad_fn(W);
      const double gnorm2 = g.squaredNorm();
      if (gnorm2 <= 0.0) break;
      const double eta = std::min(f / gnorm2, 1e6);
      W -= eta * g;
      W = W.cwiseMax(0.0);
    }
    if (res_fn(W) > best_f) W = best;
  };

  NmfResult out;
  out.residual_per_outer.push_back(residual(U, V));
  for (int outer = 0; outer < cfg.max_iters; ++outer) {
    inner(
        U, [&](const Eigen::MatrixXd& W) -> Eigen::MatrixXd {
          Eigen::MatrixXd R = M - W * V;
          return -R.cwiseSign() * V.transpose();
        },
        [&](const Eigen::MatrixXd& W) { return residual(W, V); });
    inner(
        V, [&](const Eigen::MatrixXd& W) -> Eigen::MatrixXd {
          Eigen::MatrixXd R = M - U * W;
          return -U.transpose() * R.cwiseSign();
        },
        [&](const Eigen::MatrixXd& W) { return residual(U, W); });
    out.residual_per_outer.push_back(residual(U, V));
  }
  // Canonicalize: make U column-stochastic, folding scales into V. Dead
  // columns stay zero.
  for (std::size_t z = 0; z < k; ++z) {
    const double c = U.col(z).sum();
    if (c > 0.0) {
      U.col(z) /= c;
      V.row(z) *= c;
    }
  }
  out.u = std::move(U);
  out.v = std::move(V);
  out.l1_residual = residual(out.u, out.v);
  return out;
}

PosteriorQ nmf_implied_posterior(const Joint2& p, const Eigen::MatrixXd& u,
                                 const Eigen::MatrixXd& v) {
  const std::size_t m = p.rows(), n = p.cols();
  const std::size_t k = static_cast<std::size_t>(u.cols());
  if (static_cast<std::size_t>(u.rows()) != m || static_cast<std::size_t>(v.cols()) != n ||
      v.rows() != u.cols()) {
    throw std::invalid_argument("nmf_implied_posterior: factor shapes do not match the joint");
  }
  std::vector<double> q(k * m * n);
  for (std::size_t x = 0; x < m; ++x) {
    for (std::size_t y = 0; y < n; ++y) {
      double* cell = q.data() + (x * n + y) * k;
      double s = 0.0;
      for (std::size_t z = 0; z < k; ++z) {
        cell[z] = u(x, z) * v(z, y);
        s += cell[z];
      }
      if (s > 0.0) {
        for (std::size_t z = 0; z < k; ++z) cell[z] /= s;
      } else {
        std::fill_n(cell, k, 1.0 / static_cast<double>(k));
      }
    }
  }
  return PosteriorQ(k, m, n, std::move(q));
}

void write_comparison_csv(const std::string& path, const std::vector<ComparisonRow>& rows) {
  std::ostringstream out;
  out << "algorithm,beta_or_k,restart_id,iteration,loss_bits,cmi_bits,entropy_z_bits,status\n";
  for (const ComparisonRow& r : rows) {
    out << r.algorithm << ',' << format_double(r.beta_or_k) << ',' << r.restart_id << ','
        << r.iteration << ',' << format_double(r.loss_bits) << ',' << format_double(r.cmi_bits)
        << ',' << format_double(r.entropy_z_bits) << ',' << r.status << '\n';
  }
  write_text_file(path, out.str());
}

}  // namespace lsearch
