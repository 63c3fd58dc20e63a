#include "lsearch/search.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "lsearch/parallel.hpp"

namespace lsearch {

namespace {

// Scratch buffers for the fixed-point iteration. Layout matches PosteriorQ:
// cell-major, z contiguous.
struct Workspace {
  std::size_t k, m, n;
  std::vector<double> q, qnext;
  std::vector<double> jxz, jyz, jz;    // joint marginals of q(z|x,y) p(x,y)
  std::vector<double> zgx, zgy, zpow;  // conditionals and q(z)^(beta-1)

  Workspace(std::size_t k_, std::size_t m_, std::size_t n_)
      : k(k_), m(m_), n(n_), q(k * m * n), qnext(k * m * n), jxz(m * k), jyz(n * k), jz(k),
        zgx(m * k), zgy(n * k), zpow(k) {}
};

void compute_joint_marginals(const Joint2& p, Workspace& ws) {
  std::fill(ws.jxz.begin(), ws.jxz.end(), 0.0);
  std::fill(ws.jyz.begin(), ws.jyz.end(), 0.0);
  std::fill(ws.jz.begin(), ws.jz.end(), 0.0);
  const std::size_t k = ws.k, m = ws.m, n = ws.n;
  for (std::size_t x = 0; x < m; ++x) {
    for (std::size_t y = 0; y < n; ++y) {
      const double pxy = p(x, y);
      if (pxy == 0.0) continue;
      const double* cell = ws.q.data() + (x * n + y) * k;
      double* jx = ws.jxz.data() + x * k;
      double* jy = ws.jyz.data() + y * k;
      for (std::size_t z = 0; z < k; ++z) {
        const double e = pxy * cell[z];
        jx[z] += e;
        jy[z] += e;
        ws.jz[z] += e;
      }
    }
  }
}

// cmi and H(Z) of the joint implied by the current iterate, reusing the
// marginals from compute_joint_marginals.
void iterate_diagnostics(const Joint2& p, const Workspace& ws, double* cmi_out,
                         double* hz_out) {
  const std::size_t k = ws.k, m = ws.m, n = ws.n;
  double cmi = 0.0;
  for (std::size_t x = 0; x < m; ++x) {
    for (std::size_t y = 0; y < n; ++y) {
      const double pxy = p(x, y);
      if (pxy == 0.0) continue;
      const double* cell = ws.q.data() + (x * n + y) * k;
      const double* jx = ws.jxz.data() + x * k;
      const double* jy = ws.jyz.data() + y * k;
      for (std::size_t z = 0; z < k; ++z) {
        const double e = pxy * cell[z];
        // e <= jx[z] and jy[z] <= jz[z], so both quotients stay well scaled
        // even for denormal masses; e*jz/(jx*jy) can underflow to 0/0.
        if (e > 0.0) cmi += e * (std::log2(e / jx[z]) + std::log2(ws.jz[z] / jy[z]));
      }
    }
  }
  *cmi_out = cmi > 0.0 ? cmi : 0.0;
  *hz_out = entropy_bits(ws.jz.data(), k);
}

void conditionals_from_marginals(Workspace& ws, double beta) {
  const std::size_t k = ws.k, m = ws.m, n = ws.n;
  for (std::size_t x = 0; x < m; ++x) {
    double s = 0.0;
    for (std::size_t z = 0; z < k; ++z) s += ws.jxz[x * k + z];
    if (s > 0.0) {
      for (std::size_t z = 0; z < k; ++z) ws.zgx[x * k + z] = ws.jxz[x * k + z] / s;
    } else {
      std::fill_n(ws.zgx.begin() + x * k, k, 1.0 / static_cast<double>(k));
    }
  }
  for (std::size_t y = 0; y < n; ++y) {
    double s = 0.0;
    for (std::size_t z = 0; z < k; ++z) s += ws.jyz[y * k + z];
    if (s > 0.0) {
      for (std::size_t z = 0; z < k; ++z) ws.zgy[y * k + z] = ws.jyz[y * k + z] / s;
    } else {
      std::fill_n(ws.zgy.begin() + y * k, k, 1.0 / static_cast<double>(k));
    }
  }
  double zsum = 0.0;
  for (std::size_t z = 0; z < k; ++z) zsum += std::max(ws.jz[z], kMassFloor);
  for (std::size_t z = 0; z < k; ++z) {
    ws.zpow[z] = std::pow(std::max(ws.jz[z], kMassFloor) / zsum, beta - 1.0);
  }
}

// One update into ws.qnext; returns max |qnext - q|. Cells with p(x,y) = 0
// keep their previous value.
double step_in_workspace(const Joint2& p, Workspace& ws, double beta) {
  compute_joint_marginals(p, ws);
  conditionals_from_marginals(ws, beta);
  const std::size_t k = ws.k, m = ws.m, n = ws.n;
  double max_change = 0.0;
  for (std::size_t x = 0; x < m; ++x) {
    for (std::size_t y = 0; y < n; ++y) {
      const std::size_t base = (x * n + y) * k;
      const double* cell = ws.q.data() + base;
      double* next = ws.qnext.data() + base;
      if (p(x, y) == 0.0) {
        std::copy_n(cell, k, next);
        continue;
      }
      const double* zx = ws.zgx.data() + x * k;
      const double* zy = ws.zgy.data() + y * k;
      double norm = 0.0;
      for (std::size_t z = 0; z < k; ++z) {
        next[z] = zx[z] * zy[z] * ws.zpow[z];
        norm += next[z];
      }
      if (norm > 0.0 && std::isfinite(norm)) {
        for (std::size_t z = 0; z < k; ++z) {
          next[z] /= norm;
          const double d = std::abs(next[z] - cell[z]);
          if (d > max_change) max_change = d;
        }
      } else {
        // Disjoint supports left nothing to renormalize; restart the cell flat.
        const double u = 1.0 / static_cast<double>(k);
        for (std::size_t z = 0; z < k; ++z) {
          next[z] = u;
          const double d = std::abs(u - cell[z]);
          if (d > max_change) max_change = d;
        }
      }
    }
  }
  return max_change;
}

void check_shapes(const Joint2& p, const PosteriorQ& q) {
  if (q.m() != p.rows() || q.n() != p.cols()) {
    throw std::invalid_argument("posterior shape " + std::to_string(q.m()) + "x" +
                                std::to_string(q.n()) + " does not match joint " +
                                std::to_string(p.rows()) + "x" + std::to_string(p.cols()));
  }
}

}  // namespace

double loss(const Joint2& p, const PosteriorQ& q, double beta) {
  check_shapes(p, q);
  Workspace ws(q.k(), q.m(), q.n());
  ws.q = q.data();
  compute_joint_marginals(p, ws);
  double cmi = 0.0, hz = 0.0;
  iterate_diagnostics(p, ws, &cmi, &hz);
  return cmi + beta * hz;
}

PosteriorQ latent_search_step(const Joint2& p, const PosteriorQ& q, double beta) {
  check_shapes(p, q);
  if (beta < 0.0) throw std::invalid_argument("latent_search_step: beta must be >= 0");
  Workspace ws(q.k(), q.m(), q.n());
  ws.q = q.data();
  step_in_workspace(p, ws, beta);
  return PosteriorQ(q.k(), q.m(), q.n(), std::move(ws.qnext));
}

SearchResult latent_search(const Joint2& p, std::size_t k, const SearchConfig& cfg,
                           const std::optional<PosteriorQ>& init, std::mt19937_64& rng,
                           bool record_trace) {
  if (k == 0) throw std::invalid_argument("latent_search: k must be positive");
  if (cfg.beta < 0.0) throw std::invalid_argument("latent_search: beta must be >= 0");
  if (cfg.max_iters < 0) throw std::invalid_argument("latent_search: negative max_iters");
  const std::size_t m = p.rows(), n = p.cols();

  Workspace ws(k, m, n);
  if (init.has_value()) {
    check_shapes(p, *init);
    if (init->k() != k) {
      throw std::invalid_argument("latent_search: init has k=" + std::to_string(init->k()) +
                                  ", expected " + std::to_string(k));
    }
    ws.q = init->data();
  } else {
    ws.q = PosteriorQ::random(k, m, n, rng).data();
  }

  SearchTrace trace;
  double cmi = 0.0, hz = 0.0;
  auto record = [&](int iteration, double change) {
    iterate_diagnostics(p, ws, &cmi, &hz);
    trace.records.push_back(
        {iteration, cmi + cfg.beta * hz, cmi, hz, change});
  };

  if (record_trace) {
    compute_joint_marginals(p, ws);
    record(0, 0.0);
  }
  int iters = 0;
  for (int i = 1; i <= cfg.max_iters; ++i) {
    const double change = step_in_workspace(p, ws, cfg.beta);
    ws.q.swap(ws.qnext);
    iters = i;
    if (record_trace) {
      compute_joint_marginals(p, ws);
      record(i, change);
    }
    if (change < cfg.fixed_point_tol) {
      trace.converged = true;
      break;
    }
  }
  trace.iterations_run = iters;
  if (!record_trace) {
    compute_joint_marginals(p, ws);
    record(iters, 0.0);
  }
  return SearchResult{PosteriorQ(k, m, n, std::move(ws.q)), std::move(trace)};
}

SearchResult latent_search(const Joint2& p, std::size_t k, const SearchConfig& cfg) {
  std::mt19937_64 rng = make_rng(cfg.seed, 0, 0);
  return latent_search(p, k, cfg, std::nullopt, rng, true);
}

double stationarity_residual(const Joint2& p, const PosteriorQ& q, double beta) {
  check_shapes(p, q);
  Workspace ws(q.k(), q.m(), q.n());
  ws.q = q.data();
  return step_in_workspace(p, ws, beta);
}

std::vector<TradeoffPoint> frontier_sweep(const Joint2& p, std::size_t k,
                                          const std::vector<double>& betas,
                                          const SearchConfig& cfg, int workers) {
  if (betas.empty()) throw std::invalid_argument("frontier_sweep: empty beta list");
  for (double b : betas) {
    if (b < 0.0) throw std::invalid_argument("frontier_sweep: beta must be >= 0");
  }
  if (cfg.restarts <= 0) throw std::invalid_argument("frontier_sweep: restarts must be > 0");
  const std::size_t units = betas.size() * static_cast<std::size_t>(cfg.restarts);
  std::vector<TradeoffPoint> points(units);
  parallel_for(units, workers, [&](std::size_t u) {
    const std::size_t bi = u / static_cast<std::size_t>(cfg.restarts);
    const int restart = static_cast<int>(u % static_cast<std::size_t>(cfg.restarts));
    SearchConfig run_cfg = cfg;
    run_cfg.beta = betas[bi];
    std::mt19937_64 rng = make_rng(cfg.seed, bi, static_cast<std::uint64_t>(restart));
    SearchResult res = latent_search(p, k, run_cfg, std::nullopt, rng, false);
    const TraceRecord& fin = res.trace.records.back();
    points[u] = {run_cfg.beta,    restart,
                 fin.entropy_z_bits, fin.cmi_bits,
                 res.trace.iterations_run, res.trace.converged};
  });
  std::stable_sort(points.begin(), points.end(), [](const TradeoffPoint& a, const TradeoffPoint& b) {
    if (a.beta != b.beta) return a.beta < b.beta;
    return a.restart_id < b.restart_id;
  });
  return points;
}

std::vector<TradeoffPoint> pareto_lower_envelope(std::vector<TradeoffPoint> points) {
  std::stable_sort(points.begin(), points.end(), [](const TradeoffPoint& a, const TradeoffPoint& b) {
    if (a.entropy_z_bits != b.entropy_z_bits) return a.entropy_z_bits < b.entropy_z_bits;
    return a.cmi_bits < b.cmi_bits;
  });
  std::vector<TradeoffPoint> envelope;
  for (const TradeoffPoint& pt : points) {
    if (envelope.empty() || pt.cmi_bits < envelope.back().cmi_bits) envelope.push_back(pt);
  }
  return envelope;
}

}  // namespace lsearch
