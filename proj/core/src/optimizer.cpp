#include "handfit/optimizer.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/Geometry>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace handfit {

// ---------------------------------------------------------------------------
// rigid alignment
// ---------------------------------------------------------------------------

RigidTransform fit_procrustes(const std::vector<Eigen::Vector3d>& src,
                              const std::vector<Eigen::Vector3d>& dst) {
  if (src.size() != dst.size()) throw std::runtime_error("procrustes: size mismatch");
  const int n = int(src.size());
  if (n < 3) throw std::runtime_error("procrustes: needs at least 3 point pairs");

  Eigen::Vector3d cs = Eigen::Vector3d::Zero(), cd = Eigen::Vector3d::Zero();
  for (int i = 0; i < n; ++i) {
    cs += src[i];
    cd += dst[i];
  }
  cs /= n;
  cd /= n;

  Eigen::Matrix3d scatter = Eigen::Matrix3d::Zero();  // of the source cloud
  Eigen::Matrix3d h = Eigen::Matrix3d::Zero();        // cross covariance
  for (int i = 0; i < n; ++i) {
    Eigen::Vector3d a = src[i] - cs, b = dst[i] - cd;
    scatter += a * a.transpose();
    h += a * b.transpose();
  }

  // a source cloud that spans no plane leaves the rotation under-determined
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> span(scatter);
  if (span.eigenvalues()[1] <= 1e-10 * std::max(span.eigenvalues()[2], 1e-30))
    throw std::runtime_error("procrustes: source points are collinear");

  Eigen::JacobiSVD<Eigen::Matrix3d> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
  d(2, 2) = (svd.matrixV() * svd.matrixU().transpose()).determinant() < 0 ? -1.0 : 1.0;
  RigidTransform rt;
  rt.R = svd.matrixV() * d * svd.matrixU().transpose();
  rt.t = cd - rt.R * cs;
  return rt;
}

// ---------------------------------------------------------------------------
// articulation prior
// ---------------------------------------------------------------------------

namespace {

struct Sampler {
  std::mt19937_64 rng;
  explicit Sampler(std::uint64_t seed) : rng(seed) {}
  double uni() { return double(rng() >> 11) * 0x1.0p-53; }
  double med3() {  // median of three uniforms: a smooth bump on [0,1]
    double a = uni(), b = uni(), c = uni();
    return std::max(std::min(a, b), std::min(std::max(a, b), c));
  }
};

double clamp01(double x) { return std::min(1.0, std::max(0.0, x)); }

}  // namespace

Eigen::MatrixXd sample_pose_corpus(const HandModel& model, int count, std::uint64_t seed) {
  if (count < 1) throw std::runtime_error("pose corpus: count must be positive");
  auto layout = dof_layout(model);
  Sampler s(seed);
  Eigen::MatrixXd corpus(count, kNumPoseDof);

  for (int i = 0; i < count; ++i) {
    // shared grasp level drives all flexions; chains curl together
    double grasp = s.med3();
    double flex[kNumFingers][3];
    for (int f = 0; f < kNumFingers; ++f) {
      double base = clamp01(grasp + 0.35 * (s.med3() - 0.5));
      flex[f][0] = clamp01(base + 0.08 * (s.uni() - 0.5));
      flex[f][1] = clamp01(0.10 + 0.85 * base + 0.08 * (s.uni() - 0.5));
      flex[f][2] = clamp01(0.15 + 0.75 * flex[f][1] + 0.08 * (s.uni() - 0.5));
    }
    for (size_t d = 0; d < layout.size(); ++d) {
      double frac;
      if (layout[d].axis == 0) {
        frac = flex[layout[d].joint / 3][layout[d].joint % 3];
      } else if (layout[d].axis == 1) {
        frac = 0.5 + 0.4 * (s.med3() - 0.5);  // abduction stays near neutral
      } else {
        frac = 0.5 + 0.3 * (s.med3() - 0.5);  // twist barely moves
      }
      corpus(i, int(d)) = model.dof_lower[d] + frac * (model.dof_upper[d] - model.dof_lower[d]);
    }
  }
  return corpus;
}

PcaPrior build_pca_prior(const Eigen::MatrixXd& corpus, int components) {
  const int n = int(corpus.rows()), dim = int(corpus.cols());
  if (n < 2) throw std::runtime_error("pose prior: corpus needs at least two samples");
  if (components < 1 || components > dim)
    throw std::runtime_error("pose prior: component count out of range");

  PcaPrior prior;
  prior.mean = corpus.colwise().mean();
  Eigen::MatrixXd centered = corpus.rowwise() - prior.mean.transpose();
  Eigen::MatrixXd cov = centered.transpose() * centered / double(n - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  if (es.info() != Eigen::Success) throw std::runtime_error("pose prior: eigensolve failed");

  prior.basis.resize(dim, components);
  prior.variance.resize(components);
  for (int c = 0; c < components; ++c) {
    int col = dim - 1 - c;  // eigenvalues come out ascending
    prior.basis.col(c) = es.eigenvectors().col(col);
    prior.variance[c] = std::max(0.0, es.eigenvalues()[col]);
    // fix the sign so rebuilding the prior is reproducible
    Eigen::Index imax;
    prior.basis.col(c).cwiseAbs().maxCoeff(&imax);
    if (prior.basis(imax, c) < 0) prior.basis.col(c) = -prior.basis.col(c);
  }
  return prior;
}

// ---------------------------------------------------------------------------
// generic minimizers
// ---------------------------------------------------------------------------

Eigen::VectorXd minimize_lbfgs(const Objective& f, Eigen::VectorXd x, const LbfgsOptions& opt) {
  Eigen::VectorXd g(x.size());
  double fx = f(x, &g);
  Eigen::VectorXd best_x = x;
  double best_f = fx;

  std::deque<Eigen::VectorXd> hs, hy;  // recent steps and gradient changes
  std::deque<double> hrho;

  for (int it = 0; it < opt.max_iters; ++it) {
    if (!std::isfinite(fx) || !g.allFinite()) break;
    if (g.lpNorm<Eigen::Infinity>() < opt.grad_tol) break;

    // two-loop recursion for the quasi-Newton direction
    Eigen::VectorXd q = g;
    std::vector<double> alpha(hs.size());
    for (int i = int(hs.size()) - 1; i >= 0; --i) {
      alpha[i] = hrho[i] * hs[i].dot(q);
      q -= alpha[i] * hy[i];
    }
    if (!hs.empty()) q *= hs.back().dot(hy.back()) / hy.back().squaredNorm();
    for (size_t i = 0; i < hs.size(); ++i) {
      double b = hrho[i] * hy[i].dot(q);
      q += (alpha[i] - b) * hs[i];
    }
    Eigen::VectorXd dir = -q;
    if (g.dot(dir) >= 0) dir = -g;  // memory went stale, restart downhill

    auto backtrack = [&](const Eigen::VectorXd& d, Eigen::VectorXd* xt, double* ft) {
      double slope = g.dot(d);
      if (slope >= 0) return false;
      double t = 1.0;
      for (int bt = 0; bt < opt.max_backtracks; ++bt, t *= 0.5) {
        *xt = x + t * d;
        *ft = f(*xt, nullptr);
        if (std::isfinite(*ft) && *ft <= fx + opt.armijo_c1 * t * slope) return true;
      }
      return false;
    };

    Eigen::VectorXd xn;
    double fn;
    if (!backtrack(dir, &xn, &fn)) {
      bool retried = false;
      if (!hs.empty()) {  // drop the memory and try plain steepest descent
        hs.clear();
        hy.clear();
        hrho.clear();
        dir = -g;
        retried = backtrack(dir, &xn, &fn);
      }
      if (!retried) break;
    }

    Eigen::VectorXd gn(x.size());
    fn = f(xn, &gn);
    Eigen::VectorXd s = xn - x, y = gn - g;
    double sy = s.dot(y);
    if (sy > 1e-12) {
      hs.push_back(s);
      hy.push_back(y);
      hrho.push_back(1.0 / sy);
      if (int(hs.size()) > opt.history) {
        hs.pop_front();
        hy.pop_front();
        hrho.pop_front();
      }
    }
    x = xn;
    fx = fn;
    g = gn;
    if (fx < best_f) {
      best_f = fx;
      best_x = x;
    }
  }
  return best_x;
}

RefineResult refine(Energy& energy, const HandParams& init, const RefineOptions& opt,
                    const std::function<Matches(const HandParams&)>& rematch) {
  RefineResult out;
  out.params = init;
  if (opt.max_iters <= 0) {
    out.energy = energy.eval(init);
    return out;
  }

  Eigen::VectorXd x = init.to_vector();
  Eigen::VectorXd m = Eigen::VectorXd::Zero(kNumParams);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(kNumParams);

  EnergyBreakdown bd;
  Eigen::VectorXd g = energy.gradient(init, &bd);

  Eigen::VectorXd best_x = x;
  EnergyBreakdown best = bd;
  int accepted = 0;
  int since_best = 0;

  for (int it = 1; it <= opt.max_iters; ++it) {
    if (!std::isfinite(bd.total) || !g.allFinite()) {
      out.diverged = true;
      break;
    }

    m = opt.beta1 * m + (1.0 - opt.beta1) * g;
    v = opt.beta2 * v + (1.0 - opt.beta2) * g.cwiseProduct(g);
    double bc1 = 1.0 - std::pow(opt.beta1, it);
    double bc2 = 1.0 - std::pow(opt.beta2, it);
    Eigen::VectorXd dir =
        (m / bc1).cwiseQuotient(((v / bc2).cwiseSqrt().array() + opt.eps).matrix());
    x -= opt.lr * dir;

    if (rematch && it % opt.rematch_every == 0) {
      Matches fresh = rematch(HandParams::from_vector(x));
      if (!fresh.empty()) {
        energy.set_matches(std::move(fresh));
        // the objective changed; re-baseline the incumbent under the new pairs
        best = energy.eval(HandParams::from_vector(best_x));
      }
    }

    HandParams p = HandParams::from_vector(x);
    g = energy.gradient(p, &bd);
    if (std::isfinite(bd.total) && bd.total < best.total) {
      best_x = x;
      best = bd;
      ++accepted;
      since_best = 0;
      if (opt.on_accept) opt.on_accept(it, bd);
    } else if (++since_best >= opt.patience) {
      break;
    }
    if (opt.lr * dir.lpNorm<Eigen::Infinity>() < opt.stop_dx) break;
  }

  out.params = HandParams::from_vector(best_x);
  out.energy = best;
  out.iterations = accepted;
  return out;
}

// ---------------------------------------------------------------------------
// frame-to-frame tracking
// ---------------------------------------------------------------------------

Tracker::Tracker(const HandModel& model, const TrackerOptions& opt)
    : model_(model),
      opt_(opt),
      cs_(build_corr_space(model)),
      index_(cs_),
      prior_(build_pca_prior(sample_pose_corpus(model, opt.corpus_size, opt.corpus_seed),
                             opt.pca_components)) {}

void Tracker::reset() {
  tracking_ = false;
  recent_e3d_.clear();
}

HandParams Tracker::cold_init(Energy& energy, const Matches& base) const {
  // rigid alignment of the rest pose against the observed points
  std::vector<Eigen::Vector3d> src, dst;
  src.reserve(base.size());
  dst.reserve(base.size());
  for (const CorrPair& pr : base) {
    src.push_back(model_.vertices.row(pr.vertex));
    dst.push_back(pr.p);
  }
  RigidTransform rt = fit_procrustes(src, dst);

  HandParams p;
  Eigen::AngleAxisd aa(rt.R);
  p.rot = aa.angle() * aa.axis();
  p.trans = rt.t;
  energy.set_matches(refilter(base, energy.observation(), pose_hand(model_, p), opt_.match));

  // polish the global pose together with the leading articulation modes;
  // shape stays frozen at the mean
  const int k = int(prior_.basis.cols());
  Eigen::VectorXd x0(6 + k);
  x0.segment<3>(0) = p.rot;
  x0.segment<3>(3) = p.trans;
  x0.tail(k) = prior_.basis.transpose() * (p.theta - prior_.mean);

  auto unpack = [&](const Eigen::VectorXd& x) {
    HandParams q;
    q.rot = x.segment<3>(0);
    q.trans = x.segment<3>(3);
    q.theta = prior_.mean + prior_.basis * x.tail(k);
    return q;
  };
  Objective f = [&](const Eigen::VectorXd& x, Eigen::VectorXd* grad) {
    HandParams q = unpack(x);
    if (!grad) return energy.eval(q).total;
    EnergyBreakdown bd;
    Eigen::VectorXd g39 = energy.gradient(q, &bd);
    grad->resize(x.size());
    grad->segment<3>(0) = g39.segment<3>(0);
    grad->segment<3>(3) = g39.segment<3>(3);
    grad->tail(k) = prior_.basis.transpose() * g39.segment(6, kNumPoseDof);
    return bd.total;
  };
  return unpack(minimize_lbfgs(f, x0, opt_.init));
}

FrameResult Tracker::step(const Observation& obs) {
  FrameResult out;
  out.cold = !tracking_;

  Energy energy(model_, cs_, obs, opt_.weights);
  Matches base = match(obs, index_, opt_.match, nullptr);
  refine_anchors(base, model_, cs_, obs.corr, opt_.match.t_corr);

  HandParams start;
  if (tracking_) {
    start = prev_;
    energy.set_prev_params(prev_);
    energy.set_matches(refilter(base, obs, pose_hand(model_, start), opt_.match));
  } else {
    try {
      start = cold_init(energy, base);
    } catch (const std::exception&) {
      // nothing to align against; report the frame as lost and wait
      out.params = prev_;
      out.energy = energy.eval(out.params);
      out.lost = true;
      tracking_ = false;
      return out;
    }
  }

  auto rematch_fn = [&](const HandParams& p) {
    return refilter(base, obs, pose_hand(model_, p), opt_.match);
  };
  RefineResult rr = refine(energy, start, opt_.refine, rematch_fn);
  out.params = rr.params;
  out.energy = rr.energy;
  out.matches = energy.matches();
  out.iterations = rr.iterations;

  bool lost = rr.diverged || !rr.params.to_vector().allFinite();
  if (int(out.matches.size()) < opt_.lost_min_pairs) lost = true;
  if (out.energy.jaccard < opt_.lost_jaccard) lost = true;
  if (!recent_e3d_.empty() && out.energy.e3d > opt_.lost_energy_abs) {
    std::vector<double> recent(recent_e3d_.begin(), recent_e3d_.end());
    size_t mid = (recent.size() - 1) / 2;
    std::nth_element(recent.begin(), recent.begin() + mid, recent.end());
    if (out.energy.e3d > opt_.lost_energy_factor * recent[mid]) lost = true;
  }

  if (lost) {
    out.lost = true;
    if (tracking_) out.params = prev_;  // hold the last good solution
    tracking_ = false;
  } else {
    prev_ = out.params;
    tracking_ = true;
    recent_e3d_.push_back(out.energy.e3d);
    if (int(recent_e3d_.size()) > opt_.lost_window) recent_e3d_.pop_front();
  }
  return out;
}

}  // namespace handfit
