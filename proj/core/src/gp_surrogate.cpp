#include "saddle/gp_surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <nlohmann/json.hpp>

#include "saddle/errors.hpp"

namespace saddle {

namespace {

constexpr double kJitterStart = 1e-10;
constexpr double kJitterMax = 1e-4;
constexpr double kLog2Pi = 1.8378770664093454835606594728112;

Matrix stack_rows(const std::vector<Vector>& rows, Index cols) {
  Matrix m(static_cast<Index>(rows.size()), cols);
  for (std::size_t i = 0; i < rows.size(); ++i) m.row(static_cast<Index>(i)) = rows[i].transpose();
  return m;
}

Matrix squared_distances(const Matrix& x) {
  const Index m = x.rows();
  Matrix d2(m, m);
  for (Index j = 0; j < m; ++j) {
    d2(j, j) = 0.0;
    for (Index i = j + 1; i < m; ++i) {
      const double v = (x.row(i) - x.row(j)).squaredNorm();
      d2(i, j) = v;
      d2(j, i) = v;
    }
  }
  return d2;
}

// Spectral data of the unit-variance correlation matrix C = exp(-D^2 / (2 l^2)).
// Everything here depends on the length scale only, so it is reused while the
// optimizer varies sigma_f and the noises.
struct CorrelationSpectrum {
  double log_sigma_l = std::numeric_limits<double>::quiet_NaN();
  Vector mu;              // eigenvalues of C (ascending when q is present)
  Matrix q;               // eigenvectors of C, only when requested
  Matrix y_rot;           // Q^T Y
  double jitter_rel = 0;  // jitter / sigma_f^2
  bool ok = false;
  bool has_q = false;
  bool has_b = false;
  Matrix b;               // Q^T (C o D^2 / l^2) Q
};

// Implicit QL on the symmetric tridiagonal (d, e), e(i) coupling i and i+1.
// The rotations are applied to the rows of w, so on return d holds the
// eigenvalues and w = Z^T w_in for the eigenvector matrix Z.
bool tridiagonal_ql(Vector& d, Vector e, Matrix& w) {
  const Index n = d.size();
  if (n == 0) return true;
  e.conservativeResize(n);
  e(n - 1) = 0.0;
  constexpr double eps = std::numeric_limits<double>::epsilon();
  const double norm = d.cwiseAbs().maxCoeff() + 2.0 * e.cwiseAbs().maxCoeff();
  for (Index l = 0; l < n; ++l) {
    int iterations = 0;
    Index m = l;
    do {
      for (m = l; m < n - 1; ++m) {
        // Relative test plus eps * |T|: a purely relative test stalls between
        // eigenvalues near zero.
        const double dd = std::abs(d(m)) + std::abs(d(m + 1));
        if (std::abs(e(m)) <= eps * std::max(dd, norm)) break;
      }
      if (m == l) break;
      if (++iterations > 60) return false;
      double g = (d(l + 1) - d(l)) / (2.0 * e(l));
      double r = std::hypot(g, 1.0);
      g = d(m) - d(l) + e(l) / (g + std::copysign(r, g));
      double s = 1.0;
      double c = 1.0;
      double p = 0.0;
      Index i = m - 1;
      bool underflow = false;
      for (; i >= l; --i) {
        const double f = s * e(i);
        const double b = c * e(i);
        r = std::hypot(f, g);
        e(i + 1) = r;
        if (r == 0.0) {
          d(i + 1) -= p;
          e(m) = 0.0;
          underflow = true;
          break;
        }
        s = f / r;
        c = g / r;
        g = d(i + 1) - p;
        r = (d(i) - g) * s + 2.0 * c * b;
        p = s * r;
        d(i + 1) = g + p;
        g = c * r - b;
        auto wi = w.row(i);
        auto wj = w.row(i + 1);
        for (Index k = 0; k < w.cols(); ++k) {
          const double t = wj(k);
          wj(k) = s * wi(k) + c * t;
          wi(k) = c * wi(k) - s * t;
        }
        if (i == 0) break;
      }
      if (underflow) continue;
      d(l) -= p;
      e(l) = g;
      e(m) = 0.0;
    } while (m != l);
  }
  return true;
}

void factor_correlation(const Matrix& d2, const Matrix& y, double log_sigma_l, CorrelationSpectrum& s,
                        bool with_vectors) {
  s = CorrelationSpectrum{};
  s.log_sigma_l = log_sigma_l;
  const double l2 = std::exp(2.0 * log_sigma_l);
  const Index m = d2.rows();
  if (m == 0) {
    s.ok = s.has_q = true;
    return;
  }
  const Matrix c = (-d2.array() / (2.0 * l2)).exp().matrix();
  bool solved = false;
  if (with_vectors) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(c);
    if (solver.info() == Eigen::Success) {
      s.mu = solver.eigenvalues();
      s.q = solver.eigenvectors();
      s.has_q = solved = true;
    }
  } else {
    // Eigenvalues and Q^T Y only: tridiagonalize, then rotate the P columns
    // of Y instead of accumulating the m x m eigenvector matrix.
    Eigen::Tridiagonalization<Matrix> tri(c);
    s.mu = tri.diagonal();
    s.y_rot = tri.matrixQ().transpose() * y;
    solved = tridiagonal_ql(s.mu, tri.subDiagonal(), s.y_rot);
  }
  if (!solved) return;
  // Jitter escalation: 1e-10 of the mean diagonal (sigma_f^2), x10 until the
  // shifted spectrum is safely positive, up to 1e-4.
  for (double rel = kJitterStart; rel <= kJitterMax * (1.0 + 1e-9); rel *= 10.0) {
    if (s.mu.minCoeff() >= -0.5 * rel) {
      s.jitter_rel = rel;
      s.ok = true;
      break;
    }
  }
  if (s.ok && s.has_q) s.y_rot = s.q.transpose() * y;
}

void ensure_b(const Matrix& d2, CorrelationSpectrum& s) {
  if (s.has_b || d2.rows() == 0) return;
  const double l2 = std::exp(2.0 * s.log_sigma_l);
  const Matrix c = (-d2.array() / (2.0 * l2)).exp().matrix();
  const Matrix dc = (c.array() * d2.array() / l2).matrix();
  s.b = s.q.transpose() * (dc * s.q);
  s.has_b = true;
}

struct Evaluation {
  double value = -std::numeric_limits<double>::infinity();
  Vector gradient;
  bool ok = false;
};

// theta = (log sigma_f, log sigma_l, log sigma_s_1 .. log sigma_s_P)
// The length-scale component needs B (two m^3 products) and is skipped unless
// `want_length_gradient`.
Evaluation evaluate_likelihood(const Matrix& d2, const Matrix& y, const Vector& theta, bool want_gradient,
                               CorrelationSpectrum& cache, bool want_length_gradient = true) {
  Evaluation out;
  const Index m = d2.rows();
  const Index p = y.cols();
  const bool length_gradient = want_gradient && want_length_gradient;
  if (theta(1) != cache.log_sigma_l || (length_gradient && !cache.has_q)) {
    factor_correlation(d2, y, theta(1), cache, length_gradient);
  }
  if (!cache.ok) return out;

  const double sf2 = std::exp(2.0 * theta(0));
  const Vector lam = sf2 * (cache.mu.array() + cache.jitter_rel).matrix();  // spectrum of K_f + jitter I

  if (length_gradient) ensure_b(d2, cache);
  if (want_gradient) out.gradient = Vector::Zero(2 + p);
  double total = 0.0;
  for (Index i = 0; i < p; ++i) {
    const double s = std::exp(2.0 * theta(2 + i));
    const Eigen::ArrayXd d = lam.array() + s;
    const Eigen::ArrayXd yr = cache.y_rot.col(i).array();
    const Eigen::ArrayXd yd = yr / d;
    total += -0.5 * (yr * yd).sum() - 0.5 * d.log().sum() - 0.5 * static_cast<double>(m) * kLog2Pi;
    if (want_gradient) {
      const Eigen::ArrayXd a2_minus_inv = yd * yd - 1.0 / d;
      out.gradient(0) += (lam.array() * a2_minus_inv).sum();
      if (length_gradient) {
        const Vector bvec = yd.matrix();
        out.gradient(1) += 0.5 * sf2 * (bvec.dot(cache.b * bvec) - (cache.b.diagonal().array() / d).sum());
      }
      out.gradient(2 + i) = s * a2_minus_inv.sum();
    }
  }
  out.value = total;
  out.ok = std::isfinite(total) && (!want_gradient || out.gradient.allFinite());
  return out;
}

Vector pack(const Hyperparams& h, const NoiseModel& n) {
  Vector theta(2 + n.size());
  theta(0) = h.log_sigma_f;
  theta(1) = h.log_sigma_l;
  for (Index i = 0; i < n.size(); ++i) theta(2 + i) = n.log_sigma[static_cast<std::size_t>(i)];
  return theta;
}

void unpack(const Vector& theta, Hyperparams& h, NoiseModel& n) {
  h.log_sigma_f = theta(0);
  h.log_sigma_l = theta(1);
  n.log_sigma.assign(theta.data() + 2, theta.data() + theta.size());
}

struct Bounds {
  Vector lower;
  Vector upper;
  [[nodiscard]] Vector clamp(const Vector& t) const { return t.cwiseMax(lower).cwiseMin(upper); }
};

struct AscentResult {
  Vector theta;
  double value = -std::numeric_limits<double>::infinity();
  bool ok = false;
};

// Value, gradient and Hessian in (log sigma_f, log sigma_s_1 .. P) at the
// cached length scale. Output blocks only share sigma_f, so the Hessian is an
// arrow: one dense row/column for sigma_f plus a diagonal.
struct InnerModel {
  double value = 0.0;
  Vector gradient;  // size 1 + P
  Matrix hessian;   // (1 + P) x (1 + P)
};

InnerModel inner_model(const CorrelationSpectrum& cache, const Vector& theta) {
  const Index p = cache.y_rot.cols();
  const Index m = cache.mu.size();
  InnerModel out;
  out.gradient = Vector::Zero(1 + p);
  out.hessian = Matrix::Zero(1 + p, 1 + p);
  const Eigen::ArrayXd lam = std::exp(2.0 * theta(0)) * (cache.mu.array() + cache.jitter_rel);
  for (Index i = 0; i < p; ++i) {
    const double s = std::exp(2.0 * theta(2 + i));
    const Eigen::ArrayXd d = lam + s;
    const Eigen::ArrayXd y2 = cache.y_rot.col(i).array().square();
    // dL/dd and d2L/dd2 per eigenvalue; dd/dt = 2 lam (sigma_f) or 2 s (noise).
    const Eigen::ArrayXd g = 0.5 * (y2 / d.square() - 1.0 / d);
    const Eigen::ArrayXd h = 0.5 / d.square() - y2 / d.cube();
    out.value += -0.5 * (y2 / d).sum() - 0.5 * d.log().sum() - 0.5 * static_cast<double>(m) * kLog2Pi;
    out.gradient(0) += 2.0 * (g * lam).sum();
    out.gradient(1 + i) = 2.0 * s * g.sum();
    out.hessian(0, 0) += (4.0 * h * lam.square() + 4.0 * g * lam).sum();
    out.hessian(0, 1 + i) = out.hessian(1 + i, 0) = 4.0 * s * (h * lam).sum();
    out.hessian(1 + i, 1 + i) = 4.0 * s * s * h.sum() + 4.0 * s * g.sum();
  }
  return out;
}

// Projected Newton ascent with Armijo backtracking over sigma_f and the
// noises at a fixed length scale, so every evaluation reuses one spectral
// factorization. Coordinates held at a bound by the gradient are frozen;
// an indefinite Hessian is shifted until the Newton system is definite.
AscentResult ascend_at_length(const Matrix& d2, const Matrix& y, Vector theta, const Bounds& bounds, int max_iterations,
                              CorrelationSpectrum& cache) {
  const Index p = y.cols();
  theta = bounds.clamp(theta);
  if (theta(1) != cache.log_sigma_l) factor_correlation(d2, y, theta(1), cache, false);
  if (!cache.ok) return {};

  // Inner coordinate j maps to theta index 0 (j = 0) or 1 + j.
  auto outer = [](Index j) { return j == 0 ? Index{0} : j + 1; };
  InnerModel cur = inner_model(cache, theta);
  if (!std::isfinite(cur.value) || !cur.gradient.allFinite()) return {};

  for (int it = 0; it < max_iterations; ++it) {
    std::vector<Index> free;
    double projected = 0.0;
    for (Index j = 0; j <= p; ++j) {
      const Index t = outer(j);
      const double g = cur.gradient(j);
      if ((theta(t) <= bounds.lower(t) && g <= 0.0) || (theta(t) >= bounds.upper(t) && g >= 0.0)) continue;
      free.push_back(j);
      projected = std::max(projected, std::abs(g));
    }
    if (free.empty() || projected < 1e-9 * (1.0 + std::abs(cur.value))) break;

    const auto nf = static_cast<Index>(free.size());
    Matrix neg_h(nf, nf);
    Vector g(nf);
    for (Index a = 0; a < nf; ++a) {
      g(a) = cur.gradient(free[static_cast<std::size_t>(a)]);
      for (Index b = 0; b < nf; ++b) {
        neg_h(a, b) = -cur.hessian(free[static_cast<std::size_t>(a)], free[static_cast<std::size_t>(b)]);
      }
    }
    const double scale = std::max(1.0, neg_h.diagonal().cwiseAbs().maxCoeff());
    Vector dir;
    for (double shift = 0.0; shift <= 1e8 * scale; shift = shift == 0.0 ? 1e-10 * scale : shift * 10.0) {
      const Eigen::LLT<Matrix> llt(neg_h + shift * Matrix::Identity(nf, nf));
      if (llt.info() == Eigen::Success) {
        dir = llt.solve(g);
        if (dir.allFinite() && dir.dot(g) > 0.0) break;
      }
      dir.resize(0);
    }
    if (dir.size() == 0) dir = g / scale;
    const double longest = dir.cwiseAbs().maxCoeff();
    if (longest > 2.0) dir *= 2.0 / longest;

    Vector full = Vector::Zero(theta.size());
    for (Index a = 0; a < nf; ++a) full(outer(free[static_cast<std::size_t>(a)])) = dir(a);
    Vector grad_full = Vector::Zero(theta.size());
    for (Index j = 0; j <= p; ++j) grad_full(outer(j)) = cur.gradient(j);

    bool accepted = false;
    InnerModel next;
    Vector trial;
    for (double step = 1.0; step > 1e-10; step *= 0.5) {
      trial = bounds.clamp(theta + step * full);
      const Vector delta = trial - theta;
      if (delta.cwiseAbs().maxCoeff() < 1e-14) break;
      next = inner_model(cache, trial);
      if (std::isfinite(next.value) && next.gradient.allFinite() &&
          next.value >= cur.value + 1e-4 * grad_full.dot(delta)) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    const double improvement = next.value - cur.value;
    theta = trial;
    cur = std::move(next);
    if (improvement <= 1e-14 * (1.0 + std::abs(cur.value))) break;
  }
  return {theta, cur.value, true};
}

// Maximizes the profile likelihood over log sigma_l: a coarse scan (or a
// local bracket around a warm start) followed by golden-section refinement.
class ProfileSearch {
 public:
  ProfileSearch(const Matrix& d2, const Matrix& y, const Bounds& bounds, int max_iterations)
      : d2_(d2), y_(y), bounds_(bounds), max_iterations_(max_iterations) {}

  // Profile value at log sigma_l = t, inner search started from the best point so far.
  double at(double t, const Vector& start) {
    t = std::clamp(t, bounds_.lower(1), bounds_.upper(1));
    Vector theta = start;
    theta(1) = t;
    CorrelationSpectrum cache;
    AscentResult r = ascend_at_length(d2_, y_, theta, bounds_, max_iterations_, cache);
    if (r.ok && r.value > best_.value) best_ = r;
    return r.ok ? r.value : -std::numeric_limits<double>::infinity();
  }

  // Refines a bracket a < b < c with f(b) >= f(a), f(c) by successive
  // parabolic interpolation, falling back to a golden step into the wider
  // half when the vertex is unusable.
  void refine(double a, double fa, double b, double fb, double c, double fc, double tol) {
    constexpr double golden = 0.3819660112501051;
    if (!best_.ok) return;
    for (int it = 0; it < 12 && c - a > 2.0 * tol; ++it) {
      const double p = (b - a) * (fb - fc);
      const double q = (b - c) * (fb - fa);
      const double denom = 2.0 * (p - q);
      double x = denom != 0.0 ? b - ((b - a) * p - (b - c) * q) / denom : b;
      if (!(x > a + 0.5 * tol && x < c - 0.5 * tol) || std::abs(x - b) < 0.5 * tol) {
        x = (c - b > b - a) ? b + golden * (c - b) : b - golden * (b - a);
      }
      const double fx = at(x, best_.theta);
      if (fx >= fb) {
        if (x > b) {
          a = b;
          fa = fb;
        } else {
          c = b;
          fc = fb;
        }
        if (std::abs(x - b) < tol) return;
        b = x;
        fb = fx;
      } else if (x > b) {
        c = x;
        fc = fx;
      } else {
        a = x;
        fa = fx;
      }
    }
  }

  [[nodiscard]] const AscentResult& best() const { return best_; }
  [[nodiscard]] Vector best_or(const Vector& fallback) const { return best_.ok ? best_.theta : fallback; }

 private:
  const Matrix& d2_;
  const Matrix& y_;
  const Bounds& bounds_;
  int max_iterations_;
  AscentResult best_;
};

}  // namespace

// ---------------------------------------------------------------------------

Hyperparams Hyperparams::from_scales(double sigma_f, double sigma_l) {
  if (!(sigma_f > 0.0) || !(sigma_l > 0.0)) {
    throw std::invalid_argument("Hyperparams: scales must be positive");
  }
  return {std::log(sigma_f), std::log(sigma_l)};
}
double Hyperparams::sigma_f() const { return std::exp(log_sigma_f); }
double Hyperparams::sigma_l() const { return std::exp(log_sigma_l); }

NoiseModel NoiseModel::uniform(Index outputs, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("NoiseModel: sigma must be positive");
  return NoiseModel{std::vector<double>(static_cast<std::size_t>(outputs), std::log(sigma))};
}
double NoiseModel::sigma(Index i) const { return std::exp(log_sigma.at(static_cast<std::size_t>(i))); }

void TrainingSet::add(const Vector& x, const Vector& y) {
  if (!try_add(x, y)) throw DuplicatePoint("TrainingSet: duplicate location");
}

bool TrainingSet::try_add(const Vector& x, const Vector& y) {
  if (input_dim_ == 0 && output_dim_ == 0 && locations_.empty()) {
    input_dim_ = x.size();
    output_dim_ = y.size();
  }
  if (x.size() != input_dim_ || y.size() != output_dim_) {
    throw std::invalid_argument("TrainingSet: dimension mismatch");
  }
  if (contains(x)) return false;
  locations_.push_back(x);
  observations_.push_back(y);
  return true;
}

bool TrainingSet::contains(const Vector& x, double tol) const {
  return std::any_of(locations_.begin(), locations_.end(),
                     [&](const Vector& p) { return (p - x).cwiseAbs().maxCoeff() <= tol; });
}

TrainingSet TrainingSet::filtered(const std::function<bool(const Vector&)>& keep) const {
  TrainingSet out(input_dim_, output_dim_);
  for (std::size_t i = 0; i < locations_.size(); ++i) {
    if (keep(locations_[i])) {
      out.locations_.push_back(locations_[i]);
      out.observations_.push_back(observations_[i]);
    }
  }
  return out;
}

InputScaling InputScaling::identity(Index dim) { return {Vector::Zero(dim), 1.0}; }

OutputScaling OutputScaling::identity(Index outputs) { return {Vector::Zero(outputs), Vector::Ones(outputs)}; }

OutputScaling OutputScaling::standardize(const TrainingSet& data) {
  const Index p = data.output_dim();
  OutputScaling s = identity(p);
  const auto m = static_cast<double>(data.size());
  if (data.empty()) return s;
  for (const auto& y : data.observations()) s.mean += y;
  s.mean /= m;
  if (data.size() < 2) return s;
  Vector var = Vector::Zero(p);
  for (const auto& y : data.observations()) var += (y - s.mean).cwiseAbs2();
  var /= (m - 1.0);
  for (Index i = 0; i < p; ++i) {
    const double sd = std::sqrt(var(i));
    s.scale(i) = (sd > 1e-300 && std::isfinite(sd)) ? sd : 1.0;
  }
  return s;
}

double se_kernel(const Vector& x, const Vector& x2, const Hyperparams& hyper) {
  const double sf = hyper.sigma_f();
  const double sl = hyper.sigma_l();
  return sf * sf * std::exp(-(x - x2).squaredNorm() / (2.0 * sl * sl));
}

LikelihoodResult log_marginal_likelihood(const TrainingSet& data, const Hyperparams& hyper, const NoiseModel& noise) {
  if (data.empty()) throw std::invalid_argument("log_marginal_likelihood: empty training set");
  if (noise.size() != data.output_dim()) throw std::invalid_argument("log_marginal_likelihood: noise size mismatch");
  const Matrix x = stack_rows(data.locations(), data.input_dim());
  const Matrix y = stack_rows(data.observations(), data.output_dim());
  const Matrix d2 = squared_distances(x);
  CorrelationSpectrum cache;
  const Evaluation e = evaluate_likelihood(d2, y, pack(hyper, noise), true, cache);
  if (!cache.ok) throw FactorizationFailure("log_marginal_likelihood: kernel matrix not positive definite at max jitter");
  return {e.value, e.gradient};
}

// ---------------------------------------------------------------------------

GpSurrogate GpSurrogate::condition(TrainingSet data, Hyperparams hyper, NoiseModel noise, InputScaling inputs,
                                   OutputScaling outputs) {
  const Index p = data.output_dim();
  if (noise.size() != p || outputs.mean.size() != p) throw std::invalid_argument("GpSurrogate: output size mismatch");
  if (inputs.center.size() != data.input_dim()) throw std::invalid_argument("GpSurrogate: input scaling mismatch");

  GpSurrogate g;
  const Index m = static_cast<Index>(data.size());
  g.unit_x_.resize(m, data.input_dim());
  Matrix y(m, p);
  for (Index j = 0; j < m; ++j) {
    g.unit_x_.row(j) = inputs.apply(data.locations()[static_cast<std::size_t>(j)]).transpose();
    y.row(j) = ((data.observations()[static_cast<std::size_t>(j)] - outputs.mean).array() / outputs.scale.array())
                   .matrix()
                   .transpose();
  }

  if (m > 0) {
    const double l2 = std::exp(2.0 * hyper.log_sigma_l);
    g.reduction_.compute((-squared_distances(g.unit_x_).array() / (2.0 * l2)).exp().matrix());
    Vector mu = g.reduction_.diagonal();
    Matrix none(m, 0);
    if (!tridiagonal_ql(mu, g.reduction_.subDiagonal(), none)) {
      throw FactorizationFailure("GpSurrogate: tridiagonal eigenvalue iteration did not converge");
    }
    double jitter_rel = -1.0;
    for (double rel = kJitterStart; rel <= kJitterMax * (1.0 + 1e-9); rel *= 10.0) {
      if (mu.minCoeff() >= -0.5 * rel) {
        jitter_rel = rel;
        break;
      }
    }
    if (jitter_rel < 0.0) throw FactorizationFailure("GpSurrogate: kernel matrix not positive definite at max jitter");
    const double sf2 = std::exp(2.0 * hyper.log_sigma_f);
    g.jitter_ = jitter_rel * sf2;
    const Vector diag = sf2 * (g.reduction_.diagonal().array() + jitter_rel).matrix();
    const Vector sub = sf2 * g.reduction_.subDiagonal();
    const Matrix y_red = g.reduction_.matrixQ().transpose() * y;

    g.ldl_d_.resize(m, p);
    g.ldl_l_.resize(std::max<Index>(m - 1, 0), p);
    Matrix z(m, p);
    for (Index i = 0; i < p; ++i) {
      const double s2 = noise.sigma(i) * noise.sigma(i);
      auto dcol = g.ldl_d_.col(i);
      auto lcol = g.ldl_l_.col(i);
      dcol(0) = diag(0) + s2;
      for (Index j = 1; j < m; ++j) {
        lcol(j - 1) = sub(j - 1) / dcol(j - 1);
        dcol(j) = diag(j) + s2 - lcol(j - 1) * sub(j - 1);
      }
      if (!(dcol.minCoeff() > 0.0)) throw FactorizationFailure("GpSurrogate: reduced kernel matrix lost definiteness");
      // T_i^{-1} y_red by forward, diagonal and backward substitution.
      auto zc = z.col(i);
      zc = y_red.col(i);
      for (Index j = 1; j < m; ++j) zc(j) -= lcol(j - 1) * zc(j - 1);
      zc.array() /= dcol.array();
      for (Index j = m - 2; j >= 0; --j) zc(j) -= lcol(j) * zc(j + 1);
    }
    g.alpha_ = g.reduction_.matrixQ() * z;
  }

  g.data_ = std::move(data);
  g.hyper_ = hyper;
  g.noise_ = std::move(noise);
  g.inputs_ = std::move(inputs);
  g.outputs_ = std::move(outputs);
  return g;
}

GpSurrogate GpSurrogate::prior(Index input_dim, Index output_dim, Hyperparams hyper) {
  return condition(TrainingSet(input_dim, output_dim), hyper, NoiseModel::uniform(output_dim, 1e-6),
                   InputScaling::identity(input_dim), OutputScaling::identity(output_dim));
}

Vector GpSurrogate::kernel_column(const Vector& unit_x) const {
  const double sf2 = std::exp(2.0 * hyper_.log_sigma_f);
  const double inv = 1.0 / (2.0 * std::exp(2.0 * hyper_.log_sigma_l));
  const Index m = unit_x_.rows();
  Vector k(m);
  for (Index j = 0; j < m; ++j) k(j) = sf2 * std::exp(-(unit_x_.row(j).transpose() - unit_x).squaredNorm() * inv);
  return k;
}

Vector GpSurrogate::predict_mean(const Vector& x) const {
  if (x.size() != inputs_.center.size()) throw std::invalid_argument("GpSurrogate: input dimension mismatch");
  if (unit_x_.rows() == 0) return outputs_.mean;
  const Vector k = kernel_column(inputs_.apply(x));
  return outputs_.mean + (alpha_.transpose() * k).cwiseProduct(outputs_.scale);
}

Prediction GpSurrogate::predict(const Vector& x) const {
  if (x.size() != inputs_.center.size()) throw std::invalid_argument("GpSurrogate: input dimension mismatch");
  const Index p = outputs_.mean.size();
  const double sf2 = std::exp(2.0 * hyper_.log_sigma_f);
  Prediction out{outputs_.mean, Vector::Constant(p, sf2)};
  if (unit_x_.rows() > 0) {
    const Vector k = kernel_column(inputs_.apply(x));
    out.mean += (alpha_.transpose() * k).cwiseProduct(outputs_.scale);
    const Vector w = reduction_.matrixQ().transpose() * k;
    for (Index i = 0; i < p; ++i) out.variance(i) = std::max(0.0, sf2 - reduced_quadratic(w, i));
  }
  out.variance = out.variance.cwiseProduct(outputs_.scale.cwiseAbs2());
  return out;
}

double GpSurrogate::reduced_quadratic(const Vector& w, Index output) const {
  // w^T T_i^{-1} w = |D^{-1/2} L^{-1} w|^2
  const auto dcol = ldl_d_.col(output);
  const auto lcol = ldl_l_.col(output);
  double prev = w(0);
  double total = prev * prev / dcol(0);
  for (Index j = 1; j < w.size(); ++j) {
    prev = w(j) - lcol(j - 1) * prev;
    total += prev * prev / dcol(j);
  }
  return total;
}

double GpSurrogate::uncertainty_radius(const Vector& x) const { return predict(x).variance.maxCoeff(); }

nlohmann::json GpSurrogate::to_json() const {
  using nlohmann::json;
  auto vec = [](const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  json locations = json::array();
  json observations = json::array();
  for (std::size_t j = 0; j < data_.size(); ++j) {
    locations.push_back(vec(data_.locations()[j]));
    observations.push_back(vec(data_.observations()[j]));
  }
  return json{{"input_dim", data_.input_dim()},
              {"output_dim", data_.output_dim()},
              {"locations", locations},
              {"observations", observations},
              {"log_sigma_f", hyper_.log_sigma_f},
              {"log_sigma_l", hyper_.log_sigma_l},
              {"log_noise", noise_.log_sigma},
              {"input_center", vec(inputs_.center)},
              {"input_half_width", inputs_.half_width},
              {"output_mean", vec(outputs_.mean)},
              {"output_scale", vec(outputs_.scale)}};
}

GpSurrogate GpSurrogate::from_json(const nlohmann::json& doc) {
  auto vec = [](const nlohmann::json& a) {
    const auto v = a.get<std::vector<double>>();
    return Vector(Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size())));
  };
  TrainingSet data(doc.at("input_dim").get<Index>(), doc.at("output_dim").get<Index>());
  const auto& locs = doc.at("locations");
  const auto& obs = doc.at("observations");
  if (locs.size() != obs.size()) throw std::invalid_argument("GpSurrogate::from_json: locations/observations mismatch");
  for (std::size_t j = 0; j < locs.size(); ++j) data.add(vec(locs[j]), vec(obs[j]));
  Hyperparams hyper{doc.at("log_sigma_f").get<double>(), doc.at("log_sigma_l").get<double>()};
  NoiseModel noise{doc.at("log_noise").get<std::vector<double>>()};
  InputScaling inputs{vec(doc.at("input_center")), doc.at("input_half_width").get<double>()};
  OutputScaling outputs{vec(doc.at("output_mean")), vec(doc.at("output_scale"))};
  return condition(std::move(data), hyper, std::move(noise), std::move(inputs), std::move(outputs));
}

// ---------------------------------------------------------------------------

GpSurrogate fit(const TrainingSet& data, const FitConfig& config) {
  if (data.size() < config.min_points || data.empty()) {
    throw FitFailure("fit: need at least " + std::to_string(std::max<std::size_t>(config.min_points, 1)) +
                     " training points, got " + std::to_string(data.size()));
  }
  const Index d = data.input_dim();
  const Index p = data.output_dim();

  InputScaling inputs;
  if (config.input_scaling) {
    inputs = *config.input_scaling;
  } else {
    Vector lo = data.locations().front();
    Vector hi = lo;
    for (const auto& x : data.locations()) {
      lo = lo.cwiseMin(x);
      hi = hi.cwiseMax(x);
    }
    const double hw = 0.5 * (hi - lo).maxCoeff();
    inputs = {0.5 * (lo + hi), hw > 0.0 ? hw : 1.0};
  }
  const OutputScaling outputs = config.standardize_outputs ? OutputScaling::standardize(data) : OutputScaling::identity(p);

  const Index m = static_cast<Index>(data.size());
  Matrix ux(m, d);
  Matrix y(m, p);
  for (Index j = 0; j < m; ++j) {
    ux.row(j) = inputs.apply(data.locations()[static_cast<std::size_t>(j)]).transpose();
    y.row(j) = ((data.observations()[static_cast<std::size_t>(j)] - outputs.mean).array() / outputs.scale.array())
                   .matrix()
                   .transpose();
  }
  const Matrix d2 = squared_distances(ux);

  Bounds bounds{Vector(2 + p), Vector(2 + p)};
  bounds.lower(0) = std::log(config.sigma_f_min);
  bounds.upper(0) = std::log(config.sigma_f_max);
  bounds.lower(1) = std::log(config.sigma_l_min);
  bounds.upper(1) = std::log(config.sigma_l_max);
  // Noise lives in standardized units when outputs are standardized.
  for (Index i = 0; i < p; ++i) {
    const double unit = config.standardize_outputs ? 1.0 : outputs.scale(i);
    bounds.lower(2 + i) = std::log(config.noise_floor * unit);
    bounds.upper(2 + i) = std::log(config.noise_ceiling * unit);
  }

  const double lo = bounds.lower(1);
  const double hi = bounds.upper(1);
  ProfileSearch search(d2, y, bounds, config.max_iterations);
  if (config.warm_hyper) {
    const NoiseModel warm_noise =
        config.warm_noise && config.warm_noise->size() == p ? *config.warm_noise : NoiseModel::uniform(p, 1e-3);
    const Vector start = bounds.clamp(pack(*config.warm_hyper, warm_noise));
    const double h = std::min(config.warm_bracket, 0.5 * (hi - lo));
    double center = std::clamp(start(1), lo + h, hi - h);
    double f_mid = search.at(center, start);
    double f_lo = search.at(center - h, search.best_or(start));
    double f_hi = search.at(center + h, search.best_or(start));
    // Walk the bracket until the middle point is the best or a bound is hit.
    for (int shift = 0; shift < 8; ++shift) {
      if (f_lo > f_mid && center - 2.0 * h >= lo) {
        f_hi = f_mid;
        f_mid = f_lo;
        center -= h;
        f_lo = search.at(center - h, search.best_or(start));
      } else if (f_hi > f_mid && center + 2.0 * h <= hi) {
        f_lo = f_mid;
        f_mid = f_hi;
        center += h;
        f_hi = search.at(center + h, search.best_or(start));
      } else {
        break;
      }
    }
    if (f_mid >= f_lo && f_mid >= f_hi) search.refine(center - h, f_lo, center, f_mid, center + h, f_hi, config.length_tol);
  } else {
    Vector start = Vector::Constant(2 + p, std::log(1e-3));
    start(0) = 0.0;
    start = bounds.clamp(start);
    const int n = std::max(config.length_grid, 3);
    const double spacing = (hi - lo) / (n - 1);
    std::vector<double> values(static_cast<std::size_t>(n));
    std::size_t best_j = 0;
    for (std::size_t j = 0; j < values.size(); ++j) {
      values[j] = search.at(lo + static_cast<double>(j) * spacing, start);
      if (values[j] > values[best_j]) best_j = j;
    }
    if (best_j > 0 && best_j + 1 < values.size()) {
      const double t = lo + static_cast<double>(best_j) * spacing;
      search.refine(t - spacing, values[best_j - 1], t, values[best_j], t + spacing, values[best_j + 1], config.length_tol);
    }
  }
  const AscentResult& best = search.best();
  if (!best.ok) throw FitFailure("fit: no length scale gave a finite marginal likelihood");

  Hyperparams hyper;
  NoiseModel noise;
  unpack(best.theta, hyper, noise);
  return GpSurrogate::condition(data, hyper, std::move(noise), std::move(inputs), outputs);
}

GpSurrogate update_data(const GpSurrogate& model, const TrainingSet& additions,
                        const std::function<bool(const Vector&)>& keep, FitConfig config) {
  TrainingSet merged = model.data().filtered(keep);
  for (std::size_t j = 0; j < additions.size(); ++j) merged.add(additions.locations()[j], additions.observations()[j]);

  // Warm start at the same physical length scale when the input scaling changes.
  Hyperparams warm = model.hyper();
  if (config.input_scaling) {
    warm.log_sigma_l += std::log(model.input_scaling().half_width / config.input_scaling->half_width);
    warm.log_sigma_l =
        std::clamp(warm.log_sigma_l, std::log(config.sigma_l_min), std::log(config.sigma_l_max));
  } else {
    config.input_scaling = model.input_scaling();
  }
  config.warm_hyper = warm;
  config.warm_noise = model.noise();
  return fit(merged, config);
}

SurrogateOracle::SurrogateOracle(std::shared_ptr<const GpSurrogate> model)
    : ForceOracle(model->input_scaling().center.size(), OracleKind::surrogate, true), model_(std::move(model)) {}

}  // namespace saddle
