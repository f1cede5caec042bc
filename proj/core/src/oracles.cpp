#include "ucmlab/oracles.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include "ucmlab/format.hpp"

namespace ucmlab {

// ---- Bessel ------------------------------------------------------------------

namespace {

// sum_m (x/2)^(2m) / (m! (m+1)!), i.e. 2 I1(x) / x.
double i1_series_scaled(double x) {
  const double q = 0.25 * x * x;
  double term = 1.0;
  double sum = 1.0;
  for (int m = 1; m < 200; ++m) {
    term *= q / (static_cast<double>(m) * (m + 1));
    sum += term;
    if (term < 1e-17 * sum) break;
  }
  return sum;
}

}  // namespace

double bessel_i1(double x) {
  if (!(x >= 0.0) || x > kBesselMaxArg) throw DomainError("bessel_i1: argument outside [0, 30]", x);
  return 0.5 * x * i1_series_scaled(x);
}

double bessel_i1_over_x(double x) {
  if (!(x >= 0.0) || x > kBesselMaxArg)
    throw DomainError("bessel_i1_over_x: argument outside [0, 30]", x);
  return 0.5 * i1_series_scaled(x);
}

// ---- Stokes --------------------------------------------------------------------

void StokesSolution::validate() const {
  if (!(G_eps > 0.0)) throw DomainError("StokesSolution: G_eps must be positive", G_eps);
  if (!(lambda > 0.0)) throw DomainError("StokesSolution: lambda must be positive", lambda);
}

double StokesSolution::y_of(double b) const {
  const double s = scaling == StokesScaling::relaxation ? 2.0 : 1.0;
  return b / (s * lambda * std::sqrt(G_eps));
}

double StokesSolution::r_of(double t) const {
  const double s = scaling == StokesScaling::relaxation ? 2.0 : 1.0;
  return t / (s * lambda);
}

double StokesSolution::front(double t) const { return t * std::sqrt(G_eps); }

namespace {

// e^-s I1(z)/z with z = sqrt(s^2 - y^2).
double stokes_integrand(double s, double y) {
  return std::exp(-s) * bessel_i1_over_x(std::sqrt(std::max(s - y, 0.0) * (s + y)));
}

void check_profile_args(double y, double r) {
  if (!(y >= 0.0)) throw DomainError("stokes_profile: y must be nonnegative", y);
  if (!(r >= 0.0)) throw DomainError("stokes_profile: r must be nonnegative", r);
}

}  // namespace

double stokes_profile(double y, double r) {
  check_profile_args(y, r);
  if (y > r) return 0.0;
  if (y == 0.0) return 1.0;
  if (y == r) return std::exp(-y);
  double err = 0.0;
  const double integral = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      [y](double s) { return stokes_integrand(s, y); }, y, r, 5, 1e-12, &err);
  if (!(err <= 1e-10))
    throw std::runtime_error("stokes_profile: quadrature did not converge, error estimate " +
                             format_double(err));
  return std::exp(-y) + y * integral;
}

double stokes_profile_simpson(double y, double r, int n) {
  check_profile_args(y, r);
  if (n < 2 || n % 2 != 0) throw std::invalid_argument("stokes_profile_simpson: n must be even and >= 2");
  if (y > r) return 0.0;
  if (y == 0.0) return 1.0;
  const double h = (r - y) / n;
  double sum = stokes_integrand(y, y) + stokes_integrand(r, y);
  for (int i = 1; i < n; ++i) sum += (i % 2 ? 4.0 : 2.0) * stokes_integrand(y + i * h, y);
  return std::exp(-y) + y * sum * h / 3.0;
}

double stokes_displacement(double t, double b, const StokesSolution& sol) {
  sol.validate();
  if (!(t >= 0.0) || !(b >= 0.0)) throw DomainError("stokes_displacement: t and b must be nonnegative");
  if (t < b / std::sqrt(sol.G_eps) || t == 0.0) return 0.0;
  return sol.DeltaX * stokes_profile(sol.y_of(b), sol.r_of(t));
}

double stokes_displacement_simpson(double t, double b, const StokesSolution& sol, int n) {
  sol.validate();
  if (!(t >= 0.0) || !(b >= 0.0)) throw DomainError("stokes_displacement: t and b must be nonnegative");
  if (t < b / std::sqrt(sol.G_eps) || t == 0.0) return 0.0;
  return sol.DeltaX * stokes_profile_simpson(sol.y_of(b), sol.r_of(t), n);
}

std::vector<double> fig1_default_taus() { return {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7}; }

Fig1Table fig1_curves(const std::vector<double>& y, const std::vector<double>& tau, Quadrature quad) {
  Fig1Table t;
  t.y = y;
  t.tau = tau;
  for (double r : tau) {
    std::vector<double> col;
    col.reserve(y.size());
    for (double yi : y)
      col.push_back(quad == Quadrature::gauss_kronrod ? stokes_profile(yi, r)
                                                      : stokes_profile_simpson(yi, r));
    t.values.push_back(std::move(col));
  }
  return t;
}

std::string Fig1Table::to_csv() const {
  std::ostringstream os;
  os << "y";
  for (double r : tau) os << ",t/lambda=" << format_double(r);
  os << "\n";
  for (std::size_t i = 0; i < y.size(); ++i) {
    os << format_double(y[i]);
    for (std::size_t j = 0; j < tau.size(); ++j) os << "," << format_double(values[j][i]);
    os << "\n";
  }
  return os.str();
}

// ---- Stoker ------------------------------------------------------------------------

namespace {

// Left rarefaction plus right shock: f(h) = u_rarefaction(h) - u_shock(h).
double stoker_f(double h, double HL, double HR, double g) {
  const double ur = 2.0 * (std::sqrt(g * HL) - std::sqrt(g * h));
  const double us = (h - HR) * std::sqrt(0.5 * g * (h + HR) / (h * HR));
  return ur - us;
}

double stoker_df(double h, double HL, double HR, double g) {
  (void)HL;
  const double dur = -std::sqrt(g / h);
  const double a = 0.5 * g * (h + HR) / (h * HR);
  const double da = -0.5 * g / (h * h);  // d/dh of g (h + HR) / (2 h HR)
  const double dus = std::sqrt(a) + (h - HR) * 0.5 * da / std::sqrt(a);
  return dur - dus;
}

}  // namespace

StokerStar stoker_star(double HL, double HR, double g) {
  if (!(g > 0.0)) throw DomainError("stoker_star: g must be positive", g);
  if (!(HL > 0.0)) throw DomainError("stoker_star: left depth must be positive", HL);
  if (!(HR >= 0.0) || HR > HL) throw DomainError("stoker_star: need 0 <= HR <= HL", HR);
  StokerStar s;
  if (HR == 0.0) {
    s.dry = true;
    return s;
  }
  if (HR == HL) {
    s.h_star = HL;
    s.shock_speed = 0.0;
    return s;
  }
  // f is decreasing on [HR, HL] with f(HR) > 0 > f(HL): safeguarded Newton.
  double lo = HR, hi = HL;
  double h = 0.5 * (HL + HR);
  for (int it = 0; it < 200; ++it) {
    const double f = stoker_f(h, HL, HR, g);
    if (f > 0.0) lo = h; else hi = h;
    double next = h - f / stoker_df(h, HL, HR, g);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - h) <= 1e-15 * h) {
      h = next;
      break;
    }
    h = next;
  }
  s.h_star = h;
  s.u_star = 2.0 * (std::sqrt(g * HL) - std::sqrt(g * h));
  s.shock_speed = h * s.u_star / (h - HR);
  s.residual = std::abs(stoker_f(h, HL, HR, g));
  return s;
}

std::pair<double, double> stoker_dambreak(double HL, double HR, double g, double t, double x) {
  if (HL < HR) {
    const auto [h, u] = stoker_dambreak(HR, HL, g, t, -x);
    return {h, -u};
  }
  if (!(t >= 0.0)) throw DomainError("stoker_dambreak: t must be nonnegative", t);
  if (t == 0.0) return {x < 0.0 ? HL : HR, 0.0};
  const StokerStar s = stoker_star(HL, HR, g);
  const double xi = x / t;
  const double cL = std::sqrt(g * HL);
  if (xi <= -cL) return {HL, 0.0};
  if (s.dry) {
    if (xi >= 2.0 * cL) return {0.0, 0.0};
    const double c = (2.0 * cL - xi) / 3.0;
    return {c * c / g, 2.0 * (xi + cL) / 3.0};
  }
  const double cs = std::sqrt(g * s.h_star);
  if (xi < s.u_star - cs) {
    const double c = (2.0 * cL - xi) / 3.0;
    return {c * c / g, 2.0 * (xi + cL) / 3.0};
  }
  if (xi < s.shock_speed) return {s.h_star, s.u_star};
  return {HR, 0.0};
}

// ---- Manufactured motion -------------------------------------------------------------

ManufacturedMotion::ManufacturedMotion(Vec3 u0, std::vector<VelocityMode> modes, const UcmParams& p,
                                       double a0_amplitude, int steps)
    : u0_(u0), modes_(std::move(modes)), p_(p), a0_amplitude_(a0_amplitude), steps_(steps) {
  p_.validate();
  if (steps_ < 1) throw std::invalid_argument("ManufacturedMotion: steps must be positive");
  if (!(std::abs(a0_amplitude_) < 0.5))
    throw DomainError("ManufacturedMotion: metric perturbation must stay below 0.5", a0_amplitude_);
}

Vec3 ManufacturedMotion::velocity(const Vec3& x) const {
  Vec3 u = u0_;
  for (const auto& m : modes_)
    u[m.component] += m.amplitude * std::sin(m.k[0] * x[0] + m.k[1] * x[1] + m.k[2] * x[2] + m.phase);
  return u;
}

Matrix3 ManufacturedMotion::velocity_gradient(const Vec3& x) const {
  Matrix3 L;
  for (const auto& m : modes_) {
    const double c = m.amplitude * std::cos(m.k[0] * x[0] + m.k[1] * x[1] + m.k[2] * x[2] + m.phase);
    for (int j = 0; j < 3; ++j) L(m.component, j) += c * m.k[j];
  }
  return L;
}

SpdMatrix3 ManufacturedMotion::initial_metric(const Vec3& X) const {
  const double tp = 2.0 * M_PI;
  SpdMatrix3 S;
  S(0, 0) = std::sin(tp * X[0]);
  S(1, 1) = std::cos(tp * X[1]);
  S(2, 2) = std::sin(tp * (X[0] + X[2]));
  S(0, 1) = 0.5 * std::sin(tp * X[2]);
  S(0, 2) = 0.5 * std::cos(tp * X[1]);
  S(1, 2) = 0.5 * std::sin(tp * (X[0] - X[1]));
  // |S| <= 2 in the max row sum, so I + a S / 2 stays SPD for a < 0.5.
  return (p_.kB_theta / p_.K_H_prime) * (SpdMatrix3::identity() + (0.5 * a0_amplitude_) * S);
}

MotionSample ManufacturedMotion::operator()(double t, const Vec3& x) const {
  if (!(t >= 0.0)) throw DomainError("ManufacturedMotion: t must be nonnegative", t);
  const double ds = t / steps_;
  auto add = [](Vec3 a, const Vec3& b, double s) {
    for (int i = 0; i < 3; ++i) a[i] += s * b[i];
    return a;
  };
  // Backward to the reference position.
  Vec3 X = x;
  for (int n = 0; n < steps_; ++n) {
    const Vec3 k1 = velocity(X);
    const Vec3 k2 = velocity(add(X, k1, -0.5 * ds));
    const Vec3 k3 = velocity(add(X, k2, -0.5 * ds));
    const Vec3 k4 = velocity(add(X, k3, -ds));
    for (int i = 0; i < 3; ++i) X[i] -= ds / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
  }
  // Forward with F and A.
  struct Y {
    Vec3 x;
    Matrix3 F;
    SpdMatrix3 A;
  };
  const double rate = 4.0 / p_.xi;
  auto rhs = [&](const Y& y) {
    Y d;
    d.x = velocity(y.x);
    d.F = velocity_gradient(y.x) * y.F;
    const Matrix3 Fi = inv(y.F);
    d.A = rate * (p_.kB_theta * sym_part(Fi * transpose(Fi)) - p_.K_H_prime * y.A);
    return d;
  };
  auto axpy = [&](const Y& y, const Y& d, double s) {
    Y r = y;
    r.x = add(y.x, d.x, s);
    r.F = y.F + s * d.F;
    r.A = y.A + s * d.A;
    return r;
  };
  Y y{X, Matrix3::identity(), initial_metric(X)};
  for (int n = 0; n < steps_; ++n) {
    const Y k1 = rhs(y);
    const Y k2 = rhs(axpy(y, k1, 0.5 * ds));
    const Y k3 = rhs(axpy(y, k2, 0.5 * ds));
    const Y k4 = rhs(axpy(y, k3, ds));
    y.x = add(add(add(add(y.x, k1.x, ds / 6), k2.x, ds / 3), k3.x, ds / 3), k4.x, ds / 6);
    y.F = y.F + (ds / 6) * k1.F + (ds / 3) * k2.F + (ds / 3) * k3.F + (ds / 6) * k4.F;
    y.A = y.A + (ds / 6) * k1.A + (ds / 3) * k2.A + (ds / 3) * k3.A + (ds / 6) * k4.A;
  }
  MotionSample s;
  s.u = velocity(x);
  s.F = y.F;
  s.A = y.A;
  return s;
}

ManufacturedMotion manufactured_motion(std::uint64_t seed, const UcmParams& p) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> amp(-0.15, 0.15);
  std::uniform_real_distribution<double> ph(0.0, 2.0 * M_PI);
  std::uniform_int_distribution<int> wave(-1, 1);
  std::vector<VelocityMode> modes;
  for (int c = 0; c < 3; ++c)
    for (int m = 0; m < 2; ++m) {
      VelocityMode vm;
      vm.component = c;
      do {
        for (int j = 0; j < 3; ++j) vm.k[j] = 2.0 * M_PI * wave(rng);
      } while (vm.k[0] == 0.0 && vm.k[1] == 0.0 && vm.k[2] == 0.0);
      vm.amplitude = amp(rng);
      vm.phase = ph(rng);
      modes.push_back(vm);
    }
  return ManufacturedMotion({0.1, -0.05, 0.02}, std::move(modes), p);
}

// ---- Shear wave ----------------------------------------------------------------------

std::complex<double> ShearWave::sigma() const {
  // lambda s^2 + s + G k^2 lambda = 0, root with the larger real part.
  const std::complex<double> disc = 1.0 - 4.0 * G_eps * k * k * lambda * lambda;
  const std::complex<double> s = (-1.0 + std::sqrt(disc)) / (2.0 * lambda);
  return s.imag() < 0.0 ? std::conj(s) : s;
}

double ShearWave::displacement(double t, double x) const {
  return amp * std::real(std::exp(sigma() * t)) * std::sin(k * x);
}

SvmParams ShearWave::params() const {
  SvmParams p;
  p.g = g;
  p.G_eps = G_eps;
  p.lambda = lambda;
  p.k = 0.0;
  p.H_hat = H;
  return p;
}

SvmState ShearWave::state(double t, double x) const {
  const std::complex<double> s = sigma();
  const std::complex<double> e = std::exp(s * t);
  const double ghat = amp * k * std::cos(k * x);  // gamma = ghat Re(e)
  const double gamma = ghat * e.real();
  const double v = amp * std::real(s * e) * std::sin(k * x);

  // A^ab: particular solution of lambda a' + a = -gamma.
  const double aab = std::real(-ghat * e / (1.0 + lambda * s));
  // A^bb = 1 + P, lambda P' + P = gamma^2 = ghat^2 / 2 (e^{2 Re(s) t} + Re e^{2 s t}).
  auto particular = [&](std::complex<double> mu) -> std::complex<double> {
    const std::complex<double> d = 1.0 + lambda * mu;
    if (std::abs(d) < 1e-10) return (t / lambda) * std::exp(-t / lambda);
    return std::exp(mu * t) / d;
  };
  const double P = 0.5 * ghat * ghat *
                   (particular({2.0 * s.real(), 0.0}).real() + particular(2.0 * s).real());

  Matrix2 F = Matrix2::identity();
  F(1, 0) = gamma;
  SpdMatrix2 A;
  A(0, 0) = 1.0;
  A(0, 1) = aab;
  A(1, 1) = 1.0 + P;
  const double Acc = 1.0 / (H * H) + (Acc0 - 1.0 / (H * H)) * std::exp(-t / lambda);
  return SvmState::from_primitive(H, {0.0, v}, F, A, Acc);
}

}  // namespace ucmlab
