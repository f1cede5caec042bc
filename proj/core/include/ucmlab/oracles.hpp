#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ucmlab/svm2d.hpp"
#include "ucmlab/ucm3d.hpp"

namespace ucmlab {

// ---- Bessel ------------------------------------------------------------------

constexpr double kBesselMaxArg = 30.0;

// Power series of I1, x in [0, 30]; DomainError outside.
double bessel_i1(double x);
// I1(x) / x with the removable point at 0 (value 1/2).
double bessel_i1_over_x(double x);

// ---- Stokes first problem ----------------------------------------------------

// How (t, b) map to the dimensionless (r, y) of the closed form.
enum class StokesScaling {
  relaxation,  // y = b / (2 lambda sqrt G), r = t / (2 lambda): solves X_tt + X_t / lambda = G X_bb
  literal      // y = b / (lambda sqrt G), r = t / lambda, as printed
};

struct StokesSolution {
  double G_eps = 1.0;
  double lambda = 1.0;
  double DeltaX = 1.0;
  StokesScaling scaling = StokesScaling::relaxation;

  void validate() const;
  double y_of(double b) const;
  double r_of(double t) const;
  // Material depth reached by the front, b = t sqrt(G).
  double front(double t) const;
};

// X / DeltaX as a function of y and the upper limit r. Zero for y > r.
// Adaptive Gauss-Kronrod; throws std::runtime_error if the estimate exceeds 1e-10.
double stokes_profile(double y, double r);
// Independent composite Simpson rule on n (even) panels.
double stokes_profile_simpson(double y, double r, int n = 10000);

double stokes_displacement(double t, double b, const StokesSolution& sol);
double stokes_displacement_simpson(double t, double b, const StokesSolution& sol, int n = 10000);

struct Fig1Table {
  std::vector<double> y;
  std::vector<double> tau;                  // t / lambda
  std::vector<std::vector<double>> values;  // values[j][i] at tau[j], y[i]

  // Header "y,t/lambda=0.1,..." then one row per y, 17 significant digits.
  std::string to_csv() const;
};

enum class Quadrature { gauss_kronrod, simpson };

std::vector<double> fig1_default_taus();
Fig1Table fig1_curves(const std::vector<double>& y, const std::vector<double>& tau = fig1_default_taus(),
                      Quadrature quad = Quadrature::gauss_kronrod);

// ---- Stoker dam break ----------------------------------------------------------

struct StokerStar {
  double h_star = 0.0;
  double u_star = 0.0;
  double shock_speed = 0.0;  // meaningless when the right state is dry
  double residual = 0.0;     // of the star-depth equation
  bool dry = false;
};

// Left state (HL, 0) for x < 0, right state (HR, 0) for x > 0; HL >= HR >= 0.
StokerStar stoker_star(double HL, double HR, double g);
// Exact (H, U) at (t, x). Handles HL < HR by reflection.
std::pair<double, double> stoker_dambreak(double HL, double HR, double g, double t, double x);

// ---- Manufactured smooth motions -------------------------------------------------

struct VelocityMode {
  int component = 0;  // velocity component it contributes to
  Vec3 k{};           // wavevector
  double amplitude = 0.0;
  double phase = 0.0;
};

// Steady velocity u(x) = u0 + sum of amplitude sin(k.x + phase). F and A are
// integrated along particle paths by RK4 from F = I, A = A0(X) at t = 0.
class ManufacturedMotion {
 public:
  ManufacturedMotion(Vec3 u0, std::vector<VelocityMode> modes, const UcmParams& p,
                     double a0_amplitude = 0.3, int steps = 200);

  MotionSample operator()(double t, const Vec3& x) const;
  Vec3 velocity(const Vec3& x) const;
  Matrix3 velocity_gradient(const Vec3& x) const;  // (grad u)_ij = d u_i / d x_j
  SpdMatrix3 initial_metric(const Vec3& X) const;

 private:
  Vec3 u0_;
  std::vector<VelocityMode> modes_;
  UcmParams p_;
  double a0_amplitude_;
  int steps_;
};

// Low-order periodic modes with seeded amplitudes (|amplitude| <= 0.15).
ManufacturedMotion manufactured_motion(std::uint64_t seed, const UcmParams& p);

// ---- Relaxing shear wave (exact SVM solution) ----------------------------------

// Slab varying along x, transverse displacement y = b + X(t, a), X = amp Re(e^{sigma t}) sin(k a),
// lambda sigma^2 + sigma + G k^2 lambda = 0 (the decaying root). Uniform H, A^cc relaxing to H^-2.
struct ShearWave {
  double G_eps = 1.0;
  double lambda = 1.0;
  double k = 2.0 * M_PI;
  double amp = 0.05;
  double H = 1.0;
  double Acc0 = 1.5;
  double g = 1.0;

  std::complex<double> sigma() const;
  double displacement(double t, double x) const;
  SvmState state(double t, double x) const;
  SvmParams params() const;
};

}  // namespace ucmlab
