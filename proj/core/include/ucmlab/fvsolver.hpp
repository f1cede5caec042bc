#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "ucmlab/entropycheck.hpp"
#include "ucmlab/svm2d.hpp"
#include "ucmlab/ucm3d.hpp"

namespace ucmlab {

// ---- grid and boundary conditions ----------------------------------------------

// wall: mirror image (normal velocity and shear components odd).
// moving_wall: no-slip, tangential velocity set to 2 V - U in the ghost.
// outflow: zero-order extrapolation.
enum class BcType { periodic, wall, moving_wall, outflow };

struct BoundaryCondition {
  BcType type = BcType::periodic;
  double tangential_velocity = 0.0;  // V of a moving wall
  double impulse = 0.0;              // displacement delivered as V += impulse / dt on step 0
};

enum Side { kXLo = 0, kXHi = 1, kYLo = 2, kYHi = 3 };

// Uniform cell-centred grid. ny == 1 is a slab varying along x (no y ghosts).
struct Grid {
  int nx = 1;
  int ny = 1;
  double dx = 1.0;  // dy == dx
  double x0 = 0.0;
  double y0 = 0.0;
  int ghost = 2;
  std::array<BoundaryCondition, 4> bc{};

  void validate() const;
  bool slab() const { return ny == 1; }
  int gx() const { return ghost; }
  int gy() const { return slab() ? 0 : ghost; }
  int NX() const { return nx + 2 * gx(); }
  int NY() const { return ny + 2 * gy(); }
  std::size_t cells_total() const { return static_cast<std::size_t>(NX()) * NY(); }
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * NX() + i; }
  // Centre of storage cell (i, j), ghosts included.
  double xc(int i) const { return x0 + (i - gx() + 0.5) * dx; }
  double yc(int j) const { return slab() ? y0 : y0 + (j - gy() + 0.5) * dx; }
  double cell_area() const { return slab() ? dx : dx * dx; }
};

// Raised when a state leaves the admissible set during a run.
class InvariantViolation : public std::runtime_error {
 public:
  InvariantViolation(const std::string& what, int i, int j, double time)
      : std::runtime_error(what), i_(i), j_(j), time_(time) {}
  int i() const { return i_; }
  int j() const { return j_; }
  double time() const { return time_; }

 private:
  int i_, j_;
  double time_;
};

// ---- systems ---------------------------------------------------------------------

enum class Reduction { sum, max, min };

struct MonitorSpec {
  std::string name;
  Reduction reduction;
};

class FvSystem {
 public:
  virtual ~FvSystem() = default;

  virtual std::string name() const = 0;
  virtual int dim() const = 0;
  virtual int space_dim() const = 0;
  // Component whose Rusanov dissipation acts on component + bathymetry (the
  // free surface), or -1.
  virtual int surface_component() const { return -1; }
  virtual void flux(const double* q, int dir, double* f) const = 0;
  // Spectral radius of the flux Jacobian along axis dir.
  virtual double max_speed(const double* q, int dir) const = 0;
  // Friction, topography and body force.
  virtual void nonstiff_source(const double* q, const Vec2& grad_zb, double* s) const = 0;
  // Exact relaxation over dt with the deformation frozen.
  virtual void relax(double* q, double dt) const = 0;
  // Empty string when admissible, otherwise the violated invariant.
  virtual std::string violation(const double* q) const = 0;
  // Ghost state across a wall with normal axis dir. dz = zb(interior) - zb(ghost).
  virtual void wall_ghost(const double* interior, double* ghost, int dir, bool moving,
                          double wall_velocity, double dz) const = 0;

  virtual std::vector<std::string> columns() const = 0;  // snapshot columns after x, y
  virtual void to_row(const double* q, double* row) const = 0;
  virtual void from_row(const double* row, double* q) const = 0;
  virtual std::string params_text() const = 0;

  virtual std::vector<MonitorSpec> monitors() const = 0;
  virtual void cell_monitors(const double* q, double* out) const = 0;
  virtual bool has_piola() const { return false; }
  // Depth-weighted deformation for the Piola monitor.
  virtual Matrix2 piola_field(const double* q) const {
    (void)q;
    return Matrix2::identity();
  }

  // View for the checker (flux, admissibility; no entropy).
  SystemInterface as_interface() const;
};

// SVM in the A variables (H, HU, HF, HA, HAcc).
class SvmSystem : public FvSystem {
 public:
  explicit SvmSystem(const SvmParams& p, EnergyConvention conv = EnergyConvention::conformation);
  std::string name() const override { return "svm"; }
  int dim() const override { return kSvmDim; }
  int space_dim() const override { return 2; }
  int surface_component() const override { return 0; }
  void flux(const double* q, int dir, double* f) const override;
  double max_speed(const double* q, int dir) const override;
  void nonstiff_source(const double* q, const Vec2& grad_zb, double* s) const override;
  void relax(double* q, double dt) const override;
  std::string violation(const double* q) const override;
  void wall_ghost(const double* interior, double* ghost, int dir, bool moving, double wall_velocity,
                  double dz) const override;
  std::vector<std::string> columns() const override;
  void to_row(const double* q, double* row) const override;
  void from_row(const double* row, double* q) const override;
  std::string params_text() const override;
  std::vector<MonitorSpec> monitors() const override;
  void cell_monitors(const double* q, double* out) const override;
  bool has_piola() const override { return true; }
  Matrix2 piola_field(const double* q) const override;

  const SvmParams& params() const { return p_; }
  virtual SvmState state(const double* q) const;
  virtual void store(const SvmState& s, double* q) const;

 protected:
  SvmParams p_;
  EnergyConvention conv_;
};

// SVM in the Y variables (H, HU, HF, HY^H, HYcc); relaxation by the exact A step.
class SvmYSystem : public SvmSystem {
 public:
  using SvmSystem::SvmSystem;
  std::string name() const override { return "svm_y"; }
  void flux(const double* q, int dir, double* f) const override;
  std::string violation(const double* q) const override;
  SvmState state(const double* q) const override;
  void store(const SvmState& s, double* q) const override;
};

// 3D UCM restricted to variation along x.
class UcmSlabSystem : public FvSystem {
 public:
  explicit UcmSlabSystem(const UcmParams& p);
  std::string name() const override { return "ucm_slab"; }
  int dim() const override { return kUcmDim; }
  int space_dim() const override { return 3; }
  void flux(const double* q, int dir, double* f) const override;
  double max_speed(const double* q, int dir) const override;
  void nonstiff_source(const double* q, const Vec2& grad_zb, double* s) const override;
  void relax(double* q, double dt) const override;
  std::string violation(const double* q) const override;
  void wall_ghost(const double* interior, double* ghost, int dir, bool moving, double wall_velocity,
                  double dz) const override;
  std::vector<std::string> columns() const override;
  void to_row(const double* q, double* row) const override;
  void from_row(const double* row, double* q) const override;
  std::string params_text() const override;
  std::vector<MonitorSpec> monitors() const override;
  void cell_monitors(const double* q, double* out) const override;

  const UcmParams& params() const { return p_; }

 private:
  UcmParams p_;
};

// Closed-form characteristic speeds along unit n.
// SVM: U.n +- sqrt(gH + 3 G Acc H^2 + G c_nn), U.n +- sqrt(G c_nn), U.n.
std::vector<double> svm_speeds(const SvmState& q, const Vec2& n, const SvmParams& p);
// UCM: u.n +- sqrt(p'(rho) + 2 kT + 2 KH' c_nn), u.n +- sqrt(2 KH' c_nn) (twice), u.n.
std::vector<double> ucm_speeds(const Ucm3dState& q, const Vec3& n, const UcmParams& p);

// ---- field and substeps ------------------------------------------------------------

enum class SpeedMode {
  analytic,    // closed-form spectral radius
  fd_spectrum  // eigenvalues of the finite-difference flux Jacobian
};

enum class Splitting { strang, lie, hyperbolic_only };

struct SolverOptions {
  double cfl = 0.45;
  int threads = 1;
  SpeedMode speeds = SpeedMode::analytic;
  Splitting splitting = Splitting::strang;
};

struct FvField {
  Grid grid;
  int dim = 0;
  std::vector<double> q;   // storage cells x dim, ghosts included
  std::vector<double> zb;  // bathymetry per storage cell
  double time = 0.0;
  long step = 0;

  FvField() = default;
  FvField(const Grid& g, int d);
  double* cell(int i, int j) { return q.data() + grid.index(i, j) * dim; }
  const double* cell(int i, int j) const { return q.data() + grid.index(i, j) * dim; }
};

using InitialState = std::function<void(double x, double y, double* q)>;
using Bathymetry = std::function<double(double x, double y)>;

// Fills interior cells from init and bathymetry at every storage cell (flat if empty).
FvField make_field(const Grid& grid, const FvSystem& sys, const InitialState& init,
                   const Bathymetry& zb = {});

// Wall speed for the step starting at field.time with step size dt.
double wall_velocity(const BoundaryCondition& bc, const FvField& f, double dt);
void fill_ghosts(FvField& f, const FvSystem& sys, double dt);

// F^ = (F(qL) + F(qR)) / 2 - s (qR - qL) / 2 with s = max(sL, sR). dzb = zb(R) - zb(L)
// is added to the jump of the system's surface component.
void rusanov_flux(const FvSystem& sys, const double* qL, const double* qR, int dir, double sL,
                  double sR, double* out, double dzb = 0.0);

// Per-cell spectral radius, x then y, interior and ghost cells.
std::vector<double> cell_speeds(const FvField& f, const FvSystem& sys, const SolverOptions& opt);
// cfl dx / max_cells(s_x + s_y) (s_x alone on a slab).
double cfl_dt(const FvField& f, const FvSystem& sys, const SolverOptions& opt);

void hyperbolic_substep(FvField& f, const FvSystem& sys, double dt, const SolverOptions& opt);
void relaxation_substep(FvField& f, const FvSystem& sys, double dt, const SolverOptions& opt);
// Relax dt/2, hyperbolic dt, relax dt/2 (or as selected by opt.splitting). Advances time and step.
void strang_step(FvField& f, const FvSystem& sys, double dt, const SolverOptions& opt);

// Throws InvariantViolation naming the first offending interior cell.
void check_field(const FvField& f, const FvSystem& sys);

// ---- monitors and output -----------------------------------------------------------------

struct MonitorRow {
  long step = 0;
  double time = 0.0;
  double dt = 0.0;
  std::vector<double> values;
};

std::vector<std::string> monitor_names(const FvSystem& sys);
MonitorRow compute_monitors(const FvField& f, const FvSystem& sys, double dt, int threads = 1);
std::string monitors_csv_header(const FvSystem& sys);
std::string monitors_csv_row(const MonitorRow& r);

std::uint64_t params_hash(const FvSystem& sys);
std::string snapshot_text(const FvField& f, const FvSystem& sys);
// Restores interior cells, time and step; the grid must match.
void load_snapshot(const std::string& text, FvField& f, const FvSystem& sys);

// ---- driver ----------------------------------------------------------------------------

struct RunConfig {
  std::shared_ptr<const FvSystem> system;
  Grid grid;
  InitialState init;
  Bathymetry bathymetry;
  SolverOptions solver;
  double t_end = 0.0;
  double output_interval = 0.0;  // 0: initial and final snapshots only
  long max_steps = 100000000;  // stops early once f.step reaches it
};

struct RunResult {
  FvField field;
  std::vector<MonitorRow> monitors;
  std::vector<std::string> snapshots;  // text of each emitted snapshot
  std::vector<double> snapshot_times;
};

using StepCallback = std::function<void(const FvField&, double dt)>;

// Advances to t_end. Snapshots land exactly on multiples of output_interval.
// An InvariantViolation propagates after the offending state is captured in
// `diagnostic` (if non-null).
RunResult run(const RunConfig& cfg, const StepCallback& on_step = {}, std::string* diagnostic = nullptr,
              const FvField* resume_from = nullptr);

}  // namespace ucmlab
