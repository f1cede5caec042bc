#include "ucmlab/entropycheck.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

#include "ucmlab/format.hpp"
#include "ucmlab/parallel.hpp"

namespace ucmlab {

FdOptions uniform_fd() {
  FdOptions o;
  o.step = 1e-5;
  o.frame = FdFrame::uniform;
  o.richardson = 1;
  return o;
}

DenseMat fd_frame(const SystemInterface& sys, const StateVec& q, FdFrame frame) {
  if (frame == FdFrame::adapted && sys.frame) return sys.frame(q);
  const double s = 1.0 + q.cwiseAbs().maxCoeff();
  return s * DenseMat::Identity(q.size(), q.size());
}

namespace {

struct StencilExit {};

using ScalarFn = std::function<double(const StateVec&)>;

double eval_entropy(const SystemInterface& sys, const ScalarFn& f, const StateVec& x) {
  if (!sys.admissible(x)) throw StencilExit{};
  try {
    return f(x);
  } catch (const DomainError&) {
    throw StencilExit{};
  }
}

StateVec eval_flux(const SystemInterface& sys, const StateVec& x, const Vec3& dir) {
  if (!sys.admissible(x)) throw StencilExit{};
  try {
    return sys.flux(x, dir);
  } catch (const DomainError&) {
    throw StencilExit{};
  }
}

DenseMat hessian_term(const SystemInterface& sys, const ScalarFn& f, const StateVec& q,
                      const DenseMat& T, double h) {
  const int n = static_cast<int>(q.size());
  DenseMat H(n, n);
  const double f0 = eval_entropy(sys, f, q);
  std::vector<StateVec> d(n);
  for (int i = 0; i < n; ++i) d[i] = h * T.col(i);
  for (int i = 0; i < n; ++i) {
    const double fp = eval_entropy(sys, f, q + d[i]);
    const double fm = eval_entropy(sys, f, q - d[i]);
    H(i, i) = (fp - 2.0 * f0 + fm) / (h * h);
    for (int j = 0; j < i; ++j) {
      const double fpp = eval_entropy(sys, f, q + d[i] + d[j]);
      const double fpm = eval_entropy(sys, f, q + d[i] - d[j]);
      const double fmp = eval_entropy(sys, f, q - d[i] + d[j]);
      const double fmm = eval_entropy(sys, f, q - d[i] - d[j]);
      H(i, j) = H(j, i) = (fpp - fpm - fmp + fmm) / (4.0 * h * h);
    }
  }
  return H;
}

DenseMat hessian_once(const SystemInterface& sys, const StateVec& q, const DenseMat& T, double h) {
  if (sys.entropy_terms.empty()) return hessian_term(sys, sys.entropy, q, T, h);
  DenseMat H = DenseMat::Zero(q.size(), q.size());
  for (const auto& f : sys.entropy_terms) H += hessian_term(sys, f, q, T, h);
  return H;
}

DenseMat jacobian_once(const SystemInterface& sys, const StateVec& q, const Vec3& dir,
                       const DenseMat& T, double h) {
  const int n = static_cast<int>(q.size());
  DenseMat J(n, n);
  for (int k = 0; k < n; ++k) {
    const StateVec d = h * T.col(k);
    J.col(k) = (eval_flux(sys, q + d, dir) - eval_flux(sys, q - d, dir)) / (2.0 * h);
  }
  return J;
}

template <class Once>
FdResult richardson(Once once, double h, int max_shrink, int levels, const char* what) {
  if (levels < 0) throw std::invalid_argument(std::string(what) + ": negative Richardson levels");
  for (int attempt = 0; attempt <= max_shrink; ++attempt) {
    try {
      std::vector<DenseMat> table;
      double s = h;
      for (int k = 0; k <= levels; ++k, s *= 0.5) table.push_back(once(s));
      FdResult r;
      r.coarse = table.front();
      double factor = 4.0;
      for (int k = 1; k <= levels; ++k, factor *= 4.0)
        for (int m = levels; m >= k; --m)
          table[m] = (factor * table[m] - table[m - 1]) / (factor - 1.0);
      r.value = table.back();
      r.step = h;
      return r;
    } catch (const StencilExit&) {
      h *= 0.25;
    }
  }
  throw DomainError(std::string(what) + ": finite-difference stencil leaves the admissible set", h);
}

}  // namespace

FdResult fd_hessian(const SystemInterface& sys, const StateVec& q, const DenseMat& T, double h,
                    int max_shrink, int levels) {
  return richardson([&](double s) { return hessian_once(sys, q, T, s); }, h, max_shrink, levels,
                    "fd_hessian");
}

DenseMat fd_hessian(const SystemInterface& sys, const StateVec& q, double h) {
  try {
    return hessian_once(sys, q, DenseMat::Identity(q.size(), q.size()), h);
  } catch (const StencilExit&) {
    throw DomainError("fd_hessian: finite-difference stencil leaves the admissible set", h);
  }
}

FdResult fd_jacobian(const SystemInterface& sys, const StateVec& q, const Vec3& dir,
                     const DenseMat& T, double h, int max_shrink, int levels) {
  const Eigen::PartialPivLU<DenseMat> lu(T);
  FdResult r = richardson([&](double s) { return jacobian_once(sys, q, dir, T, s); }, h,
                          max_shrink, levels, "fd_jacobian");
  r.value = lu.solve(r.value);
  r.coarse = lu.solve(r.coarse);
  return r;
}

DenseMat fd_jacobian(const SystemInterface& sys, const StateVec& q, const Vec3& dir, double h) {
  try {
    return jacobian_once(sys, q, dir, DenseMat::Identity(q.size(), q.size()), h);
  } catch (const StencilExit&) {
    throw DomainError("fd_jacobian: finite-difference stencil leaves the admissible set", h);
  }
}

double antisymmetry_ratio(const DenseMat& S) {
  const double ns = S.norm();
  if (ns == 0.0) return 0.0;
  return (S - S.transpose()).norm() / ns;
}

DenseMat kernel_projector(const DenseMat& L) {
  const Eigen::Index n = L.cols();
  if (L.rows() == 0) return DenseMat::Identity(n, n);
  const DenseMat G = L * L.transpose();
  return DenseMat::Identity(n, n) - L.transpose() * G.ldlt().solve(L);
}

namespace {

double projected_ratio(const DenseMat& S, const DenseMat& P) {
  const DenseMat PSP = P * S * P;
  const double ns = PSP.norm();
  if (ns == 0.0) return 0.0;
  return (PSP - PSP.transpose()).norm() / ns;
}

}  // namespace

DefectResult symmetrization_defect(const SystemInterface& sys, const StateVec& q, const Vec3& dir,
                                   const FdOptions& opt) {
  const DenseMat T = fd_frame(sys, q, opt.frame);
  const FdResult hs = fd_hessian(sys, q, T, opt.step, opt.max_shrink, opt.richardson);
  const FdResult js = fd_jacobian(sys, q, dir, T, opt.step, opt.max_shrink, opt.richardson);
  DenseMat P = DenseMat::Identity(q.size(), q.size());
  if (sys.involution) P = kernel_projector(sys.involution(q, dir) * T);
  const DenseMat S = hs.value * js.value;
  DefectResult r;
  r.raw = antisymmetry_ratio(S);
  r.defect = projected_ratio(S, P);
  r.coarse = projected_ratio(hs.coarse * js.coarse, P);
  const Eigen::SelfAdjointEigenSolver<DenseMat> es(0.5 * (hs.value + hs.value.transpose()),
                                                   Eigen::EigenvaluesOnly);
  r.min_hessian_eig = es.eigenvalues().minCoeff();
  r.step = std::min(hs.step, js.step);
  return r;
}

double symmetrization_defect(const SystemInterface& sys, const StateVec& q, const Vec3& dir,
                             double h) {
  const DenseMat Hs = fd_hessian(sys, q, h);
  const DenseMat J = fd_jacobian(sys, q, dir, h);
  DenseMat P = DenseMat::Identity(q.size(), q.size());
  if (sys.involution) P = kernel_projector(sys.involution(q, dir));
  return projected_ratio(Hs * J, P);
}

std::vector<std::complex<double>> real_spectrum(const DenseMat& M) {
  Eigen::EigenSolver<DenseMat> es(M, false);
  if (es.info() != Eigen::Success)
    throw DomainError("real_spectrum: QR iteration did not converge");
  const auto ev = es.eigenvalues();
  std::vector<std::complex<double>> out(ev.data(), ev.data() + ev.size());
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.real() < b.real() || (a.real() == b.real() && a.imag() < b.imag());
  });
  return out;
}

std::vector<std::complex<double>> characteristic_speeds(const SystemInterface& sys,
                                                        const StateVec& q, const Vec3& dir,
                                                        const FdOptions& opt) {
  const DenseMat T = fd_frame(sys, q, opt.frame);
  return real_spectrum(fd_jacobian(sys, q, dir, T, opt.step, opt.max_shrink, opt.richardson).value);
}

double max_imag(const std::vector<std::complex<double>>& speeds) {
  double m = 0.0;
  for (const auto& s : speeds) m = std::max(m, std::abs(s.imag()));
  return m;
}

double spectral_radius(const std::vector<std::complex<double>>& speeds) {
  double m = 0.0;
  for (const auto& s : speeds) m = std::max(m, std::abs(s));
  return m;
}

ConvexityResult convexity_sample(const std::function<double(const StateVec&)>& f,
                                 const std::function<StateVec(std::mt19937_64&)>& sampler,
                                 long trials, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  ConvexityResult r;
  r.worst = -std::numeric_limits<double>::infinity();
  r.worst_relative = -std::numeric_limits<double>::infinity();
  for (long k = 0; k < trials; ++k) {
    const StateVec a = sampler(rng);
    const StateVec b = sampler(rng);
    const double fa = f(a), fb = f(b);
    const double fm = f(0.5 * (a + b));
    const double v = fm - 0.5 * (fa + fb);
    const double scale = std::max({std::abs(fa), std::abs(fb), 1e-300});
    r.worst = std::max(r.worst, v);
    r.worst_relative = std::max(r.worst_relative, v / scale);
  }
  r.trials = trials;
  return r;
}

// ---- suite ---------------------------------------------------------------

namespace {

struct SampleOutcome {
  double min_eig = std::numeric_limits<double>::infinity();
  double defect = 0.0;
  double raw = 0.0;
  double imag_rel = 0.0;
  double step = std::numeric_limits<double>::infinity();
};

Vec3 random_direction(std::mt19937_64& rng, int dim) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Vec3 d{0.0, 0.0, 0.0};
  double nrm = 0.0;
  while (nrm < 1e-8) {
    nrm = 0.0;
    for (int k = 0; k < dim; ++k) {
      d[k] = nd(rng);
      nrm += d[k] * d[k];
    }
    nrm = std::sqrt(nrm);
  }
  for (int k = 0; k < dim; ++k) d[k] /= nrm;
  return d;
}

}  // namespace

CheckResult run_suite(const SystemInterface& sys, const SuiteOptions& opt) {
  std::mt19937_64 rng(opt.seed);
  std::vector<StateVec> states;
  std::vector<std::vector<Vec3>> dirs;
  states.reserve(opt.samples);
  for (long s = 0; s < opt.samples; ++s) {
    states.push_back(sys.sampler(rng));
    std::vector<Vec3> d;
    for (int k = 0; k < sys.space_dim; ++k) {
      Vec3 e{0.0, 0.0, 0.0};
      e[k] = 1.0;
      d.push_back(e);
    }
    if (sys.space_dim > 1)
      for (int k = 0; k < opt.random_directions; ++k) d.push_back(random_direction(rng, sys.space_dim));
    dirs.push_back(std::move(d));
  }

  std::vector<SampleOutcome> out(states.size());
  parallel_for(states.size(), opt.threads, [&](std::size_t b, std::size_t e) {
    for (std::size_t s = b; s < e; ++s) {
      SampleOutcome o;
      const StateVec& q = states[s];
      const DenseMat T = fd_frame(sys, q, opt.fd.frame);
      const FdResult hs = fd_hessian(sys, q, T, opt.fd.step, opt.fd.max_shrink, opt.fd.richardson);
      const Eigen::SelfAdjointEigenSolver<DenseMat> es(hs.value, Eigen::EigenvaluesOnly);
      o.min_eig = es.eigenvalues().minCoeff();
      o.step = hs.step;
      for (const Vec3& d : dirs[s]) {
        const FdResult js = fd_jacobian(sys, q, d, T, opt.fd.step, opt.fd.max_shrink, opt.fd.richardson);
        o.step = std::min(o.step, js.step);
        const DenseMat S = hs.value * js.value;
        DenseMat P = DenseMat::Identity(q.size(), q.size());
        if (sys.involution) P = kernel_projector(sys.involution(q, d) * T);
        o.defect = std::max(o.defect, projected_ratio(S, P));
        o.raw = std::max(o.raw, antisymmetry_ratio(S));
        const auto sp = real_spectrum(js.value);
        double re = 0.0;
        for (const auto& c : sp) re = std::max(re, std::abs(c.real()));
        o.imag_rel = std::max(o.imag_rel, max_imag(sp) / std::max(re, 1e-300));
      }
      out[s] = o;
    }
  });

  CheckResult r;
  r.name = sys.name + ".godunov_mock";
  r.system = sys.name;
  r.samples = opt.samples;
  r.seed = opt.seed;
  r.fd_frame = opt.fd.frame == FdFrame::adapted ? "adapted" : "uniform";
  r.tol_defect = opt.tol_defect;
  r.tol_imag = opt.tol_imag;
  r.min_hessian_eig = std::numeric_limits<double>::infinity();
  r.fd_step = opt.fd.step;
  double min_step = opt.fd.step;
  for (const auto& o : out) {
    r.min_hessian_eig = std::min(r.min_hessian_eig, o.min_eig);
    r.max_defect = std::max(r.max_defect, o.defect);
    r.max_raw_defect = std::max(r.max_raw_defect, o.raw);
    r.max_imag = std::max(r.max_imag, o.imag_rel);
    min_step = std::min(min_step, o.step);
  }
  r.extra.emplace_back("min_fd_step_after_shrink", format_double(min_step));
  r.extra.emplace_back("directions_per_sample",
                       std::to_string(states.empty() ? 0 : dirs.front().size()));
  r.pass = r.min_hessian_eig > 0.0 && r.max_defect <= opt.tol_defect && r.max_imag <= opt.tol_imag;
  return r;
}

// ---- report text -----------------------------------------------------------

bool VerificationReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

std::string VerificationReport::to_text() const {
  std::ostringstream os;
  os << "report: verification\n";
  os << "checks: " << checks.size() << "\n";
  os << "verdict: " << (passed() ? "pass" : "fail") << "\n";
  for (const auto& c : checks) {
    os << "\n[check " << c.name << "]\n";
    os << "system: " << c.system << "\n";
    os << "samples: " << c.samples << "\n";
    os << "seed: " << c.seed << "\n";
    os << "fd_step: " << format_double(c.fd_step) << "\n";
    os << "fd_frame: " << c.fd_frame << "\n";
    os << "min_hessian_eig: " << format_double(c.min_hessian_eig) << "\n";
    os << "max_defect: " << format_double(c.max_defect) << "\n";
    os << "max_raw_defect: " << format_double(c.max_raw_defect) << "\n";
    os << "max_imag: " << format_double(c.max_imag) << "\n";
    os << "tol_defect: " << format_double(c.tol_defect) << "\n";
    os << "tol_imag: " << format_double(c.tol_imag) << "\n";
    for (const auto& [k, v] : c.extra) os << "x." << k << ": " << v << "\n";
    os << "verdict: " << (c.pass ? "pass" : "fail") << "\n";
  }
  return os.str();
}

VerificationReport VerificationReport::parse(const std::string& text) {
  VerificationReport rep;
  std::istringstream is(text);
  std::string line;
  CheckResult* cur = nullptr;
  long declared = -1;
  int lineno = 0;
  auto fail = [&](const std::string& msg) {
    throw std::runtime_error("report line " + std::to_string(lineno) + ": " + msg);
  };
  while (std::getline(is, line)) {
    ++lineno;
    const std::string_view t = trim(line);
    if (t.empty()) continue;
    if (t.front() == '[') {
      if (t.back() != ']' || t.substr(0, 7) != "[check ") fail("bad section header");
      rep.checks.emplace_back();
      cur = &rep.checks.back();
      cur->name = std::string(t.substr(7, t.size() - 8));
      continue;
    }
    const auto colon = t.find(": ");
    std::string key, val;
    if (colon == std::string_view::npos) {
      if (t.back() != ':') fail("expected 'key: value'");
      key = std::string(t.substr(0, t.size() - 1));
    } else {
      key = std::string(t.substr(0, colon));
      val = std::string(t.substr(colon + 2));
    }
    try {
      if (!cur) {
        if (key == "checks") declared = parse_int(val);
        continue;  // header keys: report, checks, verdict
      }
      if (key == "system") cur->system = val;
      else if (key == "samples") cur->samples = static_cast<long>(parse_int(val));
      else if (key == "seed") cur->seed = std::stoull(val);
      else if (key == "fd_step") cur->fd_step = parse_double(val);
      else if (key == "fd_frame") cur->fd_frame = val;
      else if (key == "min_hessian_eig") cur->min_hessian_eig = parse_double(val);
      else if (key == "max_defect") cur->max_defect = parse_double(val);
      else if (key == "max_raw_defect") cur->max_raw_defect = parse_double(val);
      else if (key == "max_imag") cur->max_imag = parse_double(val);
      else if (key == "tol_defect") cur->tol_defect = parse_double(val);
      else if (key == "tol_imag") cur->tol_imag = parse_double(val);
      else if (key == "verdict") {
        if (val != "pass" && val != "fail") fail("verdict must be pass or fail");
        cur->pass = val == "pass";
      } else if (key.rfind("x.", 0) == 0) cur->extra.emplace_back(key.substr(2), val);
      else fail("unknown key '" + key + "'");
    } catch (const std::invalid_argument& e) {
      fail(e.what());
    }
  }
  if (declared >= 0 && declared != static_cast<long>(rep.checks.size()))
    throw std::runtime_error("report: declared " + std::to_string(declared) + " checks, found " +
                             std::to_string(rep.checks.size()));
  return rep;
}

bool operator==(const CheckResult& a, const CheckResult& b) {
  auto same = [](double x, double y) { return (std::isnan(x) && std::isnan(y)) || x == y; };
  return a.name == b.name && a.system == b.system && a.samples == b.samples && a.seed == b.seed &&
         same(a.fd_step, b.fd_step) && a.fd_frame == b.fd_frame &&
         same(a.min_hessian_eig, b.min_hessian_eig) && same(a.max_defect, b.max_defect) &&
         same(a.max_raw_defect, b.max_raw_defect) && same(a.max_imag, b.max_imag) &&
         same(a.tol_defect, b.tol_defect) && same(a.tol_imag, b.tol_imag) && a.pass == b.pass &&
         a.extra == b.extra;
}

bool operator==(const VerificationReport& a, const VerificationReport& b) {
  return a.checks == b.checks;
}

}  // namespace ucmlab
