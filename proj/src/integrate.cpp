#include "chermnykh/integrate.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include <fmt/core.h>

#include "chermnykh/error.hpp"

namespace chermnykh {

std::string_view to_string(TrajectoryStatus s) noexcept {
  switch (s) {
    case TrajectoryStatus::Completed: return "completed";
    case TrajectoryStatus::SingularityEncountered: return "singularity_encountered";
    case TrajectoryStatus::StepUnderflow: return "step_underflow";
  }
  return "?";
}

namespace {

using Vec = std::array<double, 4>;

// Dormand-Prince 8(5,3) tableau (Hairer, Norsett & Wanner).
constexpr double c2 = 0.526001519587677318785587544488e-01;
constexpr double c3 = 0.789002279381515978178381316732e-01;
constexpr double c4 = 0.118350341907227396726757197510e+00;
constexpr double c5 = 0.281649658092772603273242802490e+00;
constexpr double c6 = 0.333333333333333333333333333333e+00;
constexpr double c7 = 0.25e+00;
constexpr double c8 = 0.307692307692307692307692307692e+00;
constexpr double c9 = 0.651282051282051282051282051282e+00;
constexpr double c10 = 0.6e+00;
constexpr double c11 = 0.857142857142857142857142857142e+00;

constexpr double b1 = 5.42937341165687622380535766363e-2;
constexpr double b6 = 4.45031289275240888144113950566e0;
constexpr double b7 = 1.89151789931450038304281599044e0;
constexpr double b8 = -5.8012039600105847814672114227e0;
constexpr double b9 = 3.1116436695781989440891606237e-1;
constexpr double b10 = -1.52160949662516078556178806805e-1;
constexpr double b11 = 2.01365400804030348374776537501e-1;
constexpr double b12 = 4.47106157277725905176885569043e-2;

constexpr double bhh1 = 0.244094488188976377952755905512e+00;
constexpr double bhh2 = 0.733846688281611857341361741547e+00;
constexpr double bhh3 = 0.220588235294117647058823529412e-01;

constexpr double er1 = 0.1312004499419488073250102996e-01;
constexpr double er6 = -0.1225156446376204440720569753e+01;
constexpr double er7 = -0.4957589496572501915214079952e+00;
constexpr double er8 = 0.1664377182454986536961530415e+01;
constexpr double er9 = -0.3503288487499736816886487290e+00;
constexpr double er10 = 0.3341791187130174790297318841e+00;
constexpr double er11 = 0.8192320648511571246570742613e-01;
constexpr double er12 = -0.2235530786388629525884427845e-01;

constexpr double a21 = 5.26001519587677318785587544488e-2;
constexpr double a31 = 1.97250569845378994544595329183e-2;
constexpr double a32 = 5.91751709536136983633785987549e-2;
constexpr double a41 = 2.95875854768068491816892993775e-2;
constexpr double a43 = 8.87627564304205475450678981324e-2;
constexpr double a51 = 2.41365134159266685502369798665e-1;
constexpr double a53 = -8.84549479328286085344864962717e-1;
constexpr double a54 = 9.24834003261792003115737966543e-1;
constexpr double a61 = 3.7037037037037037037037037037e-2;
constexpr double a64 = 1.70828608729473871279604482173e-1;
constexpr double a65 = 1.25467687566822425016691814123e-1;
constexpr double a71 = 3.7109375e-2;
constexpr double a74 = 1.70252211019544039314978060272e-1;
constexpr double a75 = 6.02165389804559606850219397283e-2;
constexpr double a76 = -1.7578125e-2;
constexpr double a81 = 3.70920001185047927108779319836e-2;
constexpr double a84 = 1.70383925712239993810214054705e-1;
constexpr double a85 = 1.07262030446373284651809199168e-1;
constexpr double a86 = -1.53194377486244017527936158236e-2;
constexpr double a87 = 8.27378916381402288758473766002e-3;
constexpr double a91 = 6.24110958716075717114429577812e-1;
constexpr double a94 = -3.36089262944694129406857109825e0;
constexpr double a95 = -8.68219346841726006818189891453e-1;
constexpr double a96 = 2.75920996994467083049415600797e1;
constexpr double a97 = 2.01540675504778934086186788979e1;
constexpr double a98 = -4.34898841810699588477366255144e1;
constexpr double a101 = 4.77662536438264365890433908527e-1;
constexpr double a104 = -2.48811461997166764192642586468e0;
constexpr double a105 = -5.90290826836842996371446475743e-1;
constexpr double a106 = 2.12300514481811942347288949897e1;
constexpr double a107 = 1.52792336328824235832596922938e1;
constexpr double a108 = -3.32882109689848629194453265587e1;
constexpr double a109 = -2.03312017085086261358222928593e-2;
constexpr double a111 = -9.3714243008598732571704021658e-1;
constexpr double a114 = 5.18637242884406370830023853209e0;
constexpr double a115 = 1.09143734899672957818500254654e0;
constexpr double a116 = -8.14978701074692612513997267357e0;
constexpr double a117 = -1.85200656599969598641566180701e1;
constexpr double a118 = 2.27394870993505042818970056734e1;
constexpr double a119 = 2.49360555267965238987089396762e0;
constexpr double a1110 = -3.0467644718982195003823669022e0;
constexpr double a121 = 2.27331014751653820792359768449e0;
constexpr double a124 = -1.05344954667372501984066689879e1;
constexpr double a125 = -2.00087205822486249909675718444e0;
constexpr double a126 = -1.79589318631187989172765950534e1;
constexpr double a127 = 2.79488845294199600508499808837e1;
constexpr double a128 = -2.85899827713502369474065508674e0;
constexpr double a129 = -8.87285693353062954433549289258e0;
constexpr double a1210 = 1.23605671757943030647266201528e1;
constexpr double a1211 = 6.43392746015763530355970484046e-1;

Vec rhs(const Vec& y, const SystemParams& p) {
  return eom_rhs({y[0], y[1], y[2], y[3]}, p);
}

// y + h * sum(coef_i * k_i)
template <std::size_t N>
Vec combine(const Vec& y, double h, const std::array<double, N>& coef,
            const std::array<const Vec*, N>& k) {
  Vec out = y;
  for (std::size_t i = 0; i < 4; ++i) {
    double acc = 0.0;
    for (std::size_t s = 0; s < N; ++s) acc += coef[s] * (*k[s])[i];
    out[i] += h * acc;
  }
  return out;
}

struct StepResult {
  Vec y_new;
  double err = 0.0;  // scaled error norm, accept when <= 1
};

StepResult dop853_step(const Vec& y, const Vec& k1, double h, const SystemParams& p,
                       const IntegrateOptions& opts) {
  const Vec k2 = rhs(combine<1>(y, h, {a21}, {&k1}), p);
  const Vec k3 = rhs(combine<2>(y, h, {a31, a32}, {&k1, &k2}), p);
  const Vec k4 = rhs(combine<2>(y, h, {a41, a43}, {&k1, &k3}), p);
  const Vec k5 = rhs(combine<3>(y, h, {a51, a53, a54}, {&k1, &k3, &k4}), p);
  const Vec k6 = rhs(combine<3>(y, h, {a61, a64, a65}, {&k1, &k4, &k5}), p);
  const Vec k7 = rhs(combine<4>(y, h, {a71, a74, a75, a76}, {&k1, &k4, &k5, &k6}), p);
  const Vec k8 =
      rhs(combine<5>(y, h, {a81, a84, a85, a86, a87}, {&k1, &k4, &k5, &k6, &k7}), p);
  const Vec k9 = rhs(
      combine<6>(y, h, {a91, a94, a95, a96, a97, a98}, {&k1, &k4, &k5, &k6, &k7, &k8}), p);
  const Vec k10 = rhs(combine<7>(y, h, {a101, a104, a105, a106, a107, a108, a109},
                                 {&k1, &k4, &k5, &k6, &k7, &k8, &k9}),
                      p);
  const Vec k11 = rhs(combine<8>(y, h, {a111, a114, a115, a116, a117, a118, a119, a1110},
                                 {&k1, &k4, &k5, &k6, &k7, &k8, &k9, &k10}),
                      p);
  const Vec k12 =
      rhs(combine<9>(y, h, {a121, a124, a125, a126, a127, a128, a129, a1210, a1211},
                     {&k1, &k4, &k5, &k6, &k7, &k8, &k9, &k10, &k11}),
          p);

  StepResult r;
  double err5 = 0.0;
  double err3 = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    const double incr = b1 * k1[i] + b6 * k6[i] + b7 * k7[i] + b8 * k8[i] + b9 * k9[i] +
                        b10 * k10[i] + b11 * k11[i] + b12 * k12[i];
    r.y_new[i] = y[i] + h * incr;
    const double sk = opts.abs_tol + opts.rel_tol * std::max(std::abs(y[i]), std::abs(r.y_new[i]));
    const double e3 = (incr - bhh1 * k1[i] - bhh2 * k9[i] - bhh3 * k12[i]) / sk;
    const double e5 = (er1 * k1[i] + er6 * k6[i] + er7 * k7[i] + er8 * k8[i] + er9 * k9[i] +
                       er10 * k10[i] + er11 * k11[i] + er12 * k12[i]) /
                      sk;
    err3 += e3 * e3;
    err5 += e5 * e5;
  }
  double deno = err5 + 0.01 * err3;
  if (deno <= 0.0) deno = 1.0;
  r.err = std::abs(h) * err5 / std::sqrt(4.0 * deno);
  return r;
}

double initial_step(const Vec& y, const Vec& f0, const SystemParams& p, const IntegrateOptions& opts) {
  double dnf = 0.0;
  double dny = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    const double sk = opts.abs_tol + opts.rel_tol * std::abs(y[i]);
    dnf += (f0[i] / sk) * (f0[i] / sk);
    dny += (y[i] / sk) * (y[i] / sk);
  }
  double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : 0.01 * std::sqrt(dny / dnf);
  Vec y1 = y;
  for (std::size_t i = 0; i < 4; ++i) y1[i] += h * f0[i];
  const Vec f1 = rhs(y1, p);
  double der2 = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    const double sk = opts.abs_tol + opts.rel_tol * std::abs(y[i]);
    der2 += ((f1[i] - f0[i]) / sk) * ((f1[i] - f0[i]) / sk);
  }
  der2 = std::sqrt(der2) / h;
  const double der12 = std::max(std::abs(der2), std::sqrt(dnf));
  const double h1 = der12 <= 1e-15 ? std::max(1e-6, h * 1e-3) : std::pow(0.01 / der12, 1.0 / 8.0);
  return std::min(100.0 * h, h1);
}

bool inside_guard(const Vec& y, const SystemParams& p, double guard) {
  const auto [r1, r2] = primary_distances(y[0], y[1], p);
  return r2 < guard || (p.q1() > 0.0 && r1 < guard);
}

}  // namespace

Trajectory integrate_orbit(const VelocityState& start, double t_end, const SystemParams& p,
                           const IntegrateOptions& opts) {
  if (!(t_end > 0.0) || !std::isfinite(t_end)) {
    throw Error(ErrorCode::InvalidArgument, "t_end must be positive and finite");
  }
  if (!(opts.rel_tol >= 1e-14 && opts.rel_tol <= 1e-3) || !(opts.abs_tol >= 1e-14 && opts.abs_tol <= 1e-3)) {
    throw Error(ErrorCode::InvalidArgument, "tolerances must lie in [1e-14, 1e-3]");
  }
  if (opts.sample_interval < 0.0) throw Error(ErrorCode::InvalidArgument, "negative sample interval");

  Vec y{start.x, start.y, start.vx, start.vy};
  if (inside_guard(y, p, opts.guard)) {
    throw Error(ErrorCode::SingularityAtPrimary, "initial state inside the integration guard");
  }

  Trajectory traj;
  const double c0 = jacobi_constant(start, p);
  traj.samples.push_back({0.0, start});

  double t = 0.0;
  Vec k1 = rhs(y, p);
  double h = std::min(initial_step(y, k1, p, opts), t_end);
  double next_sample = opts.sample_interval > 0.0 ? opts.sample_interval : t_end;
  std::size_t sample_index = 1;

  constexpr double safe = 0.9;
  constexpr double fac1 = 0.333;
  constexpr double fac2 = 6.0;
  bool last_rejected = false;

  while (t < t_end) {
    if (traj.steps.accepted + traj.steps.rejected >= opts.max_steps || h <= 1e-15 * std::max(1.0, std::abs(t))) {
      traj.status = TrajectoryStatus::StepUnderflow;
      traj.event_time = t;
      break;
    }
    const double target = std::min(next_sample, t_end);
    const bool clipped = t + h >= target;
    const double step = clipped ? target - t : h;

    StepResult r;
    try {
      r = dop853_step(y, k1, step, p, opts);
    } catch (const Error&) {
      // A stage landed on a primary: retry with a smaller step.
      ++traj.steps.rejected;
      h = 0.25 * step;
      last_rejected = true;
      continue;
    }
    if (!std::isfinite(r.err)) r.err = std::numeric_limits<double>::infinity();

    double fac = std::pow(r.err, 1.0 / 8.0) / safe;
    fac = std::clamp(fac, 1.0 / fac2, 1.0 / fac1);
    if (r.err <= 1.0) {
      ++traj.steps.accepted;
      t = clipped ? target : t + step;
      y = r.y_new;
      if (inside_guard(y, p, opts.guard)) {
        traj.samples.push_back({t, {y[0], y[1], y[2], y[3]}});
        traj.status = TrajectoryStatus::SingularityEncountered;
        traj.event_time = t;
        break;
      }
      k1 = rhs(y, p);
      const VelocityState s{y[0], y[1], y[2], y[3]};
      traj.jacobi_drift = std::max(traj.jacobi_drift, std::abs(jacobi_constant(s, p) - c0));

      const bool sample_due = opts.sample_interval > 0.0 ? (clipped && t == target) : true;
      if (sample_due || t >= t_end) {
        if (traj.samples.back().t < t) traj.samples.push_back({t, s});
      }
      if (opts.sample_interval > 0.0 && clipped && t == target) {
        ++sample_index;
        next_sample = std::min(t_end, sample_index * opts.sample_interval);
      }
      // A step shortened to reach a sample time says little about the natural step size.
      if (!clipped) {
        double h_new = step / fac;
        if (last_rejected) h_new = std::min(h_new, step);
        h = h_new;
      }
      last_rejected = false;
    } else {
      ++traj.steps.rejected;
      h = step / std::min(1.0 / fac1, fac);
      last_rejected = true;
    }
  }
  return traj;
}

DriftReport drift_report(const Trajectory& traj, const SystemParams& p) {
  if (traj.samples.empty()) throw Error(ErrorCode::InvalidArgument, "empty trajectory");
  DriftReport d;
  const double c0 = jacobi_constant(traj.samples.front().state, p);
  d.series.reserve(traj.samples.size());
  for (const auto& s : traj.samples) {
    const double delta = jacobi_constant(s.state, p) - c0;
    d.series.push_back(delta);
    d.max_drift = std::max(d.max_drift, std::abs(delta));
  }
  return d;
}

}  // namespace chermnykh
