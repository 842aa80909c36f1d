#include "fpif/drift.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>

#include "json.hpp"

namespace fpif {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double pow_int(double x, int n) {
  double r = 1.0;
  for (int i = 0; i < n; ++i) r *= x;
  return r;
}

}  // namespace

std::string to_string(DriftKind kind) {
  switch (kind) {
    case DriftKind::Quadratic: return "Quadratic";
    case DriftKind::Exponential: return "Exponential";
    case DriftKind::Custom: return "Custom";
  }
  return "?";
}

DriftKind drift_kind_from_string(const std::string& name) {
  if (name == "Quadratic") return DriftKind::Quadratic;
  if (name == "Exponential") return DriftKind::Exponential;
  if (name == "Custom") return DriftKind::Custom;
  throw std::invalid_argument("unknown drift kind: " + name);
}

// ---------------------------------------------------------------------------
// construction

DriftSpec DriftSpec::quadratic(double x0, double h0, double x1) {
  return make_canonical_drift(DriftKind::Quadratic, x0, h0, x1);
}

DriftSpec DriftSpec::exponential(double x0, double h0, double x1) {
  return make_canonical_drift(DriftKind::Exponential, x0, h0, x1);
}

DriftSpec DriftSpec::custom(double x0, double h0, double x1, CustomBranch right) {
  if (x0 > 0.0) throw std::invalid_argument("drift: x0 must be <= 0");
  if (x1 < 0.0) throw std::invalid_argument("drift: x1 must be >= 0");
  if (!right.h || !right.h_prime)
    throw std::invalid_argument("drift: custom branch needs h and h_prime");
  DriftSpec spec;
  spec.kind_ = DriftKind::Custom;
  spec.x0_ = x0;
  spec.h0_ = h0;
  spec.x1_ = x1;
  spec.custom_ = std::move(right);
  spec.finalize_blend();
  return spec;
}

DriftSpec make_canonical_drift(DriftKind kind, double x0, double h0, double x1) {
  if (kind == DriftKind::Custom)
    throw std::invalid_argument("make_canonical_drift: use DriftSpec::custom");
  if (x0 > 0.0) throw std::invalid_argument("drift: x0 must be <= 0");
  if (x1 < 0.0) throw std::invalid_argument("drift: x1 must be >= 0");
  DriftSpec spec;
  spec.kind_ = kind;
  spec.x0_ = x0;
  spec.h0_ = h0;
  spec.x1_ = x1;
  spec.finalize_blend();
  return spec;
}

double DriftSpec::right_h(double x) const {
  switch (kind_) {
    case DriftKind::Quadratic: return x * x;
    case DriftKind::Exponential: return std::exp(x);
    case DriftKind::Custom: return custom_.h(x);
  }
  return 0.0;
}

double DriftSpec::right_h_prime(double x) const {
  switch (kind_) {
    case DriftKind::Quadratic: return 2.0 * x;
    case DriftKind::Exponential: return std::exp(x);
    case DriftKind::Custom: return custom_.h_prime(x);
  }
  return 0.0;
}

double DriftSpec::right_anti_diff(double a, double b) const {
  switch (kind_) {
    case DriftKind::Quadratic: return (b * b * b - a * a * a) / 3.0;
    case DriftKind::Exponential: return std::exp(b) - std::exp(a);
    case DriftKind::Custom: break;
  }
  if (custom_.h_anti) return custom_.h_anti(b) - custom_.h_anti(a);
  if (a > b) return -right_anti_diff(b, a);
  // numeric fallback with cached checkpoints every 0.5 from x1 rightwards
  auto& cps = custom_anti_checkpoints_;
  if (cps.empty()) cps.emplace_back(x1_, 0.0);
  auto anti_at = [&](double x) {
    while (cps.back().first < x) {
      const double lo = cps.back().first;
      const double hi = lo + 0.5;
      auto q = integrate([&](double y) { return custom_.h(y); }, lo, hi, 1e-12, 1e-14);
      cps.emplace_back(hi, cps.back().second + q.value);
    }
    auto it = std::lower_bound(cps.begin(), cps.end(), x,
                               [](const auto& p, double v) { return p.first < v; });
    if (it != cps.begin()) --it;
    auto q = integrate([&](double y) { return custom_.h(y); }, it->first, x, 1e-12, 1e-14);
    return it->second + q.value;
  };
  return anti_at(b) - anti_at(a);
}

void DriftSpec::finalize_blend() {
  const double f0 = -x0_ + h0_;
  const double g0 = -1.0;
  const double f1 = right_h(x1_);
  const double g1 = right_h_prime(x1_);
  if (x1_ > x0_) {
    const double len = x1_ - x0_;
    blend_len_ = len;
    // Hermite-to-monomial in t = (x - x0)/len
    blend_c_[0] = f0;
    blend_c_[1] = len * g0;
    blend_c_[2] = -3.0 * f0 - 2.0 * len * g0 + 3.0 * f1 - len * g1;
    blend_c_[3] = 2.0 * f0 + len * g0 - 2.0 * f1 + len * g1;
  } else {
    // degenerate blend interval: branches must already join C^1 at 0
    if (std::abs(f1 - f0) > 1e-12 || std::abs(g1 - g0) > 1e-12)
      throw std::invalid_argument("drift: x0 == x1 but branches do not join C^1");
    blend_len_ = 0.0;
  }

  // branch constants for h_anti with h_anti(0) = 0; 0 always lies in [x0, x1]
  auto blend_anti_raw = [&](double x) {
    if (blend_len_ == 0.0) return 0.0;
    const double t = (x - x0_) / blend_len_;
    return blend_len_ * (blend_c_[0] * t + blend_c_[1] * t * t / 2.0 +
                         blend_c_[2] * t * t * t / 3.0 +
                         blend_c_[3] * t * t * t * t / 4.0);
  };
  anti_at_x0_ = -blend_anti_raw(0.0);
  anti_at_x1_ = anti_at_x0_ + blend_anti_raw(x1_);
}

// ---------------------------------------------------------------------------
// evaluation

double DriftSpec::h(double x) const {
  if (x <= x0_) return -x + h0_;
  if (x >= x1_) return right_h(x);
  const double t = (x - x0_) / blend_len_;
  return blend_c_[0] + t * (blend_c_[1] + t * (blend_c_[2] + t * blend_c_[3]));
}

double DriftSpec::h_prime(double x) const {
  if (x <= x0_) return -1.0;
  if (x >= x1_) return right_h_prime(x);
  const double t = (x - x0_) / blend_len_;
  return (blend_c_[1] + t * (2.0 * blend_c_[2] + t * 3.0 * blend_c_[3])) / blend_len_;
}

double DriftSpec::h_anti(double x) const {
  if (x <= x0_) {
    // int_{x0}^{x} (-y + h0) dy added to the blend constant
    return anti_at_x0_ + (-0.5 * x * x + h0_ * x) - (-0.5 * x0_ * x0_ + h0_ * x0_);
  }
  if (x >= x1_) return anti_at_x1_ + right_anti_diff(x1_, x);
  const double t = (x - x0_) / blend_len_;
  return anti_at_x0_ +
         blend_len_ * (blend_c_[0] * t + blend_c_[1] * t * t / 2.0 +
                       blend_c_[2] * t * t * t / 3.0 +
                       blend_c_[3] * t * t * t * t / 4.0);
}

DriftPoint DriftSpec::eval(double x) const {
  return DriftPoint{h(x), h_prime(x), h_anti(x)};
}

double DriftSpec::left_branch_const() const {
  return anti_at_x0_ - (-0.5 * x0_ * x0_ + h0_ * x0_);
}

// ---------------------------------------------------------------------------
// tail quantities

double DriftSpec::zeta(double x) const {
  if (x < x1_) throw std::invalid_argument("zeta: x must be >= x1");
  switch (kind_) {
    case DriftKind::Quadratic:
      // h'/h^2 = 2/y^3 decreasing on (0, inf); sup at the left endpoint
      if (x <= 0.0) return kInf;
      return 2.0 / pow_int(x, 3);
    case DriftKind::Exponential:
      return std::exp(-x);
    case DriftKind::Custom: break;
  }
  // grid maximization with doubling until two refinements agree
  auto q = [&](double y) {
    const double hy = custom_.h(y);
    return custom_.h_prime(y) / (hy * hy);
  };
  const double x_far = std::max(4.0 * std::max(1.0, std::abs(x)), x + 64.0);
  double prev = -kInf;
  for (int n = 256; n <= (1 << 16); n *= 2) {
    double sup = -kInf;
    for (int i = 0; i <= n; ++i) {
      const double y = x + (x_far - x) * static_cast<double>(i) / n;
      sup = std::max(sup, q(y));
    }
    if (prev > -kInf && std::abs(sup - prev) <= 1e-8 * std::max(1e-300, std::abs(sup)))
      return sup;
    prev = sup;
  }
  return prev;
}

namespace {

// Improper integral over [a, inf) for positive integrands whose decay is not
// known in closed form: sums doubling windows and extrapolates the remainder
// geometrically. Window ratios that refuse to decay mark divergence.
IntegralCheck improper_by_windows(const std::function<double(double)>& f, double a) {
  IntegralCheck out;
  double lo = a;
  double hi = std::max(2.0 * std::abs(a), a + 8.0);
  auto first = integrate(f, lo, hi, 1e-10, 1e-14);
  double total = first.value;
  double err = first.error;
  double w_prev = -1.0;
  for (int k = 0; k < 40; ++k) {
    lo = hi;
    hi *= 2.0;
    auto q = integrate(f, lo, hi, 1e-10, 1e-14);
    const double w = q.value;
    err += q.error;
    total += w;
    if (w <= 1e-12 * std::max(total, 1e-300)) {
      out.finite = true;
      out.value = total;
      out.error_bound = err + w;
      return out;
    }
    if (w_prev > 0.0) {
      const double r = w / w_prev;
      if (r >= 0.95 && k >= 6) {  // windows not decaying: divergent
        out.finite = false;
        out.value = kInf;
        out.error_bound = kInf;
        return out;
      }
      if (r < 0.9 && w / (1.0 - r) <= 1e-9 * total) {
        out.finite = true;
        out.value = total + w * r / (1.0 - r);
        out.error_bound = err + w * r / (1.0 - r);
        return out;
      }
    }
    w_prev = w;
  }
  out.finite = false;
  out.value = kInf;
  out.error_bound = kInf;
  return out;
}

}  // namespace

double DriftSpec::inv_h_tail(double x) const {
  if (x <= x1_) throw std::invalid_argument("inv_h_tail: x must be > x1");
  switch (kind_) {
    case DriftKind::Quadratic: return 1.0 / x;
    case DriftKind::Exponential: return std::exp(-x);
    case DriftKind::Custom: break;
  }
  auto check = improper_by_windows([&](double y) { return 1.0 / custom_.h(y); }, x);
  return check.finite ? check.value : kInf;
}

double blowup_time(const DriftSpec& spec, double x_start) {
  return spec.inv_h_tail(x_start);
}

// ---------------------------------------------------------------------------
// assumption validation

AssumptionsReport DriftSpec::validate() const {
  AssumptionsReport rep;

  // left branch: exact affine form plus C^1 junctions. The blend is built to
  // match values and slopes, so these are identities up to rounding.
  rep.left_branch_ok = true;
  for (int i = 0; i <= 200; ++i) {
    const double x = x0_ - 0.05 * i;
    if (std::abs(h(x) - (-x + h0_)) > 1e-12 * std::max(1.0, std::abs(x))) {
      rep.left_branch_ok = false;
      break;
    }
  }
  auto junction_ok = [&](double xj, double h_ref, double hp_ref) {
    const double tol_h = 1e-10 * std::max(1.0, std::abs(h_ref));
    const double tol_hp = 1e-10 * std::max(1.0, std::abs(hp_ref));
    const double t = (xj - x0_) / (blend_len_ > 0 ? blend_len_ : 1.0);
    const double bh =
        blend_c_[0] + t * (blend_c_[1] + t * (blend_c_[2] + t * blend_c_[3]));
    const double bhp = blend_len_ > 0
                           ? (blend_c_[1] + t * (2.0 * blend_c_[2] + t * 3.0 * blend_c_[3])) /
                                 blend_len_
                           : hp_ref;
    return std::abs(bh - h_ref) <= tol_h && std::abs(bhp - hp_ref) <= tol_hp;
  };
  if (blend_len_ > 0.0) {
    if (!junction_ok(x0_, -x0_ + h0_, -1.0)) rep.left_branch_ok = false;
    if (!junction_ok(x1_, right_h(x1_), right_h_prime(x1_))) rep.left_branch_ok = false;
  }
  if (!rep.left_branch_ok) rep.failures.push_back("left_branch");

  // right branch positivity and strict monotonicity
  rep.right_monotone_ok = true;
  const double probe_hi = std::max(x1_ + 64.0, 8.0 * std::max(1.0, x1_));
  for (int i = 0; i <= 2048; ++i) {
    const double x = x1_ + (probe_hi - x1_) * static_cast<double>(i) / 2048.0;
    if (!(h(x) > 0.0) || !(h_prime(x) > 0.0)) {
      rep.right_monotone_ok = false;
      break;
    }
  }
  if (!rep.right_monotone_ok) rep.failures.push_back("right_monotone");

  if (rep.right_monotone_ok) {
    const double x_cut = std::max(x1_ + 16.0, 4.0 * std::max(1.0, x1_));
    auto finite_with_tail = [&](const std::function<double(double)>& f, double tail) {
      IntegralCheck c;
      auto q = integrate(f, x1_, x_cut, 1e-10, 1e-14);
      c.finite = true;
      c.value = q.value + tail;
      c.error_bound = q.error + 1e-10 * std::abs(tail);
      return c;
    };

    switch (kind_) {
      case DriftKind::Quadratic:
        rep.inv_h_integrable =
            finite_with_tail([&](double y) { return 1.0 / h(y); }, 1.0 / x_cut);
        rep.zeta_integrable =
            finite_with_tail([&](double y) { return zeta(y); }, 1.0 / (x_cut * x_cut));
        rep.third_condition = finite_with_tail(
            [&](double y) {
              const double z = zeta(y);
              return h(y) * z * z;
            },
            4.0 / (3.0 * pow_int(x_cut, 3)));
        break;
      case DriftKind::Exponential: {
        const double t = std::exp(-x_cut);
        rep.inv_h_integrable = finite_with_tail([&](double y) { return 1.0 / h(y); }, t);
        rep.zeta_integrable = finite_with_tail([&](double y) { return zeta(y); }, t);
        rep.third_condition = finite_with_tail(
            [&](double y) {
              const double z = zeta(y);
              return h(y) * z * z;
            },
            t);
        break;
      }
      case DriftKind::Custom: {
        // per-point sup via a dense suffix-max table over [x1, far]; the
        // sampled branches used here have eventually monotone h'/h^2
        const double far = std::max(x1_ + 256.0, 16.0 * std::max(1.0, x1_));
        const int n = 1 << 15;
        auto table = std::make_shared<std::vector<double>>(n + 1);
        auto grid_at = [=, this](int i) {
          return x1_ + (far - x1_) * static_cast<double>(i) / n;
        };
        for (int i = 0; i <= n; ++i) {
          const double y = grid_at(i);
          const double hy = custom_.h(y);
          (*table)[i] = custom_.h_prime(y) / (hy * hy);
        }
        for (int i = n - 1; i >= 0; --i)
          (*table)[i] = std::max((*table)[i], (*table)[i + 1]);
        auto zeta_fast = [=, this](double y) {
          if (y >= far) {
            const double hy = custom_.h(y);
            return custom_.h_prime(y) / (hy * hy);
          }
          const double s = (y - x1_) / (far - x1_) * n;
          const int i = std::clamp(static_cast<int>(s), 0, n);
          return (*table)[i];
        };
        rep.inv_h_integrable =
            improper_by_windows([&](double y) { return 1.0 / custom_.h(y); },
                                x1_ + 1e-12);
        rep.zeta_integrable =
            improper_by_windows([&](double y) { return zeta_fast(y); }, x1_ + 1e-12);
        rep.third_condition = improper_by_windows(
            [&](double y) {
              const double z = zeta_fast(y);
              return custom_.h(y) * z * z;
            },
            x1_ + 1e-12);
        break;
      }
    }
  }

  if (!rep.inv_h_integrable.finite) rep.failures.push_back("inv_h_integrable");
  if (!rep.zeta_integrable.finite) rep.failures.push_back("zeta_integrable");
  if (!rep.third_condition.finite) rep.failures.push_back("third_condition");
  return rep;
}

PoincareCondition DriftSpec::poincare_condition_sup() const {
  PoincareCondition out;
  switch (kind_) {
    case DriftKind::Quadratic:
      // on the pure tail g(x) = x^2 * (1/x) = x, unbounded
      out.bounded = false;
      out.sup_value = kInf;
      return out;
    case DriftKind::Exponential: {
      // pure tail g = 1; sample the near region where the blend still matters
      double sup = 1.0;
      for (int i = 0; i <= 4096; ++i) {
        const double x = x1_ + 1e-9 + 16.0 * static_cast<double>(i) / 4096.0;
        sup = std::max(sup, h(x) * inv_h_tail(x));
      }
      out.bounded = true;
      out.sup_value = sup;
      return out;
    }
    case DriftKind::Custom: break;
  }
  // refining grid with doubling extent; unbounded if g grows along the tail.
  // The suffix integral is accumulated once per round, not per probe point.
  double prev_sup = 0.0;
  double extent = std::max(64.0, 8.0 * std::max(1.0, x1_));
  for (int round = 0; round < 6; ++round) {
    auto rem = improper_by_windows([&](double y) { return 1.0 / h(y); }, extent);
    if (!rem.finite) {
      out.bounded = false;
      out.sup_value = kInf;
      return out;
    }
    const int n = 1024;
    const double a = x1_ + 1e-9;
    std::vector<double> cum(n + 1, 0.0);
    for (int i = 1; i <= n; ++i) {
      const double lo = a + (extent - a) * static_cast<double>(i - 1) / n;
      const double hi = a + (extent - a) * static_cast<double>(i) / n;
      cum[i] = cum[i - 1] + gk15_panel([&](double y) { return 1.0 / h(y); }, lo, hi).value;
    }
    double sup = 0.0, g_mid = 0.0, g_last = 0.0;
    for (int i = 0; i <= n; ++i) {
      const double x = a + (extent - a) * static_cast<double>(i) / n;
      const double g = h(x) * (cum[n] - cum[i] + rem.value);
      sup = std::max(sup, g);
      if (i == n / 2) g_mid = g;
      if (i == n) g_last = g;
    }
    if (g_last > 1.2 * g_mid && g_last >= 0.98 * sup) {
      out.bounded = false;
      out.sup_value = kInf;
      return out;
    }
    if (round > 0 && std::abs(sup - prev_sup) <= 1e-3 * std::max(1.0, sup)) {
      out.bounded = true;
      out.sup_value = sup;
      return out;
    }
    prev_sup = sup;
    extent *= 2.0;
  }
  out.bounded = true;
  out.sup_value = prev_sup;
  return out;
}

DriftPoint eval_drift(const DriftSpec& spec, double x) { return spec.eval(x); }

double zeta(const DriftSpec& spec, double x) { return spec.zeta(x); }

AssumptionsReport validate_assumptions(const DriftSpec& spec) { return spec.validate(); }

PoincareCondition poincare_condition_sup(const DriftSpec& spec) {
  return spec.poincare_condition_sup();
}

// ---------------------------------------------------------------------------
// JSON serialization

std::string DriftSpec::to_json() const {
  nlohmann::json j;
  j["kind"] = to_string(kind_);
  j["x0"] = x0_;
  j["h0"] = h0_;
  j["x1"] = x1_;
  if (kind_ == DriftKind::Custom) {
    nlohmann::json table = nlohmann::json::array();
    const double hi = std::max(x1_ + 32.0, 8.0 * std::max(1.0, x1_));
    const int n = 512;
    for (int i = 0; i <= n; ++i) {
      const double x = x1_ + (hi - x1_) * static_cast<double>(i) / n;
      table.push_back({x, custom_.h(x)});
    }
    j["custom_table"] = std::move(table);
  }
  return j.dump(2);
}

DriftSpec DriftSpec::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  const DriftKind kind = drift_kind_from_string(j.at("kind").get<std::string>());
  const double x0 = j.value("x0", -1.0);
  const double h0 = j.value("h0", 0.0);
  const double x1 = j.value("x1", 1.0);
  if (kind != DriftKind::Custom) return make_canonical_drift(kind, x0, h0, x1);

  auto table = j.at("custom_table").get<std::vector<std::array<double, 2>>>();
  if (table.size() < 4) throw std::invalid_argument("custom_table too short");
  auto xs = std::make_shared<std::vector<double>>();
  auto hs = std::make_shared<std::vector<double>>();
  for (auto& row : table) {
    xs->push_back(row[0]);
    hs->push_back(row[1]);
  }
  for (size_t i = 1; i < xs->size(); ++i)
    if ((*xs)[i] <= (*xs)[i - 1])
      throw std::invalid_argument("custom_table x values must increase");

  // tail beyond the table: power law fitted through the last quarter
  const size_t m = xs->size();
  const double xa = (*xs)[m - std::max<size_t>(2, m / 4)], xb = xs->back();
  const double ha = (*hs)[m - std::max<size_t>(2, m / 4)], hb = hs->back();
  const double p = std::log(hb / ha) / std::log(xb / xa);
  const double c = hb / std::pow(xb, p);

  auto interp_h = [xs, hs, p, c](double x) {
    if (x >= xs->back()) return c * std::pow(x, p);
    auto it = std::lower_bound(xs->begin(), xs->end(), x);
    size_t i = static_cast<size_t>(std::distance(xs->begin(), it));
    if (i == 0) i = 1;
    const double t = (x - (*xs)[i - 1]) / ((*xs)[i] - (*xs)[i - 1]);
    return (1.0 - t) * (*hs)[i - 1] + t * (*hs)[i];
  };
  auto interp_hp = [xs, hs, p, c](double x) {
    if (x >= xs->back()) return c * p * std::pow(x, p - 1.0);
    auto it = std::lower_bound(xs->begin(), xs->end(), x);
    size_t i = static_cast<size_t>(std::distance(xs->begin(), it));
    if (i == 0) i = 1;
    return ((*hs)[i] - (*hs)[i - 1]) / ((*xs)[i] - (*xs)[i - 1]);
  };
  CustomBranch branch;
  branch.h = interp_h;
  branch.h_prime = interp_hp;
  return DriftSpec::custom(x0, h0, x1, std::move(branch));
}

}  // namespace fpif
