#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "spikes/error.hpp"
#include "spikes/rational.hpp"
#include "spikes/spike_train.hpp"

namespace spikes {

enum class PieceShape { constant, cosine, custom };

inline const char* shape_name(PieceShape s) {
  switch (s) {
    case PieceShape::constant: return "constant";
    case PieceShape::cosine: return "cosine";
    case PieceShape::custom: return "custom";
  }
  return "unknown";
}

/// One closed-form piece of a score function on [lo, hi) in the distance
/// variable x >= 0. Cosine pieces are mid + amp * cos(freq * x).
struct ScorePiece {
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();
  PieceShape shape = PieceShape::constant;
  double level = 0.0;
  std::optional<Rational> exact;
  double mid = 0.0, amp = 0.0, freq = 0.0;
  std::function<double(double)> value_fn;
  std::function<double(double)> slope_fn;

  static ScorePiece constant(double lo, double hi, double level, std::optional<Rational> exact = {}) {
    ScorePiece p;
    p.lo = lo;
    p.hi = hi;
    p.level = exact ? exact->to_double() : level;
    p.exact = exact;
    return p;
  }
  static ScorePiece cosine(double lo, double hi, double mid, double amp, double freq) {
    ScorePiece p;
    p.lo = lo;
    p.hi = hi;
    p.shape = PieceShape::cosine;
    p.mid = mid;
    p.amp = amp;
    p.freq = freq;
    return p;
  }
  /// Custom smooth piece; `slope` must be the derivative of `value`.
  static ScorePiece custom(double lo, double hi, std::function<double(double)> value,
                           std::function<double(double)> slope) {
    ScorePiece p;
    p.lo = lo;
    p.hi = hi;
    p.shape = PieceShape::custom;
    p.value_fn = std::move(value);
    p.slope_fn = std::move(slope);
    return p;
  }

  double value(double x) const {
    switch (shape) {
      case PieceShape::constant: return level;
      case PieceShape::cosine: return mid + amp * std::cos(freq * x);
      case PieceShape::custom: return value_fn(x);
    }
    return 0.0;
  }
  double slope(double x) const {
    switch (shape) {
      case PieceShape::constant: return 0.0;
      case PieceShape::cosine: return -amp * freq * std::sin(freq * x);
      case PieceShape::custom: return slope_fn(x);
    }
    return 0.0;
  }
};

/// Span of a lattice: arithmetic with span `value` (exact when known) or
/// nonarithmetic.
struct Span {
  bool arithmetic = false;
  std::optional<Rational> exact;
  double value = 0.0;

  static Span none() { return {}; }
  static Span of(Rational q) { return {true, q, q.to_double()}; }
  static Span of(double q) { return {true, std::nullopt, q}; }
  std::string str() const {
    if (!arithmetic) return "nonarithmetic";
    return exact ? exact->str() : format_double(value);
  }
};

/// Non-increasing score function f on [0, inf) with f(0) > 0 and a finite
/// tail value, given as contiguous closed-form pieces.
class ScoreFunction {
 public:
  enum class Kind { hamming, box, custom };

  ScoreFunction() = default;

  static ScoreFunction hamming(double epsilon, double beta) {
    require(epsilon > 0.0 && std::isfinite(epsilon), Errc::invalid_parameter, "epsilon must be > 0");
    require(beta > -1.0 && std::isfinite(beta), Errc::invalid_parameter, "hamming beta must be > -1");
    const double inf = std::numeric_limits<double>::infinity();
    ScoreFunction f(Kind::hamming, {ScorePiece::cosine(0.0, epsilon, 0.5 * (1.0 - beta), 0.5 * (1.0 + beta),
                                                       std::numbers::pi / epsilon),
                                    ScorePiece::constant(epsilon, inf, -beta)});
    f.epsilon_ = epsilon;
    f.beta_ = beta;
    return f;
  }

  /// Box kernel with an exact beta: 1 on [0, epsilon), -beta beyond.
  static ScoreFunction box(double epsilon, Rational beta) {
    require(epsilon > 0.0 && std::isfinite(epsilon), Errc::invalid_parameter, "epsilon must be > 0");
    require(beta > Rational(-1), Errc::invalid_parameter, "box beta must be > -1");
    const double inf = std::numeric_limits<double>::infinity();
    ScoreFunction f(Kind::box, {ScorePiece::constant(0.0, epsilon, 1.0, Rational(1)),
                                ScorePiece::constant(epsilon, inf, 0.0, -beta)});
    f.epsilon_ = epsilon;
    f.beta_ = beta.to_double();
    return f;
  }

  /// Box kernel with a floating-point beta; lattice quantities then need a
  /// declared span (see declare_span / declare_nonarithmetic).
  static ScoreFunction box(double epsilon, double beta) {
    require(epsilon > 0.0 && std::isfinite(epsilon), Errc::invalid_parameter, "epsilon must be > 0");
    require(beta > -1.0 && std::isfinite(beta), Errc::invalid_parameter, "box beta must be > -1");
    const double inf = std::numeric_limits<double>::infinity();
    ScoreFunction f(Kind::box, {ScorePiece::constant(0.0, epsilon, 1.0, Rational(1)),
                                ScorePiece::constant(epsilon, inf, -beta)});
    f.epsilon_ = epsilon;
    f.beta_ = beta;
    return f;
  }

  static ScoreFunction custom(std::vector<ScorePiece> pieces) { return ScoreFunction(Kind::custom, std::move(pieces)); }

  ScoreFunction& declare_span(Rational q) {
    require(q > Rational(0), Errc::invalid_parameter, "declared span must be > 0");
    for (const auto& p : pieces_) {
      require(p.shape == PieceShape::constant, Errc::inconsistent_span,
              "a score function with non-constant pieces is nonarithmetic");
      if (p.exact) {
        require((*p.exact / q).is_integer(), Errc::inconsistent_span,
                "declared span does not divide level " + p.exact->str());
      } else {
        const double k = p.level / q.to_double();
        require(std::abs(k - std::round(k)) <= 1e-9 * std::max(1.0, std::abs(k)), Errc::inconsistent_span,
                "declared span does not divide level " + format_double(p.level));
      }
    }
    declared_span_ = q;
    declared_nonarithmetic_ = false;
    return *this;
  }
  ScoreFunction& declare_nonarithmetic() {
    declared_nonarithmetic_ = true;
    declared_span_.reset();
    return *this;
  }

  Kind kind() const noexcept { return kind_; }
  const std::vector<ScorePiece>& pieces() const noexcept { return pieces_; }
  double epsilon() const noexcept { return epsilon_; }
  double beta() const noexcept { return beta_; }
  const std::optional<Rational>& declared_span() const noexcept { return declared_span_; }
  bool declared_nonarithmetic() const noexcept { return declared_nonarithmetic_; }

  std::size_t piece_index(double x) const {
    auto it = std::upper_bound(pieces_.begin(), pieces_.end(), x,
                               [](double v, const ScorePiece& p) { return v < p.lo; });
    return static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, (it - pieces_.begin()) - 1));
  }
  double operator()(double x) const { return pieces_[piece_index(std::abs(x))].value(std::abs(x)); }
  double slope(double x) const { return pieces_[piece_index(x)].slope(x); }
  double at_zero() const { return pieces_.front().value(0.0); }
  double tail() const { return pieces_.back().value(pieces_.back().lo); }
  bool continuous() const noexcept { return continuous_; }
  bool piecewise_constant() const {
    return std::all_of(pieces_.begin(), pieces_.end(), [](const ScorePiece& p) { return p.shape == PieceShape::constant; });
  }

  std::string describe() const {
    switch (kind_) {
      case Kind::hamming: return "hamming(epsilon=" + format_double(epsilon_) + ", beta=" + format_double(beta_) + ")";
      case Kind::box: return "box(epsilon=" + format_double(epsilon_) + ", beta=" + format_double(beta_) + ")";
      case Kind::custom: return "custom(" + std::to_string(pieces_.size()) + " pieces)";
    }
    return "unknown";
  }

 private:
  ScoreFunction(Kind kind, std::vector<ScorePiece> pieces) : kind_(kind), pieces_(std::move(pieces)) {
    require(!pieces_.empty(), Errc::invalid_parameter, "score function needs at least one piece");
    require(pieces_.front().lo == 0.0, Errc::invalid_parameter, "first piece must start at 0");
    require(std::isinf(pieces_.back().hi), Errc::invalid_parameter, "last piece must extend to infinity");
    require(pieces_.back().shape == PieceShape::constant, Errc::invalid_parameter,
            "the tail piece must be constant (finite limit at infinity)");
    for (std::size_t k = 0; k < pieces_.size(); ++k) {
      const auto& p = pieces_[k];
      require(p.hi > p.lo, Errc::invalid_parameter, "empty score piece");
      require(k == 0 || pieces_[k - 1].hi == p.lo, Errc::invalid_parameter, "score pieces must be contiguous");
      if (p.shape == PieceShape::custom)
        require(static_cast<bool>(p.value_fn) && static_cast<bool>(p.slope_fn), Errc::invalid_parameter,
                "custom pieces need value and slope closed forms");
    }
    // monotonicity: sampled within pieces and across boundaries
    constexpr int kSamples = 64;
    double prev = std::numeric_limits<double>::infinity();
    continuous_ = true;
    bool constant = true;
    const double ref = pieces_.front().value(0.0);
    for (std::size_t k = 0; k < pieces_.size(); ++k) {
      const auto& p = pieces_[k];
      const double hi = std::isinf(p.hi) ? p.lo : p.hi;
      for (int s = 0; s <= kSamples; ++s) {
        const double x = p.lo + (hi - p.lo) * s / kSamples;
        const double v = p.value(x);
        require(std::isfinite(v), Errc::invalid_parameter, "score function must be finite");
        require(v <= prev + 1e-12 * (1.0 + std::abs(v)), Errc::invalid_parameter,
                "score function must be non-increasing");
        if (std::abs(v - ref) > 1e-15) constant = false;
        prev = v;
      }
      if (k + 1 < pieces_.size()) {
        const double left = p.value(p.hi);
        const double right = pieces_[k + 1].value(p.hi);
        if (std::abs(left - right) > 1e-12 * (1.0 + std::abs(left))) continuous_ = false;
        prev = left;
      }
    }
    require(!constant, Errc::invalid_parameter, "score function must be non-constant");
    require(ref > 0.0, Errc::invalid_parameter, "score function must satisfy f(0) > 0");
  }

  Kind kind_ = Kind::custom;
  std::vector<ScorePiece> pieces_;
  double epsilon_ = 0.0;
  double beta_ = 0.0;
  bool continuous_ = true;
  std::optional<Rational> declared_span_;
  bool declared_nonarithmetic_ = false;
};

/// Largest q with every value of f in qZ, or nonarithmetic.
inline Span detect_arithmetic(const ScoreFunction& f) {
  if (f.declared_nonarithmetic() || !f.piecewise_constant()) return Span::none();
  if (f.declared_span()) return Span::of(*f.declared_span());
  Rational q(0);
  for (const auto& p : f.pieces()) {
    require(p.exact.has_value(), Errc::must_declare_span,
            "score level " + format_double(p.level) +
                " is not exact; declare the span (or nonarithmetic) explicitly");
    q = rational_gcd(q, *p.exact);
  }
  return Span::of(q);
}

/// A piece of g^{(i)}(u) = f(|u - center|) on [lo, hi).
struct KernelPiece {
  double lo = 0.0, hi = 0.0;
  PieceShape shape = PieceShape::constant;
  double level = 0.0;
  std::optional<Rational> exact;
  double mid = 0.0, amp = 0.0, freq = 0.0;
  double center = 0.0;
  const ScorePiece* source = nullptr;

  double value(double u) const {
    switch (shape) {
      case PieceShape::constant: return level;
      case PieceShape::cosine: return mid + amp * std::cos(freq * (u - center));
      case PieceShape::custom: return source->value_fn(std::abs(u - center));
    }
    return 0.0;
  }
  double slope(double u) const {
    switch (shape) {
      case PieceShape::constant: return 0.0;
      case PieceShape::cosine: return -amp * freq * std::sin(freq * (u - center));
      case PieceShape::custom: return (u >= center ? 1.0 : -1.0) * source->slope_fn(std::abs(u - center));
    }
    return 0.0;
  }
  bool same_shape(const KernelPiece& o) const {
    if (shape != o.shape) return false;
    switch (shape) {
      case PieceShape::constant:
        if (exact && o.exact) return *exact == *o.exact;
        return !exact && !o.exact && level == o.level;
      case PieceShape::cosine: return mid == o.mid && amp == o.amp && freq == o.freq && center == o.center;
      case PieceShape::custom: return false;
    }
    return false;
  }
};

/// Discontinuity of g^{(i)} at u in (0, T): delta = g(u-) - g(u+).
struct Jump {
  double u = 0.0;
  double left = 0.0;
  double right = 0.0;
  double delta = 0.0;
  std::optional<Rational> exact_delta;
};

struct TrainKernel {
  std::vector<KernelPiece> pieces;  // partition of [0, T)
  std::vector<Jump> jumps;
  std::size_t spikes = 0;

  std::size_t piece_at(double u) const {
    auto it = std::upper_bound(pieces.begin(), pieces.end(), u,
                               [](double v, const KernelPiece& p) { return v < p.lo; });
    return static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, (it - pieces.begin()) - 1));
  }
  /// g(u), zero outside [0, T).
  double operator()(double u) const {
    if (u < pieces.front().lo || u >= pieces.back().hi) return 0.0;
    return pieces[piece_at(u)].value(u);
  }
  double slope(double u) const {
    if (u < pieces.front().lo || u >= pieces.back().hi) return 0.0;
    return pieces[piece_at(u)].slope(u);
  }
};

/// Integrals of e^{theta g}, g e^{theta g}, g^2 e^{theta g} and
/// (g')^2 e^{theta g} over [0, T) for one train.
struct KernelIntegrals {
  double i0 = 0.0, i1 = 0.0, i2 = 0.0, i3 = 0.0;
};

class TemplateKernel {
 public:
  TemplateKernel() = default;
  TemplateKernel(std::shared_ptr<const ScoreFunction> f, double horizon, std::vector<TrainKernel> trains,
                 std::vector<std::string> warnings)
      : f_(std::move(f)), T_(horizon), trains_(std::move(trains)), warnings_(std::move(warnings)) {}

  const ScoreFunction& score_function() const { return *f_; }
  std::shared_ptr<const ScoreFunction> score_function_ptr() const { return f_; }
  double horizon() const noexcept { return T_; }
  std::size_t dim() const noexcept { return trains_.size(); }
  const TrainKernel& operator[](std::size_t i) const { return trains_[i]; }
  const std::vector<TrainKernel>& trains() const noexcept { return trains_; }
  const std::vector<std::string>& warnings() const noexcept { return warnings_; }

  bool has_jumps() const {
    return std::any_of(trains_.begin(), trains_.end(), [](const TrainKernel& t) { return !t.jumps.empty(); });
  }
  bool piecewise_constant() const {
    for (const auto& t : trains_)
      for (const auto& p : t.pieces)
        if (p.shape != PieceShape::constant) return false;
    return true;
  }
  /// Largest value any g^{(i)} attains (f(0) unless every train is empty).
  double max_value() const {
    double m = -std::numeric_limits<double>::infinity();
    for (const auto& t : trains_) m = std::max(m, t.spikes ? f_->at_zero() : 0.0);
    return m;
  }

  KernelIntegrals integrals(std::size_t i, double theta) const {
    KernelIntegrals out;
    for (const auto& p : trains_[i].pieces) {
      const double len = p.hi - p.lo;
      if (p.shape == PieceShape::constant) {
        const double e = std::exp(theta * p.level);
        out.i0 += len * e;
        out.i1 += len * p.level * e;
        out.i2 += len * p.level * p.level * e;
        continue;
      }
      using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
      constexpr double tol = 1e-13;
      out.i0 += GK::integrate([&](double u) { return std::exp(theta * p.value(u)); }, p.lo, p.hi, 15, tol);
      out.i1 += GK::integrate([&](double u) { const double g = p.value(u); return g * std::exp(theta * g); },
                              p.lo, p.hi, 15, tol);
      out.i2 += GK::integrate([&](double u) { const double g = p.value(u); return g * g * std::exp(theta * g); },
                              p.lo, p.hi, 15, tol);
      out.i3 += GK::integrate(
          [&](double u) {
            const double s = p.slope(u);
            return s * s * std::exp(theta * p.value(u));
          },
          p.lo, p.hi, 15, tol);
    }
    return out;
  }

  std::vector<KernelIntegrals> integrals(double theta) const {
    std::vector<KernelIntegrals> out;
    out.reserve(trains_.size());
    for (std::size_t i = 0; i < trains_.size(); ++i) out.push_back(integrals(i, theta));
    return out;
  }

 private:
  std::shared_ptr<const ScoreFunction> f_;
  double T_ = 0.0;
  std::vector<TrainKernel> trains_;
  std::vector<std::string> warnings_;
};

namespace detail {

inline TrainKernel build_train_kernel(const SpikeTrain& train, const ScoreFunction& f, double T) {
  TrainKernel out;
  out.spikes = train.size();
  const auto& w = train.times();
  if (w.empty()) {
    out.pieces.push_back(KernelPiece{0.0, T, PieceShape::constant, 0.0, Rational(0)});
    return out;
  }
  const auto& fp = f.pieces();
  std::vector<double> cuts;
  for (std::size_t j = 0; j < w.size(); ++j) {
    const double L = j == 0 ? 0.0 : 0.5 * (w[j - 1] + w[j]);
    const double R = j + 1 == w.size() ? T : 0.5 * (w[j] + w[j + 1]);
    if (!(R > L)) continue;
    cuts.assign({L, R});
    for (std::size_t k = 1; k < fp.size(); ++k) {
      for (double c : {w[j] - fp[k].lo, w[j] + fp[k].lo})
        if (c > L && c < R) cuts.push_back(c);
    }
    if (w[j] > L && w[j] < R) cuts.push_back(w[j]);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
      const double a = cuts[c], b = cuts[c + 1];
      const double x = std::abs(0.5 * (a + b) - w[j]);
      const ScorePiece& sp = fp[f.piece_index(x)];
      KernelPiece kp;
      kp.lo = a;
      kp.hi = b;
      kp.shape = sp.shape;
      kp.level = sp.level;
      kp.exact = sp.exact;
      kp.mid = sp.mid;
      kp.amp = sp.amp;
      kp.freq = sp.freq;
      kp.center = w[j];
      kp.source = &sp;
      if (kp.shape == PieceShape::constant) kp.center = 0.0;
      if (!out.pieces.empty() && out.pieces.back().same_shape(kp)) {
        out.pieces.back().hi = b;
      } else {
        out.pieces.push_back(kp);
      }
    }
  }
  for (std::size_t k = 0; k + 1 < out.pieces.size(); ++k) {
    const KernelPiece& l = out.pieces[k];
    const KernelPiece& r = out.pieces[k + 1];
    const double u = l.hi;
    Jump jmp{u, l.value(u), r.value(u), 0.0, std::nullopt};
    if (l.exact && r.exact) {
      const Rational d = *l.exact - *r.exact;
      if (d.is_zero()) continue;
      jmp.exact_delta = d;
      jmp.delta = d.to_double();
    } else {
      jmp.delta = jmp.left - jmp.right;
      const double scale = 1.0 + std::abs(jmp.left) + std::abs(jmp.right);
      if (std::abs(jmp.delta) <= 1e-12 * scale) continue;
    }
    out.jumps.push_back(jmp);
  }
  return out;
}

}  // namespace detail

/// Builds g^{(i)}(u) = max_{w in template train i} f(|u - w|) on [0, T) as
/// exact pieces. Since f is non-increasing, the max is attained at the
/// nearest template spike. Empty trains get g = 0 and a warning.
inline TemplateKernel build_template_kernel(const MultiTrain& templ, const ScoreFunction& f) {
  const Horizon h = templ.horizon();
  require(h.begin == 0.0, Errc::invalid_parameter, "template horizon must start at 0");
  const double T = h.end;
  auto fp = std::make_shared<const ScoreFunction>(f);
  std::vector<TrainKernel> trains;
  std::vector<std::string> warnings;
  for (std::size_t i = 0; i < templ.dim(); ++i) {
    if (templ[i].empty()) warnings.push_back("template train " + std::to_string(i) + " is empty; its kernel is set to 0");
    trains.push_back(detail::build_train_kernel(templ[i], *fp, T));
  }
  return TemplateKernel(std::move(fp), T, std::move(trains), std::move(warnings));
}

/// Span chi of the jump sizes {delta_i(u)} (the lattice of h_w*).
inline Span jump_span(const TemplateKernel& gk) {
  require(gk.has_jumps(), Errc::wrong_branch, "kernel has no jumps");
  const ScoreFunction& f = gk.score_function();
  bool all_exact = true;
  std::vector<double> sizes;
  for (const auto& t : gk.trains())
    for (const auto& j : t.jumps) {
      all_exact = all_exact && j.exact_delta.has_value();
      sizes.push_back(std::abs(j.delta));
    }
  if (all_exact) {
    Rational chi(0);
    for (const auto& t : gk.trains())
      for (const auto& j : t.jumps) chi = rational_gcd(chi, j.exact_delta->abs());
    return Span::of(chi);
  }
  if (f.declared_span()) {
    const Rational q = *f.declared_span();
    std::int64_t g = 0;
    for (double s : sizes) {
      const double k = s / q.to_double();
      const auto n = static_cast<std::int64_t>(std::llround(k));
      require(std::abs(k - static_cast<double>(n)) <= 1e-6, Errc::inconsistent_span,
              "jump size is not a multiple of the declared span");
      g = std::gcd(g, n);
    }
    return Span::of(q * Rational(g));
  }
  // identical magnitudes: the common size is exactly the span
  if (std::all_of(sizes.begin(), sizes.end(), [&](double s) { return s == sizes.front(); }))
    return Span::of(sizes.front());
  if (f.declared_nonarithmetic()) return Span::none();
  throw Error(Errc::must_declare_span, "jump sizes are not exact; declare the span of the score function");
}

/// Piecewise table of all kernels: train,lo,hi,shape,level,mid,amp,freq,center.
inline void write_kernel_csv(std::ostream& os, const TemplateKernel& gk) {
  os << "train,lo,hi,shape,level,mid,amp,freq,center\n";
  for (std::size_t i = 0; i < gk.dim(); ++i)
    for (const auto& p : gk[i].pieces) {
      os << i << ',' << format_double(p.lo) << ',' << format_double(p.hi) << ',' << shape_name(p.shape) << ','
         << format_double(p.level) << ',' << format_double(p.mid) << ',' << format_double(p.amp) << ','
         << format_double(p.freq) << ',' << format_double(p.center) << '\n';
    }
}

/// Kernel specification from config JSON: {kind, epsilon_ms, beta, span?}.
/// beta (and span) may be JSON strings such as "0.3" or "3/10", parsed as
/// exact rationals; a JSON number beta is a float.
inline ScoreFunction score_function_from_json(const nlohmann::json& j) {
  require(j.is_object(), Errc::invalid_config, "kernel spec must be an object");
  const std::string kind = j.value("kind", std::string());
  require(j.contains("epsilon_ms") && j.contains("beta"), Errc::invalid_config,
          "kernel spec needs epsilon_ms and beta");
  const double eps = j.at("epsilon_ms").get<double>();
  const auto& b = j.at("beta");
  ScoreFunction f;
  if (kind == "hamming") {
    f = ScoreFunction::hamming(eps, b.is_string() ? Rational::parse(b.get<std::string>()).to_double() : b.get<double>());
  } else if (kind == "box") {
    f = b.is_string() ? ScoreFunction::box(eps, Rational::parse(b.get<std::string>()))
                      : ScoreFunction::box(eps, b.get<double>());
  } else {
    throw Error(Errc::invalid_config, "unknown kernel kind '" + kind + "' (expected hamming or box)");
  }
  if (j.contains("span")) {
    const auto& s = j.at("span");
    if (s.is_string() && s.get<std::string>() == "nonarithmetic") {
      f.declare_nonarithmetic();
    } else {
      require(s.is_string(), Errc::must_declare_span, "declared span must be an exact string such as \"1/10\"");
      f.declare_span(Rational::parse(s.get<std::string>()));
    }
  }
  return f;
}

inline nlohmann::json to_json(const ScoreFunction& f) {
  nlohmann::json j;
  switch (f.kind()) {
    case ScoreFunction::Kind::hamming: j["kind"] = "hamming"; break;
    case ScoreFunction::Kind::box: j["kind"] = "box"; break;
    case ScoreFunction::Kind::custom: j["kind"] = "custom"; break;
  }
  j["epsilon_ms"] = f.epsilon();
  j["beta"] = f.beta();
  if (f.kind() == ScoreFunction::Kind::box && f.pieces().back().exact)
    j["beta"] = (-*f.pieces().back().exact).str();
  if (f.declared_span()) j["span"] = f.declared_span()->str();
  if (f.declared_nonarithmetic()) j["span"] = "nonarithmetic";
  return j;
}

}  // namespace spikes
