#include "pdmp/cli/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

#include <toml.hpp>

#include "pdmp/diagnostics/oracle.hpp"
#include "pdmp/errors.hpp"
#include "pdmp/models/lyapunov.hpp"

namespace pdmp::cli {

namespace {

int line_of(const toml::node& n) { return static_cast<int>(n.source().begin.line); }

/// One TOML table read key by key. Every value read (or defaulted) is copied
/// into the resolved configuration; finish() rejects keys never read.
class Block {
 public:
  Block(const toml::table* src, std::string name, toml::table& resolved_root) : src_(src), name_(std::move(name)) {
    resolved_root.insert_or_assign(name_, toml::table{});
    out_ = resolved_root[name_].as_table();
  }

  bool present() const { return src_ != nullptr; }
  int line() const { return src_ ? line_of(*src_) : 0; }
  bool has(std::string_view key) const { return src_ && src_->contains(key); }

  [[noreturn]] void fail(std::string_view key, const std::string& message) const {
    const toml::node* n = src_ ? src_->get(key) : nullptr;
    throw ConfigError(dotted(key), n ? line_of(*n) : line(), message);
  }

  double number(std::string_view key, std::optional<double> fallback = std::nullopt) {
    const toml::node* n = take(key);
    double v;
    if (!n) {
      if (!fallback) fail(key, "missing required number");
      v = *fallback;
    } else if (auto d = n->value<double>(); d && (n->is_floating_point() || n->is_integer())) {
      v = *d;
    } else {
      fail(key, "expected a number");
    }
    if (!std::isfinite(v)) fail(key, "must be finite");
    out_->insert_or_assign(key, v);
    return v;
  }

  std::optional<double> optional_number(std::string_view key) {
    if (!has(key)) return std::nullopt;
    return number(key);
  }

  std::int64_t integer(std::string_view key, std::optional<std::int64_t> fallback = std::nullopt) {
    const toml::node* n = take(key);
    std::int64_t v;
    if (!n) {
      if (!fallback) fail(key, "missing required integer");
      v = *fallback;
    } else if (n->is_integer()) {
      v = *n->value<std::int64_t>();
    } else {
      fail(key, "expected an integer");
    }
    out_->insert_or_assign(key, v);
    return v;
  }

  bool boolean(std::string_view key, bool fallback) {
    const toml::node* n = take(key);
    bool v = fallback;
    if (n) {
      if (!n->is_boolean()) fail(key, "expected true or false");
      v = *n->value<bool>();
    }
    out_->insert_or_assign(key, v);
    return v;
  }

  std::string string(std::string_view key, std::optional<std::string> fallback = std::nullopt) {
    const toml::node* n = take(key);
    std::string v;
    if (!n) {
      if (!fallback) fail(key, "missing required string");
      v = *fallback;
    } else if (n->is_string()) {
      v = *n->value<std::string>();
    } else {
      fail(key, "expected a string");
    }
    out_->insert_or_assign(key, v);
    return v;
  }

  std::string choice(std::string_view key, std::optional<std::string> fallback,
                     std::initializer_list<std::string_view> allowed) {
    const std::string v = string(key, std::move(fallback));
    if (std::find(allowed.begin(), allowed.end(), v) == allowed.end()) {
      std::string list;
      for (auto a : allowed) list += (list.empty() ? "" : ", ") + std::string(a);
      fail(key, "unknown value '" + v + "' (expected one of: " + list + ")");
    }
    return v;
  }

  std::vector<double> numbers(std::string_view key, std::optional<std::vector<double>> fallback = std::nullopt) {
    const toml::node* n = take(key);
    std::vector<double> v;
    if (!n) {
      if (!fallback) fail(key, "missing required array of numbers");
      v = *fallback;
    } else if (const toml::array* a = n->as_array()) {
      for (const auto& e : *a) {
        const auto d = e.value<double>();
        if (!d || !(e.is_floating_point() || e.is_integer()) || !std::isfinite(*d)) fail(key, "expected finite numbers");
        v.push_back(*d);
      }
    } else {
      fail(key, "expected an array of numbers");
    }
    toml::array arr;
    for (double d : v) arr.push_back(d);
    out_->insert_or_assign(key, std::move(arr));
    return v;
  }

  std::vector<std::string> strings(std::string_view key, std::vector<std::string> fallback) {
    const toml::node* n = take(key);
    std::vector<std::string> v = std::move(fallback);
    if (n) {
      const toml::array* a = n->as_array();
      if (!a) fail(key, "expected an array of strings");
      v.clear();
      for (const auto& e : *a) {
        if (!e.is_string()) fail(key, "expected an array of strings");
        v.push_back(*e.value<std::string>());
      }
    }
    toml::array arr;
    for (const auto& s : v) arr.push_back(s);
    out_->insert_or_assign(key, std::move(arr));
    return v;
  }

  /// Overwrites a resolved value (command-line overrides).
  template <class T>
  void set_resolved(std::string_view key, T value) {
    out_->insert_or_assign(key, std::move(value));
  }

  void finish() const {
    if (!src_) return;
    for (auto&& [k, v] : *src_) {
      if (!used_.count(std::string(k.str()))) {
        throw ConfigError(dotted(k.str()), line_of(v), "unknown key");
      }
    }
  }

 private:
  const toml::node* take(std::string_view key) {
    used_.insert(std::string(key));
    return src_ ? src_->get(key) : nullptr;
  }
  std::string dotted(std::string_view key) const { return name_ + "." + std::string(key); }

  const toml::table* src_;
  std::string name_;
  toml::table* out_ = nullptr;
  std::set<std::string> used_;
};

template <class F>
auto guarded(const Block& b, std::string_view key, F&& f) {
  try {
    return f();
  } catch (const InvalidConfig& e) {
    b.fail(key, e.what());
  }
}

Vector to_vector(const std::vector<double>& v) { return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size())); }

void positive(const Block& b, std::string_view key, double v) {
  if (!(v > 0.0)) b.fail(key, "must be positive");
}

// ---------------------------------------------------------------- model

std::shared_ptr<const Potential> read_target(Block& b, ModelSetup& m, int dim) {
  const std::string target = b.choice("target", "gaussian", {"gaussian", "logistic"});
  if (target == "gaussian") {
    const auto precision = b.numbers("precision", std::vector<double>(static_cast<std::size_t>(dim), 1.0));
    const auto mean = b.numbers("mean", std::vector<double>(static_cast<std::size_t>(dim), 0.0));
    if (static_cast<int>(precision.size()) != dim) b.fail("precision", "length must equal dim");
    if (static_cast<int>(mean.size()) != dim) b.fail("mean", "length must equal dim");
    for (double p : precision) positive(b, "precision", p);
    auto g = GaussianPotential::diagonal(to_vector(precision), to_vector(mean));
    m.gaussian = g;
    return g;
  }
  const auto data = b.integer("data", 100);
  if (data < 1) b.fail("data", "must be >= 1");
  const auto seed = b.integer("data_seed", 1);
  const double prior_sd = b.number("prior_sd", 10.0);
  positive(b, "prior_sd", prior_sd);
  return LogisticRegression::synthetic(static_cast<int>(data), dim, static_cast<std::uint64_t>(seed), prior_sd);
}

ModelSetup read_model(Block& b) {
  if (!b.present()) throw ConfigError("model", 0, "missing [model] table");
  ModelSetup m;
  m.name = b.choice("name", std::nullopt,
                    {"zzs", "bps", "rhmc", "telegraph", "morris_lecar", "cell_size", "zzs_subsampling"});
  if (m.name == "zzs" || m.name == "bps" || m.name == "rhmc") {
    const auto dim = b.integer("dim", 1);
    if (dim < 1) b.fail("dim", "must be >= 1");
    m.potential = read_target(b, m, static_cast<int>(dim));
    if (m.name == "zzs") {
      const std::string rates = b.choice("rates", "positive_part", {"positive_part", "smooth"});
      const double excess = b.number("excess", 0.0);
      if (excess < 0.0) b.fail("excess", "must be >= 0");
      ZzsModel z{m.potential, rates == "smooth" ? ZzsRateStyle::Smooth : ZzsRateStyle::PositivePart, {}};
      if (excess > 0.0) z.excess = Vector::Constant(dim, excess);
      m.spec = guarded(b, "name", [&] { return model_to_pdmp(z); });
    } else if (m.name == "bps") {
      m.refresh_rate = b.number("refresh_rate", 1.0);
      positive(b, "refresh_rate", m.refresh_rate);
      const std::string law = b.choice("refresh", "gaussian", {"gaussian", "sphere"});
      m.unit_velocity = law == "sphere";
      const BpsModel bps{m.potential, m.refresh_rate, m.unit_velocity ? RefreshLaw::Sphere : RefreshLaw::Gaussian};
      m.spec = guarded(b, "name", [&] { return model_to_pdmp(bps); });
    } else {
      m.refresh_rate = b.number("refresh_rate", 1.0);
      positive(b, "refresh_rate", m.refresh_rate);
      m.spec = guarded(b, "target", [&] { return model_to_pdmp(RhmcModel{m.potential, m.refresh_rate}); });
    }
  } else if (m.name == "telegraph") {
    m.telegraph_rate = b.number("rate", 1.0);
    if (m.telegraph_rate < 0.0) b.fail("rate", "must be >= 0");
    m.spec = model_to_pdmp(TelegraphModel{m.telegraph_rate});
  } else if (m.name == "morris_lecar") {
    MorrisLecarModel ml{};
    ml.C = b.number("C");
    ml.g_leak = b.number("g_leak");
    ml.g_ca = b.number("g_ca");
    ml.g_k = b.number("g_k");
    ml.v_leak = b.number("v_leak");
    ml.v_ca = b.number("v_ca");
    ml.v_k = b.number("v_k");
    ml.v1 = b.number("v1");
    ml.v2 = b.number("v2");
    ml.v3 = b.number("v3");
    ml.v4 = b.number("v4");
    ml.lambda_k_bar = b.number("lambda_k_bar");
    ml.n_k = static_cast<int>(b.integer("n_k"));
    m.spec = guarded(b, "name", [&] { return model_to_pdmp(ml); });
  } else if (m.name == "cell_size") {
    CellSizeModel c;
    c.growth = b.number("growth", 1.0);
    c.division = b.number("division", 1.0);
    c.window = b.number("window", 0.25);
    positive(b, "growth", c.growth);
    positive(b, "division", c.division);
    positive(b, "window", c.window);
    m.spec = model_to_pdmp(c);
  } else {
    const auto dim = b.integer("dim", 2);
    if (dim < 1) b.fail("dim", "must be >= 1");
    const auto data = b.integer("data", 100);
    if (data < 1) b.fail("data", "must be >= 1");
    const auto seed = b.integer("data_seed", 1);
    const double prior_sd = b.number("prior_sd", 10.0);
    positive(b, "prior_sd", prior_sd);
    auto lr = LogisticRegression::synthetic(static_cast<int>(data), static_cast<int>(dim),
                                            static_cast<std::uint64_t>(seed), prior_sd);
    m.potential = lr;
    m.subsampling = ZzsSubsamplingModel{lr};
    m.spec = model_to_pdmp(*m.subsampling);
  }
  b.finish();
  return m;
}

// ---------------------------------------------------------------- initial law

State stationary_draw(const ModelSetup& m, bool shifted, Rng& rng) {
  const GaussianPotential& g = *m.gaussian;
  const int d = g.dim();
  State z{Vector(d), Vector(m.spec.dim_v)};
  for (int i = 0; i < d; ++i) {
    z.x(i) = g.mean()(i) + rng.normal() / std::sqrt(g.diag()(i));
    if (shifted) z.x(i) += rng.uniform();
  }
  if (m.name == "zzs") {
    for (int i = 0; i < d; ++i) z.v(i) = rng.uniform() < 0.5 ? -1.0 : 1.0;
  } else {
    for (int i = 0; i < d; ++i) z.v(i) = rng.normal();
    if (m.unit_velocity) z.v.normalize();
  }
  return z;
}

InitialLaw read_initial(Block& b, const ModelSetup& m, State& fixed_out) {
  const std::string law = b.choice("law", "fixed", {"fixed", "stationary", "shifted"});
  if (law == "fixed") {
    std::vector<double> x0(static_cast<std::size_t>(m.spec.dim_x), 0.0);
    std::vector<double> v0(static_cast<std::size_t>(m.spec.dim_v), 1.0);
    if (m.name == "bps") std::fill(v0.begin() + 1, v0.end(), 0.0);
    if (m.name == "rhmc") std::fill(v0.begin(), v0.end(), 0.0);
    if (m.name == "cell_size") x0 = {1.0}, v0 = {0.0};
    const bool required = m.name == "morris_lecar";
    const auto x = required ? b.numbers("x") : b.numbers("x", x0);
    const auto v = required ? b.numbers("v") : b.numbers("v", v0);
    if (static_cast<int>(x.size()) != m.spec.dim_x) {
      b.fail("x", "length must be " + std::to_string(m.spec.dim_x));
    }
    if (static_cast<int>(v.size()) != m.spec.dim_v) {
      b.fail("v", "length must be " + std::to_string(m.spec.dim_v));
    }
    if (m.name == "zzs" || m.name == "zzs_subsampling" || m.name == "telegraph") {
      for (double s : v) {
        if (s != 1.0 && s != -1.0) b.fail("v", "velocities must be +1 or -1");
      }
    }
    b.finish();
    fixed_out = State(to_vector(x), to_vector(v));
    return fixed_initial(fixed_out);
  }
  if (!m.gaussian) b.fail("law", "needs a model with a Gaussian target");
  b.finish();
  const bool shifted = law == "shifted";
  return [m, shifted](Rng& rng) { return stationary_draw(m, shifted, rng); };
}

// ---------------------------------------------------------------- scheme

RateApproxKind rate_kind(const Block& b, std::string_view key, const std::string& s) {
  const auto k = parse_rate_approx(s);
  if (!k) b.fail(key, "unknown rate approximation '" + s + "'");
  return *k;
}

SchemeSetup read_scheme(Block& b, const ModelSetup& m) {
  SchemeSetup s;
  s.name = b.choice("kind", "exact", {"exact", "fd", "pd", "order_p", "subsampling"});
  s.exact = s.name == "exact";
  s.horizon = b.number("T", 1.0);
  positive(b, "T", s.horizon);

  if (b.has("deltas")) {
    s.deltas = b.numbers("deltas");
    if (b.has("delta")) b.fail("delta", "give either delta or deltas");
  } else if (b.has("delta") || !s.exact) {
    s.deltas = {b.number("delta")};
  }
  for (double d : s.deltas) positive(b, b.has("deltas") ? "deltas" : "delta", d);

  SchemeConfig& cfg = s.config;
  const auto order = b.integer("order", 1);
  if (order < 1) b.fail("order", "must be >= 1");
  if (s.name != "order_p" && order != 1) b.fail("order", "only order_p schemes take an order above 1");
  cfg.order = static_cast<int>(order);
  cfg.kind = s.name == "fd" ? SchemeKind::FD : s.name == "order_p" ? SchemeKind::OrderP : SchemeKind::PD;

  if (b.has("rates")) {
    if (b.has("rate")) b.fail("rate", "give either rate or rates");
    const auto names = b.strings("rates", {});
    if (names.empty() || static_cast<int>(names.size()) > cfg.order) {
      b.fail("rates", "needs between 1 and `order` entries");
    }
    cfg.rates_by_order.clear();
    for (const auto& n : names) cfg.rates_by_order.push_back(rate_kind(b, "rates", n));
  } else {
    // A single rate applies to the highest order; lower orders stay frozen.
    const std::string name = b.string("rate", "frozen");
    cfg.rates_by_order.assign(static_cast<std::size_t>(cfg.order), RateApproxKind::Frozen);
    cfg.rates_by_order.back() = rate_kind(b, "rate", name);
  }
  const std::string integrator = b.choice("integrator", "exact", {"exact", "euler", "leapfrog"});
  cfg.flow.integrator = *parse_integrator(integrator);
  cfg.flow.declared_order = integrator == "leapfrog" ? 2 : 1;

  const std::string update = b.choice("update", "displayed", {"displayed", "standard"});
  s.update = update == "standard" ? SubsamplingUpdate::Standard : SubsamplingUpdate::Displayed;
  if (s.name == "subsampling" && !m.subsampling) b.fail("kind", "subsampling needs model.name = zzs_subsampling");

  if (!s.deltas.empty()) {
    cfg.mesh = Mesh::uniform(s.deltas.front(), s.horizon);
    if (!s.exact && s.name != "subsampling") guarded(b, "kind", [&] { cfg.validate(); });
  }
  b.finish();
  return s;
}

// ---------------------------------------------------------------- statistics

StateFn statistic(const std::string& name) {
  if (name == "mean1") return statistic_mean1;
  return statistic_radius;
}

std::optional<double> gaussian_truth(const ModelSetup& m, const std::string& stat) {
  if (!m.gaussian) return std::nullopt;
  const GaussianPotential& g = *m.gaussian;
  if (stat == "mean1") return g.mean()(0);
  double acc = 0.0;
  for (int i = 0; i < g.dim(); ++i) acc += 1.0 / g.diag()(i) + g.mean()(i) * g.mean()(i);
  return acc;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::string& source, const Overrides& overrides) {
  toml::table root;
  try {
    root = toml::parse(text, source);
  } catch (const toml::parse_error& e) {
    throw ConfigError("", static_cast<int>(e.source().begin.line), std::string(e.description()));
  }
  static const std::set<std::string> tables{"model",    "initial", "scheme",  "run", "output",
                                            "coupling", "sweep",   "moments", "bias"};
  for (auto&& [k, v] : root) {
    if (!tables.count(std::string(k.str()))) throw ConfigError(std::string(k.str()), line_of(v), "unknown table");
    if (!v.is_table()) throw ConfigError(std::string(k.str()), line_of(v), "expected a table");
  }

  toml::table resolved;
  ExperimentConfig c;
  Block model(root["model"].as_table(), "model", resolved);
  c.model = read_model(model);

  Block initial(root["initial"].as_table(), "initial", resolved);
  State fixed_state;
  c.initial = read_initial(initial, c.model, fixed_state);

  Block scheme(root["scheme"].as_table(), "scheme", resolved);
  c.scheme = read_scheme(scheme, c.model);

  Block run(root["run"].as_table(), "run", resolved);
  const auto reps = run.integer("replicas", 1);
  if (reps < 1) run.fail("replicas", "must be >= 1");
  c.run.replicas = static_cast<std::size_t>(reps);
  const auto seed = run.integer("seed", 1);
  if (seed < 0) run.fail("seed", "must be >= 0");
  c.run.seed = static_cast<std::uint64_t>(seed);
  c.run.workers = static_cast<int>(run.integer("workers", 0));
  if (c.run.workers < 0) run.fail("workers", "must be >= 0");
  run.finish();
  if (overrides.seed) {
    c.run.seed = *overrides.seed;
    run.set_resolved("seed", static_cast<std::int64_t>(*overrides.seed));
  }
  if (overrides.workers) {
    c.run.workers = *overrides.workers;
    run.set_resolved("workers", static_cast<std::int64_t>(*overrides.workers));
  }

  Block output(root["output"].as_table(), "output", resolved);
  c.output.dir = output.string("dir", "out");
  c.output.trajectories = output.boolean("trajectories", false);
  const auto formats = output.strings("formats", {"csv"});
  for (const auto& f : formats) {
    if (f != "csv") output.fail("formats", "unsupported format '" + f + "' (only csv)");
  }
  output.finish();
  if (overrides.out) {
    c.output.dir = *overrides.out;
    output.set_resolved("dir", *overrides.out);
  }

  Block coupling(root["coupling"].as_table(), "coupling", resolved);
  c.coupling.name = coupling.choice("kind", "wasserstein", {"wasserstein", "tv", "higher_order", "subsampling"});
  c.coupling.norm = coupling.choice("norm", "l1", {"l1", "l2"}) == "l2" ? DistanceNorm::L2 : DistanceNorm::L1;
  if (c.coupling.name == "subsampling" && !c.model.subsampling) {
    coupling.fail("kind", "subsampling coupling needs model.name = zzs_subsampling");
  }
  coupling.finish();

  Block sweep(root["sweep"].as_table(), "sweep", resolved);
  c.sweep.statistic = sweep.choice("statistic", "mean1", {"mean1", "radius"});
  c.sweep.g = statistic(c.sweep.statistic);
  c.sweep.reference = sweep.optional_number("reference");
  if (!c.sweep.reference && c.model.name == "telegraph" && fixed_state.x.size() == 1) {
    const auto tm = telegraph_moments(c.model.telegraph_rate, c.scheme.horizon, fixed_state.x(0), fixed_state.v(0));
    c.sweep.reference = c.sweep.statistic == "mean1" ? tm.mean : tm.second;
  }
  if (c.sweep.reference) sweep.set_resolved("reference", *c.sweep.reference);
  c.sweep.estimator =
      sweep.choice("estimator", "coupled", {"coupled", "independent"}) == "independent" ? WeakErrorEstimator::Independent
                                                                                       : WeakErrorEstimator::Coupled;
  if (sweep.has("replicas_per_delta")) {
    for (double r : sweep.numbers("replicas_per_delta")) {
      if (!(r >= 1.0) || r != std::floor(r)) sweep.fail("replicas_per_delta", "entries must be positive integers");
      c.sweep.replicas_per_delta.push_back(static_cast<std::size_t>(r));
    }
    if (c.sweep.replicas_per_delta.size() != c.scheme.deltas.size()) {
      sweep.fail("replicas_per_delta", "length must match scheme.deltas");
    }
  }
  c.sweep.expected_slope = sweep.number("expected_slope", static_cast<double>(c.scheme.config.order));
  c.sweep.tolerance = sweep.number("tolerance", 0.3);
  positive(sweep, "tolerance", c.sweep.tolerance);
  sweep.finish();

  Block moments(root["moments"].as_table(), "moments", resolved);
  if (moments.present()) {
    MomentSetup ms;
    ms.lyapunov = moments.choice("lyapunov", std::nullopt, {"zzs_alpha_eps", "bps", "custom-psi-exponent"});
    if (!c.model.potential) moments.fail("lyapunov", "needs a model with a target potential");
    const auto pot = c.model.potential;
    if (ms.lyapunov == "zzs_alpha_eps") {
      const double alpha = moments.number("alpha");
      const double eps = moments.number("epsilon");
      if (!(alpha > 0.0 && alpha < 1.0)) moments.fail("alpha", "must lie in (0, 1)");
      positive(moments, "epsilon", eps);
      ms.G = [pot, alpha, eps](const State& z) { return lyapunov_zzs(*pot, alpha, eps, z); };
    } else if (ms.lyapunov == "bps") {
      const double rate = moments.number("refresh_rate", c.model.refresh_rate > 0.0 ? std::optional(c.model.refresh_rate)
                                                                                   : std::nullopt);
      positive(moments, "refresh_rate", rate);
      ms.G = [pot, rate](const State& z) { return lyapunov_bps(*pot, rate, z); };
    } else {
      const double a = moments.number("exponent");
      ms.G = [pot, a](const State& z) { return lyapunov_psi_exponent(*pot, a, z); };
    }
    const std::string pairing = moments.choice("pairing", "independent", {"independent", "shared_initial", "coupled"});
    ms.pairing = pairing == "coupled"          ? MomentPairing::Coupled
                 : pairing == "shared_initial" ? MomentPairing::SharedInitial
                                               : MomentPairing::Independent;
    c.moments = std::move(ms);
  } else {
    resolved.erase("moments");
  }
  moments.finish();

  Block bias(root["bias"].as_table(), "bias", resolved);
  c.bias.statistic = bias.choice("statistic", "radius", {"mean1", "radius"});
  c.bias.f = statistic(c.bias.statistic);
  c.bias.truth = bias.optional_number("truth");
  if (!c.bias.truth) {
    c.bias.truth = gaussian_truth(c.model, c.bias.statistic);
    if (c.bias.truth) bias.set_resolved("truth", *c.bias.truth);
  }
  c.bias.burn_in = bias.number("burn_in", 0.2);
  if (!(c.bias.burn_in >= 0.0 && c.bias.burn_in < 1.0)) bias.fail("burn_in", "must lie in [0, 1)");
  bias.finish();

  std::ostringstream os;
  os << resolved << '\n';
  c.resolved = os.str();
  return c;
}

ExperimentConfig load_config(const std::string& path, const Overrides& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", 0, "cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path, overrides);
}

}  // namespace pdmp::cli
