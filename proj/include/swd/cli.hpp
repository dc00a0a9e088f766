#pragma once

// Command-line surface: subcommand dispatch, JSON config loading, model-spec
// parsing, and output routing. Every subcommand prints a JSON summary to
// stdout and writes CSV (and optionally SVG) artifacts into the output
// directory; each artifact embeds the run manifest.
//
// Exit codes: 0 success, 2 validation/usage error, 1 runtime error.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "swd/swd.hpp"

namespace swd::cli {

using nlohmann::json;

// -----------------------------------------------------------------------------
// Spec mini-grammar: family:param,param,...
//   gaussian:c1,...,cd,scale        (d inferred as count-1)
//   diag:m1,...,md,s1,...,sd        (even count)
//   mixture:[w,mu,s;w,mu,s;...]     (one-dimensional components)
//   uniform:lo,hi[,lo2,hi2,...]     (axis-aligned box)
//   point:x1[,x2,...]               (point mass)

namespace detail {

inline double parse_number(const std::string& token, const std::string& context) {
  try {
    std::size_t used = 0;
    const double v = std::stod(token, &used);
    if (used != token.size()) throw std::invalid_argument(token);
    return v;
  } catch (const std::exception&) {
    throw validation_error("invalid number '" + token + "' in " + context);
  }
}

inline std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

inline std::vector<double> parse_numbers(const std::string& text,
                                         const std::string& context) {
  std::vector<double> out;
  for (const auto& tok : split(text, ',')) out.push_back(parse_number(tok, context));
  return out;
}

}  // namespace detail

inline Source parse_source_spec(const std::string& spec) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos)
    throw validation_error("source spec '" + spec + "' is missing the family prefix");
  const std::string family = spec.substr(0, colon);
  const std::string body = spec.substr(colon + 1);
  if (family == "gaussian") {
    auto v = detail::parse_numbers(body, spec);
    if (v.size() < 2)
      throw validation_error("gaussian spec needs mean coordinates and a scale");
    const double scale = v.back();
    v.pop_back();
    return ParametricModel::gaussian(v, scale);
  }
  if (family == "diag") {
    const auto v = detail::parse_numbers(body, spec);
    if (v.size() < 2 || v.size() % 2 != 0)
      throw validation_error("diag spec needs d means followed by d scales");
    const std::size_t d = v.size() / 2;
    return ParametricModel::diag_gaussian({v.begin(), v.begin() + d},
                                          {v.begin() + d, v.end()});
  }
  if (family == "mixture") {
    if (body.size() < 2 || body.front() != '[' || body.back() != ']')
      throw validation_error("mixture spec must look like mixture:[w,mu,s;...]");
    std::vector<MixtureComponent> comps;
    for (const auto& part : detail::split(body.substr(1, body.size() - 2), ';')) {
      const auto v = detail::parse_numbers(part, spec);
      if (v.size() != 3)
        throw validation_error("mixture component '" + part + "' must be w,mu,s");
      comps.push_back({v[0], {v[1]}, v[2]});
    }
    return ParametricModel::mixture(std::move(comps));
  }
  if (family == "uniform") {
    const auto v = detail::parse_numbers(body, spec);
    if (v.size() < 2 || v.size() % 2 != 0)
      throw validation_error("uniform spec needs lo,hi pairs per axis");
    std::vector<double> lo, hi;
    for (std::size_t k = 0; k < v.size(); k += 2) {
      lo.push_back(v[k]);
      hi.push_back(v[k + 1]);
    }
    return UniformBox(std::move(lo), std::move(hi));
  }
  if (family == "point") {
    return DiscreteMeasure::point_mass(detail::parse_numbers(body, spec));
  }
  throw validation_error("unknown source family '" + family + "'");
}

inline ParametricModel parse_model_spec(const std::string& spec,
                                        const std::string& layout = "default") {
  Source src = parse_source_spec(spec);
  auto* model = std::get_if<ParametricModel>(&src);
  if (!model)
    throw validation_error("spec '" + spec + "' is not a parametric model family");
  if (layout == "default") return *model;
  if (layout == "scale-only") {
    if (model->family() != Family::gaussian)
      throw validation_error("layout scale-only applies to gaussian families only");
    return ParametricModel::gaussian(model->mean(), model->scales()[0],
                                     ThetaLayout::scale_only);
  }
  throw validation_error("unknown theta layout '" + layout + "'");
}

inline ThetaSpace parse_space_spec(const std::string& spec) {
  std::vector<double> lo, hi;
  for (const auto& axis : detail::split(spec, ',')) {
    const auto parts = detail::split(axis, ':');
    if (parts.size() != 2)
      throw validation_error("space axis '" + axis + "' must be lo:hi");
    lo.push_back(detail::parse_number(parts[0], spec));
    hi.push_back(detail::parse_number(parts[1], spec));
  }
  return ThetaSpace(std::move(lo), std::move(hi));
}

// CSV point cloud: optional header row, one point per line, all columns are
// coordinates; uniform weights.
inline DiscreteMeasure read_points_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw validation_error("cannot open points file: " + path.string());
  std::vector<double> pts;
  std::size_t d = 0, n = 0;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> row;
    bool numeric = true;
    for (const auto& tok : detail::split(line, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(tok, &used));
        if (used != tok.size()) numeric = false;
      } catch (const std::exception&) {
        numeric = false;
      }
      if (!numeric) break;
    }
    if (!numeric) {
      if (first) {
        first = false;
        continue;  // header row
      }
      throw validation_error("non-numeric row in " + path.string() + ": " + line);
    }
    first = false;
    if (d == 0) d = row.size();
    if (row.size() != d)
      throw validation_error("inconsistent column count in " + path.string());
    pts.insert(pts.end(), row.begin(), row.end());
    ++n;
  }
  if (n == 0) throw validation_error("no data rows in " + path.string());
  return DiscreteMeasure::uniform(std::move(pts), n, d);
}

// -----------------------------------------------------------------------------
// JSON config files for CLI11. Values in the file fill any option not given
// on the command line; unknown keys are rejected; duplicate keys are a
// validation error.

namespace detail {

class DuplicateKeySax : public json::json_sax_t {
 public:
  json root;
  std::string error;

  bool null() override { return emit(nullptr); }
  bool boolean(bool v) override { return emit(v); }
  bool number_integer(number_integer_t v) override { return emit(v); }
  bool number_unsigned(number_unsigned_t v) override { return emit(v); }
  bool number_float(number_float_t v, const string_t&) override { return emit(v); }
  bool string(string_t& v) override { return emit(v); }
  bool binary(binary_t& v) override { return emit(v); }
  bool start_object(std::size_t) override {
    frames_.push_back({json::object(), {}, ""});
    return true;
  }
  bool key(string_t& k) override {
    auto& f = frames_.back();
    if (!f.keys.insert(k).second) {
      error = "duplicate key \"" + k + "\" in config";
      return false;
    }
    f.pending = k;
    return true;
  }
  bool end_object() override { return pop(); }
  bool start_array(std::size_t) override {
    frames_.push_back({json::array(), {}, ""});
    return true;
  }
  bool end_array() override { return pop(); }
  bool parse_error(std::size_t, const std::string&,
                   const nlohmann::detail::exception& ex) override {
    if (error.empty()) error = ex.what();
    return false;
  }

 private:
  struct Frame {
    json value;
    std::set<std::string> keys;
    std::string pending;
  };
  std::vector<Frame> frames_;

  bool emit(json v) {
    if (frames_.empty()) {
      root = std::move(v);
      return true;
    }
    auto& f = frames_.back();
    if (f.value.is_array())
      f.value.push_back(std::move(v));
    else
      f.value[f.pending] = std::move(v);
    return true;
  }
  bool pop() {
    json done = std::move(frames_.back().value);
    frames_.pop_back();
    return emit(std::move(done));
  }
};

inline std::string config_scalar(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

}  // namespace detail

inline json parse_config_json(std::istream& input) {
  detail::DuplicateKeySax sax;
  std::string text(std::istreambuf_iterator<char>(input),
                   std::istreambuf_iterator<char>{});
  if (!json::sax_parse(text, &sax) || !sax.error.empty())
    throw CLI::ConfigError(sax.error.empty() ? "invalid JSON config" : sax.error);
  if (!sax.root.is_object()) throw CLI::ConfigError("config root must be a JSON object");
  return sax.root;
}

class JsonConfig : public CLI::Config {
 public:
  std::string to_config(const CLI::App*, bool, bool, std::string) const override {
    return "{}\n";
  }

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    const json root = parse_config_json(input);
    std::vector<CLI::ConfigItem> items;
    for (const auto& [key, value] : root.items()) {
      if (value.is_object()) {
        for (const auto& [sub_key, sub_value] : value.items())
          items.push_back(make_item({key}, sub_key, sub_value));
      } else {
        items.push_back(make_item({}, key, value));
      }
    }
    return items;
  }

 private:
  static CLI::ConfigItem make_item(std::vector<std::string> parents,
                                   const std::string& name, const json& value) {
    CLI::ConfigItem item;
    item.parents = std::move(parents);
    item.name = name;
    if (value.is_array()) {
      for (const auto& v : value) item.inputs.push_back(detail::config_scalar(v));
    } else {
      item.inputs.push_back(detail::config_scalar(value));
    }
    return item;
  }
};

// -----------------------------------------------------------------------------
// Dispatch.

namespace detail {

struct GlobalOptions {
  std::uint64_t seed = 12345;
  std::string outdir;
  unsigned threads = 0;
  bool svg = false;

  std::filesystem::path out(const std::string& file) const {
    return std::filesystem::path(outdir) / file;
  }
};

inline json manifest_json(const Manifest& man) { return json::parse(man.to_json()); }

inline Manifest make_manifest(const std::string& subcommand, std::uint64_t seed,
                              const json& config) {
  Manifest man;
  man.subcommand = subcommand;
  man.seed = seed;
  man.config_hash = config_hash_hex(config.dump());
  return man;
}

inline const char* method_name(SwdMethod m) {
  switch (m) {
    case SwdMethod::exact1d:
      return "exact1d";
    case SwdMethod::mc_exact_ot:
      return "mc_exact_ot";
    case SwdMethod::mc_sinkhorn:
      return "mc_sinkhorn";
  }
  return "unknown";
}

struct EstimatorOptions {
  std::string estimator = "auto";
  std::size_t m = 1000;
  std::size_t reps = 1;
  std::string solver = "exact";
  double epsilon = 0.01;
  std::size_t max_iter = 5000;
  double quad_tol = 1e-8;
  std::size_t max_entries = 4'000'000;

  void add_to(CLI::App* sub) {
    sub->add_option("--estimator", estimator, "estimator: auto, exact, mc")
        ->check(CLI::IsMember({"auto", "exact", "mc"}))
        ->capture_default_str();
    sub->add_option("--plugin-m", m, "plug-in sample size per side")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--reps", reps, "plug-in replications")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--solver", solver, "discrete OT solver: exact, sinkhorn")
        ->check(CLI::IsMember({"exact", "sinkhorn"}))
        ->capture_default_str();
    sub->add_option("--epsilon", epsilon, "sinkhorn regularization")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--max-iter", max_iter, "sinkhorn iteration cap")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--quad-tol", quad_tol, "exact-1d quadrature tolerance")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--max-entries", max_entries, "exact solver entry cap")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
  }

  EstimatorConfig to_config(unsigned threads) const {
    EstimatorConfig cfg;
    if (estimator == "exact") cfg.kind = EstimatorConfig::Kind::exact1d;
    if (estimator == "mc") cfg.kind = EstimatorConfig::Kind::mc;
    cfg.quad_tol = quad_tol;
    cfg.mc.m = m;
    cfg.mc.reps = reps;
    cfg.mc.solver =
        solver == "sinkhorn" ? SolverChoice::sinkhorn : SolverChoice::exact;
    cfg.mc.sinkhorn_epsilon = epsilon;
    cfg.mc.sinkhorn_max_iter = max_iter;
    cfg.mc.max_entries = max_entries;
    cfg.mc.threads = threads;
    return cfg;
  }

  json to_json() const {
    return json{{"estimator", estimator}, {"m", m},
                {"reps", reps},           {"solver", solver},
                {"epsilon", epsilon},     {"max_iter", max_iter},
                {"quad_tol", quad_tol},   {"max_entries", max_entries}};
  }
};

inline Source load_side(const std::string& spec, const std::string& file,
                        const char* side) {
  if (!spec.empty() && !file.empty())
    throw validation_error(std::string("give either --") + side + " or --" + side +
                           "-file, not both");
  if (!spec.empty()) return parse_source_spec(spec);
  if (!file.empty()) return read_points_csv(file);
  throw validation_error(std::string("missing --") + side + " or --" + side + "-file");
}

}  // namespace detail

inline int run(const std::vector<std::string>& args, std::ostream& out,
               std::ostream& err) {
  CLI::App app{"smooth 1-Wasserstein distance toolkit"};
  app.fallthrough();  // global flags may follow the subcommand
  app.config_formatter(std::make_shared<JsonConfig>());
  app.set_config("--config", "", "JSON config file (flags override file values)")
      ->check(CLI::ExistingFile);
  app.allow_config_extras(false);
  app.require_subcommand(1);

  detail::GlobalOptions global;
  if (const char* env = std::getenv("SWDIST_OUT_DIR")) global.outdir = env;
  if (global.outdir.empty()) global.outdir = ".";
  app.add_option("--seed", global.seed, "root random seed")->capture_default_str();
  app.add_option("--out", global.outdir, "output directory (env SWDIST_OUT_DIR)")
      ->capture_default_str();
  app.add_option("--threads", global.threads,
                 "worker threads (0 = hardware; outputs are identical for any value)")
      ->capture_default_str();
  app.add_flag("--svg", global.svg, "also emit SVG plots");

  int exit_code = 0;

  // ---- swd ------------------------------------------------------------
  auto* swd_cmd = app.add_subcommand("swd", "smoothed distance between two sources");
  {
    struct Opts {
      std::string p, q, p_file, q_file;
      double sigma = 1.0;
      std::size_t d = 0;
      detail::EstimatorOptions est;
    };
    auto opts = std::make_shared<Opts>();
    swd_cmd->add_option("--p", opts->p, "first source spec");
    swd_cmd->add_option("--q", opts->q, "second source spec");
    swd_cmd->add_option("--p-file", opts->p_file, "first source points CSV");
    swd_cmd->add_option("--q-file", opts->q_file, "second source points CSV");
    swd_cmd->add_option("--d", opts->d, "expected dimension (checked against sources)");
    swd_cmd->add_option("--sigma", opts->sigma, "smoothing scale")
        ->required()
        ->check(CLI::PositiveNumber);
    opts->est.add_to(swd_cmd);
    swd_cmd->callback([&, opts] {
      const Source p = detail::load_side(opts->p, opts->p_file, "p");
      const Source q = detail::load_side(opts->q, opts->q_file, "q");
      if (opts->d != 0 && (source_dim(p) != opts->d || source_dim(q) != opts->d))
        throw dimension_error("--d does not match the source dimensions");
      json config{{"p", opts->p.empty() ? opts->p_file : opts->p},
                  {"q", opts->q.empty() ? opts->q_file : opts->q},
                  {"sigma", opts->sigma},
                  {"options", opts->est.to_json()}};
      const Manifest man = detail::make_manifest("swd", global.seed, config);
      const auto est = swd_estimate(p, q, opts->sigma,
                                    opts->est.to_config(global.threads),
                                    RngStream(global.seed).child("swd"));
      CsvDocument csv(man, "value,std_error,method,m,replications");
      csv.row({format_double(est.value), format_double(est.std_error),
               detail::method_name(est.method), std::to_string(est.m),
               std::to_string(est.replications)});
      write_text_file(global.out("swd.csv"), csv.text());
      json summary{{"manifest", detail::manifest_json(man)},
                   {"value", est.value},
                   {"std_error", est.std_error},
                   {"method", detail::method_name(est.method)},
                   {"m", est.m},
                   {"replications", est.replications},
                   {"sigma", opts->sigma}};
      out << summary.dump() << "\n";
    });
  }

  // ---- ot -------------------------------------------------------------
  auto* ot_cmd = app.add_subcommand("ot", "discrete 1-Wasserstein between point sets");
  {
    struct Opts {
      std::string p, q, p_file, q_file;
      std::size_t n = 100, m = 100;
      std::string solver = "exact";
      double epsilon = 0.01;
      std::size_t max_iter = 5000;
      std::size_t max_entries = 4'000'000;
      bool plan = false;
    };
    auto opts = std::make_shared<Opts>();
    ot_cmd->add_option("--p", opts->p, "first source spec (sampled with --n)");
    ot_cmd->add_option("--q", opts->q, "second source spec (sampled with --m)");
    ot_cmd->add_option("--p-file", opts->p_file, "first point set CSV");
    ot_cmd->add_option("--q-file", opts->q_file, "second point set CSV");
    ot_cmd->add_option("--n", opts->n, "sample size for --p")->check(CLI::PositiveNumber);
    ot_cmd->add_option("--m", opts->m, "sample size for --q")->check(CLI::PositiveNumber);
    ot_cmd->add_option("--solver", opts->solver, "exact, sorted, sinkhorn")
        ->check(CLI::IsMember({"exact", "sorted", "sinkhorn"}))
        ->capture_default_str();
    ot_cmd->add_option("--epsilon", opts->epsilon, "sinkhorn regularization")
        ->check(CLI::PositiveNumber);
    ot_cmd->add_option("--max-iter", opts->max_iter, "sinkhorn iteration cap");
    ot_cmd->add_option("--max-entries", opts->max_entries, "exact solver entry cap");
    ot_cmd->add_flag("--plan", opts->plan, "also write the transport plan CSV");
    ot_cmd->callback([&, opts] {
      const Source ps = detail::load_side(opts->p, opts->p_file, "p");
      const Source qs = detail::load_side(opts->q, opts->q_file, "q");
      RngStream rng(global.seed);
      const DiscreteMeasure mu = std::holds_alternative<DiscreteMeasure>(ps)
                                     ? std::get<DiscreteMeasure>(ps)
                                     : sample_source(ps, opts->n, rng.child("p"));
      const DiscreteMeasure nu = std::holds_alternative<DiscreteMeasure>(qs)
                                     ? std::get<DiscreteMeasure>(qs)
                                     : sample_source(qs, opts->m, rng.child("q"));
      json config{{"p", opts->p.empty() ? opts->p_file : opts->p},
                  {"q", opts->q.empty() ? opts->q_file : opts->q},
                  {"n", mu.size()},
                  {"m", nu.size()},
                  {"solver", opts->solver},
                  {"epsilon", opts->epsilon}};
      const Manifest man = detail::make_manifest("ot", global.seed, config);
      json summary{{"manifest", detail::manifest_json(man)},
                   {"solver", opts->solver},
                   {"n", mu.size()},
                   {"m", nu.size()}};
      CsvDocument csv(man, "cost,solver,converged,iterations");
      if (opts->solver == "sinkhorn") {
        const auto res = sinkhorn_w1(mu, nu, opts->epsilon, opts->max_iter);
        summary["cost"] = res.cost;
        summary["converged"] = res.converged;
        summary["iterations"] = res.iterations;
        summary["marginal_violation"] = res.marginal_violation;
        csv.row({format_double(res.cost), "sinkhorn", res.converged ? "true" : "false",
                 std::to_string(res.iterations)});
      } else if (opts->solver == "sorted") {
        const double cost = solve_w1_1d_sorted(mu, nu);
        summary["cost"] = cost;
        csv.row({format_double(cost), "sorted", "true", "0"});
      } else {
        ExactSolverOptions eopt;
        eopt.max_entries = opts->max_entries;
        const auto plan = solve_w1_exact(mu, nu, eopt);
        summary["cost"] = plan.cost;
        csv.row({format_double(plan.cost), "exact", "true", "0"});
        if (opts->plan) {
          CsvDocument pcsv(man, "i,j,mass");
          for (std::size_t i = 0; i < plan.n; ++i)
            for (std::size_t j = 0; j < plan.m; ++j)
              if (plan.at(i, j) > 0.0)
                pcsv.row({std::to_string(i), std::to_string(j),
                          format_double(plan.at(i, j))});
          write_text_file(global.out("ot_plan.csv"), pcsv.text());
        }
      }
      write_text_file(global.out("ot.csv"), csv.text());
      out << summary.dump() << "\n";
    });
  }

  // ---- mswe -----------------------------------------------------------
  auto* mswe_cmd = app.add_subcommand("mswe", "minimum smooth Wasserstein fit");
  {
    struct Opts {
      std::string data_file, true_spec, family, layout = "default", space;
      std::size_t n = 1024;
      double sigma = 1.0;
      detail::EstimatorOptions est;
      std::size_t restarts = 3, max_evals = 2000;
      double tol = 1e-4;
      bool trace = false;
      bool no_debias = false;
    };
    auto opts = std::make_shared<Opts>();
    mswe_cmd->add_option("--data-file", opts->data_file, "observations CSV");
    mswe_cmd->add_option("--true", opts->true_spec, "model to sample data from");
    mswe_cmd->add_option("--n", opts->n, "sample size when using --true")
        ->check(CLI::PositiveNumber);
    mswe_cmd->add_option("--family", opts->family, "model family template")->required();
    mswe_cmd->add_option("--layout", opts->layout, "theta layout: default, scale-only")
        ->check(CLI::IsMember({"default", "scale-only"}));
    mswe_cmd->add_option("--space", opts->space, "parameter box lo:hi,lo:hi,...")
        ->required();
    mswe_cmd->add_option("--sigma", opts->sigma, "smoothing scale")
        ->required()
        ->check(CLI::PositiveNumber);
    opts->est.add_to(mswe_cmd);
    mswe_cmd->add_option("--restarts", opts->restarts, "optimizer restarts")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    mswe_cmd->add_option("--max-evals", opts->max_evals, "objective budget per restart")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    mswe_cmd->add_option("--tol", opts->tol, "simplex diameter tolerance")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    mswe_cmd->add_flag("--trace", opts->trace, "record the evaluation trace");
    mswe_cmd->add_flag("--no-debias", opts->no_debias,
                       "minimize the raw plug-in distance (d >= 2 objective)");
    mswe_cmd->callback([&, opts] {
      const ParametricModel family = parse_model_spec(opts->family, opts->layout);
      const ThetaSpace space = parse_space_spec(opts->space);
      RngStream rng(global.seed);
      DiscreteMeasure data = [&] {
        if (!opts->data_file.empty()) return read_points_csv(opts->data_file);
        if (opts->true_spec.empty())
          throw validation_error("missing --data-file or --true");
        return sample_source(parse_source_spec(opts->true_spec), opts->n,
                             rng.child("data"));
      }();
      json config{{"data", opts->data_file.empty() ? opts->true_spec : opts->data_file},
                  {"family", opts->family},
                  {"layout", opts->layout},
                  {"space", opts->space},
                  {"sigma", opts->sigma},
                  {"n", data.size()},
                  {"restarts", opts->restarts},
                  {"max_evals", opts->max_evals},
                  {"tol", opts->tol},
                  {"debias", !opts->no_debias},
                  {"options", opts->est.to_json()}};
      const Manifest man = detail::make_manifest("mswe", global.seed, config);
      ObjectiveConfig obj;
      const EstimatorConfig est = opts->est.to_config(global.threads);
      obj.kind = est.kind == EstimatorConfig::Kind::mc ? ObjectiveConfig::Kind::mc
                 : est.kind == EstimatorConfig::Kind::exact1d
                     ? ObjectiveConfig::Kind::exact1d
                     : ObjectiveConfig::Kind::auto_pick;
      obj.quad_tol = est.quad_tol;
      obj.mc = est.mc;
      obj.mc.reps = 1;
      obj.mc_debias = !opts->no_debias;
      OptimizerConfig optcfg;
      optcfg.restarts = opts->restarts;
      optcfg.max_evaluations = opts->max_evals;
      optcfg.tol = opts->tol;
      optcfg.record_trace = opts->trace;
      const MsweResult fit =
          fit_mswe(data, family, space, opts->sigma, obj, optcfg, rng.child("fit"));
      CsvDocument csv(man, "component,theta_hat");
      for (std::size_t i = 0; i < fit.theta_hat.size(); ++i)
        csv.row({std::to_string(i), format_double(fit.theta_hat[i])});
      write_text_file(global.out("mswe.csv"), csv.text());
      if (opts->trace) {
        CsvDocument tcsv(man, "evaluation,objective,theta");
        for (std::size_t e = 0; e < fit.trace.size(); ++e) {
          std::string theta;
          for (std::size_t i = 0; i < fit.trace[e].first.size(); ++i)
            theta += (i ? ";" : "") + format_double(fit.trace[e].first[i]);
          tcsv.row({std::to_string(e), format_double(fit.trace[e].second), theta});
        }
        write_text_file(global.out("mswe_trace.csv"), tcsv.text());
      }
      json summary{{"manifest", detail::manifest_json(man)},
                   {"theta_hat", fit.theta_hat},
                   {"objective", fit.objective.value},
                   {"method", detail::method_name(fit.objective.method)},
                   {"evaluations", fit.evaluations},
                   {"converged", fit.converged}};
      out << summary.dump() << "\n";
    });
  }

  // ---- bootstrap --------------------------------------------------------
  auto* boot_cmd =
      app.add_subcommand("bootstrap", "bootstrap law of sqrt(n)*SWD(P_n^B, P_n)");
  {
    struct Opts {
      std::string data_file, p;
      std::size_t n = 500, B = 500;
      double sigma = 1.0, alpha = 0.1;
      detail::EstimatorOptions est;
    };
    auto opts = std::make_shared<Opts>();
    boot_cmd->add_option("--data-file", opts->data_file, "observations CSV");
    boot_cmd->add_option("--p", opts->p, "model to sample data from");
    boot_cmd->add_option("--n", opts->n, "sample size when using --p")
        ->check(CLI::PositiveNumber);
    boot_cmd->add_option("--B", opts->B, "bootstrap resamples")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    boot_cmd->add_option("--sigma", opts->sigma, "smoothing scale")
        ->required()
        ->check(CLI::PositiveNumber);
    boot_cmd->add_option("--alpha", opts->alpha, "quantile level for q_hat(1-alpha)")
        ->check(CLI::Range(1e-9, 1.0 - 1e-9))
        ->capture_default_str();
    opts->est.add_to(boot_cmd);
    boot_cmd->callback([&, opts] {
      RngStream rng(global.seed);
      const DiscreteMeasure data = [&] {
        if (!opts->data_file.empty()) return read_points_csv(opts->data_file);
        if (opts->p.empty()) throw validation_error("missing --data-file or --p");
        return sample_source(parse_source_spec(opts->p), opts->n, rng.child("data"));
      }();
      json config{{"data", opts->data_file.empty() ? opts->p : opts->data_file},
                  {"n", data.size()},
                  {"B", opts->B},
                  {"sigma", opts->sigma},
                  {"alpha", opts->alpha},
                  {"options", opts->est.to_json()}};
      const Manifest man = detail::make_manifest("bootstrap", global.seed, config);
      const auto boot =
          bootstrap_swd(data, opts->sigma, opts->B, opts->est.to_config(global.threads),
                        rng.child("boot"), global.threads);
      const double q = bootstrap_quantile(boot, opts->alpha);
      CsvDocument csv(man, "b,stat");
      for (std::size_t b = 0; b < boot.stats.size(); ++b)
        csv.row({std::to_string(b), format_double(boot.stats[b])});
      write_text_file(global.out("bootstrap_stats.csv"), csv.text());
      json summary{{"manifest", detail::manifest_json(man)},
                   {"n", boot.n},
                   {"B", boot.B},
                   {"sigma", boot.sigma},
                   {"alpha", opts->alpha},
                   {"q_hat", q},
                   {"mean_stat", mean_of(boot.stats)}};
      out << summary.dump() << "\n";
    });
  }

  // ---- twosample --------------------------------------------------------
  auto* two_cmd = app.add_subcommand("twosample", "pooled-bootstrap two-sample test");
  {
    struct Opts {
      std::string x, y, x_file, y_file;
      std::size_t n = 500, m = 500, B = 200;
      double sigma = 1.0, alpha = 0.05;
      detail::EstimatorOptions est;
    };
    auto opts = std::make_shared<Opts>();
    two_cmd->add_option("--x", opts->x, "first-sample source spec");
    two_cmd->add_option("--y", opts->y, "second-sample source spec");
    two_cmd->add_option("--x-file", opts->x_file, "first sample CSV");
    two_cmd->add_option("--y-file", opts->y_file, "second sample CSV");
    two_cmd->add_option("--n", opts->n, "size of the first sample")
        ->check(CLI::PositiveNumber);
    two_cmd->add_option("--m", opts->m, "size of the second sample")
        ->check(CLI::PositiveNumber);
    two_cmd->add_option("--B", opts->B, "bootstrap resamples")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    two_cmd->add_option("--sigma", opts->sigma, "smoothing scale")
        ->required()
        ->check(CLI::PositiveNumber);
    two_cmd->add_option("--alpha", opts->alpha, "test level")
        ->check(CLI::Range(1e-9, 1.0 - 1e-9))
        ->capture_default_str();
    opts->est.add_to(two_cmd);
    two_cmd->callback([&, opts] {
      RngStream rng(global.seed);
      auto load = [&](const std::string& spec, const std::string& file,
                      std::size_t size, const char* side, const char* tag) {
        const Source src = detail::load_side(spec, file, side);
        if (const auto* pts = std::get_if<DiscreteMeasure>(&src);
            pts && !file.empty())
          return *pts;
        return sample_source(src, size, rng.child(tag));
      };
      const DiscreteMeasure X = load(opts->x, opts->x_file, opts->n, "x", "x");
      const DiscreteMeasure Y = load(opts->y, opts->y_file, opts->m, "y", "y");
      json config{{"x", opts->x.empty() ? opts->x_file : opts->x},
                  {"y", opts->y.empty() ? opts->y_file : opts->y},
                  {"n", X.size()},
                  {"m", Y.size()},
                  {"B", opts->B},
                  {"sigma", opts->sigma},
                  {"alpha", opts->alpha},
                  {"options", opts->est.to_json()}};
      const Manifest man = detail::make_manifest("twosample", global.seed, config);
      const auto res =
          two_sample_test(X, Y, opts->sigma, opts->B, opts->alpha,
                          opts->est.to_config(global.threads), rng.child("test"),
                          global.threads);
      CsvDocument csv(man, "b,stat");
      for (std::size_t b = 0; b < res.null_stats.size(); ++b)
        csv.row({std::to_string(b), format_double(res.null_stats[b])});
      write_text_file(global.out("twosample_null.csv"), csv.text());
      json summary{{"manifest", detail::manifest_json(man)},
                   {"statistic", res.statistic},
                   {"q_hat", res.q_hat},
                   {"reject", res.reject},
                   {"n", X.size()},
                   {"m", Y.size()},
                   {"B", opts->B},
                   {"alpha", opts->alpha}};
      out << summary.dump() << "\n";
    });
  }

  // ---- rates ------------------------------------------------------------
  auto* rates_cmd =
      app.add_subcommand("rates", "mean SWD(P_n, P) against n with a log-log fit");
  {
    struct Opts {
      std::string p;
      std::vector<double> sigmas{1.0};
      std::vector<std::size_t> ns{128, 256, 512, 1024, 2048, 4096, 8192};
      std::size_t trials = 50;
      std::size_t ref_multiplier = 16;
      detail::EstimatorOptions est;
    };
    auto opts = std::make_shared<Opts>();
    rates_cmd->add_option("--p", opts->p, "population source spec")->required();
    rates_cmd->add_option("--sigmas", opts->sigmas, "smoothing scales")
        ->delimiter(',')
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    rates_cmd->add_option("--ns", opts->ns, "sample-size grid")
        ->delimiter(',')
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    rates_cmd->add_option("--trials", opts->trials, "trials per cell")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    rates_cmd->add_option("--ref-multiplier", opts->ref_multiplier,
                          "reference sample size multiplier for d >= 2")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    opts->est.add_to(rates_cmd);
    rates_cmd->callback([&, opts] {
      const Source p = parse_source_spec(opts->p);
      json config{{"p", opts->p},
                  {"sigmas", opts->sigmas},
                  {"ns", opts->ns},
                  {"trials", opts->trials},
                  {"ref_multiplier", opts->ref_multiplier},
                  {"options", opts->est.to_json()}};
      const Manifest man = detail::make_manifest("rates", global.seed, config);
      const auto res = rate_experiment(p, opts->sigmas, opts->ns, opts->trials,
                                       opts->est.to_config(global.threads),
                                       RngStream(global.seed).child("rates"),
                                       global.threads, opts->ref_multiplier);
      CsvDocument raw(man, "sigma,n,trial,swd");
      for (const auto& c : res.cells)
        raw.row({format_double(c.sigma), std::to_string(c.n), std::to_string(c.trial),
                 format_double(c.value)});
      write_text_file(global.out("rates_raw.csv"), raw.text());
      CsvDocument sum(man, "sigma,n,mean,stderr");
      for (const auto& fit : res.fits)
        for (std::size_t i = 0; i < fit.ns.size(); ++i)
          sum.row({format_double(fit.sigma), format_double(fit.ns[i]),
                   format_double(fit.means[i]), format_double(fit.stderrs[i])});
      write_text_file(global.out("rates_summary.csv"), sum.text());
      CsvDocument fits(man, "sigma,slope,intercept,slope_se,max_abs_log_residual");
      json jfits = json::array();
      for (const auto& fit : res.fits) {
        fits.row({format_double(fit.sigma), format_double(fit.slope),
                  format_double(fit.intercept), format_double(fit.slope_se),
                  format_double(fit.max_abs_log_residual)});
        jfits.push_back({{"sigma", fit.sigma},
                         {"slope", fit.slope},
                         {"intercept", fit.intercept},
                         {"slope_se", fit.slope_se},
                         {"max_abs_log_residual", fit.max_abs_log_residual}});
      }
      write_text_file(global.out("rates_fit.csv"), fits.text());
      if (global.svg) {
        SvgPlot plot("mean smoothed distance vs n", true, true);
        for (const auto& fit : res.fits)
          plot.add({"sigma=" + format_double(fit.sigma), fit.ns, fit.means,
                    fit.stderrs, false});
        write_text_file(global.out("rates.svg"), plot.render(man));
      }
      json summary{{"manifest", detail::manifest_json(man)},
                   {"fits", jfits},
                   {"reference_size", res.reference_size}};
      out << summary.dump() << "\n";
    });
  }

  // ---- scatter ----------------------------------------------------------
  auto* scatter_cmd =
      app.add_subcommand("scatter", "sqrt(n)-scaled estimation-error clouds");
  {
    struct Opts {
      std::string true_spec, family, layout = "default", space;
      std::vector<double> sigmas{1.0};
      std::vector<std::size_t> ns{1024, 4096};
      std::size_t trials = 50;
      detail::EstimatorOptions est;
      std::size_t restarts = 1, max_evals = 2000;
      double tol = 1e-4;
      bool no_debias = false;
    };
    auto opts = std::make_shared<Opts>();
    scatter_cmd->add_flag("--no-debias", opts->no_debias,
                          "minimize the raw plug-in distance (d >= 2 objective)");
    scatter_cmd->add_option("--true", opts->true_spec, "data-generating model")
        ->required();
    scatter_cmd->add_option("--family", opts->family, "fit family template")
        ->required();
    scatter_cmd->add_option("--layout", opts->layout, "theta layout")
        ->check(CLI::IsMember({"default", "scale-only"}));
    scatter_cmd->add_option("--space", opts->space, "parameter box lo:hi,...")
        ->required();
    scatter_cmd->add_option("--sigmas", opts->sigmas, "smoothing scales")
        ->delimiter(',')
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    scatter_cmd->add_option("--ns", opts->ns, "sample sizes")
        ->delimiter(',')
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    scatter_cmd->add_option("--trials", opts->trials, "fits per cell")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    scatter_cmd->add_option("--restarts", opts->restarts, "optimizer restarts")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    scatter_cmd->add_option("--max-evals", opts->max_evals, "objective budget")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    scatter_cmd->add_option("--tol", opts->tol, "simplex tolerance")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    opts->est.add_to(scatter_cmd);
    scatter_cmd->callback([&, opts] {
      const ParametricModel truth =
          parse_model_spec(opts->true_spec, opts->layout);
      const ParametricModel family = parse_model_spec(opts->family, opts->layout);
      const ThetaSpace space = parse_space_spec(opts->space);
      json config{{"true", opts->true_spec}, {"family", opts->family},
                  {"layout", opts->layout},  {"space", opts->space},
                  {"sigmas", opts->sigmas},  {"ns", opts->ns},
                  {"trials", opts->trials},  {"restarts", opts->restarts},
                  {"max_evals", opts->max_evals}, {"tol", opts->tol},
                  {"debias", !opts->no_debias},
                  {"options", opts->est.to_json()}};
      const Manifest man = detail::make_manifest("scatter", global.seed, config);
      ObjectiveConfig obj;
      const EstimatorConfig est = opts->est.to_config(global.threads);
      obj.kind = est.kind == EstimatorConfig::Kind::mc ? ObjectiveConfig::Kind::mc
                 : est.kind == EstimatorConfig::Kind::exact1d
                     ? ObjectiveConfig::Kind::exact1d
                     : ObjectiveConfig::Kind::auto_pick;
      obj.quad_tol = est.quad_tol;
      obj.mc = est.mc;
      obj.mc.reps = 1;
      obj.mc_debias = !opts->no_debias;
      OptimizerConfig optcfg;
      optcfg.restarts = opts->restarts;
      optcfg.max_evaluations = opts->max_evals;
      optcfg.tol = opts->tol;
      const auto set =
          limit_scatter(truth, family, space, opts->sigmas, opts->ns, opts->trials, obj,
                        optcfg, RngStream(global.seed).child("scatter"),
                        global.threads);
      CsvDocument csv(man, "sigma,n,trial,component,scaled_error,theta_hat");
      for (const auto& r : set.rows)
        csv.row({format_double(r.sigma), std::to_string(r.n), std::to_string(r.trial),
                 std::to_string(r.component), format_double(r.scaled_error),
                 format_double(r.theta_hat)});
      write_text_file(global.out("scatter.csv"), csv.text());

      CsvDocument kcsv(man, "sigma,n,component,x,density");
      json cells = json::array();
      for (double sigma : opts->sigmas) {
        for (std::size_t n : opts->ns) {
          json medians = json::array();
          for (std::size_t c = 0; c < set.theta_star.size(); ++c) {
            auto cloud = set.cell_component(sigma, n, c);
            if (cloud.empty()) continue;
            std::vector<double> abs_cloud;
            for (double v : cloud) abs_cloud.push_back(std::abs(v));
            medians.push_back(median_of(abs_cloud));
            if (cloud.size() >= 5 && sample_sd(cloud) > 0.0) {
              const auto curve = kde(cloud);
              for (std::size_t g = 0; g < curve.grid.size(); ++g)
                kcsv.row({format_double(sigma), std::to_string(n), std::to_string(c),
                          format_double(curve.grid[g]),
                          format_double(curve.density[g])});
            }
          }
          cells.push_back({{"sigma", sigma},
                           {"n", n},
                           {"trials", opts->trials},
                           {"median_abs_scaled_error", medians}});
        }
      }
      write_text_file(global.out("scatter_kde.csv"), kcsv.text());
      if (global.svg && set.theta_star.size() >= 2) {
        SvgPlot plot("scaled estimation errors", false, false);
        for (std::size_t ni = 0; ni < opts->ns.size(); ++ni) {
          SvgSeries series;
          series.label = "n=" + std::to_string(opts->ns[ni]);
          series.points_only = true;
          for (const auto& r : set.rows) {
            if (r.n != opts->ns[ni] || r.sigma != opts->sigmas.front()) continue;
            if (r.component == 0) series.x.push_back(r.scaled_error);
            if (r.component == 1) series.y.push_back(r.scaled_error);
          }
          plot.add(std::move(series));
        }
        write_text_file(global.out("scatter.svg"), plot.render(man));
      }
      json summary{{"manifest", detail::manifest_json(man)},
                   {"theta_star", set.theta_star},
                   {"cells", cells},
                   {"rows", set.rows.size()}};
      out << summary.dump() << "\n";
    });
  }

  // ---- concentration ------------------------------------------------------
  auto* conc_cmd =
      app.add_subcommand("concentration", "concentration bounds and exceedance rates");
  {
    struct Opts {
      std::string kind = "compact";
      double diam = 1.0, orlicz_alpha = 1.0, variance_proxy = 1.0, tail_scale = 1.0;
      double q = 2.0, moment_proxy = 1.0, eta = 0.1, C = 0.0;
      std::size_t n = 200;
      std::vector<double> ts{0.05, 0.1, 0.2, 0.3};
      bool empirical = false;
      std::string box = "0,1";
      double sigma = 1.0;
      std::size_t trials = 500;
      detail::EstimatorOptions est;
    };
    auto opts = std::make_shared<Opts>();
    conc_cmd->add_option("--kind", opts->kind, "compact, psi or poly")
        ->check(CLI::IsMember({"compact", "psi", "poly"}))
        ->capture_default_str();
    conc_cmd->add_option("--diam", opts->diam, "support diameter (compact)")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    conc_cmd->add_option("--orlicz-alpha", opts->orlicz_alpha,
                         "Orlicz exponent in (0,1] (psi)");
    conc_cmd->add_option("--variance-proxy", opts->variance_proxy,
                         "second-moment proxy (psi/poly)");
    conc_cmd->add_option("--tail-scale", opts->tail_scale, "Orlicz tail proxy (psi)");
    conc_cmd->add_option("--q", opts->q, "moment order (poly)");
    conc_cmd->add_option("--moment-proxy", opts->moment_proxy, "q-th moment proxy");
    conc_cmd->add_option("--eta", opts->eta, "centering slack (psi/poly)");
    conc_cmd->add_option("--C", opts->C, "user constant (required for psi/poly)");
    conc_cmd->add_option("--n", opts->n, "sample size")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    conc_cmd->add_option("--t", opts->ts, "deviation grid")
        ->delimiter(',')
        ->capture_default_str();
    conc_cmd->add_flag("--empirical", opts->empirical,
                       "also run Monte-Carlo exceedance frequencies");
    conc_cmd->add_option("--box", opts->box, "uniform box lo,hi[,lo,hi...]")
        ->capture_default_str();
    conc_cmd->add_option("--sigma", opts->sigma, "smoothing scale (empirical)")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    conc_cmd->add_option("--trials", opts->trials, "Monte-Carlo trials (empirical)")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    opts->est.add_to(conc_cmd);
    conc_cmd->callback([&, opts] {
      ConcentrationBound bound = [&] {
        if (opts->kind == "compact") return ConcentrationBound::compact(opts->diam);
        if (opts->kind == "psi")
          return ConcentrationBound::psi_alpha(opts->orlicz_alpha, opts->variance_proxy,
                                               opts->tail_scale, opts->eta, opts->C);
        return ConcentrationBound::poly(opts->q, opts->variance_proxy,
                                        opts->moment_proxy, opts->eta, opts->C);
      }();
      if (opts->kind != "compact")
        err << "note: psi/poly bounds hold only up to the user constant C; "
               "the Orlicz/moment proxies are modeling inputs, not estimates\n";
      json config{{"kind", opts->kind},   {"n", opts->n},
                  {"t", opts->ts},        {"empirical", opts->empirical},
                  {"box", opts->box},     {"sigma", opts->sigma},
                  {"trials", opts->trials}};
      const Manifest man = detail::make_manifest("concentration", global.seed, config);
      json jbounds = json::array();
      for (double t : opts->ts)
        jbounds.push_back({{"t", t}, {"bound", concentration_eval(bound, opts->n, t)}});
      json summary{{"manifest", detail::manifest_json(man)},
                   {"kind", opts->kind},
                   {"n", opts->n},
                   {"bounds", jbounds}};
      CsvDocument csv(man, "t,bound,frequency,half_width");
      if (opts->empirical) {
        const auto box_vals = detail::parse_numbers(opts->box, "--box");
        if (box_vals.size() < 2 || box_vals.size() % 2 != 0)
          throw validation_error("--box needs lo,hi pairs per axis");
        std::vector<double> lo, hi;
        for (std::size_t k = 0; k < box_vals.size(); k += 2) {
          lo.push_back(box_vals[k]);
          hi.push_back(box_vals[k + 1]);
        }
        const auto emp = concentration_empirical(
            Source(UniformBox(lo, hi)), opts->sigma, opts->n, opts->trials, opts->ts,
            opts->est.to_config(global.threads),
            RngStream(global.seed).child("concentration"), global.threads);
        json rows = json::array();
        for (std::size_t i = 0; i < emp.ts.size(); ++i) {
          csv.row({format_double(emp.ts[i]),
                   format_double(concentration_eval(bound, opts->n, emp.ts[i])),
                   format_double(emp.frequencies[i]),
                   format_double(emp.half_widths[i])});
          rows.push_back({{"t", emp.ts[i]},
                          {"frequency", emp.frequencies[i]},
                          {"half_width", emp.half_widths[i]}});
        }
        summary["empirical"] = {{"mean", emp.mean}, {"rows", rows}};
      } else {
        for (double t : opts->ts)
          csv.row({format_double(t), format_double(concentration_eval(bound, opts->n, t)),
                   "", ""});
      }
      write_text_file(global.out("concentration.csv"), csv.text());
      out << summary.dump() << "\n";
    });
  }

  // ---- selftest -----------------------------------------------------------
  auto* self_cmd =
      app.add_subcommand("selftest", "oracle-equivalence and analytic identities");
  self_cmd->callback([&] {
    const Manifest man = detail::make_manifest("selftest", global.seed, json::object());
    json checks = json::array();
    bool all_ok = true;
    const auto record = [&](const std::string& name, bool ok) {
      checks.push_back({{"name", name}, {"pass", ok}});
      all_ok = all_ok && ok;
      err << (ok ? "ok   " : "FAIL ") << name << "\n";
    };

    {
      RngStream root(9001);
      bool ok = true;
      for (int rep = 0; rep < 30 && ok; ++rep) {
        RngStream sub = root.child("oracle", rep);
        const std::size_t n = 2 + sub.uniform_index(4);
        const std::size_t d = 1 + sub.uniform_index(2);
        std::vector<double> a(n * d), b(n * d);
        for (double& v : a) v = 2.0 * sub.normal();
        for (double& v : b) v = 2.0 * sub.normal();
        const auto mu = DiscreteMeasure::uniform(a, n, d);
        const auto nu = DiscreteMeasure::uniform(b, n, d);
        ok = std::abs(solve_w1_exact(mu, nu).cost - brute_force_w1(mu, nu)) < 1e-10;
      }
      record("transport simplex matches permutation brute force", ok);
    }
    {
      RngStream root(9002);
      bool ok = true;
      for (int rep = 0; rep < 20 && ok; ++rep) {
        RngStream sub = root.child("oned", rep);
        const std::size_t n = 2 + sub.uniform_index(20);
        std::vector<double> a(n), b(n);
        for (double& v : a) v = 3.0 * sub.normal();
        for (double& v : b) v = 3.0 * sub.normal();
        const auto mu = DiscreteMeasure::uniform(a, n, 1);
        const auto nu = DiscreteMeasure::uniform(b, n, 1);
        ok = std::abs(solve_w1_exact(mu, nu).cost - solve_w1_1d_sorted(mu, nu)) < 1e-10;
      }
      record("sorted 1-D coupling matches the simplex", ok);
    }
    {
      const Source g0{ParametricModel::gaussian({0.0}, 1.0)};
      const Source g1{ParametricModel::gaussian({1.0}, 1.0)};
      const Source d0{DiscreteMeasure::point_mass({0.0})};
      const double idv = swd_1d_exact(g0, g0, 1.0).value;
      const double shift = swd_1d_exact(g0, g1, 1.0).value;
      const double delta = swd_1d_exact(d0, g0, 1.0).value;
      const double expected = (kSqrt2 - 1.0) * std::sqrt(2.0 / kPi);
      record("exact 1-D identities (identity, shift, point mass)",
             std::abs(idv) < 1e-8 && std::abs(shift - 1.0) < 1e-6 &&
                 std::abs(delta - expected) < 1e-5);
    }
    {
      const auto absf = [](double y) { return std::abs(y); };
      const double at_kink = convolve_lipschitz_1d(absf, 1.0, 0.0, 1e-9);
      const double deriv = smoothed_derivative_max(absf, 1.0, 1, std::vector<double>{
                                                       -2.0, -1.0, 0.0, 1.0, 2.0});
      record("smoothing analytics (kink value, derivative bound)",
             std::abs(at_kink - std::sqrt(2.0 / kPi)) < 1e-8 && deriv <= 1.0 + 1e-3);
    }
    {
      const Source p{ParametricModel::gaussian({0.0, 0.0}, 1.0)};
      McConfig cfg;
      cfg.m = 100;
      cfg.reps = 2;
      const auto a = swd_mc(p, p, 1.0, cfg, RngStream(7).child("mc"));
      const auto b = swd_mc(p, p, 1.0, cfg, RngStream(7).child("mc"));
      record("plug-in estimates are deterministic", a.value == b.value);
    }
    {
      const auto bound = ConcentrationBound::compact(1.0);
      const double b1 = concentration_eval(bound, 100, 0.2);
      const double b2 = concentration_eval(bound, 200, 0.2);
      record("concentration algebra bound(2n) = bound(n)^2",
             std::abs(b2 - b1 * b1) <= 1e-12 * b2 + 1e-300);
    }

    json summary{{"manifest", detail::manifest_json(man)},
                 {"checks", checks},
                 {"pass", all_ok}};
    out << summary.dump() << "\n";
    if (!all_ok) exit_code = 1;
  });

  // ---- parse and dispatch ---------------------------------------------------
  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("swdist");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == static_cast<int>(CLI::ExitCodes::Success)) {
      out << app.help();
      return 0;
    }
    err << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  } catch (const validation_error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return exit_code;
}

}  // namespace swd::cli
