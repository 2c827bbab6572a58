#include <cstdint>
#include <cstdio>
#include <exception>
#include <fstream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "slabdens/bench.hpp"
#include "slabdens/bounds.hpp"
#include "slabdens/estimators.hpp"
#include "slabdens/fnspace.hpp"
#include "slabdens/sample.hpp"

namespace {

using nlohmann::json;

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  out << content;
  if (!out) throw std::runtime_error("failed writing output file: " + path);
}

json trace_to_json(const slabdens::GreedyTrace& trace) {
  json steps = json::array();
  for (const slabdens::GreedyStep& s : trace.steps) steps.push_back({s.n, s.k, s.gain});
  return json{{"n_s", trace.n_s},
              {"hit_max_iter", trace.hit_max_iter},
              {"final_max_gain", trace.final_max_gain},
              {"steps", steps}};
}

struct EstimateArgs {
  std::string data, basis, method, out;
  std::string union_bound = "all";
  std::string algo;
  double eps = 0.1;
  std::optional<double> cap;
};

void run_estimate(const EstimateArgs& args) {
  const slabdens::Sample sample = slabdens::read_sample(args.data);
  const slabdens::FamilyWithCertificate fwc = slabdens::family_from_spec(args.basis, &sample);
  const slabdens::IntervalMethod method =
      slabdens::interval_method_from_string(args.method, args.union_bound);
  slabdens::EstimatorConfig cfg;
  cfg.method = method;
  cfg.eps = args.eps;
  cfg.cap_c = args.cap;

  json trace;
  slabdens::SpanElement estimate = slabdens::SpanElement::zero(fwc.family);
  if (args.algo == "greedy") {
    slabdens::FitResult fit = slabdens::fit_greedy(sample, fwc, cfg);
    estimate = fit.estimate;
    trace = trace_to_json(fit.trace);
  } else if (args.algo == "intersection") {
    estimate = slabdens::fit_intersection(sample, fwc, cfg);
  } else if (args.algo == "soft") {
    estimate = slabdens::soft_threshold(sample, fwc, cfg);
  } else if (args.algo == "dual") {
    const std::vector<slabdens::Slab> slabs =
        slabdens::build_slabs(sample, fwc, method, args.eps);
    const slabdens::GramMatrix gm = slabdens::gram(*fwc.family);
    estimate = slabdens::dual_solve(slabs, gm, fwc.family);
    if (cfg.cap_c) estimate = slabdens::project_cap(estimate, *cfg.cap_c);
  } else {
    throw std::invalid_argument("unknown algorithm: " + args.algo);
  }

  json coeffs = json::array();
  for (int k = 0; k < estimate.coefficients().size(); ++k)
    coeffs.push_back(estimate.coefficients()[k]);
  json config{{"eps", args.eps},
              {"method", slabdens::to_string(method)},
              {"union", slabdens::to_string(method.union_bound)},
              {"algo", args.algo}};
  config["cap"] = args.cap ? json(*args.cap) : json(nullptr);
  const json out{{"version", slabdens::kVersion},
                 {"family", fwc.family->descriptor()},
                 {"config", config},
                 {"coefficients", coeffs},
                 {"trace", trace}};
  write_text(args.out, out.dump(2) + "\n");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"density estimation by projection onto per-coefficient confidence slabs"};
  app.require_subcommand(1);

  EstimateArgs est;
  CLI::App* estimate = app.add_subcommand("estimate", "fit a density estimate from a sample file");
  estimate->add_option("--data", est.data, "sample file, one value per line")->required();
  estimate->add_option("--basis", est.basis, "family preset or JSON descriptor")->required();
  estimate->add_option("--eps", est.eps, "confidence level");
  estimate
      ->add_option("--method", est.method,
                   "theorem1|improved-grid|histogram|haar|asymptotic-literal|asymptotic-corrected|"
                   "loo")
      ->required();
  estimate->add_option("--union", est.union_bound, "all|individual");
  estimate->add_option("--algo", est.algo, "greedy|intersection|soft|dual")->required();
  double cap_value = 0.0;
  CLI::Option* cap_opt = estimate->add_option("--cap", cap_value, "coefficient cap c");
  estimate->add_option("--out", est.out, "output JSON path")->required();

  struct {
    long n = 1024;
    long reps = 20;
    double eps = 0.1;
    std::uint64_t seed = 1;
    std::string out;
  } fig;
  CLI::App* bench = app.add_subcommand("bench", "simulation studies");
  bench->require_subcommand(1);
  CLI::App* figure2 = bench->add_subcommand("figure2", "benchmark grid: 3 densities x 3 estimators");
  figure2->add_option("--n", fig.n, "sample size");
  figure2->add_option("--reps", fig.reps, "replicates per cell");
  figure2->add_option("--eps", fig.eps, "confidence level");
  figure2->add_option("--seed", fig.seed, "master seed");
  figure2->add_option("--out", fig.out, "output CSV path")->required();

  struct {
    std::string density, basis, method, out;
    double eps = 0.1;
    long reps = 200;
    std::uint64_t seed = 1;
    long n = 256;
  } cov;
  CLI::App* coverage = bench->add_subcommand("coverage", "joint coverage frequency study");
  coverage->add_option("--density", cov.density, "test density name")->required();
  coverage->add_option("--basis", cov.basis, "family preset")->required();
  coverage->add_option("--method", cov.method, "interval method")->required();
  coverage->add_option("--eps", cov.eps, "confidence level");
  coverage->add_option("--reps", cov.reps, "replicates");
  coverage->add_option("--seed", cov.seed, "master seed");
  coverage->add_option("--n", cov.n, "sample size per replicate");
  coverage->add_option("--out", cov.out, "output CSV path")->required();

  struct {
    std::string density = "cosine";
    std::string basis = "trig";
    long n_min = 128;
    long n_max = 4096;
    long reps = 10;
    std::uint64_t seed = 1;
    std::string out;
  } rates;
  CLI::App* rates_cmd = bench->add_subcommand("rates", "risk decay over doubling sample sizes");
  rates_cmd->add_option("--density", rates.density, "test density name");
  rates_cmd->add_option("--basis", rates.basis, "trig|haar");
  rates_cmd->add_option("--n-min", rates.n_min, "smallest sample size");
  rates_cmd->add_option("--n-max", rates.n_max, "largest sample size");
  rates_cmd->add_option("--reps", rates.reps, "replicates per size");
  rates_cmd->add_option("--seed", rates.seed, "master seed");
  rates_cmd->add_option("--out", rates.out, "output CSV path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*estimate) {
      if (*cap_opt) est.cap = cap_value;
      run_estimate(est);
    } else if (*figure2) {
      write_text(fig.out, slabdens::emit_csv(slabdens::run_figure2(fig.n, fig.reps, fig.eps, fig.seed)));
    } else if (*coverage) {
      const slabdens::IntervalMethod method =
          slabdens::interval_method_from_string(cov.method, "all");
      write_text(cov.out, slabdens::emit_csv(slabdens::run_coverage(
                              cov.density, cov.basis, method, cov.eps, cov.reps, cov.seed, cov.n)));
    } else if (*rates_cmd) {
      write_text(rates.out,
                 slabdens::emit_csv(slabdens::run_rates(rates.density, rates.basis, rates.n_min,
                                                        rates.n_max, rates.reps, rates.seed)));
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
