#include <chrono>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kmtc/errors.hpp"
#include "kmtc/harness.hpp"

namespace {

kmtc::Json load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw kmtc::ConfigError("cannot read config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  try {
    return kmtc::Json::parse(text);
  } catch (const kmtc::Json::parse_error& e) {
    std::size_t line = 1;
    const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
    for (std::size_t i = 0; i < upto; ++i)
      if (text[i] == '\n') ++line;
    throw kmtc::ConfigError(path + ":" + std::to_string(line) + ": " +
                            e.what());
  }
}

struct Flags {
  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  unsigned jobs = 1;
  unsigned N = 0;
  std::uint64_t replicates = 0;
  std::uint64_t m = 0;
  unsigned s_max = 0;
  unsigned levels = 0;
  std::uint64_t probe_reps = 0;
  std::size_t conditional_points = 0;
  std::uint64_t target_count = 0;
  std::vector<unsigned> n_list;
  std::vector<double> tau_list;
};

void attach_common(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config, "JSON config file");
  sub->add_option("--seed", f.seed, "master seed");
  sub->add_option("--out", f.out, "output directory");
  sub->add_option("--jobs", f.jobs, "parallel worker cap");
  sub->add_option("--N", f.N, "dyadic depth (2^N summands)");
  sub->add_option("--replicates", f.replicates, "Monte Carlo replicates");
  sub->add_option("--grid-points", f.conditional_points,
                  "conditional inversion grid points");
  sub->add_option("--target-count", f.target_count,
                  "rows drawn from the target law; rest is Gaussian padding");
}

// Flag overrides land in the JSON config before validation, so the file and
// the command line go through one resolution path.
void apply_overrides(CLI::App* sub, const Flags& f, kmtc::Json& j) {
  const auto given = [sub](const char* name) {
    const CLI::Option* o = sub->get_option_no_throw(name);
    return o != nullptr && o->count() > 0;
  };
  if (given("--seed")) j["seed"] = f.seed;
  if (given("--out")) j["out"] = f.out;
  if (given("--jobs")) j["jobs"] = f.jobs;
  if (given("--N")) j["N"] = f.N;
  if (given("--replicates")) j["replicates"] = f.replicates;
  if (given("--grid-points")) j["conditional_points"] = f.conditional_points;
  if (given("--target-count")) j["target_count"] = f.target_count;
  if (given("--m")) j["m"] = f.m;
  if (given("--s-max")) j["s_max"] = f.s_max;
  if (given("--levels")) j["levels"] = f.levels;
  if (given("--probe-reps")) j["probe_reps"] = f.probe_reps;
  if (given("--N-list")) j["N_list"] = f.n_list;
  if (given("--tau")) j["tau_list"] = f.tau_list;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kmtc: dyadic Gaussian coupling toolkit"};
  app.require_subcommand(1);
  Flags f;

  CLI::App* couple = app.add_subcommand("couple", "one coupled path");
  CLI::App* mc = app.add_subcommand("mc", "Monte Carlo sweep over (tau, N)");
  CLI::App* rate = app.add_subcommand("rate", "discrepancy growth fit over N");
  CLI::App* decompose =
      app.add_subcommand("decompose", "prefix-sum block decomposition");
  CLI::App* check = app.add_subcommand("check", "family diagnostics");
  CLI::App* compose =
      app.add_subcommand("compose", "doubly exponential block chain");

  for (CLI::App* sub : {couple, mc, rate, decompose, check, compose})
    attach_common(sub, f);
  for (CLI::App* sub : {mc, rate}) {
    sub->add_option("--N-list", f.n_list, "N sweep values");
    sub->add_option("--tau", f.tau_list, "tau sweep values");
  }
  decompose->add_option("--m", f.m, "prefix length to decompose");
  compose->add_option("--s-max", f.s_max, "last chain block index");
  check->add_option("--levels", f.levels, "smoothness check levels 1..L");
  check->add_option("--probe-reps", f.probe_reps, "probe replicates");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  CLI::App* chosen = app.get_subcommands().front();
  const std::string name = chosen->get_name();

  try {
    kmtc::Json jcfg =
        f.config.empty() ? kmtc::Json::object() : load_config(f.config);
    if (!jcfg.is_object())
      throw kmtc::ConfigError("config: top level must be an object");
    apply_overrides(chosen, f, jcfg);
    const kmtc::RunConfig cfg = kmtc::run_config_from_json(jcfg);

    const auto t0 = std::chrono::steady_clock::now();
    int rc = 0;
    if (name == "couple") rc = kmtc::cmd_couple(cfg);
    else if (name == "mc") rc = kmtc::cmd_mc(cfg);
    else if (name == "rate") rc = kmtc::cmd_rate(cfg);
    else if (name == "decompose") rc = kmtc::cmd_decompose(cfg, std::cout);
    else if (name == "check") rc = kmtc::cmd_check(cfg);
    else if (name == "compose") rc = kmtc::cmd_compose(cfg);
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                        std::chrono::steady_clock::now() - t0)
                        .count();
    // Timing stays on stderr so files and stdout are reproducible.
    std::cerr << "elapsed_ms " << ms << '\n';
    return rc;
  } catch (const kmtc::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const kmtc::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
