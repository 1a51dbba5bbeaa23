// Command-line front end: runs experiment configs and writes deterministic
// report streams. Exit codes: 0 all probes passed, 1 probe failure (or a
// runtime error mid-probe), 2 malformed config or usage.

#include <cctype>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>

#include "CLI11.hpp"

#include "proxkit/proxkit.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitProbeFailure = 1;
constexpr int kExitConfigError = 2;

nlohmann::json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw proxkit::ConfigError("config: cannot open \"" + path + "\"");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw proxkit::ConfigError("config: " + std::string(e.what()));
  }
}

struct SeedArg {
  bool present = false;
  std::uint64_t value = 0;
};

SeedArg resolve_seed(const SeedArg& cli_seed) {
  if (cli_seed.present) return cli_seed;
  if (const char* env = std::getenv("PROXKIT_SEED")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end == env || *end != '\0') {
      throw proxkit::ConfigError("PROXKIT_SEED: not an unsigned integer");
    }
    return SeedArg{true, static_cast<std::uint64_t>(v)};
  }
  return SeedArg{};
}

std::string resolve_out_dir(const std::string& cli_out) {
  if (!cli_out.empty()) return cli_out;
  if (const char* env = std::getenv("PROXKIT_OUT_DIR")) return env;
  return "proxkit-out";
}

int cmd_run(const std::string& config_path, const SeedArg& cli_seed,
            const std::string& cli_out, const std::string& format, bool parallel) {
  const nlohmann::json config = load_config(config_path);
  const SeedArg seed = resolve_seed(cli_seed);

  proxkit::RunOptions opts;
  opts.has_seed_override = seed.present;
  opts.seed = seed.value;
  opts.threads = parallel ? std::max(1u, std::thread::hardware_concurrency()) : 1;

  const proxkit::RunOutcome outcome = proxkit::run_experiments(config, opts);

  const std::filesystem::path out_dir = resolve_out_dir(cli_out);
  std::filesystem::create_directories(out_dir);
  const std::filesystem::path records_path = out_dir / "records.jsonl";
  {
    std::ofstream os(records_path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + records_path.string());
    for (const nlohmann::json& r : outcome.records) proxkit::write_jsonl_line(os, r);
  }
  if (format == "csv") {
    const std::filesystem::path csv_path = out_dir / "summary.csv";
    std::ofstream os(csv_path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + csv_path.string());
    proxkit::write_csv_summary(os, outcome.records);
  }

  std::cout << "wrote " << outcome.records.size() << " records to "
            << records_path.string() << "\n";
  if (outcome.failures > 0) {
    std::cout << outcome.failures << " probe(s) failed\n";
    return kExitProbeFailure;
  }
  std::cout << "all probes passed\n";
  return kExitOk;
}

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

int cmd_list(const std::string& config_path, const std::string& filter) {
  if (!config_path.empty()) {
    const nlohmann::json config = load_config(config_path);
    for (const nlohmann::json& e : proxkit::list_experiments(config)) {
      std::cout << e.at("label").get<std::string>() << "\t"
                << e.at("kind").get<std::string>() << "\n";
    }
    return kExitOk;
  }
  struct CatalogEntry {
    const char* name;
    const char* params;
    const char* prox;
  };
  static const CatalogEntry entries[] = {
      {"zero", "dim", "closed form (identity)"},
      {"quadratic", "q (scalar or matrix), b, c, dim", "closed form (eigenbasis solve)"},
      {"abs_sum", "weight, dim", "closed form (soft threshold)"},
      {"eucl_norm", "weight, dim", "closed form (block shrinkage)"},
      {"indicator_box", "lo, hi", "closed form (clamp)"},
      {"indicator_ball", "center, radius", "closed form (radial projection)"},
      {"huber", "delta, dim", "closed form (scaled shrink with knee)"},
      {"perturbed", "sigma, base",
       "closed form at lambda = 1: (1 - sigma) * base prox; numeric splitting otherwise"},
      {"shifted", "offset, base", "closed form (delegates to base)"},
  };
  const std::string needle = lower(filter);
  for (const CatalogEntry& e : entries) {
    if (!needle.empty() && lower(e.name).find(needle) == std::string::npos) continue;
    std::cout << e.name << "\n  parameters: " << e.params << "\n  prox: " << e.prox << "\n";
  }
  return kExitOk;
}

int cmd_validate(const std::string& config_path) {
  const nlohmann::json config = load_config(config_path);
  proxkit::validate_config(config);
  std::cout << "config ok: " << proxkit::list_experiments(config).size()
            << " experiment(s)\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"experiment runner for proximal-operator probes"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::string format = "jsonl";
  SeedArg seed;
  bool parallel = false;

  CLI::App* run = app.add_subcommand("run", "execute the experiments in a config");
  run->add_option("--config", config_path, "config file (JSON)")->required();
  run->add_option("--seed", seed.value, "override the run seed")
      ->check(CLI::NonNegativeNumber);
  run->add_option("--out", out_dir, "output directory (default: $PROXKIT_OUT_DIR or ./proxkit-out)");
  run->add_option("--format", format, "report format")
      ->check(CLI::IsMember({"jsonl", "csv"}));
  run->add_flag("--parallel", parallel, "probe metric shells concurrently");

  std::string list_filter;
  CLI::App* list = app.add_subcommand(
      "list", "list the function catalog, or a config's experiments with --config");
  list->add_option("filter", list_filter, "substring filter on catalog entry names");
  list->add_option("--config", config_path, "list this config's experiments instead");

  CLI::App* validate = app.add_subcommand("validate", "check a config without running it");
  validate->add_option("--config", config_path, "config file (JSON)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfigError;
  }
  seed.present = run->count("--seed") > 0;

  try {
    if (run->parsed()) return cmd_run(config_path, seed, out_dir, format, parallel);
    if (list->parsed()) return cmd_list(config_path, list_filter);
    if (validate->parsed()) return cmd_validate(config_path);
  } catch (const proxkit::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitProbeFailure;
  }
  return kExitConfigError;
}
