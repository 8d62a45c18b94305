// relaycap: capacity, achievable-rate and simulation tool for deterministic
// relay channels with a rate-limited noiseless relay link.
//
// Exit codes: 0 success, 1 domain error (nondeterministic channel, rho = 0,
// desk-scale guard), 2 usage or parse error. All outputs are reproducible:
// (inputs, flags, seed) determine stdout byte for byte. The run manifest goes
// to stderr.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "relaycap/relaycap.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";

struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fmt12(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

// Grid syntax: either "start:step:stop" (inclusive) or a comma list.
std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> grid;
  const auto parse_num = [](const std::string& s) {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw CLI::ValidationError("grid", "bad number '" + s + "'");
    return v;
  };
  if (text.find(':') != std::string::npos) {
    const auto c1 = text.find(':');
    const auto c2 = text.find(':', c1 + 1);
    if (c2 == std::string::npos) throw CLI::ValidationError("grid", "expected start:step:stop");
    const double start = parse_num(text.substr(0, c1));
    const double step = parse_num(text.substr(c1 + 1, c2 - c1 - 1));
    const double stop = parse_num(text.substr(c2 + 1));
    if (step <= 0.0) throw CLI::ValidationError("grid", "step must be positive");
    const int count = static_cast<int>(std::floor((stop - start) / step + 1e-9)) + 1;
    if (count < 1) throw CLI::ValidationError("grid", "empty range");
    for (int i = 0; i < count; ++i) grid.push_back(start + step * i);
    return grid;
  }
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto comma = text.find(',', pos);
    const auto piece = text.substr(pos, comma == std::string::npos ? std::string::npos
                                                                   : comma - pos);
    if (!piece.empty()) grid.push_back(parse_num(piece));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (grid.empty()) throw CLI::ValidationError("grid", "empty grid");
  return grid;
}

unsigned thread_budget() {
  const char* env = std::getenv("RELAYCAP_THREADS");
  if (!env || !*env) return 0;  // auto
  return static_cast<unsigned>(std::strtoul(env, nullptr, 10));
}

void emit_manifest(const std::string& command, const std::vector<std::string>& inputs,
                   const nlohmann::json& params, std::uint64_t seed, double seconds) {
  nlohmann::json m{{"schema", "relaycap.manifest.v1"},
                   {"command", command},
                   {"inputs", inputs},
                   {"params", params},
                   {"seed", seed},
                   {"version", kVersion},
                   {"durationSeconds", relaycap::detail::quantize12(seconds)}};
  std::cerr << m.dump() << '\n';
}

// --- validate ---------------------------------------------------------

int cmd_validate(const std::string& path) {
  const auto ch = relaycap::load_channel(path);
  relaycap::RelayFunction f;
  try {
    f = relaycap::validate(ch);
  } catch (const relaycap::NotDeterministicError& e) {
    std::cout << "not deterministic: " << e.what() << "\n";
    return 1;
  }
  // recognize the common shapes, then print the full table
  bool is_xor = ch.size_x() == 2 && ch.size_y() == 2;
  bool is_const = true;
  std::optional<int> first;
  for (std::size_t x = 0; x < ch.size_x(); ++x)
    for (std::size_t y = 0; y < ch.size_y(); ++y) {
      const auto v = f(x, y);
      if (!v) continue;
      if (is_xor && *v != static_cast<int>(x ^ y)) is_xor = false;
      if (!first) first = *v;
      if (*v != *first) is_const = false;
    }
  std::cout << "deterministic relay";
  if (is_xor)
    std::cout << ": f(x,y) = x XOR y";
  else if (is_const && first)
    std::cout << ": f(x,y) = " << *first << " (constant)";
  std::cout << "\n";
  for (std::size_t x = 0; x < ch.size_x(); ++x)
    for (std::size_t y = 0; y < ch.size_y(); ++y) {
      const auto v = f(x, y);
      std::cout << "f(x=" << x << ", y=" << y << ") = ";
      if (v)
        std::cout << *v << "\n";
      else
        std::cout << "undefined (zero-probability pair)\n";
    }
  return 0;
}

// --- capacity ---------------------------------------------------------

int cmd_capacity(const std::string& path, const std::string& grid_text,
                 const relaycap::OptimizerConfig& cfg) {
  const auto ch = relaycap::load_channel(path);
  const auto grid = parse_grid(grid_text);
  const auto t0 = std::chrono::steady_clock::now();
  auto curve = relaycap::capacity_curve(ch, grid, cfg, thread_budget());
  // monotonicity audit: the exact curve never decreases in r0; tiny solver
  // dips are raised to the running max, larger ones abort
  double running = 0.0;
  for (auto& pt : curve.points) {
    if (pt.rate < running - 1e-6)
      throw DomainError("capacity audit failed: rate drop at r0 = " + fmt12(pt.r0));
    running = std::max(running, pt.rate);
    pt.rate = running;
  }
  std::cout << "# schema=relaycap.capacity-curve.v1\n";
  std::cout << "r0,capacity,branch,converged";
  for (std::size_t x = 0; x < ch.size_x(); ++x) std::cout << ",px" << x;
  std::cout << "\n";
  for (const auto& pt : curve.points) {
    std::cout << fmt12(pt.r0) << ',' << fmt12(pt.rate) << ',' << to_string(pt.active_branch)
              << ',' << (pt.converged ? 1 : 0);
    for (std::size_t x = 0; x < pt.argmax_input.size(); ++x)
      std::cout << ',' << fmt12(pt.argmax_input[x]);
    std::cout << "\n";
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  emit_manifest("capacity", {path},
                {{"r0", grid_text},
                 {"tol", cfg.tolerance},
                 {"maxIterations", cfg.max_iterations},
                 {"restarts", cfg.restarts}},
                cfg.seed, secs);
  return 0;
}

// --- gaussian ---------------------------------------------------------

int cmd_gaussian(const std::string& spec_path, double P, double N, double rho,
                 const std::string& r0_text, const std::string& sigma2_text) {
  // flags or a {"P":..,"N":..,"rho":..} spec file; rho outside {-1,+1} rejected
  const relaycap::GaussianRelaySpec spec =
      spec_path.empty() ? relaycap::GaussianRelaySpec(P, N, rho)
                        : relaycap::gaussian_from_json(relaycap::load_json_file(spec_path));
  rho = spec.rho;
  if (!r0_text.empty()) {
    std::cout << "# schema=relaycap.gaussian-capacity.v1\n";
    std::cout << "r0,capacity\n";
    for (double r0 : parse_grid(r0_text))
      std::cout << fmt12(r0) << ',' << fmt12(relaycap::gaussian_capacity(spec, r0)) << "\n";
  } else {
    if (rho != -1.0)
      throw DomainError("the parametric sweep requires rho = -1");
    std::cout << "# schema=relaycap.gaussian-parametric.v1\n";
    std::cout << "sigma2,r0,rstar\n";
    for (double s2 : parse_grid(sigma2_text))
      std::cout << fmt12(s2) << ',' << fmt12(relaycap::gaussian_cf_r0(spec, s2)) << ','
                << fmt12(relaycap::gaussian_cf_rstar(spec, s2)) << "\n";
  }
  emit_manifest("gaussian", spec_path.empty() ? std::vector<std::string>{} : std::vector<std::string>{spec_path},
                {{"P", spec.power}, {"N", spec.noise}, {"rho", rho}, {"r0", r0_text},
                 {"sigma2", sigma2_text}},
                0, 0.0);
  return 0;
}

// --- simulate ---------------------------------------------------------

int cmd_simulate(const std::string& path, std::size_t n, double rate, double r0, double eps,
                 std::size_t trials, std::uint64_t seed, bool fixed_codebook,
                 const std::string& px_text) {
  const auto ch = relaycap::load_channel(path);
  relaycap::Pmf px = relaycap::Pmf::uniform(ch.size_x());
  if (!px_text.empty()) px = relaycap::Pmf(parse_grid(px_text));
  const auto t0 = std::chrono::steady_clock::now();
  const auto rep = relaycap::simulate_haf(ch, px, n, rate, r0, eps, trials, seed, fixed_codebook,
                                          thread_budget());
  std::cout << relaycap::sim_report_to_json(rep).dump(2) << "\n";
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  emit_manifest("simulate", {path},
                {{"n", n},
                 {"rate", rate},
                 {"r0", r0},
                 {"eps", eps},
                 {"trials", trials},
                 {"fixedCodebook", fixed_codebook},
                 {"px", px_text}},
                seed, secs);
  return 0;
}

// --- cf-rate / ah -----------------------------------------------------

int cmd_description(const std::string& command, const std::string& path, double r0,
                    const relaycap::OptimizerConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  relaycap::RatePoint pt = [&] {
    if (command == "cf-rate")
      return relaycap::cf_optimal(relaycap::load_channel(path), r0, cfg);
    const auto sc = relaycap::state_channel_from_json(relaycap::load_json_file(path));
    return relaycap::ah_optimal(sc, r0, cfg);
  }();
  auto j = relaycap::rate_point_to_json(pt);
  if (pt.optimality_gap) {
    // gap is measured against the cut-set capacity at the same r0
    j["cutsetCapacity"] = relaycap::detail::num12(pt.rate + *pt.optimality_gap);
    j["gap"] = relaycap::detail::num12(*pt.optimality_gap);
  } else {
    j["cutsetCapacity"] = nullptr;
    j["gap"] = nullptr;
    j["note"] = "state is not recoverable from (input, output); no cut-set reference";
  }
  std::cout << j.dump(2) << "\n";
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  emit_manifest(command, {path},
                {{"r0", r0}, {"restarts", cfg.restarts}, {"maxIterations", cfg.max_iterations}},
                cfg.seed, secs);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"capacity and coding tools for deterministic relay channels "
               "with a rate-limited noiseless relay link"};
  app.require_subcommand(1);

  std::string channel_path, grid_text, sigma2_text, px_text;
  double P = 1.0, N = 1.0, rho = -1.0, r0 = 0.0, rate = 0.0, eps = 0.25;
  std::size_t n = 12, trials = 1000;
  bool fixed_codebook = false;
  relaycap::OptimizerConfig cfg;

  auto* validate_cmd = app.add_subcommand("validate", "check the deterministic-relay property");
  validate_cmd->add_option("channel", channel_path, "channel spec JSON")->required();

  auto* capacity_cmd = app.add_subcommand("capacity", "cut-set capacity over an r0 grid (CSV)");
  capacity_cmd->add_option("channel", channel_path, "channel spec JSON")->required();
  capacity_cmd->add_option("--r0", grid_text, "r0 grid: start:step:stop or comma list")
      ->required();
  capacity_cmd->add_option("--tol", cfg.tolerance, "optimizer tolerance in bits");
  capacity_cmd->add_option("--seed", cfg.seed, "optimizer seed");
  capacity_cmd->add_option("--restarts", cfg.restarts, "random restarts");
  capacity_cmd->add_option("--max-iter", cfg.max_iterations, "iterations per phase");

  std::string gaussian_spec_path;
  auto* gaussian_cmd = app.add_subcommand("gaussian", "Gaussian relay curves (CSV)");
  auto* g_spec = gaussian_cmd->add_option("--spec", gaussian_spec_path,
                                          "spec JSON with keys P, N, rho");
  auto* g_p = gaussian_cmd->add_option("--P", P, "signal power")->excludes(g_spec);
  auto* g_n = gaussian_cmd->add_option("--N", N, "noise variance")->excludes(g_spec);
  auto* g_rho = gaussian_cmd->add_option("--rho", rho, "noise correlation, -1 or +1")
                    ->excludes(g_spec);
  g_p->needs(g_n)->needs(g_rho);
  auto* g_r0 = gaussian_cmd->add_option("--r0", grid_text, "relay rate grid");
  auto* g_s2 = gaussian_cmd->add_option("--sigma2", sigma2_text, "test-channel variance grid");
  g_r0->excludes(g_s2);
  g_s2->excludes(g_r0);

  auto* simulate_cmd = app.add_subcommand("simulate", "hash-and-forward Monte Carlo (JSON)");
  simulate_cmd->add_option("channel", channel_path, "channel spec JSON")->required();
  simulate_cmd->add_option("--n", n, "block length (<= 20)")->required();
  simulate_cmd->add_option("--rate", rate, "message rate in bits/use")->required();
  simulate_cmd->add_option("--r0", r0, "relay link rate in bits/use")->required();
  simulate_cmd->add_option("--eps", eps, "typicality tolerance");
  simulate_cmd->add_option("--trials", trials, "Monte Carlo trials (<= 1e6)")->required();
  simulate_cmd->add_option("--seed", cfg.seed, "master seed");
  simulate_cmd->add_flag("--fixed-codebook", fixed_codebook,
                         "reuse one codebook instead of a fresh one per trial");
  simulate_cmd->add_option("--px", px_text, "input distribution (comma list; default uniform)");

  auto* cf_cmd = app.add_subcommand("cf-rate", "best compress-and-forward point (JSON)");
  cf_cmd->add_option("channel", channel_path, "channel spec JSON")->required();
  cf_cmd->add_option("--r0", r0, "relay link rate")->required();
  cf_cmd->add_option("--restarts", cfg.restarts, "random restarts");
  cf_cmd->add_option("--seed", cfg.seed, "optimizer seed");
  cf_cmd->add_option("--max-iter", cfg.max_iterations, "ascent iterations");

  auto* ah_cmd = app.add_subcommand("ah", "rate-limited state information point (JSON)");
  ah_cmd->add_option("channel", channel_path, "state-channel spec JSON")->required();
  ah_cmd->add_option("--r0", r0, "state link rate")->required();
  ah_cmd->add_option("--restarts", cfg.restarts, "random restarts");
  ah_cmd->add_option("--seed", cfg.seed, "optimizer seed");
  ah_cmd->add_option("--max-iter", cfg.max_iterations, "ascent iterations");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (validate_cmd->parsed()) return cmd_validate(channel_path);
    if (capacity_cmd->parsed()) return cmd_capacity(channel_path, grid_text, cfg);
    if (gaussian_cmd->parsed()) {
      if (grid_text.empty() && sigma2_text.empty())
        throw CLI::RequiredError("one of --r0 / --sigma2");
      if (gaussian_spec_path.empty() && !(g_p->count() && g_n->count() && g_rho->count()))
        throw CLI::RequiredError("--spec or all of --P/--N/--rho");
      return cmd_gaussian(gaussian_spec_path, P, N, rho, grid_text, sigma2_text);
    }
    if (simulate_cmd->parsed())
      return cmd_simulate(channel_path, n, rate, r0, eps, trials, cfg.seed, fixed_codebook,
                          px_text);
    if (cf_cmd->parsed()) return cmd_description("cf-rate", channel_path, r0, cfg);
    if (ah_cmd->parsed()) return cmd_description("ah", channel_path, r0, cfg);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const nlohmann::json::parse_error& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 2;
  } catch (const relaycap::FileError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
