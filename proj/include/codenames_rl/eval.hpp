#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <memory>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "codenames_rl/codenames_env.hpp"
#include "codenames_rl/error.hpp"
#include "codenames_rl/policies.hpp"
#include "codenames_rl/seed.hpp"

namespace codenames_rl {

enum class PolicyKind : std::uint8_t { Random, Greedy };

inline std::string_view to_string(PolicyKind p) { return p == PolicyKind::Random ? "random" : "greedy"; }
inline PolicyKind policy_from_string(std::string_view s) {
  if (s == "random") return PolicyKind::Random;
  if (s == "greedy") return PolicyKind::Greedy;
  throw Error(errc::kInvalidConfig, "unknown policy: " + std::string(s));
}

struct EvalReport {
  std::string policy;
  std::size_t episodes = 0;
  std::vector<double> returns;
  std::vector<std::size_t> lengths;
  std::vector<std::uint64_t> episode_seeds;
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation; 0 when episodes == 1
  bool std_defined = true;
  std::uint64_t seed = 0;
  std::string config_digest;
};

inline double sample_mean(std::span<const double> xs) {
  return xs.empty() ? 0.0 : std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

inline double sample_variance(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  const double m = sample_mean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return ss / static_cast<double>(xs.size() - 1);
}

struct WelchResult {
  double t = 0.0;
  double df = 0.0;
  double p_two_sided = 1.0;
};

/// Welch's unequal-variance t-test for mean(a) != mean(b).
inline WelchResult welch_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) throw Error(errc::kBadInput, "Welch test needs at least two samples per arm");
  const double va = sample_variance(a) / static_cast<double>(a.size());
  const double vb = sample_variance(b) / static_cast<double>(b.size());
  WelchResult r;
  const double se = std::sqrt(va + vb);
  const double diff = sample_mean(a) - sample_mean(b);
  if (se == 0.0) {
    r.t = diff == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), diff);
    r.df = static_cast<double>(a.size() + b.size() - 2);
    r.p_two_sided = diff == 0.0 ? 1.0 : 0.0;
    return r;
  }
  r.t = diff / se;
  r.df = (va + vb) * (va + vb) /
         (va * va / static_cast<double>(a.size() - 1) + vb * vb / static_cast<double>(b.size() - 1));
  const boost::math::students_t dist(r.df);
  r.p_two_sided = 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(r.t)));
  return r;
}

/// FNV-1a over the canonical JSON dump of the config, as 16 hex digits.
inline std::string config_digest(const EnvConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : to_json_value(config).dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

struct EpisodeResult {
  double ret = 0.0;
  std::size_t length = 0;
};

/// Runs one full episode. The random policy draws from
/// splitmix64(episode_seed).
inline EpisodeResult run_episode(CodenamesEnv& env, PolicyKind policy, std::uint64_t episode_seed) {
  env.reset(episode_seed);
  RandomPolicy random(splitmix64(episode_seed));
  EpisodeResult out;
  while (!env.episode_over()) {
    const auto r = policy == PolicyKind::Greedy
                       ? env.step_hint(greedy_policy(env.state(), *env.resources().index, env.config().search_probes))
                       : env.step(random(env.action_size()));
    out.ret += r.reward;
    ++out.length;
  }
  return out;
}

/// Episode i runs with seed derive_seed(seed, i), so any split of the
/// episodes across workers reproduces the serial report.
inline EvalReport evaluate(PolicyKind policy, std::shared_ptr<const Resources> resources, const EnvConfig& config,
                           std::size_t episodes, std::uint64_t seed) {
  if (episodes < 1) throw Error(errc::kBadInput, "episodes must be >= 1");
  CodenamesEnv env(std::move(resources), config);
  EvalReport rep;
  rep.policy = std::string(to_string(policy));
  rep.episodes = episodes;
  rep.seed = seed;
  rep.config_digest = config_digest(config);
  for (std::size_t i = 0; i < episodes; ++i) {
    const auto s = derive_seed(seed, i);
    const auto ep = run_episode(env, policy, s);
    rep.episode_seeds.push_back(s);
    rep.returns.push_back(ep.ret);
    rep.lengths.push_back(ep.length);
  }
  rep.mean = sample_mean(rep.returns);
  rep.std_defined = episodes > 1;
  rep.std = std::sqrt(sample_variance(rep.returns));
  return rep;
}

inline json to_json_value(const EvalReport& r) {
  json j = {{"policy", r.policy},
            {"episodes", r.episodes},
            {"returns", r.returns},
            {"lengths", r.lengths},
            {"episode_seeds", r.episode_seeds},
            {"mean", r.mean},
            {"std", r.std},
            {"seed", r.seed},
            {"config_digest", r.config_digest}};
  if (!r.std_defined) j["std_note"] = "single episode: std reported as 0";
  return j;
}

inline void write_report_json(const EvalReport& r, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(errc::kMalformedFile, "cannot write report: " + path.string());
  out << to_json_value(r).dump(2) << '\n';
}

inline void write_report_csv(const EvalReport& r, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(errc::kMalformedFile, "cannot write report: " + path.string());
  out << "episode,seed,return,length\n";
  for (std::size_t i = 0; i < r.returns.size(); ++i) {
    out << i << ',' << r.episode_seeds[i] << ',' << r.returns[i] << ',' << r.lengths[i] << '\n';
  }
}

}  // namespace codenames_rl
