#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "codenames_rl/codenames_rl.hpp"

#ifndef CODENAMES_RL_DATA_DIR
#define CODENAMES_RL_DATA_DIR "data"
#endif

namespace cr = codenames_rl;

namespace {

struct CommonOptions {
  std::string embeddings;
  bool synthetic = false;
  std::string wordlist = std::string(CODENAMES_RL_DATA_DIR) + "/wordlist.txt";
  std::string config;
  std::uint64_t seed = 0;
  std::optional<std::string> encoding;
  std::optional<std::string> guesser;
  std::optional<double> tau;
  std::optional<double> lambda;
  std::size_t clue_limit = cr::Resources::kDefaultClueLimit;
  std::string index;
  std::size_t partitions = 0;
  std::optional<std::size_t> probes;
  bool exact = false;
};

void add_common(CLI::App* app, CommonOptions& o) {
  app->add_option("--embeddings", o.embeddings, "Plain-text embedding file (word v1 ... vD per line)");
  app->add_flag("--synthetic", o.synthetic, "Use generated topic embeddings instead of --embeddings");
  app->add_option("--wordlist", o.wordlist, "Board deck, one word per line")->capture_default_str();
  app->add_option("--config", o.config, "Environment config JSON");
  app->add_option("--seed", o.seed, "Master seed")->capture_default_str();
  app->add_option("--encoding", o.encoding, "Observation encoding")->check(CLI::IsMember({"pwcsm", "ohwe"}));
  app->add_option("--guesser", o.guesser, "Guesser mode")->check(CLI::IsMember({"greedy", "stochastic"}));
  app->add_option("--tau", o.tau, "Stochastic guesser temperature");
  app->add_option("--lambda", o.lambda, "Guesser similarity floor");
  app->add_option("--clue-limit", o.clue_limit, "Clue vocabulary: first N alphabetic words")->capture_default_str();
  app->add_option("--index", o.index, "Load the clue index from this cache file");
  app->add_option("--partitions", o.partitions, "Index partitions (0 = ceil(sqrt(N)))");
  app->add_option("--probes", o.probes, "Partitions probed per query (0 = P/10)");
  app->add_flag("--exact", o.exact, "Probe every partition (exact search)");
}

cr::EnvConfig make_config(const CommonOptions& o) {
  cr::EnvConfig c;
  if (!o.config.empty()) {
    std::ifstream in(o.config);
    if (!in) throw cr::Error(cr::errc::kInvalidConfig, "cannot open config: " + o.config);
    c = cr::apply_json(c, cr::json::parse(in));
  }
  if (o.encoding) c.encoding = cr::encoding_from_string(*o.encoding);
  if (o.guesser) c.guesser.mode = cr::guesser_mode_from_string(*o.guesser);
  if (o.tau) c.guesser.tau = *o.tau;
  if (o.lambda) c.guesser.lambda = *o.lambda;
  if (o.probes) c.search_probes = *o.probes;
  c.validate();
  return c;
}

std::shared_ptr<const cr::EmbeddingStore> load_store(const CommonOptions& o, const std::vector<std::string>& deck) {
  if (o.synthetic) {
    cr::SyntheticSpec spec;
    spec.seed = o.seed + 1;
    return std::make_shared<const cr::EmbeddingStore>(cr::make_synthetic_embeddings(deck, spec).store());
  }
  if (o.embeddings.empty()) throw cr::Error(cr::errc::kInvalidConfig, "pass --embeddings PATH or --synthetic");
  const auto t0 = std::chrono::steady_clock::now();
  auto store = std::make_shared<const cr::EmbeddingStore>(cr::EmbeddingStore::load(o.embeddings));
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::cerr << "loaded " << store->size() << " x " << store->dim() << " embeddings in " << secs << " s\n";
  return store;
}

std::shared_ptr<const cr::Resources> load_resources(const CommonOptions& o, cr::EnvConfig& config) {
  auto deck = cr::load_wordlist(o.wordlist);
  auto store = load_store(o, deck);
  std::shared_ptr<const cr::PartitionedIndex> index;
  if (!o.index.empty()) {
    index = std::make_shared<const cr::PartitionedIndex>(cr::PartitionedIndex::load(o.index, *store));
  }
  auto res = cr::Resources::create(store, std::move(deck), o.clue_limit, o.partitions, o.seed, index);
  if (o.exact) config.search_probes = res->index->partitions();
  return res;
}

void print_report(const cr::EvalReport& r) {
  std::cout << r.policy << ": episodes=" << r.episodes << " mean=" << r.mean << " std=" << r.std
            << (r.std_defined ? "" : " (single episode)") << "\n";
}

int run_simulate(const CommonOptions& o, const std::string& policy, std::size_t episodes, const std::string& out,
                 const std::string& csv, const std::string& trajectory) {
  auto config = make_config(o);
  auto res = load_resources(o, config);
  const auto kind = cr::policy_from_string(policy);
  const auto report = cr::evaluate(kind, res, config, episodes, o.seed);
  print_report(report);
  if (!out.empty()) cr::write_report_json(report, out);
  if (!csv.empty()) cr::write_report_csv(report, csv);
  if (!trajectory.empty()) {
    std::ofstream log(trajectory);
    cr::CodenamesEnv env(res, config);
    for (std::size_t i = 0; i < episodes; ++i) {
      env.reset(cr::derive_seed(o.seed, i));
      log << cr::trajectory_reset_event(env).dump() << '\n';
      cr::RandomPolicy random(cr::splitmix64(env.episode_seed()));
      while (!env.episode_over()) {
        const auto r = kind == cr::PolicyKind::Greedy
                           ? env.step_hint(cr::greedy_policy(env.state(), *res->index, config.search_probes))
                           : env.step(random(env.action_size()));
        log << cr::trajectory_step_event(r).dump() << '\n';
      }
    }
  }
  return 0;
}

int run_eval(const CommonOptions& o, std::size_t episodes, const std::string& out) {
  auto config = make_config(o);
  auto res = load_resources(o, config);
  const auto greedy = cr::evaluate(cr::PolicyKind::Greedy, res, config, episodes, o.seed);
  const auto random = cr::evaluate(cr::PolicyKind::Random, res, config, episodes, o.seed);
  print_report(greedy);
  print_report(random);
  cr::json summary = {{"greedy", cr::to_json_value(greedy)}, {"random", cr::to_json_value(random)},
                      {"difference", greedy.mean - random.mean}};
  if (episodes >= 2) {
    const auto w = cr::welch_t_test(greedy.returns, random.returns);
    std::cout << "greedy - random = " << greedy.mean - random.mean << "  Welch t=" << w.t << " df=" << w.df
              << " p=" << w.p_two_sided << "\n";
    summary["welch"] = {{"t", w.t}, {"df", w.df}, {"p_two_sided", w.p_two_sided}};
  }
  if (!out.empty()) {
    std::ofstream f(out);
    f << summary.dump(2) << '\n';
  }
  return greedy.mean > random.mean ? 0 : 3;
}

int run_serve(const CommonOptions& o, bool stdio, const std::string& host, std::uint16_t port, bool no_embeddings) {
  auto ctx = std::make_shared<cr::ServerContext>();
  ctx->codenames = make_config(o);
  ctx->codenames.seed = o.seed;
  if (!no_embeddings) ctx->resources = load_resources(o, ctx->codenames);
  if (stdio) {
    std::ios::sync_with_stdio(false);
    cr::serve_stream(std::cin, std::cout, ctx);
  } else {
    cr::serve_tcp(host, port, ctx, [&](std::uint16_t p) { std::cerr << "listening on " << host << ":" << p << "\n"; });
  }
  return 0;
}

void print_board(const cr::json& v) {
  const auto& board = v["board"];
  for (std::size_t i = 0; i < board.size(); ++i) {
    const auto& c = board[i];
    std::string cell = c["word"].get<std::string>();
    if (c.contains("label")) cell += c["revealed"].get<bool>() ? "[" + c["label"].get<std::string>() + "]"
                                                                : "(" + c["label"].get<std::string>() + ")";
    std::cout << std::left << std::setw(24) << cell << ((i % 5 == 4) ? "\n" : "");
  }
}

void print_events(const cr::json& v) {
  for (const auto& e : v["events"]) {
    const auto type = e["type"].get<std::string>();
    if (type == "hint") {
      std::cout << "  " << e["team"].get<std::string>() << " spymaster: " << e["clue"].get<std::string>() << " "
                << e["count"] << "\n";
    } else if (type == "guess") {
      std::cout << "  " << e["team"].get<std::string>() << " guesses " << e["word"].get<std::string>() << " -> "
                << e["label"].get<std::string>() << "\n";
    } else if (type == "game_over") {
      std::cout << "  game over, winner: " << e.value("winner", std::string("none")) << "\n";
    }
  }
}

int run_play(const CommonOptions& o, const std::string& role) {
  auto config = make_config(o);
  auto res = load_resources(o, config);
  cr::PlaySession session(res, config, cr::play_role_from_string(role), o.seed);
  cr::json v = session.view();
  std::cout << "You are the red " << (role == "human_guesser" ? "guesser" : "spymaster")
            << ". Commands: " << (role == "human_guesser" ? "guess WORD | end" : "hint CLUE N") << " | quit\n";
  std::string line;
  while (true) {
    print_events(v);
    print_board(v);
    if (v["game_over"].get<bool>()) break;
    if (v.contains("hint")) {
      std::cout << "hint: " << v["hint"]["clue"].get<std::string>() << " " << v["hint"]["count"]
                << ", guesses left: " << v["guesses_left"] << "\n";
    }
    std::cout << "> " << std::flush;
    if (!std::getline(std::cin, line)) break;
    std::istringstream words(line);
    std::string cmd;
    words >> cmd;
    try {
      if (cmd == "quit") break;
      if (cmd == "guess") {
        std::string w;
        words >> w;
        v = session.guess(w);
      } else if (cmd == "end") {
        v = session.end_turn_now();
      } else if (cmd == "hint") {
        std::string clue;
        int n = 0;
        words >> clue >> n;
        v = session.give_hint(clue, n);
      } else {
        std::cout << "unknown command\n";
        v["events"] = cr::json::array();
      }
    } catch (const cr::Error& e) {
      std::cout << e.code() << ": " << e.what() << "\n";
      v["events"] = cr::json::array();
    }
  }
  return 0;
}

int run_build_index(const CommonOptions& o, const std::string& out) {
  auto deck = cr::load_wordlist(o.wordlist);
  auto store = load_store(o, deck);
  const auto rows = cr::Resources::clue_rows(*store, o.clue_limit);
  const std::size_t p = o.partitions ? o.partitions : cr::PartitionedIndex::default_partitions(rows.size());
  const auto t0 = std::chrono::steady_clock::now();
  const auto index = cr::PartitionedIndex::build(*store, p, o.seed, rows);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  index.save(out);
  std::cout << "indexed " << index.size() << " rows into " << index.partitions() << " partitions in " << secs
            << " s -> " << out << "\n";
  return 0;
}

/// Quick invariant sweep on generated data.
int run_check(std::uint64_t seed) {
  int failures = 0;
  auto report = [&](const std::string& name, bool ok) {
    std::cout << (ok ? "PASS " : "FAIL ") << name << "\n";
    failures += ok ? 0 : 1;
  };
  std::vector<std::string> deck;
  for (int i = 0; i < 60; ++i) deck.push_back("deck" + std::string(1, static_cast<char>('a' + i % 26)) +
                                              std::string(1, static_cast<char>('a' + i / 26)));
  cr::SyntheticSpec spec;
  spec.seed = seed + 1;
  spec.filler_words = 2000;
  auto store = std::make_shared<const cr::EmbeddingStore>(cr::make_synthetic_embeddings(deck, spec).store());
  bool norms = true;
  for (cr::RowId r = 0; r < store->size(); ++r) {
    double n = 0;
    for (float x : store->vector(r)) n += double(x) * x;
    norms = norms && std::abs(std::sqrt(n) - 1.0) <= 1e-6;
  }
  report("stored vectors are unit length", norms);

  const auto index = cr::PartitionedIndex::build(*store, 20, seed);
  std::mt19937_64 rng(seed);
  bool exact = true;
  for (int q = 0; q < 50; ++q) {
    const auto v = cr::random_unit(store->dim(), rng);
    exact = exact && index.search(std::span<const double>(v), {10, index.partitions()}) ==
                         cr::brute_force_search(*store, std::span<const double>(v), 10);
  }
  report("exhaustive probing equals brute force", exact);

  auto res = cr::Resources::create(store, deck, 100000, 0, seed);
  bool hist = true;
  for (std::uint64_t s = 0; s < 50; ++s) {
    const auto g = cr::new_game(deck, *store, s);
    int counts[4] = {};
    for (auto l : g.labels) ++counts[static_cast<int>(l)];
    hist = hist && counts[0] == 9 && counts[1] == 8 && counts[2] == 7 && counts[3] == 1;
  }
  report("label histogram 9/8/7/1", hist);

  cr::EnvConfig config;
  cr::CodenamesEnv env(res, config);
  bool bounds = true;
  cr::RandomPolicy policy(seed);
  for (int ep = 0; ep < 5; ++ep) {
    env.reset();
    double ret = 0;
    while (!env.episode_over()) ret += env.step(policy(env.action_size())).reward;
    bounds = bounds && ret <= 0.0 && ret >= -25.0 - static_cast<double>(config.max_turns);
  }
  report("episode returns within [-25 - max_turns, 0]", bounds);
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Codenames spymaster RL environments"};
  app.require_subcommand(1);

  CommonOptions sim_o, eval_o, serve_o, play_o, index_o;
  std::uint64_t check_seed = 0;

  auto* sim = app.add_subcommand("simulate", "Run seeded episodes of one policy and write a report");
  add_common(sim, sim_o);
  std::string sim_policy = "greedy", sim_out, sim_csv, sim_traj;
  std::size_t sim_episodes = 200;
  sim->add_option("--policy", sim_policy)->check(CLI::IsMember({"greedy", "random"}))->capture_default_str();
  sim->add_option("--episodes", sim_episodes)->capture_default_str();
  sim->add_option("--out", sim_out, "Report JSON");
  sim->add_option("--csv", sim_csv, "Per-episode CSV");
  sim->add_option("--trajectory", sim_traj, "JSON-lines trajectory log");

  auto* ev = app.add_subcommand("eval", "Compare the greedy and random policies");
  add_common(ev, eval_o);
  std::size_t ev_episodes = 200;
  std::string ev_out;
  ev->add_option("--episodes", ev_episodes)->capture_default_str();
  ev->add_option("--out", ev_out, "Comparison JSON");

  auto* serve = app.add_subcommand("serve", "JSON-lines protocol server");
  add_common(serve, serve_o);
  bool serve_stdio = false, serve_no_emb = false;
  std::string serve_host = "127.0.0.1";
  std::uint16_t serve_port = cr::kDefaultPort;
  serve->add_flag("--stdio", serve_stdio, "Serve one session over stdin/stdout");
  serve->add_option("--host", serve_host)->capture_default_str();
  serve->add_option("--port", serve_port)->capture_default_str();
  serve->add_flag("--no-embeddings", serve_no_emb, "Serve only the toy environments");

  auto* play = app.add_subcommand("play", "Play in the terminal against the scripted agents");
  add_common(play, play_o);
  std::string play_role = "human_guesser";
  play->add_option("--role", play_role)->check(CLI::IsMember({"human_guesser", "human_spymaster"}))->capture_default_str();

  auto* build = app.add_subcommand("build-index", "Build and save the clue index cache");
  add_common(build, index_o);
  std::string build_out;
  build->add_option("--out", build_out, "Cache file")->required();

  auto* check = app.add_subcommand("check", "Run invariant self-checks on generated data");
  check->add_option("--seed", check_seed)->capture_default_str();

  auto* synth = app.add_subcommand("synth-embeddings", "Write topic-structured embeddings covering the wordlist");
  std::string synth_out, synth_wordlist = std::string(CODENAMES_RL_DATA_DIR) + "/wordlist.txt";
  cr::SyntheticSpec synth_spec;
  synth->add_option("--out", synth_out)->required();
  synth->add_option("--wordlist", synth_wordlist)->capture_default_str();
  synth->add_option("--dim", synth_spec.dim)->capture_default_str();
  synth->add_option("--topics", synth_spec.topics)->capture_default_str();
  synth->add_option("--fillers", synth_spec.filler_words)->capture_default_str();
  synth->add_option("--seed", synth_spec.seed)->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) return run_simulate(sim_o, sim_policy, sim_episodes, sim_out, sim_csv, sim_traj);
    if (ev->parsed()) return run_eval(eval_o, ev_episodes, ev_out);
    if (serve->parsed()) return run_serve(serve_o, serve_stdio, serve_host, serve_port, serve_no_emb);
    if (play->parsed()) return run_play(play_o, play_role);
    if (build->parsed()) return run_build_index(index_o, build_out);
    if (check->parsed()) return run_check(check_seed);
    if (synth->parsed()) {
      cr::make_synthetic_embeddings(cr::load_wordlist(synth_wordlist), synth_spec).write_text(synth_out);
      return 0;
    }
  } catch (const cr::Error& e) {
    std::cerr << "error [" << e.code() << "]: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
