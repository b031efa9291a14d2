// Acceptance driver: one PASS/FAIL line per criterion.
//
//   acceptance                 run every criterion
//   acceptance --only NAME     run one (baseline, ann, scoring, guessers,
//                              encodings, rewards, toys, protocol)
//
// The baseline and ann criteria need GloVe-6B-300d; point CODENAMES_GLOVE at
// glove.6B.300d.txt. Without it they print synthetic-proxy measurements and
// report FAIL (blocked).

#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "codenames_rl/codenames_rl.hpp"

namespace cr = codenames_rl;
using cr::json;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double x, int precision = 4) {
  std::ostringstream os;
  os.precision(precision);
  os << x;
  return os.str();
}

std::string deck_path() { return std::string(CODENAMES_RL_DATA_DIR) + "/wordlist.txt"; }

std::optional<std::string> glove_path() {
  const char* p = std::getenv("CODENAMES_GLOVE");
  if (!p || !*p) return std::nullopt;
  return std::string(p);
}

std::shared_ptr<const cr::Resources> synthetic_resources(std::uint64_t seed) {
  auto deck = cr::load_wordlist(deck_path());
  cr::SyntheticSpec spec;
  spec.seed = seed + 1;
  auto store = std::make_shared<const cr::EmbeddingStore>(cr::make_synthetic_embeddings(deck, spec).store());
  return cr::Resources::create(store, deck, cr::Resources::kDefaultClueLimit, 0, seed);
}

// ---------------------------------------------------------------- baseline

Outcome baseline() {
  const auto t0 = Clock::now();
  const auto glove = glove_path();
  std::shared_ptr<const cr::Resources> res;
  if (glove) {
    auto store = std::make_shared<const cr::EmbeddingStore>(cr::EmbeddingStore::load(*glove));
    res = cr::Resources::create(store, cr::load_wordlist(deck_path()));
  } else {
    res = synthetic_resources(0);
  }
  cr::EnvConfig cfg;  // greedy guessers, lambda = 0
  const std::size_t n = 200;
  const auto greedy = cr::evaluate(cr::PolicyKind::Greedy, res, cfg, n, 2024);
  const auto random = cr::evaluate(cr::PolicyKind::Random, res, cfg, n, 2024);
  const auto welch = cr::welch_t_test(greedy.returns, random.returns);
  const double secs = seconds_since(t0);

  std::ostringstream d;
  d << (glove ? "glove" : "synthetic proxy") << " N=" << n << " greedy " << fmt(greedy.mean) << " +- "
    << fmt(greedy.std) << ", random " << fmt(random.mean) << " +- " << fmt(random.std) << ", diff "
    << fmt(greedy.mean - random.mean) << " (need >= 10), Welch p=" << fmt(welch.p_two_sided, 3)
    << " (need < 0.01), greedy in [-20,-5], random in [-40,-25], " << fmt(secs, 3) << " s (need <= 600)";
  if (!glove) return {false, "blocked: CODENAMES_GLOVE not set; " + d.str()};
  const bool ok = greedy.mean >= random.mean + 10.0 && welch.p_two_sided < 0.01 && greedy.mean >= -20.0 &&
                  greedy.mean <= -5.0 && random.mean >= -40.0 && random.mean <= -25.0 && secs <= 600.0;
  return {ok, d.str()};
}

// --------------------------------------------------------------------- ann

struct AnnMeasurement {
  double recall = 0.0;
  double speedup = 0.0;
  std::size_t probes = 0;
  bool exact_identical = false;
  std::string detail;
};

std::vector<std::vector<float>> clue_like_queries(const cr::EmbeddingStore& store, std::size_t n, std::uint64_t seed) {
  // Means of 1-3 random store vectors: the shape of a clue lookup.
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<cr::RowId> row(0, static_cast<cr::RowId>(store.size() - 1));
  std::vector<std::vector<float>> out;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<cr::RowId> rows(1 + i % 3);
    for (auto& r : rows) r = row(rng);
    out.push_back(cr::to_float_query(store.mean_vector(rows)));
  }
  return out;
}

double recall_of(const cr::PartitionedIndex& index, const std::vector<std::vector<float>>& queries,
                 const std::vector<std::vector<cr::Neighbor>>& truth, std::size_t probes) {
  std::size_t hit = 0, total = 0;
  for (std::size_t i = 0; i < queries.size(); ++i) {
    std::set<cr::RowId> t;
    for (const auto& n : truth[i]) t.insert(n.row);
    for (const auto& n : index.search(std::span<const float>(queries[i]), {10, probes})) hit += t.count(n.row);
    total += truth[i].size();
  }
  return static_cast<double>(hit) / static_cast<double>(total);
}

AnnMeasurement measure_ann(const cr::EmbeddingStore& store) {
  AnnMeasurement m;
  const auto t_build = Clock::now();
  const auto index = cr::PartitionedIndex::build(store, cr::PartitionedIndex::default_partitions(store.size()), 0);
  const double build_secs = seconds_since(t_build);

  // Tune probes on a separate query set: the smallest setting reaching 0.96
  // leaves headroom for the 0.95 bar on the evaluation queries.
  const auto tune = clue_like_queries(store, 200, 1);
  std::vector<std::vector<cr::Neighbor>> tune_truth;
  for (const auto& q : tune) tune_truth.push_back(cr::brute_force_search(store, std::span<const float>(q), 10));
  m.probes = index.partitions();
  for (std::size_t p = 1; p < index.partitions(); p = std::max(p + 1, p * 5 / 4)) {
    if (recall_of(index, tune, tune_truth, p) >= 0.96) {
      m.probes = p;
      break;
    }
  }

  const auto queries = clue_like_queries(store, 1000, 2);
  std::vector<std::vector<cr::Neighbor>> truth;
  const auto t_brute = Clock::now();
  for (const auto& q : queries) truth.push_back(cr::brute_force_search(store, std::span<const float>(q), 10));
  const double brute_secs = seconds_since(t_brute);

  const auto t_index = Clock::now();
  std::size_t sink = 0;
  for (const auto& q : queries) sink += index.search(std::span<const float>(q), {10, m.probes}).size();
  const double index_secs = seconds_since(t_index);
  m.recall = recall_of(index, queries, truth, m.probes);
  m.speedup = brute_secs / std::max(index_secs, 1e-9);

  m.exact_identical = sink == 10 * queries.size();
  for (std::size_t i = 0; i < queries.size(); ++i) {
    if (index.search(std::span<const float>(queries[i]), {10, index.partitions()}) != truth[i]) {
      m.exact_identical = false;
      break;
    }
  }
  std::ostringstream d;
  d << store.size() << "x" << store.dim() << ", P=" << index.partitions() << ", tuned probes=" << m.probes
    << ", recall@10=" << fmt(m.recall) << " (need >= 0.95), speedup=" << fmt(m.speedup, 3)
    << "x (need >= 5), probes=P identical to oracle: " << (m.exact_identical ? "yes" : "NO") << ", build "
    << fmt(build_secs, 3) << " s, brute " << fmt(1000.0 / brute_secs, 4) << " q/s, index "
    << fmt(1000.0 / index_secs, 4) << " q/s";
  m.detail = d.str();
  return m;
}

Outcome ann() {
  if (const auto glove = glove_path()) {
    const auto store = cr::EmbeddingStore::load(*glove);
    const auto m = measure_ann(store);
    return {store.size() >= 400000 && m.recall >= 0.95 && m.speedup >= 5.0 && m.exact_identical, "glove " + m.detail};
  }
  // Same shape as the GloVe store, clustered random vectors.
  std::optional<cr::EmbeddingStore> store;
  {
    const auto data = cr::make_clustered_vectors(400000, 300, 2000, 1.2, 7);
    store.emplace(data.store());
  }
  const auto m = measure_ann(*store);
  return {false, "blocked: CODENAMES_GLOVE not set; synthetic proxy " + m.detail};
}

// ----------------------------------------------------------------- scoring

Outcome scoring() {
  // Independent oracle: long-double arithmetic straight from the stored
  // vectors, no shared helpers.
  using LD = long double;
  std::mt19937_64 rng(31337);
  std::map<std::string, int> branches;
  double worst_err = 0.0;
  int instances = 0;
  const cr::BadWordWeights weights{-1.0, -2.0, -3.0};
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t dim = 2 + trial % 5;
    const std::size_t n_targets = 1 + rng() % 4;
    const std::size_t n_bad = 1 + rng() % 6;
    std::vector<std::string> words;
    std::vector<std::vector<double>> vecs;
    std::normal_distribution<double> g(0.0, 1.0);
    const std::size_t rows = 1 + n_targets + n_bad;
    for (std::size_t i = 0; i < rows; ++i) {
      words.push_back("r" + std::to_string(i));
      std::vector<double> v(dim);
      do {
        for (auto& x : v) x = g(rng);
      } while (std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; }));
      vecs.push_back(v);
    }
    const auto store = cr::EmbeddingStore::from_rows(words, vecs);
    auto vec = [&](cr::RowId r) {
      const auto f = store.vector(r);
      return std::vector<LD>(f.begin(), f.end());
    };
    auto cos = [](const std::vector<LD>& a, const std::vector<LD>& b) {
      LD ab = 0, aa = 0, bb = 0;
      for (std::size_t i = 0; i < a.size(); ++i) {
        ab += a[i] * b[i];
        aa += a[i] * a[i];
        bb += b[i] * b[i];
      }
      LD c = ab / std::sqrt(aa * bb);
      return std::max<LD>(-1, std::min<LD>(1, c));
    };
    const cr::RowId clue = 0;
    std::vector<cr::RowId> targets;
    for (std::size_t i = 0; i < n_targets; ++i) targets.push_back(static_cast<cr::RowId>(1 + i));
    std::vector<cr::BadWord> bad;
    for (std::size_t i = 0; i < n_bad; ++i)
      bad.push_back({static_cast<cr::RowId>(1 + n_targets + i), static_cast<cr::NormalizedLabel>(1 + rng() % 3)});
    const double lambda_min = std::uniform_real_distribution<double>(-0.5, 0.9)(rng);
    const double lambda_kim = std::uniform_real_distribution<double>(0.1, 1.5)(rng);

    std::vector<LD> mean(dim, 0), jara(dim, 0);
    LD worst = 2, far_t = -2, near_b = 9;
    for (auto t : targets) {
      const auto v = vec(t);
      for (std::size_t d = 0; d < dim; ++d) {
        mean[d] += v[d];
        jara[d] += v[d];
      }
      worst = std::min(worst, cos(vec(clue), v));
      far_t = std::max(far_t, 1 - cos(vec(clue), v));
    }
    for (const auto& b : bad) {
      const auto v = vec(b.row);
      for (std::size_t d = 0; d < dim; ++d) jara[d] += static_cast<LD>(weights(b.label)) * v[d];
      near_b = std::min(near_b, 1 - cos(vec(clue), v));
    }
    for (std::size_t d = 0; d < dim; ++d) {
      mean[d] /= static_cast<LD>(targets.size());
      jara[d] /= static_cast<LD>(targets.size() + bad.size());
    }
    const LD o_mean = cos(vec(clue), mean);
    const LD o_minimax = worst > lambda_min ? worst : 0;
    branches[worst > lambda_min ? "minimax:above" : "minimax:below"]++;
    const LD o_jara = cos(vec(clue), jara);
    const bool kim_valid = far_t < near_b && far_t < lambda_kim;
    branches[kim_valid ? "kim:valid" : (far_t >= near_b ? "kim:bad_closer" : "kim:threshold")]++;

    const double kim = cr::energy_kim(store, clue, targets, bad, lambda_kim);
    const double errs[] = {
        std::fabs(static_cast<double>(o_mean) - cr::score_mean(store, clue, targets)),
        std::fabs(static_cast<double>(o_minimax) - cr::score_minimax(store, clue, targets, lambda_min)),
        std::fabs(static_cast<double>(o_jara) - cr::score_jara(store, clue, targets, bad, weights)),
        kim_valid ? std::fabs(static_cast<double>(far_t) - kim) : (kim == cr::kInvalidEnergy ? 0.0 : 1.0),
    };
    for (double e : errs) worst_err = std::max(worst_err, e);
    ++instances;
  }
  // Hand-built branch cases on the x/y plane.
  const auto hand = cr::EmbeddingStore::from_rows(
      std::vector<std::string>{"c", "t", "b"},
      std::vector<std::vector<double>>{{1, 0}, {0.6, 0.8}, {0.2, std::sqrt(0.96)}});
  const cr::RowId t[] = {1};
  const cr::BadWord far_bad[] = {{2, cr::NormalizedLabel::Opposing}};
  const cr::BadWord close_bad[] = {{0, cr::NormalizedLabel::Assassin}};
  const bool hand_ok = std::fabs(cr::energy_kim(hand, 0, t, far_bad, 0.7) - 0.4) < 1e-6 &&
                       cr::energy_kim(hand, 0, t, close_bad, 0.7) == cr::kInvalidEnergy &&
                       cr::energy_kim(hand, 0, t, far_bad, 0.3) == cr::kInvalidEnergy &&
                       std::fabs(cr::score_minimax(hand, 0, t, 0.3) - 0.6) < 1e-6 &&
                       cr::score_minimax(hand, 0, t, 0.61) == 0.0 && [&] {
                         // Strict threshold at an exactly representable cosine (self-similarity 1).
                         const cr::RowId self[] = {0};
                         return cr::score_minimax(hand, 0, self, 1.0) == 0.0 && cr::score_minimax(hand, 0, self, 0.999) == 1.0;
                       }();

  std::ostringstream d;
  d << instances << " instances, max |err| = " << worst_err << " (need <= 1e-9); branches";
  bool all_branches = true;
  for (const char* b : {"minimax:above", "minimax:below", "kim:valid", "kim:bad_closer", "kim:threshold"}) {
    d << ' ' << b << '=' << branches[b];
    all_branches = all_branches && branches[b] > 0;
  }
  d << "; hand cases " << (hand_ok ? "ok" : "WRONG");
  return {worst_err <= 1e-9 && all_branches && hand_ok, d.str()};
}

// ---------------------------------------------------------------- guessers

Outcome guessers() {
  const auto res = synthetic_resources(3);
  const auto& store = *res->store;
  std::mt19937_64 rng(4);
  int boards = 0, agree = 0;
  std::uniform_int_distribution<cr::RowId> clue_row(0, static_cast<cr::RowId>(store.size() - 1));
  for (std::uint64_t seed = 0; boards < 100 && seed < 10000; ++seed) {
    const auto state = cr::new_game(res->wordlist, store, seed);
    const cr::Hint hint{store.word(clue_row(rng)), 9};
    if (!cr::legal_hint(state, hint.clue)) continue;
    // "Distinct" = every pair of pool similarities differs by >= 1e-4.
    auto pool = cr::guess_pool(state, store, store.row(hint.clue), 0.0);
    std::sort(pool.begin(), pool.end(), [](auto& a, auto& b) { return a.similarity < b.similarity; });
    bool distinct = pool.size() >= 2;
    for (std::size_t i = 1; i < pool.size(); ++i) distinct = distinct && pool[i].similarity - pool[i - 1].similarity >= 1e-4;
    if (!distinct) continue;
    ++boards;
    const cr::GuesserParams greedy;
    const cr::GuesserParams sharp{cr::GuesserMode::Stochastic, 0.0, 1e-6, 0};
    std::mt19937_64 g(seed);
    agree += cr::greedy_guess_order(state, hint, greedy, store) == cr::stochastic_guess_order(state, hint, sharp, store, g)
                 ? 1
                 : 0;
  }

  // Two candidates, similarities 0.5 and 0.4, tau 0.05.
  const auto two = cr::EmbeddingStore::from_rows(
      std::vector<std::string>{"clue", "hi", "lo"},
      std::vector<std::vector<double>>{{1, 0, 0}, {0.5, std::sqrt(0.75), 0}, {0.4, 0, std::sqrt(0.84)}});
  cr::GameState s;
  for (std::size_t p = 0; p < cr::kBoardSize; ++p) {
    s.rows[p] = p == 0 ? two.row("hi") : p == 1 ? two.row("lo") : two.row("clue");
    s.revealed[p] = p >= 2;
  }
  const double closed_form = 1.0 / (1.0 + std::exp(-0.1 / 0.05));
  const cr::GuesserParams params{cr::GuesserMode::Stochastic, 0.0, 0.05, 0};
  std::mt19937_64 draw(99);
  int hi_first = 0;
  const int trials = 10000;
  for (int i = 0; i < trials; ++i) hi_first += cr::stochastic_guess_order(s, {"clue", 1}, params, two, draw)[0] == 0;
  const double freq = static_cast<double>(hi_first) / trials;

  std::ostringstream d;
  d << "tau=1e-6 order equals greedy on " << agree << "/" << boards << " boards (need 100/100); P(first=hi) "
    << fmt(freq, 5) << " vs closed form " << fmt(closed_form, 5) << " (need |diff| <= 0.02)";
  return {boards == 100 && agree == 100 && std::fabs(freq - closed_form) <= 0.02 && std::fabs(closed_form - 0.8808) < 1e-4,
          d.str()};
}

// --------------------------------------------------------------- encodings

Outcome encodings() {
  const auto res = synthetic_resources(5);
  cr::EnvConfig pw_cfg;
  cr::CodenamesEnv pw(res, pw_cfg);
  const auto pw_reset = pw.reset(1);
  cr::EnvConfig oh_cfg;
  oh_cfg.encoding = cr::Encoding::Ohwe;
  oh_cfg.vocab_size = 400;
  cr::CodenamesEnv oh(res, oh_cfg);
  const auto oh_obs = oh.reset(1).observation;
  double membership = 0.0;
  for (std::size_t r = 0; r < 16; ++r)
    for (std::size_t c = 0; c < 25; ++c) membership += oh_obs(r, c);

  std::vector<double> expected_goal(25, 0.0);
  expected_goal[0] = 9.0;
  const bool goal_ok = pw_reset.goal == expected_goal;

  std::mt19937_64 rng(8);
  int identical = 0;
  const int n = 1000;
  for (int i = 0; i < n; ++i) {
    const auto state = cr::new_game(res->wordlist, *res->store, static_cast<std::uint64_t>(i));
    auto own = state.unrevealed_of(cr::Team::Red, cr::NormalizedLabel::Mine);
    std::shuffle(own.begin(), own.end(), rng);
    own.resize(1 + rng() % own.size());
    std::sort(own.begin(), own.end());
    const cr::DecodedAction d{own, rng() % pw_cfg.strategies.size(), rng() % pw_cfg.kappa};
    identical += cr::decode_action(cr::encode_action(d, pw_cfg), state, pw_cfg, cr::Team::Red) == d ? 1 : 0;
  }
  const bool shapes = pw_reset.observation.rows == 31 && pw_reset.observation.cols == 25 && oh_obs.rows == 22 &&
                      oh_obs.cols == 25 && membership == 25.0 && pw.action_size() == 70;
  std::ostringstream d;
  d << "PWCSM " << pw_reset.observation.rows << "x" << pw_reset.observation.cols << ", OHWE " << oh_obs.rows << "x"
    << oh_obs.cols << " membership " << membership << ", action " << pw.action_size() << ", round-trips " << identical
    << "/" << n << ", reset goal " << (goal_ok ? "[9,0,...] len 25" : "WRONG");
  return {shapes && goal_ok && identical == n, d.str()};
}

// ----------------------------------------------------------------- rewards

// Axis-aligned store: each deck word has a private clue word on its own
// axis, so (twin, 1) reveals exactly that word; "void" reveals nothing.
struct AxisWorld {
  std::vector<std::string> deck;
  std::shared_ptr<const cr::Resources> res;
  std::map<std::string, std::string> twin;

  AxisWorld() {
    std::vector<std::string> words;
    std::vector<std::vector<double>> vecs;
    const std::size_t n = 40;
    for (std::size_t i = 0; i < n; ++i) {
      const std::string w = std::string("deck") + static_cast<char>('a' + i / 26) + static_cast<char>('a' + i % 26);
      const std::string c = std::string("clue") + static_cast<char>('a' + i / 26) + static_cast<char>('a' + i % 26);
      std::vector<double> v(n + 1, 0.0);
      v[i] = 1.0;
      deck.push_back(w);
      twin[w] = c;
      words.push_back(c);
      vecs.push_back(v);
      words.push_back(w);
      vecs.push_back(v);
    }
    std::vector<double> v(n + 1, 0.0);
    v[n] = 1.0;
    words.push_back("void");
    vecs.push_back(v);
    auto store = std::make_shared<const cr::EmbeddingStore>(cr::EmbeddingStore::from_rows(words, vecs));
    res = cr::Resources::create(store, deck, 1000, 4, 0);
  }
};

Outcome rewards() {
  const AxisWorld world;
  // With the opponent on, its guessers may reveal the agent's words and end
  // the game early; with it off, the script fixes the turn count exactly.
  int identity_ok = 0;
  const int games = 50;
  std::mt19937_64 rng(12);
  for (bool opponent : {true, false}) {
    cr::EnvConfig cfg;
    cfg.opponent.enabled = opponent;
    for (int g = 0; g < games; ++g) {
      cr::CodenamesEnv env(world.res, cfg);
      env.reset(static_cast<std::uint64_t>(500 + g));
      const int passes = static_cast<int>(rng() % 12);
      std::vector<bool> script(static_cast<std::size_t>(passes), false);
      script.insert(script.end(), 9, true);
      std::shuffle(script.begin(), script.end() - 1, rng);  // the final step always scores the last word
      double ret = 0.0;
      int turns = 0;
      bool terminated = false;
      for (bool reveal : script) {
        cr::Hint h{"void", 1};
        if (reveal) {
          const auto own = env.state().unrevealed_of(cr::Team::Red, cr::NormalizedLabel::Mine);
          h.clue = world.twin.at(env.state().words[own.front()]);
        }
        const auto r = env.step_hint(h);
        ret += r.reward;
        ++turns;
        terminated = r.terminated;
        if (r.terminated || r.truncated) break;
      }
      const bool won = terminated && env.state().winner == cr::Team::Red && !env.state().assassin_revealed_by;
      const bool length_ok = opponent ? turns <= 9 + passes : turns == 9 + passes;
      identity_ok += (won && length_ok && ret == -(turns - 1.0)) ? 1 : 0;
    }
  }

  // Assassin step: exactly -25.
  int assassin_ok = 0;
  for (int g = 0; g < 10; ++g) {
    cr::CodenamesEnv env(world.res, cr::EnvConfig{});
    env.reset(static_cast<std::uint64_t>(900 + g));
    for (int i = 0; i < g % 4; ++i) env.step_hint({"void", 1});
    const auto pos = env.state().unrevealed_of(cr::Team::Red, cr::NormalizedLabel::Assassin).front();
    const auto r = env.step_hint({world.twin.at(env.state().words[pos]), 1});
    assassin_ok += (r.reward == -25.0 && r.terminated) ? 1 : 0;
  }
  std::ostringstream d;
  d << "return == -(turns-1) on " << identity_ok << "/" << 2 * games
    << " scripted wins (opponent on and off); assassin step == -25 on " << assassin_ok << "/10";
  return {identity_ok == 2 * games && assassin_ok == 10, d.str()};
}

// -------------------------------------------------------------------- toys

Outcome toys() {
  cr::WhackEnv whack({5, 99, 0.5, 77});
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double random_total = 0.0;
  const int episodes = 100;
  for (int e = 0; e < episodes; ++e) {
    whack.reset();
    cr::ToyStep r;
    do {
      std::vector<double> a(25);
      for (auto& x : a) x = unit(rng);
      r = whack.step(a);
      random_total += r.reward;
    } while (!r.truncated);
  }
  const double random_mean = random_total / episodes;

  auto obs = whack.reset();
  double oracle = 0.0;
  cr::ToyStep r;
  do {
    r = whack.step(obs.data);
    obs = r.observation;
    oracle += r.reward;
  } while (!r.truncated);

  cr::ClickPixelEnv click({5, false, false, 100, 3});
  double click_worst = -1e9, click_best = 1e9;
  for (int e = 0; e < 100; ++e) {
    click.reset();
    const double ret = click.step(click.target()).reward;
    click_worst = std::max(click_worst, ret);
    click_best = std::min(click_best, ret);
  }
  std::ostringstream d;
  d << "Whack random mean " << fmt(random_mean, 5) << " (need [46,53]), oracle " << oracle
    << " (need 99), ClickPixel optimal returns in [" << click_best << "," << click_worst << "] (need 0)";
  return {random_mean >= 46 && random_mean <= 53 && oracle == 99.0 && click_best == 0.0 && click_worst == 0.0, d.str()};
}

// ---------------------------------------------------------------- protocol

// `codenames_rl serve --stdio` as a child process with piped stdin/stdout.
class Child {
 public:
  explicit Child(const std::vector<std::string>& argv) {
    int to_child[2], from_child[2];
    if (::pipe(to_child) != 0 || ::pipe(from_child) != 0) throw std::runtime_error("pipe failed");
    pid_ = ::fork();
    if (pid_ < 0) throw std::runtime_error("fork failed");
    if (pid_ == 0) {
      ::dup2(to_child[0], 0);
      ::dup2(from_child[1], 1);
      ::close(to_child[1]);
      ::close(from_child[0]);
      std::vector<char*> args;
      for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
      args.push_back(nullptr);
      ::execv(args[0], args.data());
      std::_Exit(127);
    }
    ::close(to_child[0]);
    ::close(from_child[1]);
    in_ = ::fdopen(to_child[1], "w");
    out_ = ::fdopen(from_child[0], "r");
  }
  ~Child() {
    if (in_) std::fclose(in_);
    if (out_) std::fclose(out_);
    if (pid_ > 0) {
      int status;
      if (::waitpid(pid_, &status, WNOHANG) == 0) {
        ::kill(pid_, SIGTERM);
        ::waitpid(pid_, &status, 0);
      }
    }
  }

  std::optional<std::string> request(const std::string& line) {
    std::fputs((line + "\n").c_str(), in_);
    std::fflush(in_);
    std::string got;
    int c;
    while ((c = std::fgetc(out_)) != EOF && c != '\n') got += static_cast<char>(c);
    if (c == EOF) return std::nullopt;
    return got;
  }

  int finish() {
    std::fclose(in_);
    in_ = nullptr;
    int status = 0;
    ::waitpid(pid_, &status, 0);
    pid_ = -1;
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

 private:
  pid_t pid_ = -1;
  FILE* in_ = nullptr;
  FILE* out_ = nullptr;
};

Outcome protocol() {
  ::signal(SIGPIPE, SIG_IGN);
  const auto res = synthetic_resources(0);  // identical to `serve --synthetic --seed 0`
  Child child({CODENAMES_RL_CLI, "serve", "--stdio", "--synthetic", "--seed", "0"});
  auto send = [&](const json& req) -> json {
    const auto line = child.request(req.dump());
    if (!line) throw std::runtime_error("server closed the stream");
    return json::parse(*line);
  };

  cr::EnvConfig cfg;
  cfg.guesser.mode = cr::GuesserMode::Stochastic;
  cfg.seed = 42;
  int id = 0;
  send({{"id", ++id}, {"cmd", "hello"}});
  const auto made = send({{"id", ++id},
                          {"cmd", "make_env"},
                          {"payload", {{"env", "codenames"}, {"seed", 42}, {"config", {{"guesser", {{"mode", "stochastic"}}}}}}}});
  const int env_id = made.at("payload").at("env_id");

  cr::CodenamesEnv local(res, cfg);
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int episodes_identical = 0, steps = 0;
  for (int e = 0; e < 10; ++e) {
    const auto wire_reset = send({{"id", ++id}, {"cmd", "reset"}, {"payload", {{"env_id", env_id}}}});
    const auto mine_reset = local.reset();
    bool same = wire_reset.at("payload").at("observation").dump() == cr::to_json_value(mine_reset.observation).dump();
    while (!local.episode_over()) {
      std::vector<double> a(local.action_size());
      for (auto& x : a) x = unit(rng);
      const auto wire = send({{"id", ++id}, {"cmd", "step"}, {"payload", {{"env_id", env_id}, {"action", a}}}});
      const auto mine = local.step(a);
      ++steps;
      const auto& p = wire.at("payload");
      same = same && p.at("observation").dump() == cr::to_json_value(mine.observation).dump() &&
             p.at("reward").dump() == json(mine.reward).dump() && p.at("terminated") == mine.terminated &&
             p.at("truncated") == mine.truncated;
    }
    episodes_identical += same ? 1 : 0;
  }

  // Fuzzing: every line gets exactly one JSON response and the server lives.
  std::mt19937_64 fz(2718);
  const std::string alphabet = "{}[]\":,0123456789abcdefghijklmnopqrstuvwxyz \\-.";
  const std::vector<std::string> cmds{"hello", "make_env", "reset", "step", "spaces", "render_state",
                                      "play_new", "play_hint", "play_guess", "play_end_turn", "bogus"};
  int answered = 0, internal = 0;
  for (int i = 0; i < 1000; ++i) {
    std::string line;
    switch (i % 3) {
      case 0:
        for (std::size_t k = 0, n = fz() % 120; k < n; ++k) line += alphabet[fz() % alphabet.size()];
        if (line.empty() || line.find_first_not_of(' ') == std::string::npos) line = "x";
        break;
      case 1: {
        json p = json::object();
        if (fz() % 2) p["env_id"] = static_cast<int>(fz() % 4);
        if (fz() % 2) p["env"] = std::vector<std::string>{"codenames", "clickpixel", "whack", "?"}[fz() % 4];
        if (fz() % 2) p["action"] = fz() % 2 ? json(static_cast<int>(fz() % 30) - 3) : json(std::vector<double>(fz() % 90, 0.7));
        if (fz() % 3 == 0) p["word"] = "a";
        if (fz() % 3 == 0) p["clue"] = "river";
        if (fz() % 3 == 0) p["count"] = static_cast<int>(fz() % 12) - 1;
        if (fz() % 4 == 0) p["config"] = json{{"q", static_cast<int>(fz() % 5)}};
        line = json{{"id", i}, {"cmd", cmds[fz() % cmds.size()]}, {"payload", p}}.dump();
        break;
      }
      default: {
        line = json{{"id", i}, {"cmd", "step"}, {"payload", {{"env_id", env_id}}}}.dump();
        line = line.substr(0, fz() % line.size() + 1);
      }
    }
    const auto got = child.request(line);
    if (!got) break;
    try {
      const auto r = json::parse(*got);
      ++answered;
      if (!r.at("ok").get<bool>() && r.at("error").at("code") == "internal_error") ++internal;
    } catch (const std::exception&) {
    }
  }
  const auto alive = child.request(json{{"id", "end"}, {"cmd", "hello"}}.dump());
  child.request(json{{"id", "bye"}, {"cmd", "close"}}.dump());
  const int exit_code = child.finish();

  std::ostringstream d;
  d << "byte-identical episodes " << episodes_identical << "/10 (" << steps << " steps); fuzz lines answered "
    << answered << "/1000, internal errors " << internal << ", alive after fuzz " << (alive ? "yes" : "NO")
    << ", exit code " << exit_code;
  return {episodes_identical == 10 && answered == 1000 && alive && exit_code == 0, d.str()};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"baseline", baseline}, {"ann", ann},         {"scoring", scoring}, {"guessers", guessers},
      {"encodings", encodings}, {"rewards", rewards}, {"toys", toys},       {"protocol", protocol},
  };
  std::optional<std::string> only;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--only" && i + 1 < argc) {
      only = argv[++i];
    } else {
      std::cerr << "usage: acceptance [--only NAME]\n";
      return 2;
    }
  }
  bool all_pass = true, matched = false;
  for (const auto& [name, run] : criteria) {
    if (only && *only != name) continue;
    matched = true;
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << " [" << fmt(seconds_since(t0), 3) << " s]: " << o.detail
              << std::endl;
    all_pass = all_pass && o.pass;
  }
  if (!matched) {
    std::cerr << "unknown criterion: " << only.value_or("") << "\n";
    return 2;
  }
  return all_pass ? 0 : 1;
}
