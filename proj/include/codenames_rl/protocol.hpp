#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "codenames_rl/codenames_env.hpp"
#include "codenames_rl/error.hpp"
#include "codenames_rl/play.hpp"
#include "codenames_rl/toy_envs.hpp"

namespace codenames_rl {

inline constexpr int kProtocolVersion = 1;
inline constexpr std::uint16_t kDefaultPort = 7355;

/// Immutable state shared by every session of a server.
struct ServerContext {
  std::shared_ptr<const Resources> resources;  // null: codenames and play are unavailable
  EnvConfig codenames;
  ClickPixelConfig clickpixel;
  WhackConfig whack;
};

/// One protocol session: a set of environment handles plus at most one
/// play session. Requests are handled strictly in order.
///
/// Request:  {"id": any, "cmd": string, "payload": object (optional)}
/// Response: {"id": echoed, "ok": true, "payload": {...}}
///        or {"id": echoed, "ok": false, "error": {"code": ..., "message": ...}}
class Session {
 public:
  explicit Session(std::shared_ptr<const ServerContext> ctx) : ctx_(std::move(ctx)) {}

  bool closed() const { return closed_; }

  /// Handles one request line and returns the response line (no newline).
  /// Never throws for bad input.
  std::string handle_line(std::string_view line) {
    json request;
    try {
      request = json::parse(line);
    } catch (const json::exception& e) {
      std::string echo(line.substr(0, 512));
      return failure(nullptr, "malformed_json", e.what(), json{{"line", echo}}).dump(-1, ' ', false,
                                                                                      json::error_handler_t::replace);
    }
    return handle(request).dump(-1, ' ', false, json::error_handler_t::replace);
  }

  json handle(const json& request) {
    json id = nullptr;
    try {
      if (!request.is_object()) throw Error("bad_request", "request must be a JSON object");
      if (request.contains("id")) id = request["id"];
      if (!request.contains("cmd") || !request["cmd"].is_string()) throw Error("bad_request", "missing string field 'cmd'");
      const json payload = request.value("payload", json::object());
      if (!payload.is_object()) throw Error("bad_request", "'payload' must be an object");
      return {{"id", id}, {"ok", true}, {"payload", dispatch(request["cmd"].get<std::string>(), payload)}};
    } catch (const Error& e) {
      return failure(id, e.code(), e.what());
    } catch (const json::exception& e) {
      return failure(id, "bad_request", e.what());
    } catch (const std::exception& e) {
      return failure(id, "internal_error", e.what());
    }
  }

 private:
  using EnvHandle = std::variant<CodenamesEnv, ClickPixelEnv, WhackEnv>;

  static json failure(const json& id, std::string_view code, std::string_view message, json extra = nullptr) {
    json err = {{"code", code}, {"message", message}};
    if (extra.is_object()) err.update(extra);
    return {{"id", id}, {"ok", false}, {"error", std::move(err)}};
  }

  json dispatch(const std::string& cmd, const json& p) {
    if (cmd == "hello") return hello();
    if (cmd == "make_env") return make_env(p);
    if (cmd == "reset") return reset(p);
    if (cmd == "step") return step(p);
    if (cmd == "spaces") return spaces(p);
    if (cmd == "render_state") return render_state(p);
    if (cmd == "play_new") return play_new(p);
    if (cmd == "play_hint") return play().give_hint(p.at("clue").get<std::string>(), p.at("count").get<int>());
    if (cmd == "play_guess") return play().guess(p.at("word").get<std::string>());
    if (cmd == "play_end_turn") return play().end_turn_now();
    if (cmd == "close") return close(p);
    throw Error("unknown_command", "unknown cmd '" + cmd + "'");
  }

  static json hello() {
    return {{"protocol_version", kProtocolVersion},
            {"encodings", {"pwcsm", "ohwe"}},
            {"envs", {"codenames", "clickpixel", "whack"}}};
  }

  json make_env(const json& p) {
    const std::string kind = p.at("env").get<std::string>();
    const json config = p.value("config", json::object());
    const std::optional<std::uint64_t> seed =
        p.contains("seed") ? std::optional(p["seed"].get<std::uint64_t>()) : std::nullopt;
    const int id = next_id_;  // consumed only when the env is created
    if (kind == "codenames") {
      if (!ctx_->resources) throw Error(errc::kInvalidConfig, "server was started without embeddings");
      auto c = apply_json(ctx_->codenames, config);
      if (seed) c.seed = *seed;
      envs_.emplace(id, CodenamesEnv(ctx_->resources, c));
    } else if (kind == "clickpixel") {
      auto c = apply_json(ctx_->clickpixel, config);
      if (seed) c.seed = *seed;
      envs_.emplace(id, ClickPixelEnv(c));
    } else if (kind == "whack") {
      auto c = apply_json(ctx_->whack, config);
      if (seed) c.seed = *seed;
      envs_.emplace(id, WhackEnv(c));
    } else {
      throw Error(errc::kInvalidConfig, "unknown env '" + kind + "'");
    }
    ++next_id_;
    json out = spaces_of(envs_.at(id));
    out["env_id"] = id;
    return out;
  }

  EnvHandle& env(const json& p) {
    const int id = p.at("env_id").get<int>();
    auto it = envs_.find(id);
    if (it == envs_.end()) throw Error("unknown_env", "no env with id " + std::to_string(id));
    return it->second;
  }

  json reset(const json& p) {
    const std::optional<std::uint64_t> seed =
        p.contains("seed") ? std::optional(p["seed"].get<std::uint64_t>()) : std::nullopt;
    return std::visit(
        [&](auto& e) -> json {
          using T = std::decay_t<decltype(e)>;
          if constexpr (std::is_same_v<T, CodenamesEnv>) {
            const auto r = e.reset(seed);
            return {{"observation", to_json_value(r.observation)}, {"goal", r.goal}};
          } else {
            return {{"observation", to_json_value(e.reset(seed))}};
          }
        },
        env(p));
  }

  json step(const json& p) {
    const json& action = p.at("action");
    return std::visit(
        [&](auto& e) -> json {
          using T = std::decay_t<decltype(e)>;
          if constexpr (std::is_same_v<T, CodenamesEnv>) {
            const auto a = action.get<std::vector<double>>();
            const auto r = e.step(a);
            return {{"observation", to_json_value(r.observation)}, {"reward", r.reward}, {"terminated", r.terminated},
                    {"truncated", r.truncated}, {"goal", r.goal}, {"info", r.info}};
          } else {
            ToyStep r;
            if constexpr (std::is_same_v<T, ClickPixelEnv>) {
              const json& a = action.is_array() && action.size() == 1 ? action[0] : action;
              if (!a.is_number_integer() && !a.is_number_unsigned()) throw Error(errc::kBadInput, "clickpixel action must be an integer cell index");
              const auto cell = a.get<std::int64_t>();
              if (cell < 0) throw Error(errc::kBadInput, "clickpixel action out of range");
              r = e.step(static_cast<std::size_t>(cell));
            } else {
              r = e.step(action.get<std::vector<double>>());
            }
            return {{"observation", to_json_value(r.observation)}, {"reward", r.reward}, {"terminated", r.terminated},
                    {"truncated", r.truncated}, {"info", json::object()}};
          }
        },
        env(p));
  }

  static json spaces_of(const EnvHandle& h) {
    return std::visit(
        [](const auto& e) -> json {
          using T = std::decay_t<decltype(e)>;
          if constexpr (std::is_same_v<T, CodenamesEnv>) {
            const auto [r, c] = e.observation_shape();
            const bool pw = e.config().encoding == Encoding::Pwcsm;
            return {{"env", "codenames"},
                    {"observation", {{"shape", {r, c}}, {"low", pw ? -1.0 : 0.0}, {"high", 1.0}}},
                    {"action", {{"type", "box"}, {"shape", {e.action_size()}}, {"low", 0.0}, {"high", 1.0}}},
                    {"goal", {{"shape", {kBoardSize}}, {"low", 0.0}, {"high", 9.0}}}};
          } else if constexpr (std::is_same_v<T, ClickPixelEnv>) {
            const auto q = e.config().q;
            return {{"env", "clickpixel"},
                    {"observation", {{"shape", {q, q}}, {"low", 0.0}, {"high", 1.0}}},
                    {"action", {{"type", "discrete"}, {"n", q * q}}}};
          } else {
            const auto q = e.config().q;
            return {{"env", "whack"},
                    {"observation", {{"shape", {q, q}}, {"low", 0.0}, {"high", 1.0}}},
                    {"action", {{"type", "multi_binary"}, {"shape", {q * q}}}}};
          }
        },
        h);
  }

  json spaces(const json& p) { return spaces_of(env(p)); }

  json render_state(const json& p) {
    auto* e = std::get_if<CodenamesEnv>(&env(p));
    if (!e) throw Error(errc::kBadInput, "render_state is only defined for codenames envs");
    const auto& s = e->state();
    json labels = json::array();
    for (auto l : s.labels) labels.push_back(to_string(l));
    json out = {{"words", s.words},     {"labels", labels},
                {"revealed", s.revealed}, {"acting_team", to_string(s.acting_team)},
                {"agent_team", to_string(s.agent_team)}, {"turn_index", s.turn_index},
                {"game_over", s.game_over}};
    if (s.winner) out["winner"] = to_string(*s.winner);
    return out;
  }

  json play_new(const json& p) {
    if (!ctx_->resources) throw Error(errc::kInvalidConfig, "server was started without embeddings");
    const auto role = play_role_from_string(p.value("role", std::string("human_guesser")));
    const auto config = apply_json(ctx_->codenames, p.value("config", json::object()));
    const std::uint64_t seed = p.value("seed", config.seed);
    play_.emplace(ctx_->resources, config, role, seed);
    return play_->view();
  }

  PlaySession& play() {
    if (!play_) throw Error(errc::kOutOfPhase, "no play session; send play_new first");
    return *play_;
  }

  json close(const json& p) {
    if (p.contains("env_id")) {
      const int id = p["env_id"].get<int>();
      if (envs_.erase(id) == 0) throw Error("unknown_env", "no env with id " + std::to_string(id));
      return {{"closed", id}};
    }
    closed_ = true;
    envs_.clear();
    play_.reset();
    return {{"closed", "session"}};
  }

  std::shared_ptr<const ServerContext> ctx_;
  std::map<int, EnvHandle> envs_;
  std::optional<PlaySession> play_;
  int next_id_ = 1;
  bool closed_ = false;
};

}  // namespace codenames_rl
