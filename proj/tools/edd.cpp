// Command-line front end: headless experiments, the session server and a few
// inspection helpers for room and dungeon files.
#include <csignal>
#include <cstdlib>
#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "edd/dungeon.hpp"
#include "edd/errors.hpp"
#include "edd/evaluate.hpp"
#include "edd/experiment.hpp"
#include "edd/patterns.hpp"
#include "edd/session.hpp"
#include "edd/tcp_server.hpp"

namespace {

using namespace edd;

struct EngineFlags {
  std::string dims = "spatial-patterns:5,symmetry:5";
  std::uint64_t seed = 0;
  std::size_t pop_size = 1000;
  std::size_t capacity = 25;
  std::size_t publish_gen = 100;
  std::size_t parents = 5;
  double mutation_chance = 0.30;
  bool serial = false;

  void attach(CLI::App& app) {
    app.add_option("--dims", dims, "Dimensions as name:granularity pairs")->capture_default_str();
    app.add_option("--seed", seed, "RNG seed (EDD_SEED overrides)")->capture_default_str();
    app.add_option("--pop-size", pop_size, "Initial population size")->capture_default_str();
    app.add_option("--capacity", capacity, "Individuals kept per cell population")->capture_default_str();
    app.add_option("--publish-gen", publish_gen, "Generations between broadcasts")->capture_default_str();
    app.add_option("--parents", parents, "Parents selected per population")->capture_default_str();
    app.add_option("--mutation-chance", mutation_chance, "Per-offspring mutation probability")->capture_default_str();
    app.add_flag("--serial", serial, "Evaluate offspring without OpenMP");
  }

  EngineConfig config() const {
    EngineConfig cfg;
    cfg.dims = parse_dimensions(dims);
    cfg.rng_seed = seed;
    if (const char* env = std::getenv("EDD_SEED"); env && *env) {
      try {
        std::size_t used = 0;
        cfg.rng_seed = std::stoull(env, &used);
        if (env[used] != '\0') throw std::invalid_argument(env);
      } catch (const std::logic_error&) {
        throw PreconditionError(std::string("EDD_SEED must be an unsigned integer, got '") + env + "'");
      }
    }
    cfg.pop_size = pop_size;
    cfg.cell_capacity = capacity;
    cfg.publish_gen = publish_gen;
    cfg.parents_per_pop = parents;
    cfg.mutation_chance = mutation_chance;
    cfg.parallel_evaluation = !serial;
    return cfg;
  }
};

struct ExperimentFlags {
  EngineFlags engine;
  int width = 13;
  int height = 7;
  std::size_t generations = 2100;
  std::string target;
  std::string out;

  void attach(CLI::App& app) {
    engine.attach(app);
    app.add_option("--width", width, "Room width in tiles")->capture_default_str();
    app.add_option("--height", height, "Room height in tiles")->capture_default_str();
    app.add_option("--generations", generations, "Generations to run")->capture_default_str();
    app.add_option("--target", target, "Target room file (required for similarity)");
    app.add_option("--out", out, "Output directory")->required();
  }

  ExperimentSpec spec() const {
    ExperimentSpec s;
    s.engine = engine.config();
    s.dims = s.engine.dims;
    s.room_width = width;
    s.room_height = height;
    s.generations = generations;
    s.output_dir = out;
    if (!target.empty()) s.target = load_room_file(target, "target");
    return s;
  }
};

void print_summary(const ExperimentResult& result) {
  std::cout << "generation,mean_fitness,max_fitness,empty_cells\n";
  for (const auto& b : result.broadcasts) {
    std::cout << b.generation << ',' << format_double(b.mean_fitness) << ',' << format_double(b.max_fitness) << ','
              << b.empty_cells << '\n';
  }
}

TileRef parse_tile_ref(const std::string& text) {
  // room:row,col
  const auto colon = text.rfind(':');
  const auto comma = text.find(',', colon == std::string::npos ? 0 : colon);
  if (colon == std::string::npos || comma == std::string::npos) {
    throw PreconditionError("expected room:row,col, got '" + text + "'");
  }
  try {
    return {text.substr(0, colon), {std::stoi(text.substr(colon + 1, comma - colon - 1)), std::stoi(text.substr(comma + 1))}};
  } catch (const std::logic_error&) {
    throw PreconditionError("expected room:row,col, got '" + text + "'");
  }
}

int serve(const EngineFlags& flags, std::uint16_t port, const std::string& address) {
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);  // inherited by every later thread

  SessionServer server(SessionOptions{flags.config(), true}, port, address);
  std::cout << "listening on " << address << ':' << server.port() << std::endl;
  std::thread([&server, signals] {
    int received = 0;
    sigwait(&signals, &received);
    server.stop();
  }).detach();
  server.run();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Constrained MAP-Elites room designer"};
  app.require_subcommand(1);

  ExperimentFlags run_flags;
  auto* run = app.add_subcommand("run", "Run one headless experiment and export the elite grids");
  run_flags.attach(*run);

  ExperimentFlags sweep_flags;
  auto* sweep = app.add_subcommand("sweep", "Run every pair of dimensions and write a comparison table");
  sweep_flags.attach(*sweep);

  EngineFlags serve_flags;
  std::uint16_t port = 7777;
  std::string address = "127.0.0.1";
  auto* srv = app.add_subcommand("serve", "Serve a designer session over TCP (NDJSON or WebSocket)");
  serve_flags.attach(*srv);
  srv->add_option("--port", port, "Port to listen on; 0 picks a free one")->capture_default_str();
  srv->add_option("--address", address, "Address to bind")->capture_default_str();

  std::vector<std::string> eval_files;
  std::string eval_dims = "spatial-patterns:5,symmetry:5";
  std::string eval_target;
  auto* eval = app.add_subcommand("eval", "Print room-id,fitness,feasible,dims for room files");
  eval->add_option("rooms", eval_files, "Room files")->required()->check(CLI::ExistingFile);
  eval->add_option("--dims", eval_dims, "Dimensions to report")->capture_default_str();
  eval->add_option("--target", eval_target, "Target room for similarity");

  std::string pattern_file;
  auto* patterns = app.add_subcommand("patterns", "Print the pattern overlay and counts of a room file");
  patterns->add_option("room", pattern_file, "Room file")->required()->check(CLI::ExistingFile);

  auto* dungeon_cmd = app.add_subcommand("dungeon", "Inspect a dungeon manifest");
  dungeon_cmd->require_subcommand(1);
  std::string manifest;
  auto* check = dungeon_cmd->add_subcommand("check", "Report unreachable rooms and tiles");
  check->add_option("manifest", manifest, "Manifest file")->required()->check(CLI::ExistingFile);
  std::string from, to, heuristic = "fastest";
  auto* path = dungeon_cmd->add_subcommand("path", "Find a path between two tiles");
  path->add_option("manifest", manifest, "Manifest file")->required()->check(CLI::ExistingFile);
  path->add_option("--from", from, "Start tile as room:row,col")->required();
  path->add_option("--to", to, "End tile as room:row,col")->required();
  path->add_option("--heuristic", heuristic, "fastest, rewarding, less-danger or more-danger")->capture_default_str();

  auto* schema = app.add_subcommand("schema", "Print the session protocol schema");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      print_summary(run_experiment(run_flags.spec()));
    } else if (*sweep) {
      const auto runs = sweep_all_pairs(sweep_flags.spec());
      std::cout << runs.size() << " runs written to " << sweep_flags.out << "\n";
    } else if (*srv) {
      return serve(serve_flags, port, address);
    } else if (*eval) {
      const auto dims = parse_dimensions(eval_dims);
      std::optional<Room> target;
      if (!eval_target.empty()) target = load_room_file(eval_target, "target");
      const EvaluationContext ctx{dims, target ? &*target : nullptr, {}};
      std::cout << "room-id,fitness,feasible";
      for (std::size_t i = 0; i < dims.size(); ++i) std::cout << ",dim" << i + 1;
      std::cout << '\n';
      for (const auto& file : eval_files) {
        Individual ind{load_room_file(file), 0.0, false, {}};
        evaluate(ind, ctx);
        std::cout << file << ',' << format_double(ind.fitness) << ',' << (ind.feasible ? "true" : "false");
        for (const double v : ind.dims) std::cout << ',' << format_double(v);
        std::cout << '\n';
      }
    } else if (*patterns) {
      const Room room = load_room_file(pattern_file);
      const auto graph = analyze_patterns(room);
      std::cout << pattern_overlay(graph);
      std::cout << "door paths: " << count_door_paths(graph) << '\n';
    } else if (*check) {
      const auto report = check_dungeon_feasibility(load_dungeon(manifest));
      std::cout << (report.feasible ? "feasible" : "infeasible") << '\n';
      for (const auto& id : report.unreachable_rooms) std::cout << "unreachable room " << id << '\n';
      for (const auto& [id, tiles] : report.unreachable_tiles) {
        std::cout << "unreachable tiles in " << id << ':';
        for (const auto p : tiles) std::cout << ' ' << p.row << ',' << p.col;
        std::cout << '\n';
      }
      return report.feasible ? 0 : 3;
    } else if (*path) {
      const auto h = heuristic_from_name(heuristic);
      if (!h) throw PreconditionError("unknown heuristic '" + heuristic + "'");
      const auto tiles = find_path(load_dungeon(manifest), parse_tile_ref(from), parse_tile_ref(to), *h);
      for (const auto& t : tiles) std::cout << t.room << ':' << t.pos.row << ',' << t.pos.col << '\n';
    } else if (*schema) {
      std::cout << protocol_schema();
    }
  } catch (const Error& e) {
    std::cerr << "error [" << e.code() << "]: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
