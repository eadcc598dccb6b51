#include "edd/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>

#include "edd/errors.hpp"

namespace edd {

namespace fs = std::filesystem;

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

Room default_target_room(int width, int height) {
  Room room(width, height);
  for (const Position p : {Position{0, width / 2}, Position{height - 1, width / 2}, Position{height / 2, 0},
                           Position{height / 2, width - 1}}) {
    room = room.with_door(p);
  }
  return room;
}

void validate(const ExperimentSpec& spec) {
  if (spec.dims.size() != 2) throw PreconditionError("experiments explore exactly two dimensions");
  EngineConfig cfg = spec.engine;
  cfg.dims = spec.dims;
  validate(cfg);
  if (spec.generations < cfg.publish_gen) {
    throw PreconditionError("generations (" + std::to_string(spec.generations) + ") must be >= publish-gen (" +
                            std::to_string(cfg.publish_gen) + ")");
  }
  const bool wants_similarity = std::any_of(spec.dims.begin(), spec.dims.end(), [](const DimensionDescriptor& d) {
    return d.kind == DimensionKind::Similarity;
  });
  if (wants_similarity && !spec.target) throw PreconditionError("similarity runs need a target room (--target)");
  if (spec.target && (spec.target->width() != spec.room_width || spec.target->height() != spec.room_height)) {
    throw PreconditionError("target room size does not match --width/--height");
  }
  if (!spec.target) (void)Room(spec.room_width, spec.room_height);  // bounds check
  if (spec.output_dir.empty()) throw PreconditionError("output directory is required");

  std::error_code ec;
  fs::create_directories(spec.output_dir, ec);
  const auto probe = fs::path(spec.output_dir) / ".write-probe";
  std::ofstream out(probe);
  if (ec || !out) throw IoError("output directory " + spec.output_dir + " is not writable");
  out.close();
  fs::remove(probe, ec);
}

namespace {

std::string cell_name(std::uint64_t generation, const std::vector<int>& index) {
  std::string name = "gen" + std::to_string(generation) + "_cell";
  for (std::size_t k = 0; k < index.size(); ++k) name += (k ? "_" : "") + std::to_string(index[k]);
  return name;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentSpec& spec) {
  validate(spec);
  EngineConfig cfg = spec.engine;
  cfg.dims = spec.dims;
  const Room target = spec.target ? *spec.target : default_target_room(spec.room_width, spec.room_height);

  const fs::path dir(spec.output_dir);
  std::ofstream cells_csv(dir / "cells.csv", std::ios::binary);
  std::ofstream summary_csv(dir / "summary.csv", std::ios::binary);
  if (!cells_csv || !summary_csv) throw IoError("cannot create CSV files in " + spec.output_dir);
  cells_csv << "room-id,fitness,feasible,dim1,dim2\n";
  summary_csv << "generation,mean_fitness,max_fitness,empty_cells\n";

  ExperimentResult result;
  Engine engine(cfg, target);
  for (std::size_t g = 0; g < spec.generations; ++g) {
    engine.step();
    engine.take_cell_updates();
    if (!engine.broadcast_due()) continue;
    const auto event = engine.broadcast_and_reseed();

    BroadcastSummary summary{event.generation, 0.0, 0.0, 0, event.elites.size()};
    std::size_t filled = 0;
    for (std::size_t i = 0; i < event.elites.size(); ++i) {
      const auto& elite = event.elites[i];
      if (!elite) {
        ++summary.empty_cells;
        continue;
      }
      const auto name = cell_name(event.generation, event.indices[i]);
      save_room_file(elite->genotype, (dir / (name + ".room")).string());
      cells_csv << name << ',' << format_double(elite->fitness) << ',' << (elite->feasible ? "true" : "false");
      for (const double v : elite->dims) cells_csv << ',' << format_double(v);
      cells_csv << '\n';
      summary.mean_fitness += elite->fitness;
      summary.max_fitness = std::max(summary.max_fitness, elite->fitness);
      ++filled;
    }
    if (filled) summary.mean_fitness /= static_cast<double>(filled);
    summary_csv << summary.generation << ',' << format_double(summary.mean_fitness) << ','
                << format_double(summary.max_fitness) << ',' << summary.empty_cells << '\n';
    result.broadcasts.push_back(summary);
  }
  if (!cells_csv || !summary_csv) throw IoError("failed writing CSV files in " + spec.output_dir);
  return result;
}

std::vector<std::pair<std::vector<DimensionDescriptor>, ExperimentResult>> sweep_all_pairs(const ExperimentSpec& base) {
  if (!base.target) {
    throw PreconditionError("the sweep includes similarity pairs and needs a target room (--target)");
  }
  const int granularity = base.dims.empty() ? 5 : base.dims.front().granularity;
  if (base.output_dir.empty()) throw PreconditionError("output directory is required");
  std::error_code ec;
  fs::create_directories(base.output_dir, ec);
  std::ofstream table(fs::path(base.output_dir) / "comparison.csv", std::ios::binary);
  if (!table) throw IoError("output directory " + base.output_dir + " is not writable");
  table << "dim_x,dim_y,generation,mean_fitness,max_fitness,empty_cells\n";

  std::vector<std::pair<std::vector<DimensionDescriptor>, ExperimentResult>> runs;
  for (std::size_t a = 0; a < kAllDimensions.size(); ++a) {
    for (std::size_t b = a + 1; b < kAllDimensions.size(); ++b) {
      ExperimentSpec spec = base;
      spec.dims = {{kAllDimensions[a], granularity}, {kAllDimensions[b], granularity}};
      spec.output_dir = (fs::path(base.output_dir) / (std::string(dimension_name(kAllDimensions[a])) + "__" +
                                                      std::string(dimension_name(kAllDimensions[b]))))
                            .string();
      auto result = run_experiment(spec);
      for (const auto& s : result.broadcasts) {
        table << dimension_name(kAllDimensions[a]) << ',' << dimension_name(kAllDimensions[b]) << ','
              << s.generation << ',' << format_double(s.mean_fitness) << ',' << format_double(s.max_fitness)
              << ',' << s.empty_cells << '\n';
      }
      runs.emplace_back(spec.dims, std::move(result));
    }
  }
  return runs;
}

}  // namespace edd
