// egame: validate graphs, play numbers games, certify divergence, check the
// closed-form matrices, and serve the interactive play API.

#include <cstdint>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "egame/cli.hpp"

int main(int argc, char** argv) {
  using egame::cli::Command;
  using egame::cli::Format;

  CLI::App app{"Numbers-game workbench for edge-weighted graphs"};
  app.require_subcommand(1);

  egame::cli::RunConfig config;
  std::uint64_t seed = 0;
  std::string format = "json";
  const std::map<std::string, Format> formats{{"json", Format::json}, {"csv", Format::csv}, {"text", Format::text}};

  const auto add_common = [&](CLI::App* sub, bool needs_graph) {
    auto* graph = sub->add_option("--graph", config.graph_path, "Graph spec (JSON)");
    if (needs_graph) graph->required()->check(CLI::ExistingFile);
    sub->add_option("--format", format, "Output format")->check(CLI::IsMember({"json", "csv", "text"}));
    sub->add_option("--out", config.output, "Output path (default: standard output)");
    sub->add_option("--seed", seed, "Seed for randomized strategies (EGAME_SEED when absent)");
  };

  auto* validate = app.add_subcommand("validate", "Check amplitudes, odd-neighborliness and eligibility");
  add_common(validate, true);

  auto* play = app.add_subcommand("play", "Play a game and export its trace");
  add_common(play, true);
  play->add_option("--start", config.start, "omega<i> or comma-separated values")->capture_default_str();
  play->add_option("--max-moves", config.max_moves, "Move limit")->capture_default_str();
  play->add_option("--strategy", config.strategy, "random | greedy | sequence")
      ->check(CLI::IsMember({"random", "greedy", "sequence"}))
      ->capture_default_str();
  play->add_option("--sequence", config.sequence, "Node ids to fire, comma-separated (strategy=sequence)");

  auto* certify = app.add_subcommand("certify", "Emit a divergence certificate");
  add_common(certify, true);
  certify->add_option("--cycles", config.n_cycles, "Macro-cycles per fundamental position")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  auto* matrices = app.add_subcommand("verify-matrices", "Closed-form matrices vs brute-force products");
  add_common(matrices, true);

  auto* serve = app.add_subcommand("serve", "Start the play service");
  add_common(serve, false);
  serve->add_option("--port", config.port, "Listen port")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return egame::cli::kExitParse;
  }

  for (auto* sub : app.get_subcommands()) {
    if (sub->count("--seed") > 0) config.seed = seed;
  }
  config.format = formats.at(format);
  if (validate->parsed()) config.command = Command::validate;
  if (play->parsed()) config.command = Command::play;
  if (certify->parsed()) config.command = Command::certify;
  if (matrices->parsed()) config.command = Command::verify_matrices;
  if (serve->parsed()) config.command = Command::serve;
  if (matrices->parsed() && matrices->count("--format") == 0) config.format = Format::text;
  return egame::cli::run(config);
}
