#pragma once

// Command dispatch behind the egame executable. Exit codes are a stable
// contract: 0 success, 2 parse error, 3 ineligible graph, 4 internal
// verification failure.

#include <atomic>
#include <csignal>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "egame/engine.hpp"
#include "egame/error.hpp"
#include "egame/graph.hpp"
#include "egame/http.hpp"
#include "egame/io.hpp"
#include "egame/matrix.hpp"
#include "egame/prop1.hpp"
#include "egame/service.hpp"

namespace egame::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitParse = 2;
inline constexpr int kExitIneligible = 3;
inline constexpr int kExitVerification = 4;

inline constexpr std::uint64_t kDefaultSeed = 1;
inline constexpr double kMatrixTolerance = 1e-9;

enum class Command { validate, play, certify, verify_matrices, serve };
enum class Format { json, csv, text };

struct RunConfig {
  Command command = Command::validate;
  std::string graph_path;
  std::string start = "omega1";
  std::optional<std::uint64_t> seed;
  std::size_t max_moves = 10000;
  int n_cycles = kDefaultCycles;
  std::string output;  // empty: standard output
  Format format = Format::json;
  int port = 8080;
  std::string strategy = "random";  // random | greedy | sequence
  std::string sequence;             // comma-separated node ids for strategy=sequence
};

/// --seed, else EGAME_SEED, else kDefaultSeed.
inline std::uint64_t effective_seed(const RunConfig& config) {
  if (config.seed) return *config.seed;
  if (const char* env = std::getenv("EGAME_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw ParseError(std::string("EGAME_SEED is not an unsigned integer: ") + env);
    }
  }
  return kDefaultSeed;
}

namespace detail {

inline void emit(const RunConfig& config, std::ostream& out, const std::string& text) {
  if (config.output.empty() || config.output == "-") {
    out << text;
    return;
  }
  std::ofstream file(config.output, std::ios::binary);
  if (!file) throw ParseError("cannot write '" + config.output + "'");
  file << text;
}

inline bool to_stdout(const RunConfig& config) { return config.output.empty() || config.output == "-"; }

inline std::vector<NodeId> parse_sequence(const Graph& graph, const std::string& text) {
  std::vector<NodeId> nodes;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto node = graph.index_of(item);
    if (!node) throw ParseError("sequence: unknown node '" + item + "'");
    nodes.push_back(*node);
  }
  return nodes;
}

inline int do_validate(const RunConfig& config, const Graph& graph, std::ostream& out) {
  const ValidationReport report = validate(graph);
  if (config.format == Format::text) {
    std::string text = fmt::format("nodes: {}  edges: {}\n", graph.node_count(), graph.edges().size());
    for (const EdgeReport& r : report.edges) {
      text += fmt::format("  {{{},{}}} amp={} amp_back={} product={} m={} odd-neighborly={}\n", graph.id(r.from),
                          graph.id(r.to), format_real(r.amp), format_real(r.amp_back), format_real(r.product),
                          r.effective_m ? std::to_string(*r.effective_m) : "-", r.odd_neighborly ? "yes" : "no");
    }
    text += fmt::format("engine-playable: {}\nprop1-eligible: {}\n", report.engine_playable ? "true" : "false",
                        report.prop1_eligible ? "true" : "false");
    for (const auto& p : report.problems) text += "  problem: " + p + "\n";
    emit(config, out, text);
  } else {
    emit(config, out, to_json(report, graph).dump(2) + "\n");
  }
  return kExitOk;
}

inline int do_play(const RunConfig& config, const Graph& graph, std::ostream& out) {
  const Position start = parse_position(graph, config.start);
  std::optional<Strategy> strategy;
  if (config.strategy == "random") {
    strategy = random_seeded(effective_seed(config));
  } else if (config.strategy == "greedy") {
    strategy = greedy_max();
  } else if (config.strategy == "sequence") {
    strategy = fixed_sequence(parse_sequence(graph, config.sequence));
  } else {
    throw ParseError("unknown strategy '" + config.strategy + "'");
  }
  const GameTrace trace = play(graph, start, *strategy, config.max_moves);
  switch (config.format) {
    case Format::csv: emit(config, out, trace_csv(trace)); break;
    case Format::json: {
      Json doc = to_json(trace, strategy->name());
      if (config.strategy == "random") doc["seed"] = effective_seed(config);
      emit(config, out, doc.dump(2) + "\n");
      break;
    }
    case Format::text: {
      std::string text = fmt::format("strategy: {}\nmoves: {}\noutcome: {}\nfinal:", strategy->name(),
                                     trace.move_count(), to_string(trace.outcome));
      for (double v : trace.final_position().values()) text += " " + format_real(v);
      text += "\n";
      if (!trace.diagnostic.empty()) text += "diagnostic: " + trace.diagnostic + "\n";
      emit(config, out, text);
      break;
    }
  }
  return kExitOk;
}

inline int do_certify(const RunConfig& config, const Graph& graph, std::ostream& out, std::ostream& err) {
  const ValidationReport report = validate(graph);
  std::ostream& verdict_stream = to_stdout(config) && config.format != Format::text ? err : out;
  if (!report.prop1_eligible) {
    verdict_stream << kVerdictIneligible << "\n";
    for (const auto& p : report.problems) err << "  " << p << "\n";
    return kExitIneligible;
  }
  const Prop1Certificate cert = divergence_certificate(graph, config.n_cycles);
  if (config.format == Format::text) {
    std::string text = fmt::format("m12={} kappa1={} kappa2={}\n(i)={} (ii)={} (iii)={}\n", cert.m12,
                                   format_real(cert.kappa1), format_real(cert.kappa2), format_real(cert.ineq.i),
                                   format_real(cert.ineq.ii), format_real(cert.ineq.iii));
    for (const auto& ev : cert.fundamentals) {
      text += ev.name + ":";
      const auto show = [](const Triple& t) {
        return fmt::format("({}, {}, {})", format_real(t[0]), format_real(t[1]), format_real(t[2]));
      };
      text += " " + show(ev.certified_start);
      for (std::size_t i = 0; i < std::min<std::size_t>(3, ev.chain.size()); ++i) text += " -> " + show(ev.chain[i].next);
      text += ev.chain.size() > 3 ? " -> ...\n" : "\n";
    }
    text += std::string(cert.verdict) + "\n";
    emit(config, out, text);
  } else {
    emit(config, out, certificate_json(cert, graph, effective_seed(config)).dump(2) + "\n");
    verdict_stream << cert.verdict << "\n";
  }
  return kExitOk;
}

struct MatrixRow {
  int k;
  double x12, x21, x2_x12, x1_x21;
};

inline int do_verify_matrices(const RunConfig& config, const Graph& graph, std::ostream& out,
                              std::ostream& err) {
  const ValidationReport report = validate(graph);
  if (!report.prop1_eligible) {
    err << kVerdictIneligible << "\n";
    return kExitIneligible;
  }
  const Cyclic3Labels labels = canonicalize_prop1(graph);
  const int m12 = recover_m12(labels);
  std::vector<MatrixRow> rows;
  double worst = 0.0;
  for (int k = 0; k <= m12; ++k) {
    MatrixRow row{k,
                  max_abs_diff(closed_form_power(labels, k, Variant::X12).entries,
                               oracle_power(labels, k, Variant::X12).entries),
                  max_abs_diff(closed_form_power(labels, k, Variant::X21).entries,
                               oracle_power(labels, k, Variant::X21).entries),
                  max_abs_diff(prefix_matrix(labels, k, Variant::X2_X12_pow_k).entries,
                               oracle_power(labels, k, Variant::X2_X12_pow_k).entries),
                  max_abs_diff(prefix_matrix(labels, k, Variant::X1_X21_pow_k).entries,
                               oracle_power(labels, k, Variant::X1_X21_pow_k).entries)};
    worst = std::max({worst, row.x12, row.x21, row.x2_x12, row.x1_x21});
    rows.push_back(row);
  }
  const RepMatrix half = halfword(labels);
  const double half_residual =
      max_abs_diff(half.entries, prefix_matrix(labels, *half.k, Variant::X1_X21_pow_k).entries);
  const EigenCheck eig = eigencheck(labels);
  worst = std::max({worst, half_residual, eig.residual, eig.imaginary_residual, eig.inverse_residual,
                    eig.eigenvalue_residual});
  const bool ok = worst <= kMatrixTolerance;

  if (config.format == Format::json) {
    Json doc;
    doc["m12"] = m12;
    doc["tolerance"] = kMatrixTolerance;
    Json table = Json::array();
    for (const auto& r : rows) {
      table.push_back(Json{{"k", r.k}, {"X12_pow_k", r.x12}, {"X21_pow_k", r.x21},
                           {"X2_X12_pow_k", r.x2_x12}, {"X1_X21_pow_k", r.x1_x21}});
    }
    doc["residuals"] = std::move(table);
    doc["halfword"] = to_json(half);
    doc["halfword_residual"] = half_residual;
    doc["eigencheck"] = Json{{"residual", eig.residual}, {"imaginary", eig.imaginary_residual},
                             {"inverse", eig.inverse_residual}, {"eigenvalues", eig.eigenvalue_residual}};
    doc["generators"] = Json::array({to_json(generators(labels).first), to_json(generators(labels).second)});
    doc["ok"] = ok;
    emit(config, out, doc.dump(2) + "\n");
  } else {
    std::string text = fmt::format("m12 = {}   tolerance = {:g}\n", m12, kMatrixTolerance);
    text += fmt::format("{:>4} {:>12} {:>12} {:>14} {:>14}\n", "k", "X12^k", "X21^k", "X2 X12^k", "X1 X21^k");
    for (const auto& r : rows) {
      text += fmt::format("{:>4} {:>12.3e} {:>12.3e} {:>14.3e} {:>14.3e}\n", r.k, r.x12, r.x21, r.x2_x12, r.x1_x21);
    }
    text += to_text(half);
    text += fmt::format("halfword residual: {:.3e}\n", half_residual);
    text += fmt::format("eigencheck: residual {:.3e}  imaginary {:.3e}  inverse {:.3e}  eigenvalues {:.3e}\n",
                        eig.residual, eig.imaginary_residual, eig.inverse_residual, eig.eigenvalue_residual);
    text += ok ? "OK\n" : "FAILED\n";
    emit(config, out, text);
  }
  return ok ? kExitOk : kExitVerification;
}

inline std::atomic<httplib::Server*> g_server{nullptr};

inline int do_serve(const RunConfig& config, std::ostream& out) {
  SessionStore store;
  if (!config.output.empty() && std::filesystem::exists(config.output)) store.load(config.output);
  httplib::Server server;
  bind_routes(server, store);
  g_server = &server;
  auto stop = [](int) {
    if (auto* s = g_server.load()) s->stop();
  };
  std::signal(SIGINT, stop);
  std::signal(SIGTERM, stop);
  out << "listening on http://127.0.0.1:" << config.port << std::endl;
  const bool ok = server.listen("0.0.0.0", config.port);
  g_server = nullptr;
  if (!config.output.empty()) store.save(config.output);
  return ok ? kExitOk : kExitVerification;
}

}  // namespace detail

inline int run(const RunConfig& config, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  try {
    if (config.n_cycles < 1) throw ParseError("--cycles must be >= 1");
    if (config.command == Command::serve) return detail::do_serve(config, out);
    const Graph graph = load_graph(config.graph_path);
    switch (config.command) {
      case Command::validate: return detail::do_validate(config, graph, out);
      case Command::play: return detail::do_play(config, graph, out);
      case Command::certify: return detail::do_certify(config, graph, out, err);
      case Command::verify_matrices: return detail::do_verify_matrices(config, graph, out, err);
      case Command::serve: break;
    }
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << "\n";
    return kExitParse;
  } catch (const VerificationError& e) {
    err << "verification failure: " << e.what() << "\n";
    return kExitVerification;
  } catch (const ValidationError& e) {
    err << kVerdictIneligible << ": " << e.what() << "\n";
    return kExitIneligible;
  } catch (const StructureError& e) {
    err << "parse error: " << e.what() << "\n";
    return kExitParse;
  } catch (const DomainError& e) {
    err << "parse error: " << e.what() << "\n";
    return kExitParse;
  }
  return kExitOk;
}

}  // namespace egame::cli
