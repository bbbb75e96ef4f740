#include "cli.hpp"

#include <cstdlib>
#include <exception>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "namer/assignment.hpp"
#include "namer/config.hpp"
#include "namer/decode.hpp"
#include "namer/error.hpp"
#include "namer/latex.hpp"
#include "namer/metrics.hpp"
#include "namer/synth.hpp"
#include "namer/tensor_io.hpp"
#include "namer/vocab.hpp"

namespace namer::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Raw flag values; unset optionals leave the config file's values alone.
struct Flags {
  std::string config_file;
  std::optional<std::string> vocab;
  std::optional<double> epsilon;
  std::optional<int> km;
  std::optional<double> lambda;
  std::optional<double> l2r;
  std::optional<double> r2l;
  std::optional<std::uint64_t> seed;
};

Config effective_config(const Flags& f) {
  Config c;
  if (!f.config_file.empty()) c = read_config(f.config_file, c);
  if (f.vocab) c.vocab_path = *f.vocab;
  if (f.epsilon) c.epsilon = *f.epsilon;
  if (f.km) c.km = *f.km;
  if (f.lambda) c.lambda = *f.lambda;
  if (f.l2r) c.alpha_l2r = *f.l2r;
  if (f.r2l) c.alpha_r2l = *f.r2l;
  if (f.seed) c.seed = *f.seed;
  return c;
}

// Flag or config path, then `fallback` when given, then NAMER_VOCAB.
std::optional<TokenVocab> load_vocab(const Config& c, const fs::path& fallback = {}) {
  if (!c.vocab_path.empty()) return read_vocab(c.vocab_path);
  if (!fallback.empty() && fs::exists(fallback)) return read_vocab(fallback);
  if (const char* env = std::getenv("NAMER_VOCAB"); env != nullptr && *env != '\0') return read_vocab(env);
  return std::nullopt;
}

TokenVocab require_vocab(const Config& c, const fs::path& fallback = {}) {
  auto v = load_vocab(c, fallback);
  if (!v) throw CLI::ValidationError("--vocab", "no vocabulary: pass --vocab, set vocab_path or NAMER_VOCAB");
  return std::move(*v);
}

std::vector<std::string> read_lines(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoFailure, "cannot open " + path.string());
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw Error(Errc::IoFailure, "cannot write " + path.string());
}

json symbols_json(const std::vector<ClassId>& ids, const TokenVocab& vocab) {
  json a = json::array();
  for (ClassId id : ids) a.push_back(vocab.symbol(id));
  return a;
}

synth::NoiseSpec parse_noise(const std::string& text) {
  std::vector<double> v;
  std::stringstream ss(text);
  for (std::string part; std::getline(ss, part, ',');) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(part, &used));
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw CLI::ValidationError("--noise", "expected numbers f,s,t[,c[,n]], got " + text);
    }
  }
  if (v.size() < 3 || v.size() > 5) throw CLI::ValidationError("--noise", "expected f,s,t[,c[,n]]");
  synth::NoiseSpec n;
  n.flip_prob = v[0];
  n.spurious_prob = v[1];
  n.temperature = v[2];
  if (v.size() > 3) n.conn_noise = v[3];
  if (v.size() > 4) n.self_noise = v[4];
  if (n.temperature <= 0.0) throw CLI::ValidationError("--noise", "temperature must be positive");
  return n;
}

struct DecodeFiles {
  fs::path probs, self, left, right;
};

DecodeResult decode_files(const DecodeFiles& f, const TokenVocab& vocab, const DecodeConfig& dc) {
  Grid probs = as_grid(read_tensor(f.probs));
  ScoreMatrix self = as_matrix(read_tensor(f.self));
  ScoreMatrix left = as_matrix(read_tensor(f.left));
  ScoreMatrix right = as_matrix(read_tensor(f.right));
  return decode_full(probs, self, left, right, vocab, dc);
}

std::string sample_name(std::size_t i) {
  std::ostringstream s;
  s << std::setw(6) << std::setfill('0') << i;
  return s.str();
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Graph decoding toolkit for handwritten math recognition", "namer"};
  app.require_subcommand(1);
  app.fallthrough();

  Flags flags;
  app.add_option("--config", flags.config_file, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("--vocab", flags.vocab, "vocab file (symbol<TAB>role)");
  app.add_option("--epsilon", flags.epsilon, "edge pruning threshold [0.5]");
  app.add_option("--km", flags.km, "matching window size [5]");
  app.add_option("--lambda", flags.lambda, "PGD loss weight [0.5]");
  app.add_option("--l2r", flags.l2r, "right-head edge weight [1.0]");
  app.add_option("--r2l", flags.r2l, "left-head edge weight [1.0]");
  app.add_option("--seed", flags.seed, "generator seed [0]");

  auto* cmd_config = app.add_subcommand("config", "print the effective configuration");

  auto* cmd_vocab = app.add_subcommand("vocab", "build a vocab from a label corpus");
  std::string labels_path, vocab_out;
  cmd_vocab->add_option("--labels", labels_path, "one LaTeX label per line")->required();
  cmd_vocab->add_option("--out", vocab_out, "write here instead of stdout");

  auto* cmd_parse = app.add_subcommand("parse", "LaTeX to canonical tokens");
  std::string parse_latex_text;
  cmd_parse->add_option("--latex", parse_latex_text)->required();

  auto* cmd_emit = app.add_subcommand("emit", "canonical tokens to LaTeX");
  std::string emit_tokens;
  bool emit_repair = false;
  cmd_emit->add_option("--tokens", emit_tokens, "space-separated symbols, '}' for ending tokens")->required();
  cmd_emit->add_flag("--repair", emit_repair, "drop stray ends and close open groups");

  auto* cmd_match = app.add_subcommand("match", "assign training targets");
  std::string m_probs, m_attn, m_label, m_out, m_self, m_left, m_right;
  cmd_match->add_option("--probs", m_probs)->required()->check(CLI::ExistingFile);
  cmd_match->add_option("--attn", m_attn)->required()->check(CLI::ExistingFile);
  cmd_match->add_option("--label", m_label, "LaTeX label")->required();
  cmd_match->add_option("--out", m_out, "one-hot target grid (NAMT)");
  cmd_match->add_option("--self", m_self, "self head, for PGD loss")->check(CLI::ExistingFile);
  cmd_match->add_option("--left", m_left)->check(CLI::ExistingFile);
  cmd_match->add_option("--right", m_right)->check(CLI::ExistingFile);

  auto* cmd_decode = app.add_subcommand("decode", "decode score tensors to LaTeX");
  DecodeFiles d_files;
  std::string d_dot, d_dir;
  bool d_logits = false;
  cmd_decode->add_option("--probs", d_files.probs)->check(CLI::ExistingFile);
  cmd_decode->add_option("--self", d_files.self)->check(CLI::ExistingFile);
  cmd_decode->add_option("--left", d_files.left)->check(CLI::ExistingFile);
  cmd_decode->add_option("--right", d_files.right)->check(CLI::ExistingFile);
  cmd_decode->add_option("--dot", d_dot, "write the pruned graph as DOT");
  cmd_decode->add_option("--dir", d_dir, "sample directory written by gen")->check(CLI::ExistingDirectory);
  cmd_decode->add_flag("--logits", d_logits, "grid holds logits");

  auto* cmd_eval = app.add_subcommand("eval", "ExpRate and edit-distance tolerances");
  std::string e_pred, e_ref;
  cmd_eval->add_option("--pred", e_pred)->required()->check(CLI::ExistingFile);
  cmd_eval->add_option("--ref", e_ref)->required()->check(CLI::ExistingFile);

  auto* cmd_gen = app.add_subcommand("gen", "write synthetic samples");
  std::size_t g_count = 1;
  int g_depth = 2;
  std::string g_noise = "0,0,0.1", g_out;
  std::size_t g_height = synth::kDefaultHeight, g_width = synth::kDefaultWidth;
  cmd_gen->add_option("--count", g_count)->check(CLI::NonNegativeNumber);
  cmd_gen->add_option("--depth", g_depth)->check(CLI::NonNegativeNumber);
  cmd_gen->add_option("--noise", g_noise, "flip,spurious,temperature[,conn[,self]]");
  cmd_gen->add_option("--height", g_height)->check(CLI::PositiveNumber);
  cmd_gen->add_option("--width", g_width)->check(CLI::PositiveNumber);
  cmd_gen->add_option("--out", g_out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return 2;
  }

  try {
    Config config = effective_config(flags);
    DecodeConfig dc{config.epsilon, config.alpha_l2r, config.alpha_r2l, d_logits};

    if (*cmd_config) {
      out << to_json(config) << "\n";
    } else if (*cmd_vocab) {
      TokenVocab vocab = build_vocab(read_lines(labels_path));
      if (vocab_out.empty()) {
        out << format_vocab(vocab);
      } else {
        write_vocab(vocab, vocab_out);
      }
    } else if (*cmd_parse) {
      json j;
      if (auto vocab = load_vocab(config)) {
        auto seq = parse_latex(parse_latex_text, *vocab);
        j["tokens"] = symbols_json(seq.tokens, *vocab);
        j["ids"] = seq.tokens;
      } else {
        j["tokens"] = parse_symbols(parse_latex_text);
      }
      out << j.dump() << "\n";
    } else if (*cmd_emit) {
      TokenVocab vocab = require_vocab(config);
      CanonicalTokenSeq seq;
      std::istringstream ss(emit_tokens);
      for (std::string sym; ss >> sym;) seq.tokens.push_back(vocab.id_of(sym));
      out << (emit_repair ? emit_latex_repaired(seq.tokens, vocab) : emit_latex(seq, vocab)) << "\n";
    } else if (*cmd_match) {
      TokenVocab vocab = require_vocab(config);
      Grid probs = as_grid(read_tensor(m_probs));
      AttentionStack attn = as_attention(read_tensor(m_attn));
      CanonicalTokenSeq label = parse_latex(m_label, vocab);
      AssignmentTarget t = match_targets(probs, attn, label, vocab, config.km);
      json j;
      j["height"] = t.height;
      j["width"] = t.width;
      j["grid"] = t.grid;
      json cells = json::array();
      for (const auto& c : t.node_cells) cells.push_back({c.row, c.col});
      j["node_cells"] = cells;
      j["self"] = symbols_json(t.nodes.self, vocab);
      j["left"] = t.nodes.left;
      j["right"] = t.nodes.right;
      const double vat = loss_vat(probs, t.grid);
      j["loss_vat"] = vat;
      if (!m_self.empty() && !m_left.empty() && !m_right.empty()) {
        PgdLoss pgd = loss_pgd(as_matrix(read_tensor(m_self)), as_matrix(read_tensor(m_left)),
                               as_matrix(read_tensor(m_right)), t.nodes);
        j["loss_pgd"] = {{"self", pgd.self}, {"left", pgd.left}, {"right", pgd.right}, {"total", pgd.total}};
        j["loss_all"] = loss_all(vat, pgd, config.lambda);
        j["lambda"] = config.lambda;
      }
      if (!m_out.empty()) {
        write_tensor(to_tensor(one_hot_grid(t.grid, probs.channels, t.height, t.width)), m_out);
      }
      out << j.dump() << "\n";
    } else if (*cmd_decode) {
      if (!d_dir.empty()) {
        const fs::path dir = d_dir;
        TokenVocab vocab = require_vocab(config, dir / "vocab.tsv");
        std::ifstream in(dir / "manifest.json");
        if (!in) throw Error(Errc::IoFailure, "cannot open " + (dir / "manifest.json").string());
        json manifest = json::parse(in);
        const auto& samples = manifest.at("samples");
        const auto n = static_cast<std::ptrdiff_t>(samples.size());
        std::vector<std::string> lines(samples.size());
        std::vector<std::string> failures(samples.size());
#pragma omp parallel for schedule(dynamic)
        for (std::ptrdiff_t i = 0; i < n; ++i) {
          const auto& s = samples[static_cast<std::size_t>(i)];
          try {
            DecodeFiles f{dir / s.at("probs").get<std::string>(), dir / s.at("self").get<std::string>(),
                          dir / s.at("left").get<std::string>(), dir / s.at("right").get<std::string>()};
            lines[static_cast<std::size_t>(i)] = decode_files(f, vocab, dc).path.latex;
          } catch (const std::exception& e) {
            failures[static_cast<std::size_t>(i)] = e.what();
          }
        }
        int failed = 0;
        for (std::size_t i = 0; i < lines.size(); ++i) {
          if (!failures[i].empty()) {
            err << "sample " << i << ": " << failures[i] << "\n";
            ++failed;
          }
          out << lines[i] << "\n";
        }
        return failed == 0 ? 0 : 1;
      }
      if (d_files.probs.empty() || d_files.self.empty() || d_files.left.empty() || d_files.right.empty()) {
        err << "error: decode needs --dir or all of --probs --self --left --right\n" << cmd_decode->help();
        return 2;
      }
      TokenVocab vocab = require_vocab(config);
      DecodeResult r = decode_files(d_files, vocab, dc);
      if (!d_dot.empty()) export_dot(r.graph, d_dot, r.path.nodes);
      out << r.path.latex << "\n";
    } else if (*cmd_eval) {
      TokenVocab vocab = require_vocab(config);
      out << to_json(evaluate(read_lines(e_pred), read_lines(e_ref), vocab)) << "\n";
    } else if (*cmd_gen) {
      synth::NoiseSpec noise = parse_noise(g_noise);
      TokenVocab vocab = load_vocab(config).value_or(synth::synth_vocab());
      const fs::path dir = g_out;
      fs::create_directories(dir);
      write_vocab(vocab, dir / "vocab.tsv");
      json manifest;
      manifest["count"] = g_count;
      manifest["seed"] = config.seed;
      manifest["depth"] = g_depth;
      manifest["height"] = g_height;
      manifest["width"] = g_width;
      manifest["noise"] = {{"flip_prob", noise.flip_prob},
                           {"spurious_prob", noise.spurious_prob},
                           {"temperature", noise.temperature},
                           {"conn_noise", noise.conn_noise},
                           {"self_noise", noise.self_noise}};
      manifest["vocab"] = "vocab.tsv";
      manifest["samples"] = json::array();
      std::string labels;
      for (std::size_t i = 0; i < g_count; ++i) {
        const std::uint64_t seed = config.seed + i;
        synth::SynthSample s = synth::make_sample(seed, g_depth, vocab, noise, g_height, g_width);
        const std::string name = sample_name(i);
        json entry = {{"id", name},        {"seed", seed},           {"latex", s.latex},
                      {"flips", s.flips},  {"spurious", s.spurious}, {"probs", name + ".probs.namt"},
                      {"attn", name + ".attn.namt"}, {"self", name + ".self.namt"},
                      {"left", name + ".left.namt"}, {"right", name + ".right.namt"}};
        write_tensor(to_tensor(s.probs), dir / entry["probs"].get<std::string>());
        write_tensor(to_tensor(s.attn), dir / entry["attn"].get<std::string>());
        write_tensor(to_tensor(s.self_probs), dir / entry["self"].get<std::string>());
        write_tensor(to_tensor(s.left), dir / entry["left"].get<std::string>());
        write_tensor(to_tensor(s.right), dir / entry["right"].get<std::string>());
        manifest["samples"].push_back(entry);
        labels += s.latex + "\n";
      }
      write_text(dir / "labels.txt", labels);
      write_text(dir / "manifest.json", manifest.dump(2) + "\n");
      out << "wrote " << g_count << " samples to " << dir.string() << "\n";
    }
  } catch (const CLI::ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace namer::cli
