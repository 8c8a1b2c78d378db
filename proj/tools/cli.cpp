#include "cli.hpp"

#include "itq3/acceptance.hpp"
#include "itq3/codec.hpp"
#include "itq3/compute.hpp"
#include "itq3/container.hpp"
#include "itq3/error.hpp"
#include "itq3/report.hpp"
#include "itq3/synthetic.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

namespace itq3::cli {

namespace {

struct ConfigFlags {
  std::size_t block = 256;
  std::string variant = "s";
  std::string policy = "paper";
  std::string symmetric = "true";
};

struct GenFlags {
  std::string dist = "gaussian";
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::uint64_t seed = 0;
  double sigma = 1.0;
  double nu = 3.0;
  double outlier_frac = 0.01;
  double outlier_mult = 20.0;
};

void add_config_flags(CLI::App *cmd, ConfigFlags &f) {
  cmd->add_option("--block", f.block, "Block size")
      ->check(CLI::IsMember({32, 64, 128, 256, 512}));
  cmd->add_option("--variant", f.variant, "Block layout: s (100 B) or ss (116 B)")
      ->check(CLI::IsMember({"s", "ss"}));
  cmd->add_option("--policy", f.policy, "Scale rule")
      ->check(CLI::IsMember({"paper", "argmin", "meanabs"}));
  cmd->add_option("--symmetric", f.symmetric, "Force zero-point 0")
      ->check(CLI::IsMember({"true", "false"}));
}

void add_gen_flags(CLI::App *cmd, GenFlags &f, bool dims_required) {
  cmd->add_option("--dist", f.dist, "gaussian|laplace|student-t|outlier")
      ->check(CLI::IsMember({"gaussian", "laplace", "student-t", "outlier"}));
  auto *rows = cmd->add_option("--rows", f.rows)->check(CLI::PositiveNumber);
  auto *cols = cmd->add_option("--cols", f.cols)->check(CLI::PositiveNumber);
  if (dims_required) {
    rows->required();
    cols->required();
  }
  cmd->add_option("--seed", f.seed);
  cmd->add_option("--sigma", f.sigma)->check(CLI::PositiveNumber);
  cmd->add_option("--nu", f.nu)->check(CLI::PositiveNumber);
  cmd->add_option("--outlier-frac", f.outlier_frac)->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--outlier-mult", f.outlier_mult);
}

codec::QuantConfig to_config(const ConfigFlags &f) {
  codec::QuantConfig cfg;
  cfg.block_n = f.block;
  cfg.variant = f.variant == "ss" ? pack::Variant::SS : pack::Variant::S;
  if (f.policy == "argmin")
    cfg.policy.kind = quant::ScaleKind::NumericArgmin;
  else if (f.policy == "meanabs")
    cfg.policy.kind = quant::ScaleKind::MeanAbs;
  cfg.symmetric = f.symmetric == "true";
  return cfg;
}

synth::GeneratorSpec to_spec(const GenFlags &f) {
  synth::GeneratorSpec spec;
  spec.dist = *synth::parse_distribution(f.dist);
  spec.rows = f.rows;
  spec.cols = f.cols;
  spec.seed = f.seed;
  spec.sigma = f.sigma;
  spec.nu = f.nu;
  spec.outlier_frac = f.outlier_frac;
  spec.outlier_mult = f.outlier_mult;
  return spec;
}

std::vector<std::size_t> parse_block_list(const std::string &list) {
  std::vector<std::size_t> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t v = 0;
    try {
      std::size_t used = 0;
      v = std::stoul(item, &used);
      if (used != item.size())
        throw std::invalid_argument(item);
    } catch (const std::exception &) {
      throw Error(ErrorKind::Usage, "--blocks entry '" + item + "' is not an integer");
    }
    if (!codec::is_valid_block_size(v))
      throw Error(ErrorKind::Usage, "--blocks entry " + item + " is not one of 32..512");
    out.push_back(v);
  }
  if (out.empty())
    throw Error(ErrorKind::Usage, "--blocks is empty");
  return out;
}

void emit(const std::string &text, const std::string &path, std::ostream &out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f)
    throw Error(ErrorKind::Io, "cannot open " + path + " for writing");
  f << text;
  if (!f)
    throw Error(ErrorKind::Io, "failed to write " + path);
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
  case ErrorKind::Io:
  case ErrorKind::BadMagic:
  case ErrorKind::UnsupportedVersion:
  case ErrorKind::Truncated:
  case ErrorKind::SizeMismatch:
  case ErrorKind::Corruption:
    return kExitIo;
  default:
    return kExitValidation;
  }
}

} // namespace

int run(std::span<const std::string> args, std::ostream &out, std::ostream &err) {
  CLI::App app{"Rotation-domain ternary weight codec"};
  app.require_subcommand(1);

  GenFlags gen;
  std::string gen_out;
  auto *gen_cmd = app.add_subcommand("gen", "Write synthetic binary32 weights");
  add_gen_flags(gen_cmd, gen, true);
  gen_cmd->add_option("--out", gen_out)->required();

  std::string q_in, q_out;
  std::size_t q_rows = 0, q_cols = 0;
  ConfigFlags q_cfg;
  auto *quant_cmd = app.add_subcommand("quantize", "Raw binary32 weights -> container");
  quant_cmd->add_option("--in", q_in)->required();
  quant_cmd->add_option("--rows", q_rows)->required()->check(CLI::PositiveNumber);
  quant_cmd->add_option("--cols", q_cols)->required()->check(CLI::PositiveNumber);
  quant_cmd->add_option("--out", q_out)->required();
  add_config_flags(quant_cmd, q_cfg);

  std::string d_in, d_out;
  auto *deq_cmd = app.add_subcommand("dequantize", "Container -> raw binary32 weights");
  deq_cmd->add_option("--in", d_in)->required();
  deq_cmd->add_option("--out", d_out)->required();

  std::string e_ref, e_quant, e_report, e_format = "json";
  std::size_t e_rows = 0, e_cols = 0;
  ConfigFlags e_cfg;
  auto *eval_cmd = app.add_subcommand("eval", "Error report against reference weights");
  eval_cmd->add_option("--ref", e_ref)->required();
  eval_cmd->add_option("--rows", e_rows)->required()->check(CLI::PositiveNumber);
  eval_cmd->add_option("--cols", e_cols)->required()->check(CLI::PositiveNumber);
  eval_cmd->add_option("--quant", e_quant, "Container to evaluate; quantizes on the fly if absent");
  eval_cmd->add_option("--report", e_report, "Output path (default stdout)");
  eval_cmd->add_option("--format", e_format)->check(CLI::IsMember({"json", "csv"}));
  add_config_flags(eval_cmd, e_cfg);

  GenFlags a_gen;
  a_gen.dist = "outlier";
  a_gen.rows = 256;
  a_gen.cols = 1024;
  std::string a_blocks = "32,64,128,256,512", a_report, a_format = "json";
  ConfigFlags a_cfg;
  auto *abl_cmd = app.add_subcommand("ablate", "Block size sweep on synthetic weights");
  add_gen_flags(abl_cmd, a_gen, false);
  abl_cmd->add_option("--blocks", a_blocks, "Comma-separated block sizes");
  abl_cmd->add_option("--report", a_report, "Output path (default stdout)");
  abl_cmd->add_option("--format", a_format)->check(CLI::IsMember({"json", "csv"}));
  abl_cmd->add_option("--variant", a_cfg.variant)->check(CLI::IsMember({"s", "ss"}));
  abl_cmd->add_option("--policy", a_cfg.policy)
      ->check(CLI::IsMember({"paper", "argmin", "meanabs"}));

  std::vector<int> s_criteria;
  std::uint64_t s_seed = acceptance::Options{}.seed;
  auto *self_cmd = app.add_subcommand("selfcheck", "Run the embedded acceptance checks");
  self_cmd->add_option("--criteria", s_criteria, "Subset of criteria ids (default all)")
      ->delimiter(',')
      ->check(CLI::Range(1, acceptance::kCriterionCount));
  self_cmd->add_option("--seed", s_seed);

  std::vector<const char *> argv;
  argv.push_back("itq3");
  for (const std::string &a : args)
    argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp &) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp &) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError &e) {
    err << app.help();
    err << "itq3: error[" << error_id(ErrorKind::Usage) << "]: " << e.what() << '\n';
    return kExitValidation;
  }

  try {
    if (*gen_cmd) {
      container::write_raw_f32(synth::generate(to_spec(gen)), gen_out);
    } else if (*quant_cmd) {
      const codec::Matrix w = container::read_raw_f32(q_in, q_rows, q_cols);
      container::write_file(codec::quantize_tensor(w, to_config(q_cfg)), q_out);
    } else if (*deq_cmd) {
      container::write_raw_f32(codec::dequantize_tensor(container::read_file(d_in)), d_out);
    } else if (*eval_cmd) {
      const codec::Matrix w = container::read_raw_f32(e_ref, e_rows, e_cols);
      const codec::QuantConfig cfg = to_config(e_cfg);
      const compute::ErrorReport r =
          e_quant.empty() ? compute::eval_error(w, cfg)
                          : compute::eval_error(w, container::read_file(e_quant), cfg.policy);
      const std::string text = e_format == "csv"
                                   ? report::to_csv(std::span(&r, 1))
                                   : report::to_json(r).dump(2) + "\n";
      emit(text, e_report, out);
    } else if (*abl_cmd) {
      const std::vector<std::size_t> sweep = parse_block_list(a_blocks);
      const auto rows = compute::ablate_block_size(to_spec(a_gen), sweep, to_config(a_cfg));
      std::string text;
      if (a_format == "csv") {
        text = report::to_csv(std::span(rows));
      } else {
        nlohmann::ordered_json j = nlohmann::ordered_json::array();
        for (const auto &row : rows)
          j.push_back(report::to_json(row));
        text = j.dump(2) + "\n";
      }
      emit(text, a_report, out);
    } else if (*self_cmd) {
      const std::vector<int> ids = s_criteria.empty() ? acceptance::all_criteria() : s_criteria;
      acceptance::Options opts;
      opts.seed = s_seed;
      bool all = true;
      for (const int id : ids) {
        const acceptance::CheckResult r = acceptance::run_criterion(id, opts);
        out << acceptance::format(r) << '\n' << std::flush;
        all = all && r.passed;
      }
      if (!all) {
        err << "itq3: error[E_SELFCHECK]: one or more properties failed\n";
        return kExitValidation;
      }
    }
  } catch (const Error &e) {
    err << "itq3: error[" << e.id() << "]: " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const std::exception &e) {
    err << "itq3: error[E_INTERNAL]: " << e.what() << '\n';
    return kExitIo;
  }
  return kExitOk;
}

} // namespace itq3::cli
