// rppg_bench: synth / preprocess / run / evaluate front end.

#include <charconv>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "rppg/error.hpp"
#include "rppg/pipeline.hpp"

namespace {

// CLI11 maps dotted TOML keys and [sections] onto subcommands; the config
// keys here are plain options whose names contain the dots.
class FlatToml : public CLI::ConfigTOML {
 public:
  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    std::vector<CLI::ConfigItem> out;
    for (auto& item : CLI::ConfigTOML::from_config(input)) {
      if (item.name == "++" || item.name == "--") continue;
      if (!item.parents.empty()) {
        std::string name;
        for (const auto& p : item.parents) name += p + ".";
        item.name = name + item.name;
        item.parents.clear();
      }
      out.push_back(std::move(item));
    }
    return out;
  }
};

std::array<double, 3> parse_signature(const std::string& text) {
  std::array<double, 3> v{};
  std::stringstream in(text);
  std::string field;
  std::size_t i = 0;
  while (std::getline(in, field, ',')) {
    if (i == 3) break;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v[i]);
    if (ec != std::errc() || ptr != field.data() + field.size()) {
      rppg::fail(rppg::ErrorCode::kConfigInvalid, "pbv.signature: bad number '" + field + "'");
    }
    ++i;
  }
  if (i != 3 || std::getline(in, field)) {
    rppg::fail(rppg::ErrorCode::kConfigInvalid, "pbv.signature needs three comma-separated numbers");
  }
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Camera-based physiological measurement benchmark"};
  app.config_formatter(std::make_shared<FlatToml>());
  app.set_config("--config", "", "TOML-style key = value config file");
  app.require_subcommand(1);

  rppg::RunConfig cfg;
  std::string output = cfg.output_dir.string();
  std::vector<std::string> methods = {"green", "ica", "chrom", "pos", "pbv", "lgi"};
  std::string chunk_mode = "video";
  std::string pbv_signature;

  app.add_option("--output", output, "Output directory")->capture_default_str();
  app.add_option("--jobs", cfg.jobs, "Worker threads (0 = all cores)")->capture_default_str();
  app.add_option("--seed", cfg.seed, "Global seed")->capture_default_str();
  app.add_option("--manifests", cfg.manifests, "Manifest paths or glob patterns");
  app.add_option("--methods", methods, "Methods: green ica chrom pos pbv lgi")->capture_default_str();
  app.add_option("--chunk_mode", chunk_mode, "video | chunk")->capture_default_str();
  app.add_option("--chunk_len", cfg.chunk_len, "Frames per chunk")->capture_default_str();
  app.add_option("--filter.order", cfg.post.filter_order, "Butterworth design order")->capture_default_str();
  app.add_option("--filter.low_hz", cfg.post.low_hz, "Bandpass low edge (Hz)")->capture_default_str();
  app.add_option("--filter.high_hz", cfg.post.high_hz, "Bandpass high edge (Hz)")->capture_default_str();
  app.add_option("--detrend.enabled", cfg.post.detrend_enabled, "Detrend before filtering")->capture_default_str();
  app.add_option("--detrend.lambda", cfg.post.detrend_lambda, "Smoothness-priors lambda")->capture_default_str();
  app.add_option("--hr.pad_factor", cfg.post.pad_factor, "FFT zero-padding factor")->capture_default_str();
  app.add_option("--pbv.signature", pbv_signature, "Fixed PBV signature r,g,b");

  auto* preprocess = app.add_subcommand("preprocess", "Chunk recordings into the binary cache");
  auto* run = app.add_subcommand("run", "Estimate heart rates for every recording and method");
  auto* evaluate = app.add_subcommand("evaluate", "Aggregate a results CSV into MAE/RMSE/MAPE/Pearson");
  auto* synth = app.add_subcommand("synth", "Generate synthetic recordings from a batch file");
  std::string results_path;
  std::string batch_path;
  evaluate->add_option("results", results_path, "Per-video results CSV")->required();
  synth->add_option("batch", batch_path, "Synth batch JSON")->required();
  for (auto* sub : {preprocess, run, evaluate, synth}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : rppg::kExitUsage;
  }

  try {
    cfg.output_dir = output;
    cfg.methods.clear();
    for (const auto& m : methods) cfg.methods.push_back(rppg::parse_method(m));
    cfg.chunk_mode = rppg::parse_chunk_mode(chunk_mode);
    if (!pbv_signature.empty()) cfg.pbv_signature = parse_signature(pbv_signature);

    if (*preprocess) {
      const auto out = rppg::cmd_preprocess(cfg);
      std::cout << out.recordings_ok << " recordings, " << out.chunks << " chunks -> " << out.index_file.string()
                << "\n";
      for (const auto& e : out.exclusions) std::cerr << "excluded " << e.video_id << " [" << e.stage << "] " << e.error << "\n";
      return out.exit_code;
    }
    if (*run) {
      const auto out = rppg::cmd_run(cfg);
      std::cout << out.results.size() << " results -> " << out.results_file.string() << "\n";
      for (const auto& e : out.exclusions) std::cerr << "excluded " << e.video_id << " [" << e.stage << "] " << e.error << "\n";
      return out.exit_code;
    }
    if (*evaluate) {
      const auto out = rppg::cmd_evaluate(results_path, cfg.output_dir);
      std::cout << out.markdown;
      return rppg::kExitOk;
    }
    if (*synth) {
      std::optional<std::uint64_t> seed;
      if (app.get_option("--seed")->count() > 0) seed = cfg.seed;
      const auto out = rppg::cmd_synth(batch_path, cfg.output_dir, seed, cfg.jobs);
      for (const auto& m : out.manifests) std::cout << m.string() << "\n";
      return rppg::kExitOk;
    }
  } catch (const rppg::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return rppg::kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return rppg::kExitPartial;
  }
  return rppg::kExitUsage;
}
