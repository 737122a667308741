#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "evplan/io/pipeline.hpp"

namespace fs = std::filesystem;
using namespace evplan;

namespace {

struct Options {
  std::string case_dir = std::string(EVPLAN_DATA_DIR) + "/cases/bundled";
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string format = "json";
  std::string profile;
};

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f || !(f << text)) throw IoError("cannot write " + path.string());
}

void emit(const io::PlanReport& r, const Options& o) {
  if (o.format == "json") {
    const auto text = io::to_json_text(r);
    if (o.out.empty()) std::cout << text;
    else write_file(fs::path(o.out) / "report.json", text);
    return;
  }
  for (const auto& [name, text] : io::to_csv(r)) {
    if (o.out.empty()) std::cout << "# " << name << "\n" << text;
    else write_file(fs::path(o.out) / name, text);
  }
}

template <int P>
io::PlanReport run(const Options& o, io::Stage stage) {
  auto bundle = io::load_case<P>(o.case_dir, o.config, o.seed);
  if (!o.profile.empty()) bundle.ems_profile = io::read_ems_profile(o.profile);
  return io::run_pipeline(bundle, stage);
}

int execute(const Options& o, io::Stage stage) {
  if (!o.out.empty()) {
    std::error_code ec;
    fs::create_directories(o.out, ec);
    if (ec) throw IoError("cannot create " + o.out + ": " + ec.message());
  }
  const auto cfg = o.config.empty() ? (fs::path(o.case_dir) / "params.cfg").string() : o.config;
  const int phases = io::read_params(cfg).phases;
  emit(phases == 1 ? run<1>(o, stage) : run<3>(o, stage), o);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Joint FCS/MCS charging-infrastructure planning on a coupled grid and road network"};
  app.require_subcommand(1);
  Options o;
  std::optional<io::Stage> stage;

  const std::vector<std::pair<io::Stage, std::string>> commands{
      {io::Stage::assess, "Hosting capacity and VSF for every bus, ranked"},
      {io::Stage::paths, "All-pairs shortest road distances"},
      {io::Stage::site, "Multi-period station siting around the top FCS candidate"},
      {io::Stage::size_mcs, "Queueing-based MCS sizing on the sited network"},
      {io::Stage::size_fcs, "Cost-optimal FCS capacity on the sited network"},
      {io::Stage::plan, "Joint FCS/MCS planning by consensus ADMM"},
      {io::Stage::simulate, "Joint plan followed by one day of EMS dispatch"},
      {io::Stage::compare, "Candidate cases and the comparison scenarios"},
      {io::Stage::report, "Every section"}};
  for (const auto& [s, help] : commands) {
    auto* sub = app.add_subcommand(io::to_string(s), help);
    sub->add_option("--case", o.case_dir, "Case directory")->capture_default_str();
    sub->add_option("--config", o.config, "Parameter file (default: <case>/params.cfg)");
    sub->add_option("--seed", o.seed, "Demand generator seed");
    sub->add_option("--out", o.out, "Output directory (default: stdout)");
    sub->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
    if (s == io::Stage::simulate || s == io::Stage::report)
      sub->add_option("--profile", o.profile, "Hourly EMS profile CSV (hour,load_kW,pv_kW,ev_kW[,vg_kW])");
    sub->callback([&stage, s = s] { stage = s; });
  }
  CLI11_PARSE(app, argc, argv);

  try {
    return execute(o, *stage);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
