#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dampwave/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Periodic solutions of a strongly damped wave equation at resonance"};
  app.require_subcommand(1);

  struct Args {
    std::string config;
    std::string out;
    std::vector<std::string> overrides;
  };
  std::vector<Args> args(dampwave::cli::subcommands().size());
  std::vector<CLI::App*> subs;
  for (std::size_t i = 0; i < args.size(); ++i) {
    CLI::App* sub = app.add_subcommand(dampwave::cli::subcommands()[i]);
    sub->add_option("--config", args[i].config, "scenario JSON file")->required();
    sub->add_option("--out", args[i].out, "output directory (overrides output_dir)");
    sub->add_option("--override", args[i].overrides, "dot-path key=value, repeatable");
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "error code=USAGE message=\"" << e.what() << "\"\n";
    return 2;
  }

  for (std::size_t i = 0; i < subs.size(); ++i) {
    if (!subs[i]->parsed()) continue;
    std::optional<std::string> out;
    if (!args[i].out.empty()) out = args[i].out;
    return dampwave::cli::run(subs[i]->get_name(), args[i].config, out, args[i].overrides, std::cerr);
  }
  return 2;
}
