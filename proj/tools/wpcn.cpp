#include <CLI11.hpp>

#include "wpcn/cli.hpp"

namespace {

void add_common(CLI::App* sub, wpcn::cli::RunManifest& m, std::string& format,
                std::string& grid) {
    sub->add_option("--config", m.config_path, "JSON config file (defaults when omitted)");
    sub->add_option("--seed", m.seed, "master RNG seed");
    sub->add_option("--out", m.output_path, "output file (stdout when omitted)");
    sub->add_option("--format", format, "output format")
        ->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--grid", grid, "grid size as <n_alpha>x<n_beta>");
}

bool parse_grid(const std::string& grid, wpcn::cli::RunManifest& m) {
    if (grid.empty()) return true;
    const auto x = grid.find('x');
    if (x == std::string::npos) return false;
    try {
        m.grid_alpha = std::stoi(grid.substr(0, x));
        m.grid_beta = std::stoi(grid.substr(x + 1));
    } catch (const std::exception&) {
        return false;
    }
    return m.grid_alpha > 0 && m.grid_beta > 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"FDD MU-MISO wireless-powered network: forward model, max-min optimizer, "
                 "Monte-Carlo verification"};
    app.require_subcommand(1);

    wpcn::cli::RunManifest manifest;
    std::string format = "csv";
    std::string grid;
    std::string m_list;

    auto* forward = app.add_subcommand("forward", "Table-I style sub-scenario rates");
    forward->add_option("--trials", manifest.trials, "Monte-Carlo realizations per scenario")
        ->check(CLI::PositiveNumber);
    add_common(forward, manifest, format, grid);

    auto* optimize = app.add_subcommand("optimize", "run the max-min throughput optimizer");
    optimize->add_flag("--oracle", manifest.with_oracle, "append the grid-search optimum");
    optimize->add_flag("--asymptotic-init", manifest.asymptotic_init,
                       "initialize from the large-M closed forms");
    add_common(optimize, manifest, format, grid);

    auto* sweep = app.add_subcommand("sweep-m", "optimum versus HAP antenna count");
    sweep->add_option("--m-list", m_list, "comma-separated antenna counts");
    sweep->add_flag("--asymptotic-init", manifest.asymptotic_init,
                    "initialize from the large-M closed forms");
    add_common(sweep, manifest, format, grid);

    auto* surface = app.add_subcommand("surface", "WIT rate surface over (alpha, beta)");
    add_common(surface, manifest, format, grid);

    auto* asym = app.add_subcommand("asymptotics", "large-M closed-form values");
    add_common(asym, manifest, format, grid);

    auto* oracle = app.add_subcommand("oracle", "standalone grid-search optimum");
    add_common(oracle, manifest, format, grid);

    CLI11_PARSE(app, argc, argv);

    if (forward->parsed()) manifest.command = wpcn::cli::Command::forward;
    if (optimize->parsed()) manifest.command = wpcn::cli::Command::optimize;
    if (sweep->parsed()) manifest.command = wpcn::cli::Command::sweep_m;
    if (surface->parsed()) manifest.command = wpcn::cli::Command::surface;
    if (asym->parsed()) manifest.command = wpcn::cli::Command::asymptotics;
    if (oracle->parsed()) manifest.command = wpcn::cli::Command::oracle;

    manifest.format = format == "json" ? wpcn::cli::Format::json : wpcn::cli::Format::csv;
    if (!parse_grid(grid, manifest)) {
        std::cerr << "error: --grid expects <n>x<n> with positive sizes\n";
        return wpcn::cli::kExitConfig;
    }
    if (!m_list.empty()) {
        manifest.m_list.clear();
        std::stringstream ss(m_list);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            try {
                manifest.m_list.push_back(std::stoi(tok));
            } catch (const std::exception&) {
                std::cerr << "error: --m-list expects comma-separated integers\n";
                return wpcn::cli::kExitConfig;
            }
        }
    }
    return wpcn::cli::run(manifest);
}
