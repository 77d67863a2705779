// pqtqkd command-line driver.
//
// Subcommands:
//   run     execute the protocol and write transcript + summary
//   attack  run with an active eavesdropper and write the audit trail
//   scan    evaluate F = P_wrong * P_final over an (n1, n2) grid
//   verify  run the analytic / oracle / Monte Carlo comparison suite
//   oracle  print exhaustive-enumeration marginals for a configuration
//
// Exit codes: 0 success, 1 verification failure, 2 configuration error,
// 3 I/O failure.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "pqtqkd/analysis.hpp"
#include "pqtqkd/config.hpp"
#include "pqtqkd/io.hpp"
#include "pqtqkd/protocol.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitVerifyFailed = 1;
constexpr int kExitConfigError = 2;
constexpr int kExitIoError = 3;

struct CommonOptions {
    std::string config_path;
    std::string output_dir = ".";
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> rounds;
    std::optional<std::string> mode;
    std::optional<std::string> attack;
    bool charlie_discloses = true;
    std::optional<int> withhold_station;
    int threads = 1;
};

void add_common_options(CLI::App& cmd, CommonOptions& opts) {
    cmd.add_option("--config", opts.config_path, "key=value config file");
    cmd.add_option("--out", opts.output_dir, "output directory");
    cmd.add_option("--seed", opts.seed, "seed override");
    cmd.add_option("--rounds", opts.rounds, "round count override");
    cmd.add_option("--mode", opts.mode, "standard | controlled | repeater");
    cmd.add_option("--attack", opts.attack,
                   "passive | intercept | fake_source");
    cmd.add_option("--charlie-discloses", opts.charlie_discloses,
                   "whether Charlie reveals his parameter choices");
    cmd.add_option("--withhold-station", opts.withhold_station,
                   "repeater station index refusing disclosure");
    cmd.add_option("--threads", opts.threads, "worker count cap (default 1)")
        ->check(CLI::PositiveNumber);
}

pqtqkd::SimulationConfig resolve_config(const CommonOptions& opts) {
    pqtqkd::SimulationConfig cfg;
    if (!opts.config_path.empty()) cfg = pqtqkd::load_config(opts.config_path);
    if (opts.seed) cfg.protocol.seed = *opts.seed;
    if (opts.rounds) cfg.protocol.num_rounds = *opts.rounds;
    if (opts.mode) pqtqkd::apply_config_line(cfg, "mode", *opts.mode);
    if (opts.attack) pqtqkd::apply_config_line(cfg, "attack", *opts.attack);
    if (opts.withhold_station)
        cfg.protocol.withholding_station = *opts.withhold_station;
    cfg.charlie_discloses = opts.charlie_discloses;
    return cfg;
}

std::ofstream open_output(const std::filesystem::path& dir,
                          const std::string& name) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw std::ios_base::failure("cannot create output directory");
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw std::ios_base::failure("cannot open output file " + name);
    return out;
}

pqtqkd::Transcript execute(const pqtqkd::SimulationConfig& cfg) {
    using Mode = pqtqkd::ProtocolConfig::Mode;
    const auto attack = cfg.resolved_attack();
    switch (cfg.protocol.mode) {
        case Mode::Controlled:
            return pqtqkd::controlled_run(cfg.protocol, attack,
                                          cfg.charlie_discloses);
        case Mode::Repeater:
            return pqtqkd::repeater_run(cfg.protocol, attack);
        case Mode::Standard:
        default:
            return pqtqkd::run_protocol(cfg.protocol, attack);
    }
}

int do_run(const CommonOptions& opts, bool require_attack) {
    const auto cfg = resolve_config(opts);
    if (require_attack &&
        cfg.attack.kind == pqtqkd::AttackModel::Kind::Passive) {
        std::cerr << "attack subcommand requires attack != passive\n";
        return kExitConfigError;
    }
    const auto transcript = execute(cfg);
    auto out = open_output(opts.output_dir, "transcript.txt");
    pqtqkd::write_transcript(out, transcript);
    std::cout << "rounds=" << cfg.protocol.num_rounds
              << " sifted=" << transcript.sifted_count
              << " key_length=" << transcript.alice_key.size()
              << " qber=" << transcript.qber
              << " aborted=" << (transcript.aborted ? 1 : 0) << '\n';
    if (const auto info = pqtqkd::eve_information(transcript))
        std::cout << "eve_information=" << *info << '\n';
    return kExitOk;
}

int do_scan(double min, double max, double step,
            const std::string& output_dir) {
    const pqtqkd::GridSpec grid{min, max, step};
    const auto result = pqtqkd::scan(grid);
    auto out = open_output(output_dir, "scan.csv");
    pqtqkd::write_scan_csv(out, result);
    std::cout << "argmax n1=" << result.argmax.n1
              << " n2=" << result.argmax.n2
              << " objective=" << result.argmax.objective << '\n';
    return kExitOk;
}

int do_oracle(const CommonOptions& opts) {
    const auto cfg = resolve_config(opts);
    const auto attack = cfg.resolved_attack();
    const auto oracle = pqtqkd::exhaustive_oracle(
        cfg.protocol.channel_params, attack.kind, attack.guess_pool);
    auto out = open_output(opts.output_dir, "oracle.csv");
    out << "statistic,value\n" << std::setprecision(17);
    out << "total_mass," << oracle.total_mass() << '\n';
    out << "p_sifted," << oracle.p_sifted() << '\n';
    out << "qber," << oracle.qber() << '\n';
    out << "p_basis_match," << oracle.p_basis_match() << '\n';
    if (const auto v = oracle.eve_information())
        out << "eve_information," << *v << '\n';
    if (const auto v = oracle.eve_match_rate())
        out << "eve_match_rate," << *v << '\n';
    std::cout << "p_sifted=" << oracle.p_sifted()
              << " qber=" << oracle.qber() << '\n';
    return kExitOk;
}

int do_verify(const CommonOptions& opts, std::uint64_t trials) {
    using pqtqkd::ChannelParam;
    auto cfg = resolve_config(opts);
    bool ok = true;
    auto check = [&ok](const std::string& name, bool pass) {
        std::cout << (pass ? "pass" : "FAIL") << "  " << name << '\n';
        ok = ok && pass;
    };

    // Closed forms.
    check("p_final_rate(0.5,0.9) ~ 0.203622",
          std::abs(pqtqkd::p_final_rate({ChannelParam(0.5), ChannelParam(0.9)}) -
                   0.203622600042734) < 1e-12);
    check("p_suc(0.5) = 0.32",
          std::abs(pqtqkd::p_suc(ChannelParam(0.5)) - 0.32) < 1e-12);

    // Oracle soundness at the configured parameter point.
    const auto passive_oracle = pqtqkd::exhaustive_oracle(
        cfg.protocol.channel_params, pqtqkd::AttackModel::Kind::Passive);
    check("oracle total mass = 1",
          std::abs(passive_oracle.total_mass() - 1.0) < 1e-12);
    double expected_sift = 0.0;
    const double n_count =
        static_cast<double>(cfg.protocol.channel_params.size());
    for (const auto& p : cfg.protocol.channel_params)
        expected_sift += pqtqkd::p_suc(p) / (n_count * n_count);
    check("oracle sifted rate matches per-parameter accounting",
          std::abs(passive_oracle.p_sifted() - expected_sift) < 1e-12);
    check("oracle passive qber = 0", passive_oracle.qber() < 1e-12);

    // Monte Carlo against the oracle, passive and intercept.
    pqtqkd::AttackModel passive;
    const auto passive_stats = pqtqkd::monte_carlo(cfg.protocol, passive, trials);
    const auto passive_report =
        pqtqkd::compare_report(passive_stats, passive_oracle);
    for (const auto& row : passive_report.rows)
        check("passive mc: " + row.name, row.pass);
    bool z_ok = true;
    for (const auto& [name, z] : passive_stats.z_scores)
        z_ok = z_ok && std::abs(z) < pqtqkd::kSigmaPolicy;
    check("passive mc: all tracked z-scores within policy", z_ok);

    pqtqkd::AttackModel intercept{
        pqtqkd::AttackModel::Kind::InterceptReteleport,
        cfg.protocol.channel_params};
    const auto intercept_oracle = pqtqkd::exhaustive_oracle(
        cfg.protocol.channel_params, intercept.kind, intercept.guess_pool);
    const auto intercept_stats =
        pqtqkd::monte_carlo(cfg.protocol, intercept, trials);
    const auto intercept_report =
        pqtqkd::compare_report(intercept_stats, intercept_oracle);
    for (const auto& row : intercept_report.rows)
        check("intercept mc: " + row.name, row.pass);
    check("intercept oracle qber > 0", intercept_oracle.qber() > 0.0);

    // Scan sanity.
    const auto scan_result = pqtqkd::scan({});
    check("scan argmax at maximal-gap corner",
          std::abs(scan_result.argmax.n1 - scan_result.argmax.n2) > 0.89);

    auto out = open_output(opts.output_dir, "verify_report.csv");
    pqtqkd::write_report_csv(out, passive_report);
    pqtqkd::write_report_csv(out, intercept_report);
    return ok ? kExitOk : kExitVerifyFailed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"partially-entangled-state QKD simulator"};
    app.require_subcommand(1);

    CommonOptions run_opts, attack_opts, verify_opts, oracle_opts;
    auto* run_cmd = app.add_subcommand("run", "execute the protocol");
    add_common_options(*run_cmd, run_opts);
    auto* attack_cmd =
        app.add_subcommand("attack", "execute with an active eavesdropper");
    add_common_options(*attack_cmd, attack_opts);
    auto* verify_cmd =
        app.add_subcommand("verify", "analytic/oracle/Monte-Carlo checks");
    add_common_options(*verify_cmd, verify_opts);
    std::uint64_t trials = 100000;
    verify_cmd->add_option("--trials", trials, "Monte Carlo trial count")
        ->check(CLI::Range(std::uint64_t{1000}, std::uint64_t{10000000}));
    auto* oracle_cmd =
        app.add_subcommand("oracle", "exhaustive enumeration marginals");
    add_common_options(*oracle_cmd, oracle_opts);

    auto* scan_cmd = app.add_subcommand("scan", "rate-security grid scan");
    double grid_min = 0.05, grid_max = 0.95, grid_step = 0.05;
    std::string scan_out = ".";
    scan_cmd->add_option("--min", grid_min, "grid minimum");
    scan_cmd->add_option("--max", grid_max, "grid maximum");
    scan_cmd->add_option("--step", grid_step, "grid step");
    scan_cmd->add_option("--out", scan_out, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfigError;
    }

    try {
        if (run_cmd->parsed()) return do_run(run_opts, false);
        if (attack_cmd->parsed()) return do_run(attack_opts, true);
        if (verify_cmd->parsed()) return do_verify(verify_opts, trials);
        if (oracle_cmd->parsed()) return do_oracle(oracle_opts);
        if (scan_cmd->parsed())
            return do_scan(grid_min, grid_max, grid_step, scan_out);
    } catch (const std::ios_base::failure& e) {
        std::cerr << "i/o error: " << e.what() << '\n';
        return kExitIoError;
    } catch (const std::exception& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return kExitConfigError;
    }
    return kExitConfigError;
}
