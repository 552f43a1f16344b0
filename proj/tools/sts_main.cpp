// Command-line front end: generation, validation, subsystem reports, the
// doubling step, embedding runs and amalgamation.
//
// Exit codes: 0 complete and verified, 2 truncated but certified,
// 3 verification failure, 4 input or usage error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sts/embedding.hpp"
#include "sts/generators.hpp"
#include "sts/io.hpp"

namespace {

sts::FileFormat parse_format(const std::string& name) {
    if (name == "text") return sts::FileFormat::text;
    if (name == "structured") return sts::FileFormat::structured;
    throw sts::ParseError("unknown format: " + name);
}

sts::VerifyMode parse_verify(const std::string& name) {
    if (name == "full") return sts::VerifyMode::full;
    if (name == "steps") return sts::VerifyMode::steps;
    if (name == "off") return sts::VerifyMode::off;
    throw sts::ParseError("unknown verify mode: " + name);
}

std::string stem_of(const std::string& path) {
    return std::filesystem::path(path).stem().string();
}

std::vector<std::pair<sts::Point, sts::Point>> read_glue_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw sts::Error("cannot open glue file: " + path);
    std::vector<std::pair<sts::Point, sts::Point>> map;
    std::string tag;
    int a, b;
    while (in >> tag >> a >> b) {
        if (tag != "m") throw sts::ParseError("glue lines must be: m <left> <right>");
        map.emplace_back(a, b);
    }
    return map;
}

int run_gen(const std::string& kind, int param, std::uint64_t seed, int blocks,
            std::string out, const std::string& format) {
    sts::PartialSts system;
    if (kind == "pg")
        system = sts::projective_triple_system(param);
    else if (kind == "ag")
        system = sts::affine_triple_system(param);
    else if (kind == "bose")
        system = sts::bose(param);
    else if (kind == "skolem")
        system = sts::skolem(param);
    else if (kind == "hexleave")
        system = sts::partial_with_hexagon_leave(param, seed);
    else if (kind == "random")
        system = sts::random_partial(param, seed, blocks);
    else
        throw sts::ParseError("unknown generator kind: " + kind);
    if (out.empty()) out = kind + std::to_string(param) + ".sts";
    sts::write_system_file(out, {system, {}}, parse_format(format));
    std::cout << "wrote " << out << " order=" << system.order() << " blocks="
              << system.block_count() << "\n";
    return 0;
}

int run_verify(const std::string& path) {
    sts::SystemFile doc = sts::read_system_file(path);
    const auto& s = doc.system;
    if (s.complete())
        std::cout << "complete order=" << s.order() << " blocks=" << s.block_count() << "\n";
    else
        std::cout << "partial order=" << s.order() << " blocks=" << s.block_count()
                  << " leave=" << s.leave_edge_count() << "\n";
    return 0;
}

int run_subsystems(const std::string& path, int max_order) {
    sts::SystemFile doc = sts::read_system_file(path);
    sts::SubsystemLattice lat = sts::enumerate_subsystems(doc.system, max_order);
    for (const auto& rec : lat.records) {
        std::cout << "subsys order=" << rec.order << " points=";
        auto pts = rec.points.to_vector();
        for (std::size_t i = 0; i < pts.size(); ++i) std::cout << (i ? "," : "") << pts[i];
        std::cout << "\n";
    }
    if (lat.truncated && max_order < 0) std::cout << "truncated=1\n";
    return 0;
}

int run_double(const std::string& path, std::uint64_t seed, std::string out,
               const std::string& verify_mode, const std::string& format) {
    sts::SystemFile doc = sts::read_system_file(path);
    sts::LeaveGraph leave = sts::leave_graph(doc.system);
    auto cycle = sts::find_six_cycle(leave);
    if (!cycle) throw sts::BadCycle("input leave contains no 6-cycle");
    sts::DoublingResult res = sts::double_system(doc.system, *cycle, seed);
    if (out.empty()) out = stem_of(path) + ".double.sts";
    sts::write_system_file(out, {res.output, {res.cert.line()}}, parse_format(format));
    std::cout << "wrote " << out << " order=" << res.output.order() << " blocks="
              << res.output.block_count() << "\n";
    sts::VerifyMode mode = parse_verify(verify_mode);
    if (mode != sts::VerifyMode::off) {
        sts::VerificationReport rep = sts::verify_doubling(doc.system, res, *cycle);
        bool ok = mode == sts::VerifyMode::full
                      ? rep.pass()
                      : rep.valid_system && rep.leave_delta_ok;
        std::cout << "verified=" << (ok ? 1 : 0) << "\n";
        if (!ok) {
            for (const auto& f : rep.failures) std::cerr << "failure: " << f << "\n";
            return 3;
        }
    }
    return 0;
}

int finish_run(const sts::EmbeddingRun& run, const std::string& prefix,
               sts::FileFormat fmt) {
    std::ofstream cert(prefix + ".cert");
    for (std::size_t i = 0; i < run.certificates.size(); ++i) {
        const auto& sc = run.certificates[i];
        cert << sc.cert.line() << "\n";
    }
    cert << "run status=";
    switch (run.status) {
        case sts::RunStatus::complete: cert << "complete"; break;
        case sts::RunStatus::truncated: cert << "truncated"; break;
        case sts::RunStatus::failed: cert << "failed"; break;
    }
    cert << " steps=" << run.steps_done << " order=" << run.current.order() << "\n";

    std::cout << "status=";
    switch (run.status) {
        case sts::RunStatus::complete: std::cout << "complete"; break;
        case sts::RunStatus::truncated: std::cout << "truncated"; break;
        case sts::RunStatus::failed: std::cout << "failed"; break;
    }
    std::cout << " steps=" << run.steps_done << "/" << run.plan.cycles.size()
              << " order=" << run.current.order() << "\n";
    if (run.status == sts::RunStatus::failed) {
        std::cerr << "failure at step " << run.failed_step << ": " << run.failure << "\n";
        return 3;
    }
    (void)fmt;
    return run.status == sts::RunStatus::complete ? 0 : 2;
}

int run_embed(const std::string& path, int steps, const std::string& verify_mode,
              std::uint64_t seed, int max_order, std::string prefix,
              const std::string& format) {
    sts::SystemFile doc = sts::read_system_file(path);
    if (prefix.empty()) prefix = stem_of(path);
    sts::FileFormat fmt = parse_format(format);

    sts::EmbedOptions eopts;
    eopts.seed = seed;
    sts::RunOptions ropts;
    ropts.step_limit = steps;
    ropts.verify = parse_verify(verify_mode);
    ropts.seed = seed;
    if (max_order > 0) {
        if (ropts.verify == sts::VerifyMode::off)
            ropts.construct_order_cap = max_order;
        else
            ropts.verify_order_cap = max_order;
    }
    int written = 0;
    ropts.on_step = [&](int step, const sts::PartialSts& cur) -> std::string {
        sts::write_system_file(prefix + ".step" + std::to_string(step) + ".sts", {cur, {}}, fmt);
        written = step;
        return {};
    };
    sts::EmbeddingRun run = sts::run_embedding(sts::plan_embedding(doc.system, eopts), ropts);
    (void)written;
    return finish_run(run, prefix, fmt);
}

int run_amalgamate(const std::string& left_path, const std::string& right_path,
                   const std::string& glue_path, const std::vector<std::string>& forbid_paths,
                   const std::string& witness_path, int steps, const std::string& verify_mode,
                   std::uint64_t seed, int max_order, std::string prefix,
                   const std::string& format) {
    sts::AmalgamationProblem problem;
    problem.left = sts::read_system_file(left_path).system;
    problem.right = sts::read_system_file(right_path).system;
    if (!glue_path.empty()) problem.overlap = read_glue_file(glue_path);
    for (const auto& f : forbid_paths)
        problem.forbidden.push_back(sts::read_system_file(f).system);
    if (!witness_path.empty()) problem.witness = sts::read_system_file(witness_path).system;
    if (prefix.empty()) prefix = stem_of(left_path) + "+" + stem_of(right_path);
    sts::FileFormat fmt = parse_format(format);

    sts::EmbedOptions eopts;
    eopts.seed = seed;
    sts::RunOptions ropts;
    ropts.step_limit = steps;
    ropts.verify = parse_verify(verify_mode);
    ropts.seed = seed;
    if (max_order > 0) {
        if (ropts.verify == sts::VerifyMode::off)
            ropts.construct_order_cap = max_order;
        else
            ropts.verify_order_cap = max_order;
    }
    ropts.on_step = [&](int step, const sts::PartialSts& cur) -> std::string {
        sts::write_system_file(prefix + ".step" + std::to_string(step) + ".sts", {cur, {}}, fmt);
        return {};
    };
    sts::AmalgamationOutcome out = sts::amalgamate(problem, ropts, eopts);
    return finish_run(out.run, prefix, fmt);
}

int run_iso(const std::string& a_path, const std::string& b_path) {
    sts::PartialSts a = sts::read_system_file(a_path).system;
    sts::PartialSts b = sts::read_system_file(b_path).system;
    std::cout << "isomorphic=" << (sts::are_isomorphic(a, b) ? 1 : 0) << "\n";
    return 0;
}

int run_free(const std::string& path, const std::vector<std::string>& forbid_paths) {
    sts::PartialSts s = sts::read_system_file(path).system;
    if (forbid_paths.empty()) {
        std::cout << "subsystem-free=" << (sts::is_subsystem_free(s) ? 1 : 0) << "\n";
    } else {
        std::vector<sts::PartialSts> fs;
        for (const auto& f : forbid_paths) fs.push_back(sts::read_system_file(f).system);
        std::cout << "class-free=" << (sts::is_class_free(s, fs) ? 1 : 0) << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Steiner triple system construction and verification"};
    app.require_subcommand(1);

    std::string kind, in_path, right_path, out_path, prefix, glue_path, witness_path;
    std::string format = "text", verify_mode = "full";
    std::vector<std::string> forbid_paths;
    int param = 0, max_order = 0, steps = 3, blocks = -1;
    std::uint64_t seed = 0;

    auto* gen = app.add_subcommand("gen", "generate a system");
    gen->add_option("kind", kind, "pg | ag | bose | skolem | hexleave | random")->required();
    gen->add_option("param", param, "dimension or order")->required();
    gen->add_option("--seed", seed, "seed for randomized kinds");
    gen->add_option("--blocks", blocks, "block cap for random kind");
    gen->add_option("--out", out_path, "output path");
    gen->add_option("--format", format, "text | structured");

    auto* verify = app.add_subcommand("verify", "validate a system file");
    verify->add_option("file", in_path)->required();

    auto* subsystems = app.add_subcommand("subsystems", "list all subsystems");
    subsystems->add_option("file", in_path)->required();
    int sub_max = -1;
    subsystems->add_option("--max-order", sub_max, "enumeration bound");

    auto* dbl = app.add_subcommand("double", "one doubling step on a leave 6-cycle");
    dbl->add_option("file", in_path)->required();
    dbl->add_option("--seed", seed);
    dbl->add_option("--out", out_path);
    dbl->add_option("--verify", verify_mode, "full | steps | off");
    dbl->add_option("--format", format);

    auto* embed = app.add_subcommand("embed", "embed a partial system");
    embed->add_option("file", in_path)->required();
    embed->add_option("--steps", steps, "doubling step limit");
    embed->add_option("--verify", verify_mode, "full | steps | off");
    embed->add_option("--seed", seed);
    embed->add_option("--max-order", max_order, "order cap");
    embed->add_option("--out-prefix", prefix);
    embed->add_option("--format", format);

    auto* amal = app.add_subcommand("amalgamate", "amalgamate two systems");
    amal->add_option("left", in_path)->required();
    amal->add_option("right", right_path)->required();
    amal->add_option("--glue", glue_path, "shared subsystem map: lines 'm <left> <right>'");
    amal->add_option("--forbid", forbid_paths, "forbidden class member files");
    amal->add_option("--witness", witness_path, "witness system file");
    amal->add_option("--steps", steps);
    amal->add_option("--verify", verify_mode, "full | steps | off");
    amal->add_option("--seed", seed);
    amal->add_option("--max-order", max_order);
    amal->add_option("--out-prefix", prefix);
    amal->add_option("--format", format);

    auto* iso = app.add_subcommand("iso", "isomorphism test");
    iso->add_option("a", in_path)->required();
    iso->add_option("b", right_path)->required();

    auto* fr = app.add_subcommand("free", "subsystem-freeness / class-freeness");
    fr->add_option("file", in_path)->required();
    fr->add_option("--forbid", forbid_paths);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 4;
    }

    try {
        if (gen->parsed()) return run_gen(kind, param, seed, blocks, out_path, format);
        if (verify->parsed()) return run_verify(in_path);
        if (subsystems->parsed()) return run_subsystems(in_path, sub_max);
        if (dbl->parsed()) return run_double(in_path, seed, out_path, verify_mode, format);
        if (embed->parsed())
            return run_embed(in_path, steps, verify_mode, seed, max_order, prefix, format);
        if (amal->parsed())
            return run_amalgamate(in_path, right_path, glue_path, forbid_paths, witness_path,
                                  steps, verify_mode, seed, max_order, prefix, format);
        if (iso->parsed()) return run_iso(in_path, right_path);
        if (fr->parsed()) return run_free(in_path, forbid_paths);
    } catch (const sts::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
    return 4;
}
