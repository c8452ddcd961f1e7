// Command-line front end: load a graph and observations, pick an embedding
// and a solver mode, replay an operation stream with incremental updates,
// and optionally verify every step against the from-scratch oracle.
//
// Exit codes: 0 success, 1 input/config error, 2 verification failure.

#include <chrono>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "dyngraph/bench.hpp"
#include "dyngraph/embedding.hpp"
#include "dyngraph/graph.hpp"
#include "dyngraph/kernels.hpp"
#include "dyngraph/l1.hpp"
#include "dyngraph/l2.hpp"
#include "dyngraph/oracle.hpp"
#include "dyngraph/svd.hpp"

namespace {

using dyngraph::DenseMatrix;
using dyngraph::DynamicGraph;
using dyngraph::EmbeddingKind;
using dyngraph::GraphUpdate;
using dyngraph::Vector;
using json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

enum class LogLevel { Error = 0, Warn = 1, Info = 2, Debug = 3 };

LogLevel log_level() {
    static LogLevel level = [] {
        const char* env = std::getenv("DYNGRAPH_LOG");
        if (!env) return LogLevel::Warn;
        if (std::strcmp(env, "error") == 0) return LogLevel::Error;
        if (std::strcmp(env, "info") == 0) return LogLevel::Info;
        if (std::strcmp(env, "debug") == 0) return LogLevel::Debug;
        return LogLevel::Warn;
    }();
    return level;
}

void logf(LogLevel lvl, const char* fmt, ...) {
    if (lvl > log_level()) return;
    static const char* names[] = {"error", "warn", "info", "debug"};
    std::fprintf(stderr, "[%s] ", names[static_cast<int>(lvl)]);
    va_list args;
    va_start(args, fmt);
    std::vfprintf(stderr, fmt, args);
    va_end(args);
    std::fprintf(stderr, "\n");
}

struct RunConfig {
    std::string graph_path, b_path, ops_path;
    std::string embedding = "adjacency";
    std::optional<int> degree_bound;
    std::string mode = "l2";
    std::size_t rank_cap = 0;  // 0 = full
    bool verify = false;
    bool no_timing = false;
    std::size_t bench_repeats = 20;
    std::uint64_t seed = 1;
    std::string checkpoint_in, checkpoint_out;
    double pinv_tol = 1e-12;
    double trunc_tol = 1e-12;
    std::string kernel_mode = "auto";
};

EmbeddingKind make_kind(const RunConfig& cfg) {
    if (cfg.embedding == "adjacency") {
        if (cfg.degree_bound) throw dyngraph::ParseError("--degree-bound applies to laplacian");
        return EmbeddingKind::adjacency();
    }
    if (cfg.embedding == "laplacian") return EmbeddingKind::laplacian_kind(cfg.degree_bound);
    throw dyngraph::ParseError("unknown embedding '" + cfg.embedding + "'");
}

void apply_kernel_mode(const RunConfig& cfg) {
    if (cfg.kernel_mode == "serial")
        dyngraph::kernels::set_mode(dyngraph::kernels::Mode::Serial);
    else if (cfg.kernel_mode == "parallel")
        dyngraph::kernels::set_mode(dyngraph::kernels::Mode::OpenMP);
    else
        dyngraph::kernels::set_mode(dyngraph::kernels::Mode::Auto);
}

void validate_config(const RunConfig& cfg, const DynamicGraph& g) {
    if (cfg.mode != "l2" && cfg.mode != "l1" && cfg.mode != "svd")
        throw dyngraph::ParseError("unknown mode '" + cfg.mode + "'");
    if (cfg.rank_cap > 0 && cfg.mode != "svd")
        throw dyngraph::ParseError("--rank applies to mode svd only");
    if (cfg.embedding == "laplacian" && g.directed())
        throw dyngraph::ParseError("laplacian embedding requires an undirected graph");
}

json base_record(const std::string& op, std::size_t n, std::size_t m, std::size_t pairs) {
    json rec;
    rec["op"] = op;
    rec["n"] = n;
    rec["m"] = m;
    rec["pairs_applied"] = pairs;
    return rec;
}

void finish_record(json& rec, const RunConfig& cfg, std::optional<std::uint64_t> wall_ns,
                   std::optional<bool> verified) {
    if (!cfg.no_timing && wall_ns) rec["wall_time_ns"] = *wall_ns;
    if (verified)
        rec["verified"] = *verified;
    else
        rec["verified"] = nullptr;
}

bool verify_l2(const dyngraph::L2State& s) {
    const DenseMatrix& m = s.pinv().m();
    const Vector xo = dyngraph::oracle::lstsq(m, s.b());
    Vector ro(m.rows());
    dyngraph::kernels::matvec(m.rows(), m.cols(), m.data(), xo.data(), ro.data());
    dyngraph::kernels::axpy(ro.size(), -1.0, s.b().data(), ro.data());
    const double oracle_residual = dyngraph::kernels::nrm2(ro.data(), ro.size());
    if (s.residual() > oracle_residual + 1e-9) return false;

    Vector diff = s.x();
    dyngraph::kernels::axpy(diff.size(), -1.0, xo.data(), diff.data());
    const double xnorm = dyngraph::norm2(xo);
    return dyngraph::norm2(diff) <= 1e-6 * (1.0 + xnorm);
}

bool verify_l1(const dyngraph::L1State& s) {
    const auto ref = dyngraph::oracle::l1(s.m(), s.b());
    if (std::abs(s.objective() - ref.objective) > 1e-8 * std::max(1.0, ref.objective))
        return false;
    return s.certificate().ok;
}

bool verify_svd(const dyngraph::SvdState& s, const DenseMatrix& m) {
    const auto ref = dyngraph::oracle::svd(m);
    const std::size_t k = std::min<std::size_t>(s.rank(), std::min(ref.rank(), s.rank_cap()));
    const double s0 = ref.sigma.empty() ? 0.0 : ref.sigma[0];
    for (std::size_t i = 0; i < k; ++i)
        if (std::abs(s.sigma()[i] - ref.sigma[i]) > 1e-8 * std::max(1.0, s0)) return false;

    DenseMatrix oracle_approx(m.rows(), m.cols());
    if (k > 0) {
        DenseMatrix us(m.rows(), k);
        for (std::size_t i = 0; i < m.rows(); ++i)
            for (std::size_t j = 0; j < k; ++j) us(i, j) = ref.U(i, j) * ref.sigma[j];
        DenseMatrix vk(m.cols(), k);
        for (std::size_t i = 0; i < m.cols(); ++i)
            for (std::size_t j = 0; j < k; ++j) vk(i, j) = ref.V(i, j);
        oracle_approx = us * vk.transposed();
    }
    const double scale = 1.0 + dyngraph::frobenius_norm(m);
    return dyngraph::frobenius_norm(s.low_rank_approx() - oracle_approx) <= 1e-7 * scale;
}

// Session wrapping the three engine modes behind one update/record interface.
struct Session {
    RunConfig cfg;
    EmbeddingKind kind;
    DynamicGraph graph;
    std::optional<dyngraph::L2State> l2;
    std::optional<dyngraph::L1State> l1;
    std::optional<dyngraph::SvdState> svd;

    static Session start(const RunConfig& cfg) {
        Session s;
        s.cfg = cfg;
        s.kind = make_kind(cfg);
        s.graph = dyngraph::load_graph(cfg.graph_path);
        validate_config(cfg, s.graph);
        const Vector b = (cfg.mode == "svd") ? Vector{} : dyngraph::load_vector(cfg.b_path);

        if (cfg.mode == "l2") {
            if (!cfg.checkpoint_in.empty()) {
                std::ifstream f(cfg.checkpoint_in);
                if (!f) throw dyngraph::ParseError("cannot open " + cfg.checkpoint_in);
                s.l2 = dyngraph::L2State::read_checkpoint(f, s.graph, s.kind);
            } else {
                s.l2 = dyngraph::L2State::init(s.graph, s.kind, b);
            }
            s.l2->set_pinv_tol(cfg.pinv_tol);
        } else if (cfg.mode == "l1") {
            if (!cfg.checkpoint_in.empty())
                throw dyngraph::ParseError("l1 mode has no checkpoint support");
            s.l1 = dyngraph::L1State::init(s.graph, s.kind, b);
        } else {
            if (!cfg.checkpoint_in.empty()) {
                std::ifstream f(cfg.checkpoint_in);
                if (!f) throw dyngraph::ParseError("cannot open " + cfg.checkpoint_in);
                s.svd = dyngraph::SvdState::read_checkpoint(f);
                if (s.svd->rows() != static_cast<std::size_t>(s.graph.node_count()))
                    throw dyngraph::ParseError("svd checkpoint does not match the graph");
            } else {
                const std::size_t cap = cfg.rank_cap == 0
                                            ? static_cast<std::size_t>(s.graph.node_count())
                                            : cfg.rank_cap;
                s.svd = dyngraph::SvdState::from_scratch(materialize(s.graph, s.kind), cap,
                                                         cfg.trunc_tol);
            }
        }
        return s;
    }

    json record(const std::string& op_label, std::size_t pairs, bool include_x) {
        const std::size_t n = static_cast<std::size_t>(graph.node_count());
        json rec = base_record(op_label, n, n, pairs);
        if (cfg.mode == "l2") {
            rec["norm"] = "l2";
            rec["residual"] = l2->residual();
            rec["x_norm"] = dyngraph::norm2(l2->x());
            if (include_x) rec["x"] = l2->x();
        } else if (cfg.mode == "l1") {
            rec["norm"] = "l1";
            rec["residual"] = l1->objective();
            rec["x_norm"] = dyngraph::norm2(l1->x());
            if (include_x) rec["x"] = l1->x();
        } else {
            rec["norm"] = "svd";
            rec["rank"] = svd->rank();
            rec["sigma_max"] = svd->sigma().empty() ? 0.0 : svd->sigma()[0];
            if (include_x) rec["sigma"] = svd->sigma();
        }
        return rec;
    }

    std::size_t apply(const GraphUpdate& u, std::optional<double> b_new) {
        if (cfg.mode == "l2") {
            l2->update(u, b_new);
            graph = l2->graph();
            return l2->last_pair_count();
        }
        if (cfg.mode == "l1") {
            l1->update(u);
            graph = l1->graph();
            return l1->last_pair_count();
        }
        const std::size_t pairs = svd->update_for_graph(graph, u, kind);
        graph = dyngraph::apply_update(graph, u);
        return pairs;
    }

    bool run_verify() {
        if (cfg.mode == "l2") return verify_l2(*l2);
        if (cfg.mode == "l1") return verify_l1(*l1);
        return verify_svd(*svd, materialize(graph, kind));
    }

    void write_checkpoint() const {
        if (cfg.checkpoint_out.empty()) return;
        std::ofstream f(cfg.checkpoint_out);
        if (!f) throw dyngraph::ParseError("cannot open " + cfg.checkpoint_out + " for writing");
        if (cfg.mode == "l2")
            l2->write_checkpoint(f);
        else if (cfg.mode == "svd")
            svd->write_checkpoint(f);
        else
            throw dyngraph::ParseError("l1 mode has no checkpoint support");
    }
};

int run_solve_or_stream(const RunConfig& cfg, bool stream) {
    apply_kernel_mode(cfg);
    auto t0 = Clock::now();
    Session session = Session::start(cfg);
    const std::uint64_t init_ns = static_cast<std::uint64_t>(
        std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - t0).count());

    bool all_verified = true;
    {
        std::optional<bool> verified;
        if (cfg.verify) {
            verified = session.run_verify();
            all_verified = all_verified && *verified;
        }
        json rec = session.record("solve", 0, /*include_x=*/true);
        finish_record(rec, cfg, init_ns, verified);
        std::cout << rec.dump() << '\n';
    }

    if (stream) {
        const auto ops = dyngraph::load_ops(cfg.ops_path);
        logf(LogLevel::Info, "replaying %zu operations", ops.size());
        std::mt19937_64 obs_rng(cfg.seed);
        std::size_t op_index = 0;
        for (const GraphUpdate& u : ops) {
            ++op_index;
            std::optional<double> b_new;
            if (dyngraph::kind_of(u) == dyngraph::OpKind::NodeInsert && cfg.mode != "svd") {
                std::uniform_real_distribution<double> dist(-1.0, 1.0);
                b_new = dist(obs_rng);
            }
            auto t1 = Clock::now();
            std::size_t pairs = 0;
            try {
                pairs = session.apply(u, b_new);
            } catch (const dyngraph::Error& e) {
                throw dyngraph::ParseError(cfg.ops_path + ": op " + std::to_string(op_index) +
                                           " (" + dyngraph::format_op(u) + "): " + e.what());
            }
            const std::uint64_t ns = static_cast<std::uint64_t>(
                std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - t1).count());

            std::optional<bool> verified;
            if (cfg.verify) {
                verified = session.run_verify();
                all_verified = all_verified && *verified;
            }
            json rec = session.record(dyngraph::op_name(u), pairs, /*include_x=*/false);
            finish_record(rec, cfg, ns, verified);
            std::cout << rec.dump() << '\n';
        }
    }

    session.write_checkpoint();
    return all_verified ? 0 : 2;
}

int run_bench(const RunConfig& cfg, const std::vector<std::size_t>& sizes,
              const std::string& op_code) {
    apply_kernel_mode(cfg);
    const EmbeddingKind kind = make_kind(cfg);
    dyngraph::OpKind op = dyngraph::OpKind::WeightChange;
    if (op_code == "ei")
        op = dyngraph::OpKind::EdgeInsert;
    else if (op_code == "ed")
        op = dyngraph::OpKind::EdgeDelete;
    else if (op_code == "wc")
        op = dyngraph::OpKind::WeightChange;
    else if (op_code == "ni")
        op = dyngraph::OpKind::NodeInsert;
    else if (op_code == "nd")
        op = dyngraph::OpKind::NodeDelete;
    else
        throw dyngraph::ParseError("unknown op code '" + op_code + "'");

    std::cout << dyngraph::bench::csv_header() << '\n';
    for (std::size_t n : sizes) {
        dyngraph::bench::BenchResult r;
        if (cfg.mode == "l2")
            r = dyngraph::bench::bench_l2(n, op, kind, cfg.bench_repeats, cfg.seed);
        else if (cfg.mode == "l1")
            r = dyngraph::bench::bench_l1(n, op, kind, cfg.bench_repeats, cfg.seed);
        else
            r = dyngraph::bench::bench_svd(n, op, kind,
                                           cfg.rank_cap == 0 ? 16 : cfg.rank_cap,
                                           cfg.bench_repeats, cfg.seed);
        std::cout << dyngraph::bench::csv_row(r) << '\n';
        logf(LogLevel::Info, "bench n=%zu ratio=%g", n, r.ratio());
    }
    return 0;
}

int run_oracle(const RunConfig& cfg) {
    apply_kernel_mode(cfg);
    const EmbeddingKind kind = make_kind(cfg);
    const DynamicGraph g = dyngraph::load_graph(cfg.graph_path);
    validate_config(cfg, g);
    const DenseMatrix m = materialize(g, kind);

    json rec;
    rec["op"] = "oracle";
    rec["n"] = m.rows();
    rec["m"] = m.cols();
    if (cfg.mode == "l2") {
        const Vector b = dyngraph::load_vector(cfg.b_path);
        const Vector x = dyngraph::oracle::lstsq(m, b);
        Vector r(m.rows());
        dyngraph::kernels::matvec(m.rows(), m.cols(), m.data(), x.data(), r.data());
        dyngraph::kernels::axpy(r.size(), -1.0, b.data(), r.data());
        rec["norm"] = "l2";
        rec["residual"] = dyngraph::kernels::nrm2(r.data(), r.size());
        rec["x_norm"] = dyngraph::norm2(x);
        rec["x"] = x;
    } else if (cfg.mode == "l1") {
        const Vector b = dyngraph::load_vector(cfg.b_path);
        const auto res = dyngraph::oracle::l1(m, b);
        rec["norm"] = "l1";
        rec["residual"] = res.objective;
        rec["x_norm"] = dyngraph::norm2(res.x);
        rec["x"] = res.x;
    } else {
        const auto f = dyngraph::oracle::svd(m);
        rec["norm"] = "svd";
        rec["rank"] = f.rank();
        rec["sigma"] = f.sigma;
    }
    std::cout << rec.dump() << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Incremental regression and SVD over dynamic graphs"};
    app.require_subcommand(1);

    RunConfig cfg;
    std::vector<std::size_t> sizes{512};
    std::string op_code = "wc";

    auto add_common = [&](CLI::App* sub, bool needs_files) {
        if (needs_files) {
            sub->add_option("--graph", cfg.graph_path, "graph file")->required();
            sub->add_option("--b", cfg.b_path, "observation vector file");
        }
        sub->add_option("--embedding", cfg.embedding, "adjacency|laplacian");
        sub->add_option("--degree-bound", cfg.degree_bound, "degree bound for laplacian");
        sub->add_option("--mode", cfg.mode, "l2|l1|svd");
        sub->add_option("--rank", cfg.rank_cap, "rank cap (svd mode)");
        sub->add_option("--seed", cfg.seed, "random seed");
        sub->add_option("--pinv-tol", cfg.pinv_tol, "pinv zero-detection base tolerance");
        sub->add_option("--trunc-tol", cfg.trunc_tol, "svd truncation tolerance");
        sub->add_option("--kernel-mode", cfg.kernel_mode, "serial|parallel|auto");
    };

    CLI::App* solve = app.add_subcommand("solve", "pre-processing solve only");
    add_common(solve, true);
    solve->add_flag("--verify", cfg.verify, "check against the oracle");
    solve->add_flag("--no-timing", cfg.no_timing, "omit wall_time_ns from records");
    solve->add_option("--checkpoint-out", cfg.checkpoint_out, "write engine state");

    CLI::App* stream = app.add_subcommand("stream", "replay an operation stream");
    add_common(stream, true);
    stream->add_option("--ops", cfg.ops_path, "operation stream file")->required();
    stream->add_flag("--verify", cfg.verify, "check every step against the oracle");
    stream->add_flag("--no-timing", cfg.no_timing, "omit wall_time_ns from records");
    stream->add_option("--checkpoint-in", cfg.checkpoint_in, "resume from state file");
    stream->add_option("--checkpoint-out", cfg.checkpoint_out, "write final state");

    CLI::App* bench = app.add_subcommand("bench", "incremental vs scratch timings (CSV)");
    add_common(bench, false);
    bench->add_option("--sizes", sizes, "problem sizes")->delimiter(',');
    bench->add_option("--op", op_code, "ei|ed|wc|ni|nd");
    bench->add_option("--bench-repeats", cfg.bench_repeats, "repeats per size");

    CLI::App* oracle_cmd = app.add_subcommand("oracle", "one-shot from-scratch solve");
    add_common(oracle_cmd, true);

    CLI11_PARSE(app, argc, argv);

    try {
        if (solve->parsed()) return run_solve_or_stream(cfg, /*stream=*/false);
        if (stream->parsed()) return run_solve_or_stream(cfg, /*stream=*/true);
        if (bench->parsed()) return run_bench(cfg, sizes, op_code);
        if (oracle_cmd->parsed()) return run_oracle(cfg);
    } catch (const dyngraph::Error& e) {
        logf(LogLevel::Error, "%s", e.what());
        return 1;
    } catch (const std::exception& e) {
        logf(LogLevel::Error, "%s", e.what());
        return 1;
    }
    return 0;
}
