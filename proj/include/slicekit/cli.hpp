// Copyright 2026 The slicekit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "slicekit/slicekit.hpp"

namespace slicekit::cli {

/// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitCapacity = 3;
inline constexpr int kExitInternal = 4;

namespace detail {

inline std::ifstream open_in(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw ArgumentError("cannot open '" + path + "' for reading");
    }
    return in;
}

/// Opens an output file up front, so bad paths fail before any work.
class Sink {
  public:
    explicit Sink(const std::string &path, std::ostream &fallback) : fallback_(fallback) {
        if (!path.empty()) {
            file_ = std::make_unique<std::ofstream>(path);
            if (!*file_) {
                throw ArgumentError("cannot open '" + path + "' for writing");
            }
        }
    }
    std::ostream &stream() { return file_ ? *file_ : fallback_; }
    bool to_file() const { return file_ != nullptr; }

  private:
    std::ostream &fallback_;
    std::unique_ptr<std::ofstream> file_;
};

inline std::vector<unsigned> parse_residues(const std::string &text) {
    std::vector<unsigned> out;
    std::stringstream ss(text);
    for (std::string item; std::getline(ss, item, ',');) {
        if (item.empty() || item.find_first_not_of("0123456789") != std::string::npos) {
            throw ArgumentError("bad residue '" + item + "' in '" + text + "'");
        }
        out.push_back(static_cast<unsigned>(std::stoul(item)));
    }
    return out;
}

inline std::string tvd_line(const std::string &label, const Rational &v) {
    return label + " tvd=" + rational_str(v) + " decimal=" + decimal_str(to_double(v));
}

}  // namespace detail

struct Options {
    unsigned jobs = 1;
    std::uint64_t seed = 0;

    // build-sampler
    std::string kind;
    unsigned n = 0, k = 0, q = 0, d = 0;
    std::string lambda, eps = "0", gamma = "0", tconst = "1", target;
    std::optional<unsigned> t;
    std::string out_circuit, out_plan;

    // eval-tvd
    std::string circuit_path, plan_path, method = "auto";

    // eliminate
    std::string graph_path, flavor = "vtx", elim_lambda = "auto", schedule = "slice";
    double beta = 2, C = 1;
    bool brute = false;

    // gen-tight
    std::string tight_kind, verify_mode, out_graph, csv;
    size_t trials = 200;

    // verify-bounds
    std::string suite = "all";
};

inline SamplerRequest request_from(const Options &o) {
    SamplerRequest rq;
    rq.kind = parse_kind(o.kind);
    rq.n = o.n;
    rq.k = o.k;
    rq.q = o.q;
    rq.d = o.d;
    rq.lambda = o.lambda.empty() ? std::vector<unsigned>{} : detail::parse_residues(o.lambda);
    rq.eps = parse_rational(o.eps);
    rq.gamma = parse_rational(o.gamma);
    rq.t_override = o.t;
    rq.t_const = parse_rational(o.tconst);
    rq.target = o.target;
    return rq;
}

inline int cmd_build_sampler(const Options &o, std::ostream &out) {
    auto rq = request_from(o);
    detail::Sink circuit_sink(o.out_circuit, out);
    detail::Sink plan_sink(o.out_plan, out);
    auto s = build_sampler(rq);
    if (circuit_sink.to_file()) {
        write_local_function(circuit_sink.stream(), s.circuit);
    }
    write_plan(plan_sink.stream(), s.plan);
    out << "locality=" << s.circuit.locality() << " random_bits=" << s.plan.random_bits
        << " error_budget=" << rational_str(s.plan.budget_total()) << "\n";
    return kExitOk;
}

inline int cmd_eval_tvd(const Options &opts, std::ostream &out) {
    Options o = opts;
    if (o.method == "auto") {
        // Both when there is a plan to compare against, enumeration otherwise.
        o.method = o.plan_path.empty() ? "enum" : (o.circuit_path.empty() ? "structural" : "both");
    }
    if (o.method != "enum" && o.method != "structural" && o.method != "both") {
        throw ArgumentError("--method must be auto, enum, structural or both");
    }
    std::optional<LocalFunction> circuit;
    if (!o.circuit_path.empty()) {
        auto in = detail::open_in(o.circuit_path);
        circuit = read_local_function(in);
    }
    std::optional<BuiltSampler> rebuilt;
    if (!o.plan_path.empty()) {
        auto in = detail::open_in(o.plan_path);
        rebuilt = build_sampler(read_plan_request(in));
    }
    if (o.method != "structural" && !circuit) {
        throw ArgumentError("enumeration needs a circuit file");
    }
    if (o.method != "enum" && !rebuilt) {
        throw ArgumentError("structural evaluation needs --plan");
    }
    unsigned n = circuit ? static_cast<unsigned>(circuit->n()) : rebuilt->plan.n;
    ExactDistribution target;
    if (!o.target.empty()) {
        target = target_from_spec(n, o.target);
    } else if (rebuilt) {
        target = request_target(rebuilt->plan.request);
    } else {
        throw ArgumentError("--target is required without --plan");
    }
    int status = kExitOk;
    if (o.method != "structural") {
        out << detail::tvd_line("enum", tvd(output_distribution_enum(*circuit, uniform_biases(circuit->m())), target))
            << "\n";
    }
    if (o.method != "enum") {
        out << detail::tvd_line("structural", tvd(structural_distribution(rebuilt->plan), target)) << "\n";
    }
    if (o.method == "both") {
        auto rep = oracle_tvd_crosscheck(*circuit, rebuilt->plan);
        out << "crosscheck " << rep.describe() << "\n";
        if (!rep.equal) {
            status = kExitCheckFailed;
        }
    }
    return status;
}

inline int cmd_eliminate(const Options &o, std::ostream &out) {
    auto in = detail::open_in(o.graph_path);
    auto g = read_graph(in);
    EliminationResult res;
    bool ok = false;
    std::string label;
    if (o.flavor == "vtx") {
        double d = static_cast<double>(std::max<size_t>(1, g.max_left_degree()));
        double lambda = o.elim_lambda == "auto" ? 2 * d * std::pow(2 * d * o.beta + 1, 2 * d)
                                                : to_double(parse_rational(o.elim_lambda));
        res = eliminate_vertices(g, o.beta, lambda);
        ok = satisfies_vertex_property(g, res, o.beta, lambda);
        label = "lambda=" + decimal_str(lambda);
    } else if (o.flavor == "neigh") {
        ScheduleKind kind;
        if (o.schedule == "slice") {
            kind = ScheduleKind::slice;
        } else if (o.schedule == "mod") {
            kind = ScheduleKind::mod;
        } else {
            throw ArgumentError("--schedule must be slice or mod");
        }
        auto sp = schedule_params(kind, std::max<unsigned>(1, static_cast<unsigned>(g.max_left_degree())),
                                  parse_rational(o.gamma == "0" ? "1/2" : o.gamma), o.C);
        res = eliminate_neighborhoods(g, sp.neigh);
        ok = satisfies_neighborhood_property(g, res, sp.neigh);
        label = sp.neigh.description;
    } else {
        throw ArgumentError("--flavor must be vtx or neigh");
    }
    out << format_result(res);
    out << "property " << (ok ? "holds" : "fails") << " (" << label << ")\n";
    if (o.brute) {
        auto flavor = o.flavor == "vtx" ? Flavor::vertices : Flavor::neighborhoods;
        auto best = brute_force_best_elimination(g, res.deleted.size(), flavor, o.jobs);
        out << "brute_force r=" << best.r << " at |S|<=" << res.deleted.size() << "\n";
    }
    return ok ? kExitOk : kExitCheckFailed;
}

inline int cmd_gen_tight(const Options &o, std::ostream &out) {
    detail::Sink graph_sink(o.out_graph, out);
    detail::Sink csv_sink(o.csv, out);
    BipartiteGraph g;
    if (o.tight_kind == "vtx") {
        g = gen_tight_vtx(static_cast<unsigned>(o.beta), o.d);
    } else if (o.tight_kind == "neigh") {
        g = gen_tight_neigh(o.d);
    } else {
        throw ArgumentError("kind must be vtx or neigh");
    }
    if (graph_sink.to_file() || o.verify_mode.empty()) {
        write_graph(graph_sink.stream(), g);
    }
    if (o.verify_mode.empty()) {
        return kExitOk;
    }
    TightMode mode;
    if (o.verify_mode == "exhaustive") {
        mode = TightMode::all();
    } else if (o.verify_mode == "sampled") {
        mode = TightMode::sampled(o.trials, o.seed);
    } else {
        throw ArgumentError("--verify must be exhaustive or sampled");
    }
    auto rep = o.tight_kind == "vtx" ? verify_tight_vtx(g, static_cast<unsigned>(o.beta), mode, o.jobs)
                                     : verify_tight_neigh(g, mode, o.jobs);
    if (csv_sink.to_file()) {
        write_tight_csv(csv_sink.stream(), rep);
    }
    out << "subsets=" << rep.rows.size() << " violations=" << rep.violations << " "
        << (rep.ok() ? "PASS" : "FAIL") << "\n";
    return rep.ok() ? kExitOk : kExitCheckFailed;
}

/// Runs the randomized inequality suites; returns the violation count.
inline size_t run_bound_suites(const std::string &suite, std::uint64_t seed, size_t trials, std::ostream &out) {
    size_t violations = 0;
    bool any = false;
    auto report = [&](const LemmaSuiteResult &r) {
        any = true;
        violations += r.violations;
        out << r.name << " instances=" << r.instances << " violations=" << r.violations;
        if (r.violations) {
            out << " first: " << r.first_violation;
        }
        out << "\n";
    };
    bool all = suite == "all";
    if (all || suite == "lemmas") {
        report(run_lemma_suite("mult_apx", trials, seed, mult_apx_instance));
        report(run_lemma_suite("product", trials, seed + 1, product_lemma_instance));
        report(run_lemma_suite("conditioning", trials, seed + 2, conditioning_lemma_instance));
        report(run_lemma_suite("coupling", trials, seed + 3, coupling_lemma_instance));
        auto c = coupling_bound_check(coupling_negative_control(), 2, Rational(1, 2), 2);
        bool ok = c.exact_prob == 1;
        any = true;
        violations += ok ? 0 : 1;
        out << "coupling_q2_control prob=" << rational_str(c.exact_prob) << " " << (ok ? "ok" : "UNEXPECTED") << "\n";
    }
    if (all || suite == "fourier") {
        report(run_lemma_suite("mod_llt", trials, seed + 4,
                               [](std::mt19937_64 &rng) { return llt_instance_check(random_llt_instance(rng)); }));
        LemmaSuiteResult rp{"root_power", 0, 0, ""};
        LemmaSuiteResult gs{"gamma_shift", 0, 0, ""};
        for (unsigned q : {3u, 4u, 5u, 6u}) {
            for (Rational g : {Rational(1, 10), Rational(3, 10), Rational(1, 2)}) {
                for (unsigned t = 1; t <= 12; ++t) {
                    auto law = biased_weight_law(t, g);
                    for (unsigned a = 0; a < q; ++a) {
                        ++rp.instances;
                        auto c = root_power_check(law, q, a);
                        if (!c.holds() && rp.violations++ == 0) {
                            rp.first_violation = "q=" + std::to_string(q) + " t=" + std::to_string(t);
                        }
                    }
                    ++gs.instances;
                    auto s = gamma_shift_bound(q, g, t);
                    if (!s.holds() && gs.violations++ == 0) {
                        gs.first_violation = "q=" + std::to_string(q) + " t=" + std::to_string(t);
                    }
                }
            }
        }
        report(rp);
        report(gs);
    }
    if (!any) {
        throw ArgumentError("--suite must be lemmas, fourier or all");
    }
    return violations;
}

inline int cmd_verify_bounds(const Options &o, std::ostream &out) {
    detail::Sink csv_sink(o.csv, out);
    size_t v = run_bound_suites(o.suite, o.seed, o.trials, out);
    if (csv_sink.to_file()) {
        auto &os = csv_sink.stream();
        os << "theorem,params...,value,vacuous,conditions\n";
        for (unsigned n : {16u, 64u, 256u}) {
            for (unsigned d : {1u, 2u}) {
                write_bound_csv(os, thm_biased_bound(n, d, to_double(err(Rational(1, 3), d))));
                write_bound_csv(os, thm_mod_slice_bound(n, d, 3, {0}));
            }
        }
    }
    out << (v == 0 ? "PASS" : "FAIL") << "\n";
    return v == 0 ? kExitOk : kExitCheckFailed;
}

inline int cmd_sweep(const Options &o, std::ostream &out) {
    detail::Sink csv_sink(o.csv, out);
    auto rep = lower_vs_upper_sweep(default_sweep_grid(), o.jobs);
    write_sweep_csv(csv_sink.stream(), rep);
    out << "rows=" << rep.rows.size() << " fatal=" << rep.fatal << "\n";
    return rep.fatal == 0 ? kExitOk : kExitCheckFailed;
}

/// Entry point shared by the binary and the tests.
inline int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
    CLI::App app{"slicekit: local samplers for slice-type distributions and their bounds"};
    app.require_subcommand(1);
    Options o;
    auto add_common = [&](CLI::App *sub) {
        sub->add_option("--jobs", o.jobs, "worker threads")->check(CLI::PositiveNumber);
        sub->add_option("--seed", o.seed, "random seed");
    };

    auto *build = app.add_subcommand("build-sampler", "build a sampling circuit and its plan");
    build->add_option("kind", o.kind, "parity | biased | slice | sparse | mod | direct")->required();
    build->add_option("--n", o.n, "output bits")->required();
    build->add_option("--k", o.k, "slice weight");
    build->add_option("--q", o.q, "modulus");
    build->add_option("--lambda", o.lambda, "residues, comma separated");
    build->add_option("--eps", o.eps, "error budget");
    build->add_option("--gamma", o.gamma, "bias");
    build->add_option("--d", o.d, "truncation bits for the biased sampler");
    build->add_option("--t", o.t, "block length override for mod");
    build->add_option("--tconst", o.tconst, "block length constant for mod");
    build->add_option("--target", o.target, "target for direct: uniform | slice:K | periodic:Q:L | biased:G");
    build->add_option("--out-circuit", o.out_circuit, "LOCALFN v1 output path");
    build->add_option("--out-plan", o.out_plan, "plan report path (stdout if omitted)");
    add_common(build);

    auto *eval = app.add_subcommand("eval-tvd", "exact distance between a circuit and a target");
    eval->add_option("circuit", o.circuit_path, "LOCALFN v1 file");
    eval->add_option("--target", o.target, "uniform | slice:K | periodic:Q:L | biased:G");
    eval->add_option("--method", o.method, "auto | enum | structural | both");
    eval->add_option("--plan", o.plan_path, "plan report used to rebuild the structural law");
    add_common(eval);

    auto *elim = app.add_subcommand("eliminate", "run graph elimination on a BIGRAPH v1 file");
    elim->add_option("graph", o.graph_path, "BIGRAPH v1 file")->required();
    elim->add_option("--flavor", o.flavor, "vtx | neigh");
    elim->add_option("--beta", o.beta, "vertex flavor beta");
    elim->add_option("--lambda", o.elim_lambda, "vertex flavor lambda or 'auto'");
    elim->add_option("--schedule", o.schedule, "neighborhood schedule: slice | mod");
    elim->add_option("--gamma", o.gamma, "slice schedule gamma");
    elim->add_option("--C", o.C, "slice schedule constant");
    elim->add_flag("--brute", o.brute, "compare against the exhaustive optimum");
    add_common(elim);

    auto *tight = app.add_subcommand("gen-tight", "generate and verify the sharpness constructions");
    tight->add_option("kind", o.tight_kind, "vtx | neigh")->required();
    tight->add_option("--beta", o.beta, "vtx: beta");
    tight->add_option("--d", o.d, "depth (vtx) or even locality (neigh)")->required();
    tight->add_option("--out", o.out_graph, "BIGRAPH v1 output path");
    tight->add_option("--verify", o.verify_mode, "exhaustive | sampled");
    tight->add_option("--trials", o.trials, "sampled mode trials");
    tight->add_option("--csv", o.csv, "verification CSV path");
    add_common(tight);

    auto *vb = app.add_subcommand("verify-bounds", "randomized inequality suites");
    vb->add_option("--suite", o.suite, "lemmas | fourier | all");
    vb->add_option("--trials", o.trials, "instances per suite");
    vb->add_option("--csv", o.csv, "bound report CSV path");
    add_common(vb);

    auto *sweep = app.add_subcommand("sweep", "measured distances against lower bounds");
    sweep->add_option("--csv", o.csv, "CSV path (stdout if omitted)");
    add_common(sweep);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError &e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }

    try {
        if (*build) {
            return cmd_build_sampler(o, out);
        }
        if (*eval) {
            return cmd_eval_tvd(o, out);
        }
        if (*elim) {
            return cmd_eliminate(o, out);
        }
        if (*tight) {
            return cmd_gen_tight(o, out);
        }
        if (*vb) {
            return cmd_verify_bounds(o, out);
        }
        return cmd_sweep(o, out);
    } catch (const ParseError &e) {
        err << "parse error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::invalid_argument &e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const CapacityError &e) {
        err << "capacity error: " << e.what() << "\n";
        return kExitCapacity;
    } catch (const std::exception &e) {
        err << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
}

}  // namespace slicekit::cli
