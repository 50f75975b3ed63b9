#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>

#include "CLI11.hpp"
#include "vce/vce.h"

// Thin shell over the shared library: flag parsing, handle lifetime, exit
// codes. All behavior lives behind the C API.
//
// Exit codes: 0 success, 2 usage, 3 parse failure, 4 invalid or inconsistent
// values, 5 I/O failure, 6 no feasible decoding, 7 internal failure.

namespace {

template <auto Free>
struct FreeDeleter {
    template <typename T>
    void operator()(T* p) const {
        Free(p);
    }
};

using ConfigPtr = std::unique_ptr<vce_config_t, FreeDeleter<vce_config_free>>;
using HmmPtr = std::unique_ptr<vce_hmm_t, FreeDeleter<vce_hmm_free>>;
using FramesPtr = std::unique_ptr<vce_frames_t, FreeDeleter<vce_frames_free>>;
using TraversalPtr = std::unique_ptr<vce_traversal_t, FreeDeleter<vce_traversal_free>>;
using DecodedPtr = std::unique_ptr<vce_decoded_t, FreeDeleter<vce_decoded_free>>;
using TracePtr = std::unique_ptr<vce_trace_t, FreeDeleter<vce_trace_free>>;
using ManifestPtr = std::unique_ptr<vce_manifest_t, FreeDeleter<vce_manifest_free>>;

int to_exit(int status) {
    switch (status) {
        case VCE_OK: return 0;
        case VCE_ERR_PARSE: return 3;
        case VCE_ERR_INVALID_ARGUMENT:
        case VCE_ERR_VALIDATION: return 4;
        case VCE_ERR_IO: return 5;
        case VCE_ERR_INFEASIBLE: return 6;
        default: return 7;
    }
}

// Zero when the call succeeded; otherwise prints the one-line diagnostic and
// returns the exit code.
int check(int status) {
    if (status == VCE_OK) return 0;
    std::cerr << "error: " << vce_last_error() << "\n";
    return to_exit(status);
}

#define TRY(call)                                 \
    do {                                          \
        if (int rc_ = check(call); rc_ != 0) {    \
            return rc_;                           \
        }                                         \
    } while (0)

int load_config(const std::string& path, ConfigPtr& out) {
    vce_config_t* raw = nullptr;
    const int status = path.empty() ? vce_config_create(&raw) : vce_config_read(path.c_str(), &raw);
    out.reset(raw);
    return status;
}

int write_file(const std::string& path, const std::string& content) {
    std::ofstream stream(path, std::ios::binary);
    stream.write(content.data(), static_cast<std::streamsize>(content.size()));
    stream.flush();
    if (!stream.good()) {
        std::cerr << "error: cannot write " << path << "\n";
        return 5;
    }
    return 0;
}

struct DecodeArgs {
    std::string model;
    std::string confusion;
    std::string input;
    std::string output;
};

int run_decode(const DecodeArgs& args) {
    ConfigPtr config;
    TRY(load_config(args.model, config));
    if (!args.confusion.empty()) {
        TRY(vce_config_set(config.get(), "confusion_path", args.confusion.c_str()));
    }

    vce_hmm_t* hmm_raw = nullptr;
    TRY(vce_hmm_from_config(config.get(), &hmm_raw));
    HmmPtr hmm(hmm_raw);

    vce_frames_t* frames_raw = nullptr;
    TRY(vce_frames_read(args.input.c_str(), &frames_raw));
    FramesPtr frames(frames_raw);

    vce_decoded_t* decoded_raw = nullptr;
    TRY(vce_viterbi(hmm.get(), frames.get(), &decoded_raw));
    DecodedPtr decoded(decoded_raw);

    TRY(vce_decoded_write(decoded.get(), args.output.c_str()));
    if (!vce_decoded_feasible(decoded.get())) {
        std::cerr << "error: no feasible state sequence for this input\n";
        return 6;
    }
    return 0;
}

struct GateArgs {
    std::string model;
    std::string input;
    std::string truth;
    std::string report;
};

int run_gate(const GateArgs& args) {
    ConfigPtr config;
    TRY(load_config(args.model, config));

    vce_hmm_t* hmm_raw = nullptr;
    TRY(vce_hmm_from_config(config.get(), &hmm_raw));
    HmmPtr hmm(hmm_raw);

    vce_frames_t* frames_raw = nullptr;
    TRY(vce_frames_read(args.input.c_str(), &frames_raw));
    FramesPtr frames(frames_raw);

    TraversalPtr truth;
    if (!args.truth.empty()) {
        vce_traversal_t* truth_raw = nullptr;
        TRY(vce_labels_read(args.truth.c_str(), &truth_raw));
        truth.reset(truth_raw);
    }

    vce_gating_report report;
    TRY(vce_gate_run(hmm.get(), frames.get(), config.get(), truth.get(), &report));
    TRY(vce_gating_report_write(&report, args.report.c_str()));
    return 0;
}

struct SimulateArgs {
    std::string config;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::int64_t patients = 0;
    bool patients_set = false;
    std::string out_dir;
};

int run_simulate(const SimulateArgs& args) {
    ConfigPtr config;
    TRY(load_config(args.config, config));
    if (args.seed_set) {
        TRY(vce_config_set(config.get(), "seed", std::to_string(args.seed).c_str()));
    }
    if (args.patients_set) {
        TRY(vce_config_set(config.get(), "patients", std::to_string(args.patients).c_str()));
    }
    TRY(vce_simulate(config.get(), args.out_dir.c_str()));
    return 0;
}

struct EvalArgs {
    std::string pred;
    std::string truth;
    std::string task;
    std::string report;
};

int run_eval(const EvalArgs& args) {
    vce_traversal_t* truth_raw = nullptr;
    TRY(vce_labels_read(args.truth.c_str(), &truth_raw));
    TraversalPtr truth(truth_raw);

    vce_metrics metrics;
    if (args.task == "localization") {
        vce_decoded_t* pred_raw = nullptr;
        TRY(vce_decoded_read(args.pred.c_str(), &pred_raw));
        DecodedPtr pred(pred_raw);
        TRY(vce_eval_localization(pred.get(), truth.get(), &metrics));
    } else {
        vce_frames_t* pred_raw = nullptr;
        TRY(vce_frames_read(args.pred.c_str(), &pred_raw));
        FramesPtr pred(pred_raw);
        TRY(vce_eval_anomaly(pred.get(), truth.get(), &metrics));
    }

    char table[256];
    TRY(vce_metrics_table(&metrics, table, sizeof table));
    std::cout << table;
    if (!args.report.empty()) {
        TRY(vce_metrics_record_write(&metrics, args.report.c_str()));
    }
    return 0;
}

struct DwaArgs {
    std::string losses;
    double temperature = 2.0;
    std::string out;
};

int run_dwa_trace(const DwaArgs& args) {
    vce_trace_t* trace_raw = nullptr;
    TRY(vce_trace_read(args.losses.c_str(), &trace_raw));
    TracePtr trace(trace_raw);

    std::string text("epoch,weight_task1,weight_task2\n");
    const std::int64_t epochs = vce_trace_epochs(trace.get());
    for (std::int64_t epoch = 1; epoch <= epochs; ++epoch) {
        double weights[2];
        TRY(vce_dwa_weights(trace.get(), args.temperature, epoch, weights));
        char first[32];
        char second[32];
        TRY(vce_format_double(weights[0], first, sizeof first));
        TRY(vce_format_double(weights[1], second, sizeof second));
        text += std::to_string(epoch);
        text.push_back(',');
        text += first;
        text.push_back(',');
        text += second;
        text.push_back('\n');
    }

    if (args.out.empty()) {
        std::cout << text;
        return 0;
    }
    return write_file(args.out, text);
}

struct RebalanceArgs {
    std::string manifest;
    std::uint64_t seed = 7;
    std::string out_dir;
};

int run_rebalance(const RebalanceArgs& args) {
    vce_manifest_t* manifest_raw = nullptr;
    TRY(vce_manifest_read(args.manifest.c_str(), &manifest_raw));
    ManifestPtr manifest(manifest_raw);
    TRY(vce_rebalance_pipeline(manifest.get(), args.seed, args.out_dir.c_str()));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Capsule endoscopy localization, gating and evaluation toolkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", vce_version());

    DecodeArgs decode_args;
    CLI::App* decode = app.add_subcommand("decode", "Viterbi-decode a posterior stream");
    decode->set_version_flag("--version", vce_version());
    decode->add_option("--model", decode_args.model, "run configuration file (defaults apply)");
    decode->add_option("--confusion", decode_args.confusion,
                       "confusion count file overriding the configured emissions");
    decode->add_option("--input", decode_args.input, "posterior stream")->required();
    decode->add_option("--output", decode_args.output, "decoded path output")->required();

    GateArgs gate_args;
    CLI::App* gate = app.add_subcommand("gate", "Run the online entry detector and energy gate");
    gate->set_version_flag("--version", vce_version());
    gate->add_option("--model", gate_args.model, "run configuration file (defaults apply)");
    gate->add_option("--input", gate_args.input, "posterior stream")->required();
    gate->add_option("--truth", gate_args.truth, "ground-truth labels");
    gate->add_option("--report", gate_args.report, "gating report output")->required();

    SimulateArgs simulate_args;
    CLI::App* simulate = app.add_subcommand("simulate", "Generate and evaluate a seeded cohort");
    simulate->set_version_flag("--version", vce_version());
    simulate->add_option("--config", simulate_args.config, "run configuration file");
    CLI::Option* seed_opt = simulate->add_option("--seed", simulate_args.seed, "seed override");
    CLI::Option* patients_opt =
        simulate->add_option("--patients", simulate_args.patients, "patient count override");
    simulate->add_option("--out-dir", simulate_args.out_dir, "output directory")->required();

    EvalArgs eval_args;
    CLI::App* eval = app.add_subcommand("eval", "Score predictions against ground truth");
    eval->set_version_flag("--version", vce_version());
    eval->add_option("--pred", eval_args.pred, "decoded path or posterior stream")->required();
    eval->add_option("--truth", eval_args.truth, "ground-truth labels")->required();
    eval->add_option("--task", eval_args.task, "localization or anomaly")
        ->required()
        ->check(CLI::IsMember({"localization", "anomaly"}));
    eval->add_option("--report", eval_args.report, "also write a key-value metrics record");

    DwaArgs dwa_args;
    CLI::App* dwa = app.add_subcommand("dwa-trace", "Per-epoch dynamic task weights for a trace");
    dwa->set_version_flag("--version", vce_version());
    dwa->add_option("--losses", dwa_args.losses, "loss trace file")->required();
    dwa->add_option("--temperature", dwa_args.temperature, "softmax temperature");
    dwa->add_option("--out", dwa_args.out, "write the schedule here instead of stdout");

    RebalanceArgs rebalance_args;
    CLI::App* rebalance = app.add_subcommand("rebalance", "Rebalance and split a frame manifest");
    rebalance->set_version_flag("--version", vce_version());
    rebalance->add_option("--manifest", rebalance_args.manifest, "frame manifest")->required();
    rebalance->add_option("--seed", rebalance_args.seed, "selection seed");
    rebalance->add_option("--out", rebalance_args.out_dir, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            return app.exit(e);
        }
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    simulate_args.seed_set = seed_opt->count() > 0;
    simulate_args.patients_set = patients_opt->count() > 0;

    if (decode->parsed()) return run_decode(decode_args);
    if (gate->parsed()) return run_gate(gate_args);
    if (simulate->parsed()) return run_simulate(simulate_args);
    if (eval->parsed()) return run_eval(eval_args);
    if (dwa->parsed()) return run_dwa_trace(dwa_args);
    if (rebalance->parsed()) return run_rebalance(rebalance_args);
    return 2;
}
