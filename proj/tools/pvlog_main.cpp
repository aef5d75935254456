#include <fcntl.h>
#include <unistd.h>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "pvlog/asset_store.hpp"
#include "pvlog/eval.hpp"
#include "pvlog/mock_providers.hpp"
#include "pvlog/pipeline.hpp"
#include "pvlog/util.hpp"

namespace fs = std::filesystem;
using namespace pvlog;

namespace {

/// Exclusive per-run lock; a second invocation on the same run id fails fast.
class RunLock {
public:
    explicit RunLock(const fs::path& run_dir) : path_(run_dir / ".lock") {
        fs::create_directories(run_dir);
        fd_ = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
        if (fd_ < 0) {
            throw ConfigError("run is locked (another process owns " + path_.string() + ")");
        }
    }
    ~RunLock() {
        if (fd_ >= 0) {
            ::close(fd_);
            std::error_code ec;
            fs::remove(path_, ec);
        }
    }
    RunLock(const RunLock&) = delete;
    RunLock& operator=(const RunLock&) = delete;

private:
    fs::path path_;
    int fd_ = -1;
};

struct CommonFlags {
    std::string config_path;
    std::string out = "out";
    std::string providers;
    std::optional<std::uint64_t> seed;
    std::optional<int> max_parallel;
    int mock_image_edit_fail_after = -1; // test hook: scripted provider outage
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_path, "Run config file (JSON)");
    cmd->add_option("--out", flags.out, "Output directory")->capture_default_str();
    cmd->add_option("--providers", flags.providers, "Provider backend: mock");
    cmd->add_option("--seed", flags.seed, "Seed override");
    cmd->add_option("--max-parallel", flags.max_parallel, "Worker pool bound");
    cmd->add_option("--mock-image-edit-fail-after", flags.mock_image_edit_fail_after,
                    "Fail mock image edits after N calls (testing)")
        ->group(""); // hidden
}

pipeline::PipelineConfig load_config(const CommonFlags& flags) {
    pipeline::PipelineConfig config;
    if (!flags.config_path.empty()) config = pipeline::PipelineConfig::load(flags.config_path);
    if (!flags.providers.empty()) config.providers = flags.providers;
    if (flags.seed) config.seed = *flags.seed;
    if (flags.max_parallel) config.max_parallel = *flags.max_parallel;
    if (auto v = config.validate(); !v.empty()) throw ConfigError("config: " + v.front());
    return config;
}

ProviderSet build_providers(const pipeline::PipelineConfig& config, AssetStore& store,
                            const CommonFlags& flags) {
    if (config.providers != "mock") {
        throw ConfigError("only --providers mock is wired into the CLI; HTTP adapters are "
                          "library building blocks that need deployment-specific endpoints");
    }
    MockOptions options;
    options.k_min = config.macf.k_min;
    options.k_max = config.macf.k_max;
    options.embedding_dim = config.metrics.embedding_dim;
    options.keypoint_count = config.metrics.keypoint_count;
    options.image_edit_fail_after = flags.mock_image_edit_fail_after;
    return make_mock_providers(config.seed, store, options);
}

ThemeSpec make_theme(const pipeline::PipelineConfig& config, AssetStore& store,
                     const std::string& theme, const std::string& style,
                     const std::string& reference_path, const std::string& voice_path) {
    if (!fs::exists(reference_path)) {
        throw ConfigError("reference image not found: " + reference_path);
    }
    ThemeSpec spec;
    spec.theme_text = theme;
    spec.style_text = style;
    spec.reference_image = store.ingest_file(reference_path, AssetKind::image);
    if (!voice_path.empty()) {
        if (!fs::exists(voice_path)) throw ConfigError("voice reference not found: " + voice_path);
        spec.voice_reference = store.ingest_file(voice_path, AssetKind::audio);
    }
    spec.seed = config.seed;
    return spec;
}

std::string derive_run_id(const ThemeSpec& theme) {
    std::string key = theme.theme_text + "\n" + theme.style_text + "\n" +
                      theme.reference_image.content_hash + "\n" + std::to_string(theme.seed);
    return "run-" + sha256_hex(key).substr(0, 12);
}

int cmd_run(const CommonFlags& flags, const std::string& theme, const std::string& style,
            const std::string& reference_path, const std::string& voice_path,
            std::string run_id, bool dry_run) {
    auto config = load_config(flags);
    AssetStore store(flags.out);
    TemplateLibrary templates = TemplateLibrary::builtin();
    ThemeSpec spec = make_theme(config, store, theme, style, reference_path, voice_path);

    if (dry_run) {
        // First-stage prompts only; no provider is ever constructed.
        std::cout << "--- pipeline/stylize ---\n"
                  << templates.get("pipeline/stylize").render({{"style", spec.style_text}}) << "\n";
        std::cout << "--- story/generator ---\n"
                  << templates.get("story/generator").render({{"theme", spec.theme_text}}) << "\n";
        std::cout << "--- story/reviewer ---\n"
                  << templates.get("story/reviewer").render(
                         {{"theme", spec.theme_text}, {"candidate", "<candidate document>"}})
                  << "\n";
        return 0;
    }

    ProviderSet providers = build_providers(config, store, flags);
    pipeline::Pipeline pipe(config, providers, templates, flags.out);
    if (run_id.empty()) run_id = derive_run_id(spec);
    RunLock lock(pipe.run_dir(run_id));
    std::cerr << "run id: " << run_id << "\n";
    VlogManifest manifest = pipe.run(spec, run_id);
    (void)manifest;
    std::cout << (pipe.run_dir(run_id) / "manifest.json").string() << "\n";
    return 0;
}

int cmd_resume(const CommonFlags& flags, const std::string& run_id) {
    fs::path run_dir = fs::path(flags.out) / "runs" / run_id;
    fs::path config_path = run_dir / "config.json";
    if (!fs::exists(config_path)) throw ConfigError("no run '" + run_id + "' under " + flags.out);
    auto config = pipeline::PipelineConfig::from_json(
        json::parse(read_file(config_path))); // the run's own frozen config
    AssetStore store(flags.out);
    CommonFlags provider_flags = flags;
    ProviderSet providers = build_providers(config, store, provider_flags);
    pipeline::Pipeline pipe(config, providers, TemplateLibrary::builtin(), flags.out);
    RunLock lock(pipe.run_dir(run_id));
    pipe.resume(run_id);
    std::cout << (pipe.run_dir(run_id) / "manifest.json").string() << "\n";
    return 0;
}

int cmd_plan(const CommonFlags& flags, const std::string& theme, const std::string& style,
             const std::string& reference_path, const std::string& voice_path) {
    auto config = load_config(flags);
    AssetStore store(flags.out);
    TemplateLibrary templates = TemplateLibrary::builtin();
    ThemeSpec spec = make_theme(config, store, theme, style, reference_path, voice_path);
    ProviderSet providers = build_providers(config, store, flags);

    pipeline::Pipeline pipe(config, providers, templates, flags.out);
    AssetRef stylized = pipe.stylize_reference(spec);
    PlanBundle plan = macf::run_macf(*providers.chat, templates, config.macf, spec, stylized);
    std::string doc = dump_document(plan.to_json());
    atomic_write_file(fs::path(flags.out) / "plan.json", doc);
    std::cout << doc;
    return 0;
}

int cmd_eval(const CommonFlags& flags, const std::string& benchmark_path,
             const std::string& outputs_path) {
    auto config = load_config(flags);
    AssetStore store(flags.out);
    ProviderSet providers = build_providers(config, store, flags);
    eval::Benchmark benchmark = eval::load_benchmark(benchmark_path, store);
    auto outputs = eval::load_system_outputs(outputs_path, store);
    eval::EvalOptions options;
    options.metric_config = config.metrics;
    options.max_parallel = config.max_parallel;
    EvalReport report =
        eval::run_eval(providers, TemplateLibrary::builtin(), benchmark, outputs, options);
    eval::write_report(report, flags.out);
    std::cout << (fs::path(flags.out) / "report.json").string() << "\n";
    return 0;
}

int cmd_validate(const std::string& path) {
    if (!fs::exists(path)) throw ConfigError("no such file: " + path);
    json doc = json::parse(read_file(path), nullptr, false);
    std::vector<std::string> violations;
    if (doc.is_discarded()) {
        violations.push_back("not valid JSON");
    } else {
        violations = validate_document(doc);
    }
    if (violations.empty()) {
        std::cout << "ok\n";
        return 0;
    }
    for (const auto& v : violations) std::cout << v << "\n";
    return 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stylized multi-agent vlog generation"};
    app.require_subcommand(1);

    CommonFlags flags;
    std::string theme, style, reference_path, voice_path, run_id, benchmark_path, outputs_path,
        validate_path;
    bool dry_run = false;

    auto* run = app.add_subcommand("run", "Run the full pipeline");
    add_common(run, flags);
    run->add_option("--theme", theme, "Theme text")->required();
    run->add_option("--style", style, "Style text")->required();
    run->add_option("--reference", reference_path, "Reference image path")->required();
    run->add_option("--voice", voice_path, "Voice reference audio path");
    run->add_option("--run-id", run_id, "Run id (derived from inputs when omitted)");
    run->add_flag("--dry-run", dry_run, "Render first-stage prompts, call no providers");

    auto* resume = app.add_subcommand("resume", "Resume an interrupted run");
    add_common(resume, flags);
    resume->add_option("--run-id", run_id, "Run id")->required();

    auto* plan = app.add_subcommand("plan", "Produce the plan bundle only");
    add_common(plan, flags);
    plan->add_option("--theme", theme, "Theme text")->required();
    plan->add_option("--style", style, "Style text")->required();
    plan->add_option("--reference", reference_path, "Reference image path")->required();
    plan->add_option("--voice", voice_path, "Voice reference audio path");

    auto* evalc = app.add_subcommand("eval", "Score system outputs against a benchmark");
    add_common(evalc, flags);
    evalc->add_option("--benchmark", benchmark_path, "Benchmark manifest path")->required();
    evalc->add_option("--outputs", outputs_path, "System output directory")->required();

    auto* validate = app.add_subcommand("validate", "Validate a persisted document");
    validate->add_option("path", validate_path, "Document path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (run->parsed()) {
            return cmd_run(flags, theme, style, reference_path, voice_path, run_id, dry_run);
        }
        if (resume->parsed()) return cmd_resume(flags, run_id);
        if (plan->parsed()) return cmd_plan(flags, theme, style, reference_path, voice_path);
        if (evalc->parsed()) return cmd_eval(flags, benchmark_path, outputs_path);
        if (validate->parsed()) return cmd_validate(validate_path);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const ProviderError& e) {
        std::cerr << "provider error: " << e.what() << "\n";
        return 3;
    } catch (const StageError& e) {
        std::cerr << "stage error: " << e.what() << "\n";
        return 4;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
