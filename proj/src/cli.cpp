#include "unadv/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <set>

#include "CLI11.hpp"
#include "unadv/bench.hpp"
#include "unadv/compositor.hpp"
#include "unadv/corruption.hpp"
#include "unadv/image_io.hpp"
#include "unadv/patch_forge.hpp"
#include "unadv/render_forge.hpp"
#include "unadv/rng.hpp"
#include "unadv/servo_sim.hpp"

namespace unadv::cli {

namespace {

namespace fs = std::filesystem;

std::string resolve(const std::string& path) {
    if (path.empty()) return path;
    const char* root = std::getenv("UNADV_DATA_ROOT");
    if (!root || !*root) return path;
    fs::path p(path);
    if (p.is_absolute()) return path;
    return (fs::path(root) / p).string();
}

std::vector<int> parse_channels(const std::string& text) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        out.push_back(std::stoi(tok));
    }
    if (out.empty()) throw std::invalid_argument("--channels needs at least one entry");
    return out;
}

corr::CorruptionSpec parse_weather(const std::string& text) {
    const size_t colon = text.find(':');
    if (colon == std::string::npos)
        throw std::invalid_argument("expected kind:severity, got '" + text + "'");
    corr::CorruptionSpec spec;
    spec.kind = corr::kind_from_string(text.substr(0, colon));
    spec.severity = std::stoi(text.substr(colon + 1));
    if (spec.severity < 0 || spec.severity > corr::kSeverityCount)
        throw std::invalid_argument("severity must be in 0..5");
    return spec;
}

rf::Mesh named_mesh(const std::string& name, int label) {
    if (name == "cube") return rf::make_cube(1.0);
    if (name == "cylinder") return rf::make_cylinder(0.35, 1.2, 24);
    if (name == "plane") return rf::make_plane_silhouette(1.6);
    if (name.size() > 4 && name.ends_with(".obj")) return rf::load_obj(resolve(name), label);
    throw std::invalid_argument("unknown mesh '" + name + "' (cube, cylinder, plane, or *.obj)");
}

std::string mesh_id_of(const std::string& name) {
    if (name.ends_with(".obj")) return fs::path(name).stem().string();
    return name;
}

int dataset_classes(const data::Dataset& ds) {
    int k = ds.num_classes;
    for (int l : ds.train_labels) k = std::max(k, l + 1);
    for (int l : ds.test_labels) k = std::max(k, l + 1);
    return k;
}

void do_gen_data(int classes, int per_class, int size, uint64_t seed, const std::string& out) {
    const data::Dataset ds = data::gen_shapes_dataset(classes, per_class, size, seed);
    bench::save_dataset_dir(resolve(out), ds);
    std::cout << "wrote " << ds.train_count() << " train / " << ds.test_count()
              << " test images to " << out << "\n";
}

void do_train_model(const std::string& task, const std::string& data_dir, const std::string& out,
                    const std::string& channels, int epochs, int batch, double lr, int frame,
                    uint64_t ground_seed, int samples, uint64_t seed) {
    model::ModelConfig mc;
    mc.channels = parse_channels(channels);
    model::TrainConfig tc;
    tc.learning_rate = lr;
    tc.batch_size = batch;
    tc.epochs = epochs;
    tc.seed = fan_seed(seed, "model");
    if (task == "classify") {
        if (data_dir.empty()) throw std::invalid_argument("--data is required for --task classify");
        const data::Dataset ds = bench::load_dataset_dir(resolve(data_dir));
        mc.input_h = mc.input_w = ds.train_images.dim(1);
        mc.outputs = dataset_classes(ds);
        const model::ModelParams m = model::train_classifier(ds, mc, tc);
        model::save_checkpoint(m, resolve(out));
        std::cout << "test accuracy " << model::accuracy(m, ds.test_images, ds.test_labels)
                  << ", checkpoint at " << out << "\n";
        return;
    }
    const servo::WorldState world = bench::standard_world(frame, ground_seed);
    const servo::PoseDataset d =
        servo::collect_pose_dataset(world, servo::ConeSpec{}, samples, fan_seed(seed, "pose-data"));
    mc.input_h = mc.input_w = frame;
    mc.head = model::Head::regression;
    mc.outputs = 2;
    servo::RegressorReport report;
    const model::ModelParams m = servo::train_pose_regressor(d, mc, tc, &report);
    model::save_checkpoint(m, resolve(out));
    std::cout << "validation rmse " << report.val_rmse << " m over " << report.val_count
              << " holdout frames, checkpoint at " << out << "\n";
}

void do_train_patch(const std::string& ckpt, const std::string& data_dir, int target_class,
                    double area_pct, int side, const std::string& kind, int epochs, double step,
                    int batch, uint64_t seed, const std::string& out) {
    const model::ModelParams m = model::load_checkpoint(resolve(ckpt));
    const data::Dataset ds = bench::load_dataset_dir(resolve(data_dir));
    const int canvas = m.config.input_h;
    const int n = side > 0 ? side : bench::patch_side_for_area(canvas, area_pct);
    comp::PatchParams p;
    uint64_t digest = 0;
    if (kind == "trained") {
        patch::PatchTrainConfig ptc;
        ptc.epochs = epochs;
        ptc.step = step;
        ptc.batch_size = batch;
        ptc.seed = seed;
        const std::string canon = "batch = " + std::to_string(batch) +
                                  "\nepochs = " + std::to_string(epochs) +
                                  "\nstep = " + std::to_string(step) + "\n";
        digest = fnv1a64(canon);
        p = patch::train_patch(m, ds, target_class, n, ptc);
    } else if (kind == "best_loss") {
        p = patch::best_loss_image_patch(m, ds, target_class, n);
    } else if (kind == "random_image") {
        p = patch::baseline_patch(patch::BaselineKind::random_image, ds, target_class, n, seed);
    } else {
        p = patch::baseline_patch(patch::BaselineKind::fixed_noise, ds, target_class, n, seed);
    }
    const fs::path dir(resolve(out));
    fs::create_directories(dir);
    const std::string base = (dir / ("class" + std::to_string(target_class))).string();
    comp::save_patch(p, base + ".ppm", base + ".json", kind, digest, seed);
    std::cout << "wrote " << kind << " patch (side " << n << ") for class " << target_class
              << " to " << out << "\n";
}

void do_train_texture_mesh(const std::string& ckpt, const std::string& data_dir,
                           const std::string& mesh_name, int label, int side, int iters,
                           double step, uint64_t seed, const std::string& out) {
    const model::ModelParams m = model::load_checkpoint(resolve(ckpt));
    const data::Dataset ds = bench::load_dataset_dir(resolve(data_dir));
    rf::Mesh mesh = named_mesh(mesh_name, label);
    mesh.label = label;
    rf::TextureTrainConfig cfg;
    cfg.iterations = iters;
    cfg.step = step;
    cfg.texture_side = side;
    cfg.seed = seed;
    std::vector<real> losses;
    const rf::TextureParams t = rf::train_texture(m, mesh, ds.train_images, cfg, &losses);
    const fs::path dir(resolve(out));
    fs::create_directories(dir);
    rf::save_texture(t, (dir / "texture.ppm").string(), (dir / "texture.json").string(),
                     mesh_id_of(mesh_name), label, seed);
    rf::save_obj((dir / "mesh.obj").string(), mesh);
    std::cout << "trained texture (side " << side << ") over " << iters << " iterations, final loss "
              << (losses.empty() ? 0.0 : losses.back()) << ", archive at " << out << "\n";
}

void do_train_texture_pad(const std::string& ckpt, int frame, uint64_t ground_seed, int side,
                          int iters, double step, uint64_t seed, const std::string& out) {
    const model::ModelParams m = model::load_checkpoint(resolve(ckpt));
    const servo::WorldState world = bench::standard_world(frame, ground_seed);
    servo::PadTextureConfig cfg;
    cfg.iterations = iters;
    cfg.step = step;
    cfg.texture_side = side;
    cfg.seed = seed;
    std::vector<real> losses;
    const rf::TextureParams t = servo::train_pad_texture(m, world, cfg, &losses);
    const fs::path dir(resolve(out));
    fs::create_directories(dir);
    rf::save_texture(t, (dir / "texture.ppm").string(), (dir / "texture.json").string(), "pad", 0,
                     seed);
    std::cout << "trained pad texture (side " << side << ") over " << iters
              << " iterations, final loss " << (losses.empty() ? 0.0 : losses.back())
              << ", archive at " << out << "\n";
}

void do_corrupt(const std::string& kind, int severity, uint64_t seed, const std::string& in,
                const std::string& out) {
    const corr::Kind k = corr::kind_from_string(kind);
    if (severity < 0 || severity > corr::kSeverityCount)
        throw std::invalid_argument("severity must be in 0..5");
    const fs::path in_dir(resolve(in));
    const fs::path out_dir(resolve(out));
    if (!fs::is_directory(in_dir)) throw std::runtime_error("not a directory: " + in);
    fs::create_directories(out_dir);
    std::vector<std::string> names;
    for (const auto& entry : fs::directory_iterator(in_dir))
        if (entry.is_regular_file() && entry.path().extension() == ".ppm")
            names.push_back(entry.path().filename().string());
    std::sort(names.begin(), names.end());
    for (size_t i = 0; i < names.size(); ++i) {
        const Tensor im = img::read_ppm((in_dir / names[i]).string());
        img::write_ppm((out_dir / names[i]).string(),
                       corr::corrupt_image(im, k, severity, fan_seed(seed, "corrupt-image", i)));
    }
    if (fs::exists(in_dir / "labels.csv"))
        fs::copy_file(in_dir / "labels.csv", out_dir / "labels.csv",
                      fs::copy_options::overwrite_existing);
    std::cout << "corrupted " << names.size() << " images (" << kind << ":" << severity
              << ") into " << out << "\n";
}

void do_eval(const std::string& ckpt, const std::string& data_dir, const std::string& patches_dir,
             const std::string& corruption, uint64_t seed, const std::string& out) {
    const model::ModelParams m = model::load_checkpoint(resolve(ckpt));
    const data::Dataset ds = bench::load_dataset_dir(resolve(data_dir));
    std::optional<corr::CorruptionSpec> spec;
    if (!corruption.empty()) {
        spec = parse_weather(corruption);
        if (spec->severity == 0) spec.reset();
    }
    bench::ResultRow row;
    if (spec) {
        row.corruption = corr::to_string(spec->kind);
        row.severity = spec->severity;
    }
    if (patches_dir.empty()) {
        Tensor test = ds.test_images;
        if (spec) {
            corr::CorruptionSpec s = *spec;
            s.seed = fan_seed(seed, "eval-corrupt");
            test = corr::corrupt(test, s);
        }
        row.accuracy = model::accuracy(m, test, ds.test_labels);
    } else {
        const fs::path dir(resolve(patches_dir));
        std::map<int, comp::PatchParams> patches;
        std::set<std::string> kinds;
        const std::set<int> classes(ds.test_labels.begin(), ds.test_labels.end());
        for (int c : classes) {
            const std::string base = (dir / ("class" + std::to_string(c))).string();
            if (!fs::exists(base + ".json"))
                throw std::runtime_error("no patch for class " + std::to_string(c) + " in " +
                                         patches_dir);
            comp::PatchArchive a = comp::load_patch(base + ".ppm", base + ".json");
            kinds.insert(a.kind);
            patches[c] = std::move(a.patch);
        }
        patch::PostFn post;
        if (spec) {
            corr::CorruptionSpec s = *spec;
            s.seed = fan_seed(seed, "eval-post");
            post = corr::post_fn(s);
        }
        patch::PatchTrainConfig ptc;
        const int n = patches.begin()->second.side();
        const patch::EvalTable table = patch::evaluate_patched(
            m, ds, patches, ptc.ranges(n, m.config.input_h), fan_seed(seed, "eval-patched"), post);
        row.patch_kind = kinds.size() == 1 ? *kinds.begin() : "mixed";
        row.patch_area_pct = 100.0 * n * n / (m.config.input_h * m.config.input_w);
        row.accuracy = table.overall;
    }
    bench::ResultTable table;
    table.rows.push_back(row);
    const std::string path = resolve(out);
    const bench::ReportFormat fmt =
        out.ends_with(".json") ? bench::ReportFormat::json : bench::ReportFormat::csv;
    bench::emit_report(table, fmt, path);
    std::cout << row.corruption << ":" << row.severity << " " << row.patch_kind << " accuracy "
              << row.accuracy << ", table at " << out << "\n";
}

void do_land_sim(const std::string& pad, const std::string& pad_texture_dir,
                 const std::string& estimator_name, const std::string& regressor_ckpt,
                 const std::string& weather, int episodes, int max_steps, int frame,
                 uint64_t ground_seed, uint64_t seed, const std::string& out) {
    servo::WorldState world = bench::standard_world(frame, ground_seed);
    if (pad == "unadv") {
        if (pad_texture_dir.empty())
            throw std::invalid_argument("--pad unadv requires --pad-texture");
        const fs::path dir(resolve(pad_texture_dir));
        world.pad_texture =
            rf::load_texture((dir / "texture.ppm").string(), (dir / "texture.json").string())
                .texture;
    }
    servo::Estimator est;
    if (estimator_name == "oracle") {
        est = servo::oracle_estimator();
    } else {
        if (regressor_ckpt.empty())
            throw std::invalid_argument("--estimator model requires --regressor");
        const model::ModelParams m = model::load_checkpoint(resolve(regressor_ckpt));
        if (m.config.input_h != frame || m.config.input_w != frame)
            throw std::invalid_argument("regressor input does not match --frame");
        est = servo::model_estimator(m);
    }
    servo::EpisodeConfig cfg;
    cfg.max_steps = max_steps;
    if (!weather.empty()) {
        corr::CorruptionSpec spec = parse_weather(weather);
        if (spec.severity > 0) cfg.weather = spec;
    }
    const servo::EpisodeBatch batch =
        servo::run_episodes(world, servo::ConeSpec{}, est, cfg, episodes, seed);
    servo::write_episode_csv(resolve(out), batch);
    std::cout << "landed " << batch.landed_count << "/" << episodes << " (rate "
              << batch.land_rate << "), mean steps to land " << batch.mean_steps_landed
              << ", episodes at " << out << "\n";
}

void do_run(const std::string& config_path, const std::string& out_dir, bool seed_set,
            uint64_t seed) {
    bench::Config config = bench::load_config(resolve(config_path));
    if (seed_set) {
        bool found = false;
        for (auto& [k, v] : config.entries)
            if (k == "seed") {
                v = std::to_string(seed);
                found = true;
            }
        if (!found) config.entries.emplace_back("seed", std::to_string(seed));
    }
    const bench::RunOutcome outcome = bench::run_experiment(config, resolve(out_dir));
    std::cout << outcome.table.rows.size() << " result rows, " << outcome.manifest.outputs.size()
              << " outputs, manifest at " << out_dir << "/manifest.json\n";
}

void do_report(const std::string& in, const std::string& format, const std::string& out) {
    const std::string in_path = resolve(in);
    const bench::ResultTable table = in.ends_with(".json") ? bench::parse_report_json(in_path)
                                                           : bench::parse_report_csv(in_path);
    bench::emit_report(table,
                       format == "json" ? bench::ReportFormat::json : bench::ReportFormat::csv,
                       resolve(out));
    std::cout << "wrote " << table.rows.size() << " rows to " << out << "\n";
}

} // namespace

int cli_main(std::vector<std::string> args) {
    CLI::App app{"unadversarial patches, textures, and landing-pad benchmark"};
    app.require_subcommand(1);

    try {
        // gen-data
        auto* gen = app.add_subcommand("gen-data", "generate the procedural shapes dataset");
        int gd_classes = 8, gd_per_class = 150, gd_size = 32;
        uint64_t gd_seed = 0;
        std::string gd_out;
        gen->add_option("--classes", gd_classes)->capture_default_str();
        gen->add_option("--per-class", gd_per_class)->capture_default_str();
        gen->add_option("--size", gd_size)->capture_default_str();
        gen->add_option("--seed", gd_seed)->capture_default_str();
        gen->add_option("--out", gd_out, "dataset directory")->required();
        gen->callback([&] { do_gen_data(gd_classes, gd_per_class, gd_size, gd_seed, gd_out); });

        // train-model
        auto* tm = app.add_subcommand("train-model", "train a classifier or pose regressor");
        std::string tm_task = "classify", tm_data, tm_out, tm_channels = "16,32,64";
        int tm_epochs = 30, tm_batch = 128, tm_frame = 32, tm_samples = 4000;
        double tm_lr = 0.1;
        uint64_t tm_seed = 0, tm_ground = 0;
        tm->add_option("--task", tm_task)->check(CLI::IsMember({"classify", "pose"}));
        tm->add_option("--data", tm_data, "dataset directory (classify)");
        tm->add_option("--out", tm_out, "checkpoint path")->required();
        tm->add_option("--channels", tm_channels)->capture_default_str();
        tm->add_option("--epochs", tm_epochs)->capture_default_str();
        tm->add_option("--batch-size", tm_batch)->capture_default_str();
        tm->add_option("--lr", tm_lr)->capture_default_str();
        tm->add_option("--frame", tm_frame, "camera frame side (pose)")->capture_default_str();
        tm->add_option("--ground-seed", tm_ground, "landing world ground seed (pose)")
            ->capture_default_str();
        tm->add_option("--samples", tm_samples, "pose dataset size (pose)")->capture_default_str();
        tm->add_option("--seed", tm_seed)->capture_default_str();
        tm->callback([&] {
            do_train_model(tm_task, tm_data, tm_out, tm_channels, tm_epochs, tm_batch, tm_lr,
                           tm_frame, tm_ground, tm_samples, tm_seed);
        });

        // train-patch
        auto* tp = app.add_subcommand("train-patch", "train or derive a class patch");
        std::string tp_model, tp_data, tp_kind = "trained", tp_out;
        int tp_class = 0, tp_side = 0, tp_epochs = 20, tp_batch = 512;
        double tp_area = 10.0, tp_step = 0.1;
        uint64_t tp_seed = 0;
        tp->add_option("--model", tp_model)->required();
        tp->add_option("--data", tp_data)->required();
        tp->add_option("--target-class", tp_class)->capture_default_str();
        tp->add_option("--area-pct", tp_area)->capture_default_str();
        tp->add_option("--side", tp_side, "explicit patch side (overrides --area-pct)");
        tp->add_option("--kind", tp_kind)
            ->check(CLI::IsMember({"trained", "best_loss", "random_image", "fixed_noise"}));
        tp->add_option("--epochs", tp_epochs)->capture_default_str();
        tp->add_option("--step", tp_step)->capture_default_str();
        tp->add_option("--batch-size", tp_batch)->capture_default_str();
        tp->add_option("--seed", tp_seed)->capture_default_str();
        tp->add_option("--out", tp_out, "patch directory")->required();
        tp->callback([&] {
            do_train_patch(tp_model, tp_data, tp_class, tp_area, tp_side, tp_kind, tp_epochs,
                           tp_step, tp_batch, tp_seed, tp_out);
        });

        // train-texture
        auto* tt = app.add_subcommand("train-texture", "train a mesh or landing-pad texture");
        std::string tt_kind = "mesh", tt_model, tt_data, tt_mesh = "cube", tt_out;
        int tt_label = 0, tt_side = 64, tt_iters = 300, tt_frame = 32;
        double tt_step = 0.1;
        uint64_t tt_seed = 0, tt_ground = 0;
        tt->add_option("--kind", tt_kind)->check(CLI::IsMember({"mesh", "pad"}));
        tt->add_option("--model", tt_model, "classifier (mesh) or pose regressor (pad)")
            ->required();
        tt->add_option("--data", tt_data, "dataset directory for backgrounds (mesh)");
        tt->add_option("--mesh", tt_mesh, "cube, cylinder, plane, or an .obj path");
        tt->add_option("--label", tt_label)->capture_default_str();
        tt->add_option("--side", tt_side)->capture_default_str();
        tt->add_option("--iters", tt_iters)->capture_default_str();
        tt->add_option("--step", tt_step)->capture_default_str();
        tt->add_option("--frame", tt_frame, "camera frame side (pad)")->capture_default_str();
        tt->add_option("--ground-seed", tt_ground, "landing world ground seed (pad)")
            ->capture_default_str();
        tt->add_option("--seed", tt_seed)->capture_default_str();
        tt->add_option("--out", tt_out, "texture directory")->required();
        tt->callback([&] {
            if (tt_kind == "mesh") {
                if (tt_data.empty())
                    throw std::invalid_argument("--data is required for --kind mesh");
                do_train_texture_mesh(tt_model, tt_data, tt_mesh, tt_label, tt_side, tt_iters,
                                      tt_step, tt_seed, tt_out);
            } else {
                do_train_texture_pad(tt_model, tt_frame, tt_ground, tt_side, tt_iters, tt_step,
                                     tt_seed, tt_out);
            }
        });

        // corrupt
        auto* co = app.add_subcommand("corrupt", "corrupt every .ppm in a directory");
        std::string co_kind, co_in, co_out;
        int co_sev = 3;
        uint64_t co_seed = 0;
        co->add_option("--kind", co_kind)->required();
        co->add_option("--severity", co_sev)->capture_default_str();
        co->add_option("--seed", co_seed)->capture_default_str();
        co->add_option("--in", co_in)->required();
        co->add_option("--out", co_out)->required();
        co->callback([&] { do_corrupt(co_kind, co_sev, co_seed, co_in, co_out); });

        // eval
        auto* ev = app.add_subcommand("eval", "evaluate a checkpoint, optionally patched/corrupted");
        std::string ev_model, ev_data, ev_patches, ev_corruption, ev_out;
        uint64_t ev_seed = 0;
        ev->add_option("--model", ev_model)->required();
        ev->add_option("--data", ev_data)->required();
        ev->add_option("--patches", ev_patches, "directory of classN.{ppm,json} patches");
        ev->add_option("--corruption", ev_corruption, "kind:severity applied post-composite");
        ev->add_option("--seed", ev_seed)->capture_default_str();
        ev->add_option("--out", ev_out, "table path (.csv or .json)")->required();
        ev->callback(
            [&] { do_eval(ev_model, ev_data, ev_patches, ev_corruption, ev_seed, ev_out); });

        // land-sim
        auto* ls = app.add_subcommand("land-sim", "run seeded landing episodes");
        std::string ls_pad = "standard", ls_texture, ls_estimator = "model", ls_regressor,
                    ls_weather, ls_out;
        int ls_episodes = 100, ls_max_steps = 500, ls_frame = 32;
        uint64_t ls_seed = 1, ls_ground = 0;
        ls->add_option("--pad", ls_pad)->check(CLI::IsMember({"standard", "unadv"}));
        ls->add_option("--pad-texture", ls_texture, "texture directory for --pad unadv");
        ls->add_option("--estimator", ls_estimator)->check(CLI::IsMember({"model", "oracle"}));
        ls->add_option("--regressor", ls_regressor, "pose regressor checkpoint");
        ls->add_option("--weather", ls_weather, "kind:severity per-frame corruption");
        ls->add_option("--episodes", ls_episodes)->capture_default_str();
        ls->add_option("--max-steps", ls_max_steps)->capture_default_str();
        ls->add_option("--frame", ls_frame)->capture_default_str();
        ls->add_option("--ground-seed", ls_ground)->capture_default_str();
        ls->add_option("--seed", ls_seed)->capture_default_str();
        ls->add_option("--out", ls_out, "episode csv path")->required();
        ls->callback([&] {
            do_land_sim(ls_pad, ls_texture, ls_estimator, ls_regressor, ls_weather, ls_episodes,
                        ls_max_steps, ls_frame, ls_ground, ls_seed, ls_out);
        });

        // run
        auto* ru = app.add_subcommand("run", "run a declared experiment config");
        std::string ru_config, ru_out;
        uint64_t ru_seed = 0;
        ru->add_option("--config", ru_config)->required();
        auto* ru_seed_opt = ru->add_option("--seed", ru_seed, "override the config seed");
        ru->add_option("--out", ru_out, "run directory")->required();
        ru->callback([&] { do_run(ru_config, ru_out, ru_seed_opt->count() > 0, ru_seed); });

        // report
        auto* re = app.add_subcommand("report", "re-emit a result table in csv or json");
        std::string re_in, re_format = "csv", re_out;
        re->add_option("--in", re_in, "existing table (.csv or .json)")->required();
        re->add_option("--format", re_format)->check(CLI::IsMember({"csv", "json"}));
        re->add_option("--out", re_out)->required();
        re->callback([&] { do_report(re_in, re_format, re_out); });

        std::reverse(args.begin(), args.end());
        app.parse(std::move(args));
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

} // namespace unadv::cli
