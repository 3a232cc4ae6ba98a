#include "sparselab/config.hpp"

#include <cmath>
#include <set>

#include <json.hpp>

namespace sparselab {

using nlohmann::json;

double ExperimentConfig::effective_keep_fraction() const {
    if (!target_sparsity) return keep_fraction;
    require(*target_sparsity > 0.0 && *target_sparsity < 1.0, Errc::ConfigError,
            "target_sparsity must lie in (0,1)");
    require(levels >= 1, Errc::ConfigError, "target_sparsity needs levels >= 1");
    return std::pow(1.0 - *target_sparsity, 1.0 / static_cast<double>(levels));
}

MLPSpec ExperimentConfig::mlp_spec() const {
    MLPSpec spec;
    spec.widths = widths;
    if (batchnorm.empty())
        spec.batchnorm.assign(spec.hidden(), 1);
    else
        spec.batchnorm = batchnorm;
    return spec;
}

std::vector<RewindPolicy> ExperimentConfig::scheme_list() const {
    return schemes.empty() ? std::vector<RewindPolicy>{scheme} : schemes;
}

void ExperimentConfig::validate() const {
    mlp_spec().validate();
    require(classes >= 2, Errc::ConfigError, "need at least two classes");
    require(widths.back() == classes, Errc::ConfigError,
            "output width must match the number of classes");
    require(batch_size >= 1, Errc::ConfigError, "batch_size must be positive");
    require(schedule.total_epochs >= 1, Errc::ConfigError, "epochs per level must be >= 1");
    require(warmup_checkpoint_epochs >= 1, Errc::ConfigError,
            "rewind point k must be at least one epoch");
    const double kf = effective_keep_fraction();
    require(kf > 0.0 && kf < 1.0, Errc::ConfigError, "keep_fraction must lie in (0,1)");
    require(perturb_fraction >= 0.0 && perturb_fraction <= 1.0, Errc::ConfigError,
            "perturb_fraction must lie in [0,1]");
    if (perturb_fraction > 0.0)
        require(perturb_level >= 1 && perturb_level <= levels, Errc::ConfigError,
                "perturb_level must name a pruning level");
    if (use_idx())
        require(!idx_train_labels.empty() && !idx_test_images.empty() && !idx_test_labels.empty(),
                Errc::ConfigError, "IDX task needs all four file paths");
}

namespace {

const char* kind_name(LRKind k) {
    switch (k) {
        case LRKind::CosineWarmup: return "cosine-warmup";
        case LRKind::StepWarmup: return "step-warmup";
        case LRKind::Constant: return "constant";
    }
    return "?";
}

LRKind parse_kind(const std::string& s) {
    if (s == "cosine-warmup") return LRKind::CosineWarmup;
    if (s == "step-warmup") return LRKind::StepWarmup;
    if (s == "constant") return LRKind::Constant;
    raise(Errc::ConfigError, "unknown schedule kind: " + s);
}

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        require(allowed.contains(key), Errc::ConfigError, "unknown key '" + key + "' in " + where);
    }
}

RewindPolicy parse_policy_or_throw(const std::string& s) {
    const auto p = parse_policy(s);
    require(p.has_value(), Errc::ConfigError, "unknown scheme: " + s);
    return *p;
}

}  // namespace

ExperimentConfig config_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        raise(Errc::ConfigError, std::string("config is not valid JSON: ") + e.what());
    }
    require(j.is_object(), Errc::ConfigError, "config root must be an object");
    check_keys(j, {"task", "model", "schedule", "optim", "scheme", "criterion", "keep_fraction",
                   "target_sparsity", "levels", "warmup_checkpoint_epochs", "seed", "seeds",
                   "schemes", "workers", "perturb", "transplant_masks_from", "out_root"},
               "config");

    ExperimentConfig c;
    if (j.contains("task")) {
        const json& t = j["task"];
        check_keys(t, {"classes", "dim", "n_train", "n_test", "separation", "data_seed",
                       "idx_train_images", "idx_train_labels", "idx_test_images",
                       "idx_test_labels"},
                   "task");
        c.classes = t.value("classes", c.classes);
        c.dim = t.value("dim", c.dim);
        c.n_train = t.value("n_train", c.n_train);
        c.n_test = t.value("n_test", c.n_test);
        c.separation = t.value("separation", c.separation);
        c.data_seed = t.value("data_seed", c.data_seed);
        c.idx_train_images = t.value("idx_train_images", c.idx_train_images);
        c.idx_train_labels = t.value("idx_train_labels", c.idx_train_labels);
        c.idx_test_images = t.value("idx_test_images", c.idx_test_images);
        c.idx_test_labels = t.value("idx_test_labels", c.idx_test_labels);
    }
    if (j.contains("model")) {
        const json& m = j["model"];
        check_keys(m, {"widths", "batchnorm"}, "model");
        if (m.contains("widths")) c.widths = m["widths"].get<std::vector<std::size_t>>();
        if (m.contains("batchnorm")) {
            c.batchnorm.clear();
            for (bool b : m["batchnorm"].get<std::vector<bool>>())
                c.batchnorm.push_back(b ? 1 : 0);
        }
    }
    if (j.contains("schedule")) {
        const json& s = j["schedule"];
        check_keys(s, {"kind", "base_lr", "warmup_epochs", "total_epochs", "step_milestones",
                       "step_factor"},
                   "schedule");
        if (s.contains("kind")) c.schedule.kind = parse_kind(s["kind"].get<std::string>());
        c.schedule.base_lr = s.value("base_lr", c.schedule.base_lr);
        c.schedule.warmup_epochs = s.value("warmup_epochs", c.schedule.warmup_epochs);
        c.schedule.total_epochs = s.value("total_epochs", c.schedule.total_epochs);
        if (s.contains("step_milestones"))
            c.schedule.step_milestones = s["step_milestones"].get<std::vector<std::size_t>>();
        c.schedule.step_factor = s.value("step_factor", c.schedule.step_factor);
    }
    if (j.contains("optim")) {
        const json& o = j["optim"];
        check_keys(o, {"momentum", "weight_decay", "batch_size"}, "optim");
        c.momentum = o.value("momentum", c.momentum);
        c.weight_decay = o.value("weight_decay", c.weight_decay);
        c.batch_size = o.value("batch_size", c.batch_size);
    }
    if (j.contains("scheme")) c.scheme = parse_policy_or_throw(j["scheme"].get<std::string>());
    if (j.contains("criterion")) {
        const auto cr = parse_criterion(j["criterion"].get<std::string>());
        require(cr.has_value(), Errc::ConfigError,
                "unknown criterion: " + j["criterion"].get<std::string>());
        c.criterion = *cr;
    }
    c.keep_fraction = j.value("keep_fraction", c.keep_fraction);
    if (j.contains("target_sparsity") && !j["target_sparsity"].is_null())
        c.target_sparsity = j["target_sparsity"].get<double>();
    c.levels = j.value("levels", c.levels);
    c.warmup_checkpoint_epochs = j.value("warmup_checkpoint_epochs", c.warmup_checkpoint_epochs);
    c.seed = j.value("seed", c.seed);
    c.seeds = j.value("seeds", c.seeds);
    if (j.contains("schemes")) {
        c.schemes.clear();
        for (const auto& s : j["schemes"].get<std::vector<std::string>>())
            c.schemes.push_back(parse_policy_or_throw(s));
    }
    c.workers = j.value("workers", c.workers);
    if (j.contains("perturb")) {
        const json& p = j["perturb"];
        check_keys(p, {"level", "fraction"}, "perturb");
        c.perturb_level = p.value("level", c.perturb_level);
        c.perturb_fraction = p.value("fraction", c.perturb_fraction);
    }
    c.transplant_masks_from = j.value("transplant_masks_from", c.transplant_masks_from);
    c.out_root = j.value("out_root", c.out_root);
    c.validate();
    return c;
}

std::string config_to_json(const ExperimentConfig& c) {
    json j;
    j["task"] = {{"classes", c.classes},
                 {"dim", c.dim},
                 {"n_train", c.n_train},
                 {"n_test", c.n_test},
                 {"separation", c.separation},
                 {"data_seed", c.data_seed},
                 {"idx_train_images", c.idx_train_images},
                 {"idx_train_labels", c.idx_train_labels},
                 {"idx_test_images", c.idx_test_images},
                 {"idx_test_labels", c.idx_test_labels}};
    std::vector<bool> bn;
    for (std::uint8_t b : c.batchnorm) bn.push_back(b != 0);
    j["model"] = {{"widths", c.widths}, {"batchnorm", bn}};
    j["schedule"] = {{"kind", kind_name(c.schedule.kind)},
                     {"base_lr", c.schedule.base_lr},
                     {"warmup_epochs", c.schedule.warmup_epochs},
                     {"total_epochs", c.schedule.total_epochs},
                     {"step_milestones", c.schedule.step_milestones},
                     {"step_factor", c.schedule.step_factor}};
    j["optim"] = {{"momentum", c.momentum},
                  {"weight_decay", c.weight_decay},
                  {"batch_size", c.batch_size}};
    j["scheme"] = policy_name(c.scheme);
    j["criterion"] = criterion_name(c.criterion);
    j["keep_fraction"] = c.keep_fraction;
    if (c.target_sparsity)
        j["target_sparsity"] = *c.target_sparsity;
    else
        j["target_sparsity"] = nullptr;
    j["levels"] = c.levels;
    j["warmup_checkpoint_epochs"] = c.warmup_checkpoint_epochs;
    j["seed"] = c.seed;
    j["seeds"] = c.seeds;
    std::vector<std::string> schemes;
    for (RewindPolicy p : c.schemes) schemes.emplace_back(policy_name(p));
    j["schemes"] = schemes;
    j["workers"] = c.workers;
    j["perturb"] = {{"level", c.perturb_level}, {"fraction", c.perturb_fraction}};
    j["transplant_masks_from"] = c.transplant_masks_from;
    j["out_root"] = c.out_root;
    return j.dump(2) + "\n";
}

}  // namespace sparselab
