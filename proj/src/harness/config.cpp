#include "sepnet/config.hpp"

#include "sepnet/error.hpp"

#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

namespace sepnet {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const double d = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError(key + ": expected a number, got '" + v + "'");
    }
}

long long parse_int(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const long long i = std::stoll(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return i;
    } catch (const std::exception&) {
        throw ConfigError(key + ": expected an integer, got '" + v + "'");
    }
}

std::size_t parse_count(const std::string& key, const std::string& v) {
    const long long i = parse_int(key, v);
    if (i < 0) throw ConfigError(key + ": must be non-negative");
    return static_cast<std::size_t>(i);
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ConfigError(key + ": expected true/false, got '" + v + "'");
}

std::vector<int> parse_int_list(const std::string& key, const std::string& v) {
    std::vector<int> out;
    std::stringstream ss(v);
    std::string part;
    while (std::getline(ss, part, ',')) {
        part = trim(part);
        if (part.empty()) continue;
        out.push_back(static_cast<int>(parse_int(key, part)));
    }
    return out;
}

std::string fmt_int_list(const std::vector<int>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
    return out;
}

struct Field {
    const char* key;
    const char* type;
    std::function<void(TrainConfig&, const std::string&)> set;
    std::function<std::string(const TrainConfig&)> get;
};

const std::vector<Field>& fields() {
    static const std::vector<Field> table = {
        {"layers", "str", [](TrainConfig& c, const std::string& v) { c.network = NetworkSpec::parse(v); },
         [](const TrainConfig& c) { return c.network.to_string(); }},
        {"loss", "str",
         [](TrainConfig& c, const std::string& v) {
             if (v == "softmax_ce") c.loss = LossKind::softmax_ce;
             else if (v == "softmax_ce_plus_center") c.loss = LossKind::softmax_ce_plus_center;
             else throw ConfigError("loss: unknown kind '" + v + "'");
         },
         [](const TrainConfig& c) { return to_string(c.loss); }},
        {"use_reconstruction", "bool",
         [](TrainConfig& c, const std::string& v) { c.use_reconstruction = parse_bool("use_reconstruction", v); },
         [](const TrainConfig& c) { return std::string(c.use_reconstruction ? "true" : "false"); }},
        {"lambda", "float", [](TrainConfig& c, const std::string& v) { c.lambda = parse_double("lambda", v); },
         [](const TrainConfig& c) { return fmt_double(c.lambda); }},
        {"batch_size", "int", [](TrainConfig& c, const std::string& v) { c.batch_size = parse_count("batch_size", v); },
         [](const TrainConfig& c) { return std::to_string(c.batch_size); }},
        {"epochs", "int", [](TrainConfig& c, const std::string& v) { c.epochs = static_cast<int>(parse_int("epochs", v)); },
         [](const TrainConfig& c) { return std::to_string(c.epochs); }},
        {"base_lr", "float", [](TrainConfig& c, const std::string& v) { c.lr.base_lr = parse_double("base_lr", v); },
         [](const TrainConfig& c) { return fmt_double(c.lr.base_lr); }},
        {"lr_milestones", "list",
         [](TrainConfig& c, const std::string& v) { c.lr.milestones = parse_int_list("lr_milestones", v); },
         [](const TrainConfig& c) { return fmt_int_list(c.lr.milestones); }},
        {"lr_factor", "float", [](TrainConfig& c, const std::string& v) { c.lr.factor = parse_double("lr_factor", v); },
         [](const TrainConfig& c) { return fmt_double(c.lr.factor); }},
        {"momentum", "float", [](TrainConfig& c, const std::string& v) { c.momentum = parse_double("momentum", v); },
         [](const TrainConfig& c) { return fmt_double(c.momentum); }},
        {"weight_decay", "float",
         [](TrainConfig& c, const std::string& v) { c.weight_decay = parse_double("weight_decay", v); },
         [](const TrainConfig& c) { return fmt_double(c.weight_decay); }},
        {"seed", "int",
         [](TrainConfig& c, const std::string& v) { c.seed = static_cast<std::uint64_t>(parse_count("seed", v)); },
         [](const TrainConfig& c) { return std::to_string(c.seed); }},
        {"freeze_final", "bool",
         [](TrainConfig& c, const std::string& v) { c.freeze_final = parse_bool("freeze_final", v); },
         [](const TrainConfig& c) { return std::string(c.freeze_final ? "true" : "false"); }},
        {"final_init", "str",
         [](TrainConfig& c, const std::string& v) {
             if (v == "uniform") c.final_init = FinalInit::uniform;
             else if (v == "semi_orthogonal") c.final_init = FinalInit::semi_orthogonal;
             else if (v == "unit_interval") c.final_init = FinalInit::unit_interval;
             else throw ConfigError("final_init: unknown kind '" + v + "'");
         },
         [](const TrainConfig& c) { return to_string(c.final_init); }},
        {"center_weight", "float",
         [](TrainConfig& c, const std::string& v) { c.center_weight = parse_double("center_weight", v); },
         [](const TrainConfig& c) { return fmt_double(c.center_weight); }},
        {"center_rate", "float",
         [](TrainConfig& c, const std::string& v) { c.center_rate = parse_double("center_rate", v); },
         [](const TrainConfig& c) { return fmt_double(c.center_rate); }},
        {"dataset", "str", [](TrainConfig& c, const std::string& v) { c.dataset = v; },
         [](const TrainConfig& c) { return c.dataset; }},
        {"data_dir", "str", [](TrainConfig& c, const std::string& v) { c.data_dir = v; },
         [](const TrainConfig& c) { return c.data_dir; }},
        {"classes", "list", [](TrainConfig& c, const std::string& v) { c.classes = parse_int_list("classes", v); },
         [](const TrainConfig& c) { return fmt_int_list(c.classes); }},
        {"blob_per_class", "int",
         [](TrainConfig& c, const std::string& v) { c.blob_per_class = parse_count("blob_per_class", v); },
         [](const TrainConfig& c) { return std::to_string(c.blob_per_class); }},
        {"blob_spread", "float",
         [](TrainConfig& c, const std::string& v) { c.blob_spread = parse_double("blob_spread", v); },
         [](const TrainConfig& c) { return fmt_double(c.blob_spread); }},
    };
    return table;
}

const Field& field(const std::string& key) {
    for (const auto& f : fields())
        if (key == f.key) return f;
    throw ConfigError("unknown config key '" + key + "'");
}

} // namespace

std::string to_string(LossKind kind) {
    return kind == LossKind::softmax_ce ? "softmax_ce" : "softmax_ce_plus_center";
}

std::string to_string(FinalInit init) {
    switch (init) {
    case FinalInit::uniform: return "uniform";
    case FinalInit::semi_orthogonal: return "semi_orthogonal";
    case FinalInit::unit_interval: return "unit_interval";
    }
    return "uniform";
}

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> k;
        for (const auto& f : fields()) k.emplace_back(f.key);
        return k;
    }();
    return keys;
}

void TrainConfig::validate() const {
    network.validate();
    lr.validate();
    if (!(lambda >= 0.0)) throw ConfigError("lambda must be non-negative");
    if (epochs < 1) throw ConfigError("epochs must be at least 1");
    if (batch_size == 0) throw ConfigError("batch_size must be positive");
    if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("momentum must lie in [0, 1)");
    if (!(weight_decay >= 0.0)) throw ConfigError("weight_decay must be non-negative");
    if (!(center_weight >= 0.0)) throw ConfigError("center_weight must be non-negative");
    if (!(center_rate > 0.0 && center_rate <= 1.0)) throw ConfigError("center_rate must lie in (0, 1]");
    if (dataset != "mnist" && dataset != "blobs") throw ConfigError("dataset must be mnist or blobs");
    if (final_init == FinalInit::semi_orthogonal && network.latent_dim() < network.class_count())
        throw ConfigError("semi-orthogonal decision layer needs latent width >= class count");
}

void TrainConfig::set(const std::string& key, const std::string& value) {
    field(key).set(*this, trim(value));
}

std::string TrainConfig::to_text() const {
    std::string out;
    for (const auto& f : fields()) out += std::string(f.key) + ": " + f.type + " = " + f.get(*this) + "\n";
    return out;
}

TrainConfig TrainConfig::from_text(const std::string& text) {
    TrainConfig c;
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto colon = line.find(':');
        const auto eq = line.find('=');
        if (colon == std::string::npos || eq == std::string::npos || eq < colon)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected 'key: type = value'");
        const std::string key = trim(line.substr(0, colon));
        const std::string type = trim(line.substr(colon + 1, eq - colon - 1));
        const Field& f = field(key);
        if (type != f.type)
            throw ConfigError("config line " + std::to_string(lineno) + ": " + key + " has type " + f.type +
                              ", not " + type);
        f.set(c, trim(line.substr(eq + 1)));
    }
    return c;
}

TrainConfig TrainConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_text(ss.str());
}

} // namespace sepnet
