#include "fiberfield/harness/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fiberfield/core/error.hpp"

namespace fiberfield {

using json = nlohmann::json;

std::string to_string(Mode mode) {
    switch (mode) {
        case Mode::micro: return "micro";
        case Mode::meanfield: return "meanfield";
        case Mode::stationary: return "stationary";
        case Mode::macro: return "macro";
        case Mode::verify: return "verify";
        case Mode::compare: return "compare";
    }
    return "unknown";
}

Mode mode_from_string(const std::string& name) {
    for (Mode m : {Mode::micro, Mode::meanfield, Mode::stationary, Mode::macro, Mode::verify, Mode::compare})
        if (to_string(m) == name) return m;
    throw ConfigError("unknown mode '" + name + "' (expected micro|meanfield|stationary|macro|verify|compare)");
}

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) { throw ConfigError(path + ": " + what); }

/// Reads the keys of one object and rejects the ones nobody asked for.
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) fail(path_.empty() ? "<root>" : path_, "expected an object");
    }

    std::string key_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
    const json* find(const std::string& key) {
        seen_.insert(key);
        const auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    void number(const std::string& key, double& out) {
        if (const json* v = find(key)) {
            if (!v->is_number()) fail(key_path(key), "expected a number");
            out = v->get<double>();
        }
    }
    void integer(const std::string& key, int& out) {
        if (const json* v = find(key)) {
            if (!v->is_number_integer()) fail(key_path(key), "expected an integer");
            const auto x = v->get<std::int64_t>();
            if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max())
                fail(key_path(key), "integer out of range");
            out = static_cast<int>(x);
        }
    }
    void unsigned_integer(const std::string& key, std::uint64_t& out) {
        if (const json* v = find(key)) {
            if (!v->is_number_unsigned()) fail(key_path(key), "expected a non-negative integer");
            out = v->get<std::uint64_t>();
        }
    }
    void string(const std::string& key, std::string& out) {
        if (const json* v = find(key)) {
            if (!v->is_string()) fail(key_path(key), "expected a string");
            out = v->get<std::string>();
        }
    }
    void boolean(const std::string& key, bool& out) {
        if (const json* v = find(key)) {
            if (!v->is_boolean()) fail(key_path(key), "expected true or false");
            out = v->get<bool>();
        }
    }

    void finish() const {
        for (const auto& [key, value] : j_.items())
            if (!seen_.count(key)) fail(key_path(key), "unknown key");
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

void read_physics(const json& j, PhysicsConfig& p) {
    Section s(j, "physics");
    s.integer("d", p.d);
    s.number("A", p.A);
    if (const json* h = s.find("H")) {
        if (h->is_string()) {
            if (h->get<std::string>() != "inf") fail("physics.H", "expected a number or \"inf\"");
            p.kernel = DelayKernel::infinite();
        } else if (h->is_number()) {
            p.kernel = DelayKernel::finite(h->get<double>());
        } else {
            fail("physics.H", "expected a number or \"inf\"");
        }
    }
    if (const json* v = s.find("V")) {
        if (!v->is_string()) fail("physics.V", "expected \"quadratic\" or \"none\"");
        try {
            p.V.kind = coiling_kind_from_string(v->get<std::string>());
        } catch (const ConfigError& e) {
            fail("physics.V", e.what());
        }
    }
    if (const json* u = s.find("U")) {
        if (u->is_null()) {
            p.U.reset();
        } else {
            InteractionPotential pot = p.U.value_or(InteractionPotential::smooth_heaviside(10.0, 1.4, 10.0));
            Section us(*u, "physics.U");
            std::string kind = to_string(pot.kind);
            us.string("kind", kind);
            try {
                pot.kind = interaction_kind_from_string(kind);
            } catch (const ConfigError& e) {
                fail("physics.U.kind", e.what());
            }
            us.number("C", pot.strength);
            us.number("R", pot.radius);
            us.number("k", pot.regularization);
            us.finish();
            p.U = pot;
        }
    }
    s.finish();
}

void read_numerics(const json& j, NumericsConfig& n) {
    Section s(j, "numerics");
    s.number("dt", n.dt);
    s.number("T", n.T);
    s.integer("n_x", n.n_x);
    s.number("L", n.L);
    s.integer("level", n.level);
    s.integer("stride", n.stride);
    s.number("tol", n.tol);
    s.integer("max_iter", n.max_iter);
    s.number("relaxation", n.relaxation);
    s.integer("N", n.N);
    s.integer("groups", n.groups);
    s.unsigned_integer("seed", n.seed);
    s.number("threshold_frac", n.threshold_frac);
    s.number("cfl_safety", n.cfl_safety);
    s.number("meanfield_dt", n.meanfield_dt);
    s.number("macro_dt", n.macro_dt);
    s.finish();
}

void read_output(const json& j, OutputConfig& o) {
    Section s(j, "output");
    s.string("dir", o.dir);
    s.number("snapshot_interval", o.snapshot_interval);
    s.integer("radial_bins", o.radial_bins);
    s.finish();
}

void read_verify(const json& j, VerifySection& v) {
    Section s(j, "verify");
    if (const json* list = s.find("N_list")) {
        if (!list->is_array()) fail("verify.N_list", "expected an array of integers");
        v.N_list.clear();
        for (const auto& x : *list) {
            if (!x.is_number_integer()) fail("verify.N_list", "expected an array of integers");
            v.N_list.push_back(x.get<int>());
        }
    }
    s.number("T", v.T);
    s.integer("seeds", v.seeds);
    s.boolean("coupled", v.coupled);
    std::string scheme = v.scheme == Integrator::euler ? "euler" : "rk4";
    s.string("scheme", scheme);
    if (scheme == "euler")
        v.scheme = Integrator::euler;
    else if (scheme == "rk4")
        v.scheme = Integrator::rk4;
    else
        fail("verify.scheme", "expected \"euler\" or \"rk4\"");
    s.finish();
}

void read_compare(const json& j, CompareSection& c) {
    Section s(j, "compare");
    if (const json* list = s.find("inputs")) {
        if (!list->is_array()) fail("compare.inputs", "expected an array of names");
        c.inputs.clear();
        for (const auto& x : *list) {
            if (!x.is_string()) fail("compare.inputs", "expected an array of names");
            c.inputs.push_back(x.get<std::string>());
        }
    }
    s.finish();
}

void require(bool ok, const std::string& path, const std::string& what) {
    if (!ok) fail(path, what);
}

bool finite_positive(double x) { return std::isfinite(x) && x > 0.0; }

}  // namespace

ExperimentConfig preset_config(const std::string& name) {
    ExperimentConfig cfg;
    cfg.preset = name;
    if (name == "paper") return cfg;
    if (name == "free") {
        cfg.physics.U.reset();
        return cfg;
    }
    fail("preset", "unknown preset '" + name + "' (expected paper|free)");
}

ExperimentConfig parse_config(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: malformed JSON: ") + e.what());
    }
    Section root(doc, "");
    std::string preset = "paper";
    root.string("preset", preset);
    ExperimentConfig cfg = preset_config(preset);
    if (const json* p = root.find("physics")) read_physics(*p, cfg.physics);
    if (const json* n = root.find("numerics")) read_numerics(*n, cfg.numerics);
    root.string("initial", cfg.initial);
    if (const json* o = root.find("output")) read_output(*o, cfg.output);
    if (const json* v = root.find("verify")) read_verify(*v, cfg.verify);
    if (const json* c = root.find("compare")) read_compare(*c, cfg.compare);
    root.finish();
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str());
}

std::string serialize_config(const ExperimentConfig& cfg) {
    const auto& p = cfg.physics;
    const auto& n = cfg.numerics;
    json doc;
    doc["preset"] = cfg.preset;
    json physics = {{"d", p.d}, {"A", p.A}, {"V", to_string(p.V.kind)}};
    physics["H"] = p.kernel.is_infinite() ? json("inf") : json(p.kernel.cutoff);
    if (p.U)
        physics["U"] = {{"kind", to_string(p.U->kind)}, {"C", p.U->strength}, {"R", p.U->radius}, {"k", p.U->regularization}};
    else
        physics["U"] = nullptr;
    doc["physics"] = physics;
    doc["numerics"] = {{"dt", n.dt},
                       {"T", n.T},
                       {"n_x", n.n_x},
                       {"L", n.L},
                       {"level", n.level},
                       {"stride", n.stride},
                       {"tol", n.tol},
                       {"max_iter", n.max_iter},
                       {"relaxation", n.relaxation},
                       {"N", n.N},
                       {"groups", n.groups},
                       {"seed", n.seed},
                       {"threshold_frac", n.threshold_frac},
                       {"cfl_safety", n.cfl_safety},
                       {"meanfield_dt", n.meanfield_dt},
                       {"macro_dt", n.macro_dt}};
    doc["initial"] = cfg.initial;
    doc["output"] = {{"dir", cfg.output.dir},
                     {"snapshot_interval", cfg.output.snapshot_interval},
                     {"radial_bins", cfg.output.radial_bins}};
    doc["verify"] = {{"N_list", cfg.verify.N_list},
                     {"T", cfg.verify.T},
                     {"seeds", cfg.verify.seeds},
                     {"coupled", cfg.verify.coupled},
                     {"scheme", cfg.verify.scheme == Integrator::euler ? "euler" : "rk4"}};
    doc["compare"] = {{"inputs", cfg.compare.inputs}};
    return doc.dump(2);
}

void ExperimentConfig::validate() const {
    const auto& p = physics;
    const auto& n = numerics;
    require(p.d == 2 || p.d == 3, "physics.d", "must be 2 or 3");
    require(std::isfinite(p.A) && p.A >= 0.0, "physics.A", "must be finite and >= 0");
    require(p.kernel.cutoff >= 0.0, "physics.H", "must be >= 0 or \"inf\"");
    if (p.U) {
        require(finite_positive(p.U->strength), "physics.U.C", "must be positive");
        require(finite_positive(p.U->radius), "physics.U.R", "must be positive");
        if (p.U->kind == InteractionKind::smooth_heaviside)
            require(finite_positive(p.U->regularization), "physics.U.k", "must be positive");
    }
    require(finite_positive(n.dt), "numerics.dt", "must be positive");
    require(finite_positive(n.T), "numerics.T", "must be positive");
    require(n.n_x >= 3, "numerics.n_x", "must be >= 3");
    require(finite_positive(n.L), "numerics.L", "must be positive");
    require(n.level >= 0 && n.level <= 7, "numerics.level", "must lie in [0, 7]");
    require(n.stride >= 1, "numerics.stride", "must be >= 1");
    require(finite_positive(n.tol), "numerics.tol", "must be positive");
    require(n.max_iter >= 1, "numerics.max_iter", "must be >= 1");
    require(n.relaxation > 0.0 && n.relaxation <= 1.0, "numerics.relaxation", "must lie in (0, 1]");
    require(n.N >= 1, "numerics.N", "must be >= 1");
    require(n.groups >= 1, "numerics.groups", "must be >= 1");
    require(n.threshold_frac >= 0.0 && n.threshold_frac < 1.0, "numerics.threshold_frac", "must lie in [0, 1)");
    require(n.cfl_safety > 0.0 && n.cfl_safety <= 1.0, "numerics.cfl_safety", "must lie in (0, 1]");
    require(std::isfinite(n.meanfield_dt) && n.meanfield_dt >= 0.0, "numerics.meanfield_dt", "must be >= 0");
    require(std::isfinite(n.macro_dt) && n.macro_dt >= 0.0, "numerics.macro_dt", "must be >= 0");
    require(initial == "box", "initial", "only \"box\" is supported");
    require(!output.dir.empty(), "output.dir", "must not be empty");
    require(std::isfinite(output.snapshot_interval) && output.snapshot_interval >= 0.0, "output.snapshot_interval",
            "must be >= 0");
    require(output.radial_bins >= 2, "output.radial_bins", "must be >= 2");
    require(verify.N_list.size() >= 2, "verify.N_list", "needs at least two sizes");
    for (std::size_t k = 0; k < verify.N_list.size(); ++k) {
        require(verify.N_list[k] >= 1, "verify.N_list", "entries must be >= 1");
        if (k > 0) require(verify.N_list[k] > verify.N_list[k - 1], "verify.N_list", "must be increasing");
    }
    require(finite_positive(verify.T), "verify.T", "must be positive");
    require(verify.seeds >= 1, "verify.seeds", "must be >= 1");
    require(compare.inputs.size() >= 2, "compare.inputs", "needs at least two names");
}

SpatialGrid ExperimentConfig::grid() const { return {physics.d, numerics.n_x, numerics.L}; }

MicroConfig ExperimentConfig::micro() const {
    MicroConfig m;
    m.dim = physics.d;
    m.N = numerics.N;
    m.groups = numerics.groups;
    m.A = physics.A;
    m.dt = numerics.dt;
    m.T = numerics.T;
    m.seed = numerics.seed;
    m.kernel = physics.kernel;
    m.V = physics.V;
    m.U = physics.U;
    m.stride = numerics.stride;
    m.snapshot_interval = output.snapshot_interval;
    return m;
}

MeanFieldConfig ExperimentConfig::meanfield() const {
    MeanFieldConfig m;
    m.grid = grid();
    m.level = numerics.level;
    m.A = physics.A;
    m.kernel = physics.kernel;
    m.V = physics.V;
    m.U = physics.U;
    m.threshold_frac = numerics.threshold_frac;
    m.dt = numerics.meanfield_dt;
    m.cfl_safety = numerics.cfl_safety;
    return m;
}

StationaryProblem ExperimentConfig::stationary() const {
    StationaryProblem s;
    s.grid = grid();
    s.V = physics.V;
    s.U = physics.U;
    s.tol = numerics.tol;
    s.max_iter = numerics.max_iter;
    s.relaxation = numerics.relaxation;
    return s;
}

MacroConfig ExperimentConfig::macro() const {
    MacroConfig m;
    m.A = physics.A;
    m.kernel = physics.kernel;
    m.grid = grid();
    m.V = physics.V;
    m.U = physics.U;
    m.dt = numerics.macro_dt;
    m.cfl_safety = numerics.cfl_safety;
    return m;
}

VerifyConfig ExperimentConfig::verification() const {
    VerifyConfig v;
    v.physics.dim = physics.d;
    v.physics.dt = numerics.dt;
    v.physics.kernel = physics.kernel;
    v.physics.V = physics.V;
    v.physics.U = physics.U;
    v.physics.stride = numerics.stride;
    v.physics.scheme = verify.scheme;
    v.N_list = verify.N_list;
    v.T = verify.T;
    v.seeds = verify.seeds;
    v.seed = numerics.seed;
    v.coupled = verify.coupled;
    return v;
}

}  // namespace fiberfield
