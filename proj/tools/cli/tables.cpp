#include "tables.hpp"

#include "run_config.hpp"

namespace recp::cli {

namespace {

constexpr double kAlphas[3] = {0.1, 0.05, 0.025};

struct Family {
    const char* name;
    int first;  // number of the alpha = 0.1 table
    const char* design;
    double mu;
    double tau;
    MethodKind kind;
    RandomSetVariant variant;
};

// Numeric tables come in alpha triples.
const Family kFamilies[] = {
    {"unsup-naive", 1, "unsup", 0.0, 1.0, MethodKind::naive, RandomSetVariant::mean},
    {"unsup-subsample", 4, "unsup", 0.0, 1.0, MethodKind::subsample, RandomSetVariant::mean},
    {"unsup-randomset-mean", 8, "unsup", 0.0, 1.0, MethodKind::randomset, RandomSetVariant::mean},
    {"unsup-randomset-kde", 11, "unsup", 0.0, 1.0, MethodKind::randomset, RandomSetVariant::kde},
    {"sup-naive-mu0", 14, "sup", 0.0, 1.0, MethodKind::naive, RandomSetVariant::mean},
    {"sup-naive-mu1", 17, "sup", 1.0, 0.1, MethodKind::naive, RandomSetVariant::mean},
    {"sup-subsample-mu0", 20, "sup", 0.0, 1.0, MethodKind::subsample, RandomSetVariant::mean},
    {"sup-subsample-mu1", 23, "sup", 1.0, 0.1, MethodKind::subsample, RandomSetVariant::mean},
    {"sup-randomset-mean-mu0", 26, "sup", 0.0, 1.0, MethodKind::randomset, RandomSetVariant::mean},
    {"sup-randomset-mean-mu1", 29, "sup", 1.0, 0.1, MethodKind::randomset, RandomSetVariant::mean},
    {"sup-randomset-kde-mu0", 32, "sup", 0.0, 1.0, MethodKind::randomset, RandomSetVariant::kde},
    {"sup-randomset-kde-mu1", 35, "sup", 1.0, 0.1, MethodKind::randomset, RandomSetVariant::kde},
};

TablePlan family_plan(const Family& f, int offset) {
    const double alpha = kAlphas[offset];
    TablePlan p;
    p.id = std::to_string(f.first + offset);
    p.design = f.design;
    p.mu = f.mu;
    p.tau = f.tau;
    p.k_grid = standard_k_grid();
    const std::vector<std::size_t> ns =
        f.kind == MethodKind::subsample ? std::vector<std::size_t>{1, 2, 4, 6, 8, 10} : std::vector<std::size_t>{1};
    for (std::size_t n : ns) {
        MethodSpec m;
        m.kind = f.kind;
        m.variant = f.variant;
        m.alpha = alpha;
        m.delta = m.epsilon = alpha / 2.0;
        m.n_subsamples = n;
        p.methods.push_back(m);
    }
    return p;
}

TablePlan pathological_plan() {
    TablePlan p;
    p.id = "pathological";
    p.design = "pathological";
    p.k_grid = {20};
    MethodSpec naive;
    MethodSpec sub;
    sub.kind = MethodKind::subsample;
    p.methods = {naive, sub};
    return p;
}

TablePlan shrinkage_plan(int setup) {
    TablePlan p;
    p.id = "shrinkage-" + std::to_string(setup);
    p.design = "shrinkage";
    p.n = 10;
    p.shrinkage_setup = setup;
    for (std::size_t k = 5; k <= 1000; k += 5) p.k_grid.push_back(k);
    return p;
}

} // namespace

const std::vector<std::size_t>& standard_k_grid() {
    static const std::vector<std::size_t> grid{5, 10, 15, 20, 25, 50, 100, 250, 500, 1000};
    return grid;
}

std::vector<TablePlan> resolve_table(const std::string& id) {
    if (id == "7") throw ConfigError{"table-id: table 7 lists 1 - alpha/N and is not a simulation"};
    if (id == "pathological") return {pathological_plan()};
    if (id == "shrinkage-1") return {shrinkage_plan(1)};
    if (id == "shrinkage-2") return {shrinkage_plan(2)};
    for (const Family& f : kFamilies) {
        if (id == f.name) return {family_plan(f, 0), family_plan(f, 1), family_plan(f, 2)};
        for (int off = 0; off < 3; ++off)
            if (id == std::to_string(f.first + off)) return {family_plan(f, off)};
    }
    throw ConfigError{"table-id: unknown table '" + id + "'"};
}

std::vector<std::string> table_ids() {
    std::vector<std::string> ids;
    for (int i = 1; i <= 37; ++i)
        if (i != 7) ids.push_back(std::to_string(i));
    for (const Family& f : kFamilies) ids.emplace_back(f.name);
    ids.emplace_back("pathological");
    ids.emplace_back("shrinkage-1");
    ids.emplace_back("shrinkage-2");
    return ids;
}

} // namespace recp::cli
