#include "glap/io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "glap/error.hpp"

namespace glap::io {

namespace {

using json = nlohmann::json;

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void fail_at(const std::string& name, std::size_t line, const std::string& msg) {
    throw InputError(name + ":" + std::to_string(line) + ": " + msg);
}

// Calls `row(fields, line_no)` for every data line.
template <typename F>
void for_each_row(std::istream& in, const std::string& name, F&& row) {
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string_view> fields;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        fields.clear();
        std::size_t start = 0;
        while (true) {
            const auto comma = t.find(',', start);
            fields.push_back(trim(t.substr(start, comma == std::string_view::npos ? comma : comma - start)));
            if (comma == std::string_view::npos) break;
            start = comma + 1;
        }
        row(fields, line_no);
    }
    if (in.bad()) throw InputError(name + ": read error");
}

double parse_real(std::string_view field, const std::string& name, std::size_t line) {
    if (!field.empty() && field.front() == '+') field.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc() || ptr != field.data() + field.size()) {
        fail_at(name, line, "cannot parse number '" + std::string(field) + "'");
    }
    if (!std::isfinite(v)) fail_at(name, line, "non-finite value '" + std::string(field) + "'");
    return v;
}

ClassId parse_id(std::string_view field, const std::string& name, std::size_t line) {
    ClassId v = 0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc() || ptr != field.data() + field.size()) {
        fail_at(name, line, "cannot parse class id '" + std::string(field) + "'");
    }
    if (v < 0) fail_at(name, line, "negative class id " + std::to_string(v));
    return v;
}

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError(path.string() + ": cannot open file");
    return in;
}

// Rows of reals; every row must have `width` fields (first row sets it when 0).
std::vector<std::vector<double>> parse_rows(std::istream& in, const std::string& name) {
    std::vector<std::vector<double>> rows;
    std::size_t width = 0;
    for_each_row(in, name, [&](const auto& fields, std::size_t line) {
        if (rows.empty()) width = fields.size();
        if (fields.size() != width) {
            fail_at(name, line, "expected " + std::to_string(width) + " values, got " + std::to_string(fields.size()));
        }
        std::vector<double> row;
        row.reserve(fields.size());
        for (auto f : fields) row.push_back(parse_real(f, name, line));
        rows.push_back(std::move(row));
    });
    return rows;
}

Eigen::MatrixXd rows_to_columns(const std::vector<std::vector<double>>& rows) {
    const auto n = static_cast<Eigen::Index>(rows.size());
    const auto d = n ? static_cast<Eigen::Index>(rows.front().size()) : 0;
    Eigen::MatrixXd m(d, n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < d; ++i) m(i, j) = rows[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)];
    return m;
}

void emit(std::string& out, const json& j, int depth) {
    const std::string pad(static_cast<std::size_t>(2 * (depth + 1)), ' ');
    const std::string close_pad(static_cast<std::size_t>(2 * depth), ' ');
    switch (j.type()) {
        case json::value_t::object: {
            if (j.empty()) {
                out += "{}";
                return;
            }
            out += "{\n";
            bool first = true;
            for (const auto& [key, value] : j.items()) {  // std::map: keys sorted
                if (!first) out += ",\n";
                first = false;
                out += pad;
                out += json(key).dump();
                out += ": ";
                emit(out, value, depth + 1);
            }
            out += "\n" + close_pad + "}";
            return;
        }
        case json::value_t::array: {
            if (j.empty()) {
                out += "[]";
                return;
            }
            const bool scalars = std::all_of(j.begin(), j.end(), [](const json& v) { return v.is_primitive(); });
            if (scalars) {
                out += "[";
                for (std::size_t i = 0; i < j.size(); ++i) {
                    if (i) out += ", ";
                    emit(out, j[i], depth + 1);
                }
                out += "]";
                return;
            }
            out += "[\n";
            for (std::size_t i = 0; i < j.size(); ++i) {
                if (i) out += ",\n";
                out += pad;
                emit(out, j[i], depth + 1);
            }
            out += "\n" + close_pad + "]";
            return;
        }
        case json::value_t::number_float:
            out += format_double(j.get<double>());
            return;
        default:
            out += j.dump();
    }
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::string to_string(RegularizerKind k) { return k == RegularizerKind::L2 ? "l2" : "l1"; }

RegularizerKind parse_regularizer(const std::string& s) {
    if (s == "l2") return RegularizerKind::L2;
    if (s == "l1") return RegularizerKind::L1;
    throw InputError("unknown regularizer '" + s + "'");
}

json matrix_rows(const Eigen::MatrixXi& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

FeatureMatrix parse_features(std::istream& in, const std::string& name) {
    const auto rows = parse_rows(in, name);
    if (rows.empty()) throw InputError(name + ": no instances");
    return rows_to_columns(rows);
}

LabelVector parse_labels(std::istream& in, const std::string& name) {
    LabelVector labels;
    for_each_row(in, name, [&](const auto& fields, std::size_t line) {
        if (fields.size() != 1) fail_at(name, line, "expected one label per line");
        labels.push_back(parse_id(fields.front(), name, line));
    });
    if (labels.empty()) throw InputError(name + ": no labels");
    return labels;
}

SemanticTable parse_semantic_table(std::istream& in, const std::string& name) {
    std::vector<ClassId> ids;
    std::vector<std::vector<double>> rows;
    std::size_t width = 0;
    std::vector<std::size_t> lines;
    for_each_row(in, name, [&](const auto& fields, std::size_t line) {
        if (fields.size() < 2) fail_at(name, line, "expected class_id followed by at least one value");
        if (rows.empty()) width = fields.size();
        if (fields.size() != width) {
            fail_at(name, line, "expected " + std::to_string(width - 1) + " values, got " +
                                    std::to_string(fields.size() - 1));
        }
        const ClassId id = parse_id(fields.front(), name, line);
        if (std::find(ids.begin(), ids.end(), id) != ids.end()) {
            fail_at(name, line, "duplicate class id " + std::to_string(id));
        }
        ids.push_back(id);
        std::vector<double> row;
        for (std::size_t i = 1; i < fields.size(); ++i) row.push_back(parse_real(fields[i], name, line));
        rows.push_back(std::move(row));
    });
    if (rows.empty()) throw InputError(name + ": no classes");
    return SemanticTable(std::move(ids), rows_to_columns(rows));
}

FeatureMatrix read_features(const std::filesystem::path& path) {
    auto in = open_input(path);
    return parse_features(in, path.string());
}

LabelVector read_labels(const std::filesystem::path& path) {
    auto in = open_input(path);
    return parse_labels(in, path.string());
}

SemanticTable read_semantic_table(const std::filesystem::path& path) {
    auto in = open_input(path);
    return parse_semantic_table(in, path.string());
}

Eigen::MatrixXd read_matrix_rows(const std::filesystem::path& path) {
    auto in = open_input(path);
    const auto rows = parse_rows(in, path.string());
    if (rows.empty()) throw InputError(path.string() + ": no rows");
    return rows_to_columns(rows);
}

std::string format_double(double v) {
    if (!std::isfinite(v)) return "null";
    if (v == 0.0) return "0";  // also folds -0
    std::array<char, 32> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), ptr);
}

void write_columns(std::ostream& out, const Eigen::MatrixXd& m) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            if (i) out << ',';
            out << format_double(m(i, j));
        }
        out << '\n';
    }
}

void write_labels(std::ostream& out, const LabelVector& labels) {
    for (ClassId id : labels) out << id << '\n';
}

void write_predictions(std::ostream& out, const Prediction& p) {
    for (std::size_t j = 0; j < p.euclidean_fallback.size(); ++j) {
        if (p.euclidean_fallback[j]) out << "# instance " << j << ": zero projection, scored by euclidean distance\n";
    }
    for (std::size_t j = 0; j < p.labels.size(); ++j) {
        out << j << ',' << p.labels[j];
        for (Eigen::Index c = 0; c < p.scores.rows(); ++c) {
            out << ',' << format_double(p.scores(c, static_cast<Eigen::Index>(j)));
        }
        out << '\n';
    }
}

json to_json(const StrategyConfig& c) {
    return json{{"strategy", to_string(c.strategy)},
                {"lambda", c.lambda},
                {"npc", c.npc},
                {"sigma2", optional_number(c.sigma2)},
                {"ridge_eps", optional_number(c.ridge_eps)},
                {"seed", c.seed},
                {"metric", to_string(c.metric)},
                {"regularizer", {{"kind", to_string(c.reg.kind)}, {"weight", c.reg.weight}}},
                {"lasso", {{"max_iter", c.lasso.max_iter}, {"tol", c.lasso.tol}}}};
}

json to_json(const GlapModel& model) {
    const auto& A = model.map.A;
    json flat = json::array();
    for (Eigen::Index r = 0; r < A.rows(); ++r)
        for (Eigen::Index c = 0; c < A.cols(); ++c) flat.push_back(A(r, c));
    json unseen = json::array();
    for (Eigen::Index i = 0; i < model.unseen.size(); ++i) {
        json vec = json::array();
        for (Eigen::Index r = 0; r < model.unseen.dim(); ++r) vec.push_back(model.unseen.vectors()(r, i));
        unseen.push_back({{"class_id", model.unseen.class_ids()[static_cast<std::size_t>(i)]}, {"vector", vec}});
    }
    const auto& c = model.config;
    return json{{"format_version", kModelFormatVersion},
                {"a", A.rows()},
                {"d", A.cols()},
                {"metric", to_string(c.metric)},
                {"strategy", to_string(c.strategy)},
                {"lambda", c.lambda},
                {"npc", c.npc},
                {"sigma2", optional_number(c.sigma2)},
                {"seed", c.seed},
                {"ridge_eps", model.map.ridge_eps},
                {"regularizer", {{"kind", to_string(c.reg.kind)}, {"weight", c.reg.weight}}},
                {"A", flat},
                {"normalize_features", model.normalize_features},
                {"unseen", unseen},
                {"provenance",
                 {{"source_columns", model.provenance.source_columns},
                  {"virtual_columns", model.provenance.virtual_columns},
                  {"mean_columns", model.provenance.mean_columns}}}};
}

GlapModel model_from_json(const json& j) {
    try {
        if (j.at("format_version").get<int>() != kModelFormatVersion) {
            throw InputError("unsupported model format_version " + j.at("format_version").dump());
        }
        const auto a = j.at("a").get<Eigen::Index>();
        const auto d = j.at("d").get<Eigen::Index>();
        if (a < 1 || d < 1) throw InputError("model dimensions must be positive");
        const auto& flat = j.at("A");
        if (!flat.is_array() || static_cast<Eigen::Index>(flat.size()) != a * d) {
            throw InputError("model A must hold a*d = " + std::to_string(a * d) + " values");
        }
        GlapModel m;
        m.map.A.resize(a, d);
        for (Eigen::Index r = 0; r < a; ++r)
            for (Eigen::Index c = 0; c < d; ++c) m.map.A(r, c) = flat.at(static_cast<std::size_t>(r * d + c)).get<double>();
        m.map.bias = Eigen::VectorXd::Zero(a);
        m.map.ridge_eps = j.at("ridge_eps").get<double>();

        std::vector<ClassId> ids;
        const auto& unseen = j.at("unseen");
        Eigen::MatrixXd vectors(a, static_cast<Eigen::Index>(unseen.size()));
        for (std::size_t i = 0; i < unseen.size(); ++i) {
            ids.push_back(unseen[i].at("class_id").get<ClassId>());
            const auto& v = unseen[i].at("vector");
            if (static_cast<Eigen::Index>(v.size()) != a) throw InputError("unseen vector length differs from a");
            for (Eigen::Index r = 0; r < a; ++r) vectors(r, static_cast<Eigen::Index>(i)) = v.at(static_cast<std::size_t>(r)).get<double>();
        }
        m.unseen = SemanticTable(std::move(ids), std::move(vectors));
        if (m.unseen.empty()) throw InputError("model has no unseen classes");

        auto& c = m.config;
        c.strategy = parse_strategy(j.at("strategy").get<std::string>());
        c.metric = parse_metric(j.at("metric").get<std::string>());
        c.lambda = j.at("lambda").get<double>();
        c.npc = j.at("npc").get<int>();
        if (!j.at("sigma2").is_null()) c.sigma2 = j.at("sigma2").get<double>();
        c.seed = j.at("seed").get<std::uint64_t>();
        c.ridge_eps = m.map.ridge_eps;
        if (j.contains("regularizer")) {
            c.reg.kind = parse_regularizer(j.at("regularizer").at("kind").get<std::string>());
            c.reg.weight = j.at("regularizer").at("weight").get<double>();
        }
        m.normalize_features = j.value("normalize_features", false);
        if (j.contains("provenance")) {
            const auto& p = j.at("provenance");
            m.provenance.source_columns = p.value("source_columns", Eigen::Index{0});
            m.provenance.virtual_columns = p.value("virtual_columns", Eigen::Index{0});
            m.provenance.mean_columns = p.value("mean_columns", Eigen::Index{0});
        }
        if (!m.map.A.allFinite() || !m.unseen.vectors().allFinite()) throw InputError("model has non-finite values");
        return m;
    } catch (const json::exception& e) {
        throw InputError(std::string("malformed model: ") + e.what());
    }
}

json to_json(const TransferReport& report) {
    json classes = json::array();
    for (const auto& e : report.per_class) {
        classes.push_back(
            {{"class_id", e.class_id}, {"relative_residual", e.relative_residual}, {"transferable", e.transferable}});
    }
    return json{{"tolerance", report.tolerance},
                {"seen_rank", report.seen_rank},
                {"all_transferable", report.all_transferable()},
                {"classes", classes}};
}

json to_json(const SyntheticConfig& cfg) {
    return json{{"latent_dim", cfg.latent_dim},   {"feature_dim", cfg.feature_dim},
                {"semantic_dim", cfg.semantic_dim}, {"n_seen", cfg.n_seen},
                {"n_unseen", cfg.n_unseen},         {"samples_per_class", cfg.samples_per_class},
                {"obs_noise", cfg.obs_noise},       {"mixing", to_string(cfg.mixing)},
                {"seed", cfg.seed}};
}

json to_json(const EvalReport& report) {
    json strategies = json::array();
    for (const auto& r : report.results) {
        strategies.push_back({{"name", r.name},
                              {"accuracy", r.accuracy},
                              {"correct", r.correct},
                              {"total", r.total},
                              {"confusion", matrix_rows(r.confusion)},
                              {"config", to_json(r.config)}});
    }
    return json{{"unseen_ids", report.unseen_ids}, {"strategies", strategies}};
}

json to_json(const TrialsReport& report) {
    json summary = json::array();
    for (const auto& s : report.strategies) {
        summary.push_back({{"name", s.name},
                           {"mean_accuracy", s.mean_accuracy},
                           {"std_accuracy", s.std_accuracy},
                           {"accuracies", s.accuracies}});
    }
    json margins = json::object();
    const auto base = std::find_if(report.strategies.begin(), report.strategies.end(),
                                   [](const auto& s) { return s.name == "baseline"; });
    if (base != report.strategies.end()) {
        for (const auto& s : report.strategies) {
            if (s.name != "baseline") margins[s.name + "_minus_baseline"] = s.mean_accuracy - base->mean_accuracy;
        }
    }
    json trials = json::array();
    for (const auto& t : report.trials) trials.push_back(to_json(t));
    return json{{"config", to_json(report.config)},
                {"master_seed", report.master_seed},
                {"world_seeds", report.world_seeds},
                {"summary", summary},
                {"margins", margins},
                {"trials", trials}};
}

void write_npc_series(std::ostream& out, const std::vector<NpcPoint>& sweep) {
    out << "npc,strategy,mean_accuracy,std_accuracy\n";
    for (const auto& point : sweep) {
        for (const auto& s : point.report.strategies) {
            out << point.npc << ',' << s.name << ',' << format_double(s.mean_accuracy) << ','
                << format_double(s.std_accuracy) << '\n';
        }
    }
}

std::string dump(const json& j) {
    std::string out;
    emit(out, j, 0);
    out += '\n';
    return out;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError(path.string() + ": cannot open for writing");
    out << content;
    if (!out) throw InputError(path.string() + ": write failed");
}

std::string read_file(const std::filesystem::path& path) {
    auto in = open_input(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace glap::io
