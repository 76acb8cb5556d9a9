#include "hloss/report_io.hpp"

#include <fstream>
#include <sstream>
#include <unordered_map>

#include "hloss/errors.hpp"
#include "hloss/format.hpp"
#include "json.hpp"

namespace hloss {

namespace {

using nlohmann::json;

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) {
        const auto a = field.find_first_not_of(" \t\r");
        const auto b = field.find_last_not_of(" \t\r");
        fields.push_back(a == std::string::npos ? std::string() : field.substr(a, b - a + 1));
    }
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

double parse_double(const std::string& s, int line_no) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used == s.size()) return v;
    } catch (const std::exception&) {
    }
    throw ParseError("line " + std::to_string(line_no) + ": '" + s + "' is not a number");
}

} // namespace

std::string manifest_line(const RunManifest& m) {
    json doc;
    doc["subcommand"] = m.subcommand;
    doc["inputs"] = m.inputs;
    doc["hyperparameters"] = m.hyperparameters;
    doc["seed"] = m.seed;
    doc["outputs"] = m.outputs;
    doc["tool_version"] = m.tool_version;
    return "# manifest " + doc.dump() + "\n";
}

std::string_view skip_header_lines(std::string_view text) {
    while (!text.empty() && text.front() == '#') {
        const auto end = text.find('\n');
        if (end == std::string_view::npos) return {};
        text.remove_prefix(end + 1);
    }
    return text;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path.string());
    out << content;
}

std::string format_dataset_csv(const Dataset& data, bool full_precision) {
    std::ostringstream out;
    for (int d = 0; d < data.dim(); ++d) out << "f_" << d + 1 << ',';
    out << "label\n";
    for (int i = 0; i < data.size(); ++i) {
        for (int d = 0; d < data.dim(); ++d) {
            out << format_number(data.features(i, d), full_precision) << ',';
        }
        out << data.labels[i] << '\n';
    }
    return out.str();
}

Dataset parse_dataset_csv(std::string_view text, const Hierarchy& h) {
    std::unordered_map<std::string, NodeId> by_name;
    for (NodeId k = 1; k <= h.leaf_count(); ++k) {
        by_name.emplace(h.original_id(k), k);
        if (!h.name(k).empty()) by_name.emplace(h.name(k), k);
    }

    std::istringstream in{std::string(skip_header_lines(text))};
    std::string line;
    int line_no = 0;
    std::size_t width = 0;
    std::vector<std::vector<double>> rows;
    Dataset data;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r" || line.front() == '#') continue;
        const auto fields = split_csv_line(line);
        if (width == 0) {
            if (fields.size() < 2 || fields.back() != "label") {
                throw ParseError("dataset header must end with a 'label' column");
            }
            width = fields.size();
            continue;
        }
        if (fields.size() != width) {
            throw ParseError("line " + std::to_string(line_no) + ": expected " +
                             std::to_string(width) + " fields");
        }
        std::vector<double> row;
        for (std::size_t c = 0; c + 1 < width; ++c) row.push_back(parse_double(fields[c], line_no));
        rows.push_back(std::move(row));

        const std::string& label = fields.back();
        NodeId y = -1;
        if (const auto it = by_name.find(label); it != by_name.end()) {
            y = it->second;
        } else {
            y = static_cast<NodeId>(parse_double(label, line_no));
        }
        if (!h.is_leaf(y)) {
            throw ParseError("line " + std::to_string(line_no) + ": label '" + label +
                             "' is not a class of the tree");
        }
        data.labels.push_back(y);
    }
    if (rows.empty()) throw ParseError("dataset has no rows");
    data.features.resize(static_cast<Eigen::Index>(rows.size()),
                         static_cast<Eigen::Index>(width - 1));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t c = 0; c + 1 < width; ++c) data.features(i, c) = rows[i][c];
    }
    return data;
}

std::string format_checkpoint(const LinearModel& model, const TrainConfig& config) {
    json doc;
    doc["dims"] = {{"classes", model.classes()}, {"features", model.dim()}};
    doc["seed"] = config.seed;
    doc["config"] = {{"loss", to_string(config.loss)},
                     {"q", config.q},
                     {"alpha", config.alpha},
                     {"epochs", config.epochs},
                     {"learning_rate", config.learning_rate},
                     {"batch_size", config.batch_size}};
    std::vector<double> weights;
    weights.reserve(model.weights.size());
    for (int k = 0; k < model.classes(); ++k) {
        for (int d = 0; d < model.dim(); ++d) weights.push_back(model.weights(k, d));
    }
    doc["weights"] = weights;
    doc["biases"] = std::vector<double>(model.biases.data(), model.biases.data() + model.biases.size());
    return doc.dump(2) + "\n";
}

LinearModel parse_checkpoint(std::string_view text) {
    json doc;
    try {
        doc = json::parse(skip_header_lines(text));
        const int classes = doc.at("dims").at("classes").get<int>();
        const int features = doc.at("dims").at("features").get<int>();
        const auto weights = doc.at("weights").get<std::vector<double>>();
        const auto biases = doc.at("biases").get<std::vector<double>>();
        if (classes < 1 || features < 1 ||
            weights.size() != static_cast<std::size_t>(classes) * features ||
            biases.size() != static_cast<std::size_t>(classes)) {
            throw ParseError("checkpoint parameter arrays do not match its dims");
        }
        LinearModel model;
        model.weights = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                                       Eigen::RowMajor>>(weights.data(), classes,
                                                                         features);
        model.biases = Eigen::Map<const Eigen::VectorXd>(biases.data(), classes);
        return model;
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed checkpoint: ") + e.what());
    }
}

std::string format_report(const EvaluationReport& report, bool full) {
    std::ostringstream out;
    out << "{\n"
        << "  \"accuracy\": " << format_number(report.accuracy, full) << ",\n"
        << "  \"mean_hier_distance\": " << format_number(report.mean_hier_distance, full) << ",\n"
        << "  \"mean_wasserstein\": " << format_number(report.mean_wasserstein, full) << ",\n"
        << "  \"sample_count\": " << report.sample_count << "\n"
        << "}\n";
    return out.str();
}

std::string format_curve_csv(const CoarseningCurve& curve, bool full) {
    std::ostringstream out;
    out << "tau,group_count,accuracy\n";
    for (const auto& p : curve.points) {
        out << format_number(p.tau, full) << ',' << p.group_count << ','
            << format_number(p.accuracy, full) << '\n';
    }
    return out.str();
}

std::string format_loss_report(const Objective& objective, const Eigen::MatrixXd& logits,
                               std::span<const NodeId> labels, bool full, int threads) {
    const BatchLoss batch = evaluate_batch(objective, logits, labels, false, threads);
    std::ostringstream out;
    out << "sample_id\tlabel\tloss\tpredicted\tcorrect\n";
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const NodeId predicted = argmax_class(logits.row(static_cast<Eigen::Index>(i)).transpose());
        out << i << '\t' << labels[i] << '\t' << format_number(batch.per_sample[i], full) << '\t'
            << predicted << '\t' << (predicted == labels[i] ? 1 : 0) << '\n';
    }
    return out.str();
}

} // namespace hloss
