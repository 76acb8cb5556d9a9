#include <filesystem>
#include <sstream>
#include <string>

#include "doctest.h"
#include "hloss/errors.hpp"
#include "hloss/report_io.hpp"
#include "hloss/shapes.hpp"
#include "hloss/tree_io.hpp"
#include "json.hpp"
#include "support.hpp"

using namespace hloss;

TEST_CASE("manifest line") {
    RunManifest m;
    m.subcommand = "train";
    m.inputs["tree"] = "t.json";
    m.hyperparameters["q"] = "0.9";
    m.seed = 7;
    m.outputs["report"] = "report.json";
    const std::string line = manifest_line(m);
    CHECK(line.rfind("# manifest ", 0) == 0);
    CHECK(line.back() == '\n');
    CHECK(line.find('\n') == line.size() - 1);
    const auto doc = nlohmann::json::parse(line.substr(11));
    CHECK(doc["seed"] == 7);
    CHECK(doc["subcommand"] == "train");
    CHECK(doc["hyperparameters"]["q"] == "0.9");
    CHECK(doc["tool_version"] == kToolVersion);
    CHECK(manifest_line(m) == line);
}

TEST_CASE("header lines are skipped") {
    CHECK(skip_header_lines("# a\n# b\nbody\n") == "body\n");
    CHECK(skip_header_lines("body\n# not header\n") == "body\n# not header\n");
    CHECK(skip_header_lines("# only").empty());
}

TEST_CASE("dataset CSV round trip") {
    const Hierarchy h = seven_leaf_taxonomy();
    const Dataset data = generate_synthetic(h, 3, 4, 1.0, 5);
    const std::string text = format_dataset_csv(data, true);
    CHECK(text.rfind("f_1,f_2,f_3,f_4,label\n", 0) == 0);
    const Dataset back = parse_dataset_csv("# manifest {}\n" + text, h);
    CHECK(back.labels == data.labels);
    CHECK(back.features == data.features);
}

TEST_CASE("dataset labels may be leaf names") {
    const Hierarchy h = load_hierarchy(test::data_path("seven_leaf.json"));
    const Dataset data = parse_dataset_csv("f_1,f_2,label\n0.5,1,class-6\n1,2,3\n", h);
    CHECK(data.labels == std::vector<NodeId>{6, 3});
    CHECK(data.features(0, 0) == 0.5);
    const Hierarchy edges = parse_hierarchy("cat\tanimal\ndog\tanimal\nanimal\troot\nrock\troot\n");
    CHECK(parse_dataset_csv("x,y,label\n0,0,dog\n1,1,rock\n", edges).labels ==
          std::vector<NodeId>{2, 3});
}

TEST_CASE("dataset CSV errors") {
    const Hierarchy h = seven_leaf_taxonomy();
    CHECK_THROWS_AS(parse_dataset_csv("f_1,f_2\n1,2\n", h), ParseError);
    CHECK_THROWS_AS(parse_dataset_csv("f_1,label\n1,2,3\n", h), ParseError);
    CHECK_THROWS_AS(parse_dataset_csv("f_1,label\nabc,2\n", h), ParseError);
    CHECK_THROWS_AS(parse_dataset_csv("f_1,label\n1,8\n", h), ParseError);
    CHECK_THROWS_AS(parse_dataset_csv("f_1,label\n1,unknown\n", h), ParseError);
    CHECK_THROWS_AS(parse_dataset_csv("f_1,label\n", h), ParseError);
}

TEST_CASE("checkpoint round trip") {
    LinearModel model;
    model.weights.resize(3, 2);
    model.weights << 0.1, -0.2, 1.0 / 3.0, 4e-17, -5.5, 6.25;
    model.biases.resize(3);
    model.biases << 0.01, -0.02, 0.03;
    TrainConfig config;
    config.seed = 99;
    const std::string text = format_checkpoint(model, config);
    const auto doc = nlohmann::json::parse(text);
    CHECK(doc["dims"]["classes"] == 3);
    CHECK(doc["dims"]["features"] == 2);
    CHECK(doc["seed"] == 99);
    CHECK(doc["config"]["loss"] == "hier");
    CHECK(doc["weights"][1] == -0.2);
    const LinearModel back = parse_checkpoint("# manifest {}\n" + text);
    CHECK(back.weights == model.weights);
    CHECK(back.biases == model.biases);
    CHECK_THROWS_AS(parse_checkpoint("{\"dims\": {\"classes\": 2, \"features\": 2}, \"weights\": [1],"
                                     " \"biases\": [0, 0]}"),
                    ParseError);
    CHECK_THROWS_AS(parse_checkpoint("not json"), ParseError);
}

TEST_CASE("report and curve formats") {
    EvaluationReport r;
    r.accuracy = 0.5;
    r.mean_hier_distance = 1.0 / 3.0;
    r.mean_wasserstein = 0.25;
    r.sample_count = 4;
    const std::string text = format_report(r, false);
    CHECK(text.find("\"mean_hier_distance\": 0.333333") != std::string::npos);
    const auto doc = nlohmann::json::parse(text);
    CHECK(doc["sample_count"] == 4);
    CHECK(format_report(r, true).find("0.33333333333333331") != std::string::npos);

    CoarseningCurve curve;
    curve.points = {{0.0, 1, 1.0}, {0.25, 3, 0.75}, {0.5, 7, 0.5}};
    CHECK(format_curve_csv(curve, false) ==
          "tau,group_count,accuracy\n0.000000,1,1.000000\n0.250000,3,0.750000\n0.500000,7,0.500000\n");
}

TEST_CASE("loss report") {
    const Hierarchy h = flat_hierarchy(2);
    Eigen::MatrixXd logits(2, 2);
    logits << 0.0, 0.0, 3.0, 1.0;
    const std::vector<NodeId> labels{1, 2};
    const std::string text =
        format_loss_report(Objective::hierarchical(h, 1.0), logits, labels, false);
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);
    CHECK(line == "sample_id\tlabel\tloss\tpredicted\tcorrect");
    std::getline(in, line);
    CHECK(line == "0\t1\t0.346574\t1\t1");
    std::getline(in, line);
    CHECK(line.rfind("1\t2\t", 0) == 0);
    CHECK(line.substr(line.size() - 4) == "\t1\t0");
}

TEST_CASE("output files are written with parent directories") {
    const auto dir = std::filesystem::temp_directory_path() / "hloss-report-io-test" / "nested";
    std::filesystem::remove_all(dir.parent_path());
    write_text_file(dir / "a.txt", "hello\n");
    CHECK(read_text_file(dir / "a.txt") == "hello\n");
    std::filesystem::remove_all(dir.parent_path());
    CHECK_THROWS_AS(read_text_file(dir / "missing.txt"), InputError);
}
