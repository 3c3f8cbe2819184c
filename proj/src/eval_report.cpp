#include "poselift/eval_report.hpp"

#include <cfenv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

namespace poselift {

double EvalTable::average() const {
    if (values_mm.empty()) throw std::invalid_argument("eval table '" + label + "' is empty");
    double sum = 0.0;
    for (double v : values_mm) sum += v;
    return sum / static_cast<double>(values_mm.size());
}

namespace {

std::string format_full(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

EvalTable group_by_action(const std::string& label, const Tensor& pred_mm, const Tensor& gt_mm,
                          const std::vector<int>& action_of_row, const JointWeights* weights) {
    require_same_shape(pred_mm, gt_mm, "eval table");
    if (action_of_row.size() != pred_mm.rows())
        throw std::invalid_argument("eval table: " + std::to_string(action_of_row.size()) +
                                    " action labels for " + std::to_string(pred_mm.rows()) +
                                    " rows");
    EvalTable t;
    t.label = label;
    std::string missing;
    for (int a = 0; a < static_cast<int>(action_names().size()); ++a) {
        std::vector<std::size_t> rows;
        for (std::size_t r = 0; r < action_of_row.size(); ++r)
            if (action_of_row[r] == a) rows.push_back(r);
        if (rows.empty()) {
            missing += missing.empty() ? action_name(a) : ", " + action_name(a);
            continue;
        }
        Tensor p(rows.size(), pred_mm.cols()), g(rows.size(), gt_mm.cols());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            std::memcpy(p.row(i), pred_mm.row(rows[i]), pred_mm.cols() * sizeof(double));
            std::memcpy(g.row(i), gt_mm.row(rows[i]), gt_mm.cols() * sizeof(double));
        }
        t.actions.push_back(action_name(a));
        t.values_mm.push_back(weights ? weighted_mpjpe(p, g, *weights) : mpjpe(p, g));
    }
    if (!missing.empty())
        std::cerr << "warning: no samples for action(s) " << missing << "; omitted from table '"
                  << label << "'\n";
    if (t.actions.empty()) throw std::invalid_argument("eval table: no samples at all");
    return t;
}

std::vector<int> actions_of(const std::vector<PosePair>& data) {
    std::vector<int> a;
    a.reserve(data.size());
    for (const auto& p : data) a.push_back(p.action);
    return a;
}

} // namespace

EvalTable table_from_matrices(const std::string& label, const Tensor& pred_mm, const Tensor& gt_mm,
                              const std::vector<int>& action_of_row) {
    return group_by_action(label, pred_mm, gt_mm, action_of_row, nullptr);
}

EvalTable table_from_matrices_weighted(const std::string& label, const Tensor& pred_mm,
                                       const Tensor& gt_mm, const std::vector<int>& action_of_row,
                                       const JointWeights& weights) {
    return group_by_action(label, pred_mm, gt_mm, action_of_row, &weights);
}

EvalTable evaluate(Lifter& model, const std::vector<PosePair>& test_data, const NormStats& stats,
                   const std::string& label) {
    if (test_data.empty()) throw std::invalid_argument("evaluate: empty test data");
    const Tensor pred_mm =
        denormalize3d_batch(model.forward(to_input_matrix(test_data, stats), LayerMode::Eval), stats);
    return table_from_matrices(label, pred_mm, pose3d_matrix(test_data), actions_of(test_data));
}

EvalTable evaluate_weighted(Lifter& model, const std::vector<PosePair>& test_data,
                            const NormStats& stats, const JointWeights& weights,
                            const std::string& label) {
    if (test_data.empty()) throw std::invalid_argument("evaluate: empty test data");
    const Tensor pred_mm =
        denormalize3d_batch(model.forward(to_input_matrix(test_data, stats), LayerMode::Eval), stats);
    return table_from_matrices_weighted(label, pred_mm, pose3d_matrix(test_data),
                                        actions_of(test_data), weights);
}

Comparison compare(const EvalTable& baseline, const EvalTable& candidate) {
    if (baseline.actions.size() != candidate.actions.size())
        throw std::invalid_argument("compare: action sets differ (" +
                                    std::to_string(baseline.actions.size()) + " vs " +
                                    std::to_string(candidate.actions.size()) + ")");
    Comparison c;
    c.baseline = baseline;
    c.candidate = candidate;
    c.actions = baseline.actions;
    double improvement_sum = 0.0;
    for (std::size_t i = 0; i < baseline.actions.size(); ++i) {
        const std::string& name = baseline.actions[i];
        std::size_t j = 0;
        while (j < candidate.actions.size() && candidate.actions[j] != name) ++j;
        if (j == candidate.actions.size())
            throw std::invalid_argument("compare: action '" + name + "' missing from candidate");
        const double b = baseline.values_mm[i];
        const double v = candidate.values_mm[j];
        c.delta.push_back(v - b);
        c.rel_change_pct.push_back((v - b) / b * 100.0);
        improvement_sum += (b - v) / b * 100.0;
    }
    c.mean_rel_improvement_pct = improvement_sum / static_cast<double>(c.actions.size());
    const double ba = baseline.average(), ca = candidate.average();
    c.overall_rel_improvement_pct = (ba - ca) / ba * 100.0;
    return c;
}

double round1(double v) { return std::nearbyint(v * 10.0) / 10.0; }

namespace {

std::string format1(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f", round1(v));
    return buf;
}

std::string pad(const std::string& s, std::size_t width) {
    return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

std::string render_rows(const std::vector<std::string>& header,
                        const std::vector<std::vector<std::string>>& rows) {
    std::vector<std::size_t> widths(header.size());
    for (std::size_t c = 0; c < header.size(); ++c) {
        widths[c] = header[c].size();
        for (const auto& row : rows) widths[c] = std::max(widths[c], row[c].size());
    }
    std::ostringstream out;
    for (std::size_t c = 0; c < header.size(); ++c)
        out << (c ? "  " : "") << pad(header[c], widths[c]);
    out << "\n";
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "  " : "") << pad(row[c], widths[c]);
        out << "\n";
    }
    return out.str();
}

} // namespace

std::string render_table_text(const std::vector<EvalTable>& tables) {
    if (tables.empty()) throw std::invalid_argument("render_table_text: no tables");
    std::vector<std::string> header = {"version"};
    for (const auto& a : tables.front().actions) header.push_back(a);
    header.push_back("Average");
    std::vector<std::vector<std::string>> rows;
    for (const auto& t : tables) {
        if (t.actions != tables.front().actions)
            throw std::invalid_argument("render_table_text: tables have different action sets");
        std::vector<std::string> row = {t.label};
        for (double v : t.values_mm) row.push_back(format1(v));
        row.push_back(format1(t.average()));
        rows.push_back(std::move(row));
    }
    return render_rows(header, rows);
}

std::string render_comparison_text(const Comparison& c) {
    std::vector<std::string> header = {"action", c.baseline.label, c.candidate.label, "delta",
                                       "rel%"};
    std::vector<std::vector<std::string>> rows;
    for (std::size_t i = 0; i < c.actions.size(); ++i) {
        const std::string& name = c.actions[i];
        std::size_t bi = 0, ci = 0;
        while (c.baseline.actions[bi] != name) ++bi;
        while (c.candidate.actions[ci] != name) ++ci;
        rows.push_back({name, format1(c.baseline.values_mm[bi]), format1(c.candidate.values_mm[ci]),
                        format1(c.delta[i]), format1(c.rel_change_pct[i])});
    }
    rows.push_back({"Average", format1(c.baseline.average()), format1(c.candidate.average()),
                    format1(c.candidate.average() - c.baseline.average()),
                    format1(-c.overall_rel_improvement_pct)});
    std::ostringstream out;
    out << render_rows(header, rows);
    out << "mean relative improvement (per-action): " << format1(c.mean_rel_improvement_pct)
        << "%\n";
    out << "overall relative improvement (of averages): " << format1(c.overall_rel_improvement_pct)
        << "%\n";
    return out.str();
}

void save_table_csv(const std::string& path, const std::vector<EvalTable>& tables) {
    if (tables.empty()) throw std::invalid_argument("save_table_csv: no tables");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_table_csv: cannot write " + path);
    out << "version";
    for (const auto& a : tables.front().actions) out << "," << a;
    out << ",Average\n";
    for (const auto& t : tables) {
        if (t.actions != tables.front().actions)
            throw std::invalid_argument("save_table_csv: tables have different action sets");
        out << t.label;
        for (double v : t.values_mm) out << "," << format_full(v);
        out << "," << format_full(t.average()) << "\n";
    }
}

std::vector<EvalTable> load_table_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_table_csv: cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("load_table_csv: empty file " + path);
    while (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> header;
    {
        std::stringstream ss(line);
        std::string f;
        while (std::getline(ss, f, ',')) header.push_back(f);
    }
    if (header.size() < 3 || header.front() != "version" || header.back() != "Average")
        throw std::runtime_error("load_table_csv: malformed header in " + path);
    std::vector<std::string> actions(header.begin() + 1, header.end() - 1);
    for (const auto& a : actions)
        if (action_index(a) < 0)
            throw std::runtime_error("load_table_csv: unknown action column '" + a + "'");

    std::vector<EvalTable> tables;
    int row = 0;
    while (std::getline(in, line)) {
        while (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        ++row;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string f;
        while (std::getline(ss, f, ',')) fields.push_back(f);
        if (fields.size() != header.size())
            throw std::runtime_error("load_table_csv: row " + std::to_string(row) + " has " +
                                     std::to_string(fields.size()) + " columns, expected " +
                                     std::to_string(header.size()));
        EvalTable t;
        t.label = fields[0];
        t.actions = actions;
        for (std::size_t i = 0; i < actions.size(); ++i) {
            char* end = nullptr;
            double v = std::strtod(fields[1 + i].c_str(), &end);
            if (end == fields[1 + i].c_str() || *end != '\0' || !std::isfinite(v))
                throw std::runtime_error("load_table_csv: bad value at row " + std::to_string(row));
            t.values_mm.push_back(v);
        }
        char* end = nullptr;
        const std::string& avg_field = fields.back();
        double avg = std::strtod(avg_field.c_str(), &end);
        if (end == avg_field.c_str() || *end != '\0')
            throw std::runtime_error("load_table_csv: bad Average at row " + std::to_string(row));
        if (std::abs(avg - t.average()) > 1e-6 * std::max(1.0, std::abs(avg)))
            throw std::runtime_error("load_table_csv: Average column disagrees with rows at row " +
                                     std::to_string(row));
        tables.push_back(std::move(t));
    }
    if (tables.empty()) throw std::runtime_error("load_table_csv: no data rows in " + path);
    return tables;
}

void save_comparison_csv(const std::string& path, const Comparison& c) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_comparison_csv: cannot write " + path);
    out << "version";
    for (const auto& a : c.actions) out << "," << a;
    out << ",Average";
    for (const auto& a : c.actions) out << ",delta_" << a;
    out << ",delta_Average";
    for (const auto& a : c.actions) out << ",relpct_" << a;
    out << ",relpct_Average,mean_rel_improvement_pct,overall_rel_improvement_pct\n";

    auto value_of = [](const EvalTable& t, const std::string& name) {
        for (std::size_t i = 0; i < t.actions.size(); ++i)
            if (t.actions[i] == name) return t.values_mm[i];
        throw std::invalid_argument("comparison csv: action '" + name + "' missing");
    };

    out << c.baseline.label;
    for (const auto& a : c.actions) out << "," << format_full(value_of(c.baseline, a));
    out << "," << format_full(c.baseline.average());
    for (std::size_t i = 0; i < c.actions.size() + 1; ++i) out << ",0";
    for (std::size_t i = 0; i < c.actions.size() + 1; ++i) out << ",0";
    out << ",0,0\n";

    out << c.candidate.label;
    for (const auto& a : c.actions) out << "," << format_full(value_of(c.candidate, a));
    out << "," << format_full(c.candidate.average());
    for (double d : c.delta) out << "," << format_full(d);
    out << "," << format_full(c.candidate.average() - c.baseline.average());
    for (double p : c.rel_change_pct) out << "," << format_full(p);
    const double ba = c.baseline.average();
    out << "," << format_full((c.candidate.average() - ba) / ba * 100.0);
    out << "," << format_full(c.mean_rel_improvement_pct);
    out << "," << format_full(c.overall_rel_improvement_pct) << "\n";
}

} // namespace poselift
