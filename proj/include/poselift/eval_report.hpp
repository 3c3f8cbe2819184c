#pragma once

#include <string>
#include <vector>

#include "poselift/lifter.hpp"
#include "poselift/metrics.hpp"
#include "poselift/pose_data.hpp"

namespace poselift {

/// Per-action MPJPE table for one model version.
struct EvalTable {
    std::string label;
    std::vector<std::string> actions; // in canonical action order, absent actions omitted
    std::vector<double> values_mm;    // one per action

    /// Arithmetic mean of the rows (left-to-right accumulation).
    double average() const;
};

/// Per-action MPJPE from already-denormalized predictions. Actions with no
/// samples are omitted (with a stderr warning naming them).
EvalTable table_from_matrices(const std::string& label, const Tensor& pred_mm,
                              const Tensor& gt_mm, const std::vector<int>& action_of_row);
EvalTable table_from_matrices_weighted(const std::string& label, const Tensor& pred_mm,
                                       const Tensor& gt_mm, const std::vector<int>& action_of_row,
                                       const JointWeights& weights);

/// Runs the model in Eval mode over test_data and tabulates MPJPE per action.
EvalTable evaluate(Lifter& model, const std::vector<PosePair>& test_data, const NormStats& stats,
                   const std::string& label);
EvalTable evaluate_weighted(Lifter& model, const std::vector<PosePair>& test_data,
                            const NormStats& stats, const JointWeights& weights,
                            const std::string& label);

struct Comparison {
    EvalTable baseline;
    EvalTable candidate;
    std::vector<std::string> actions;       // baseline order
    std::vector<double> delta;              // candidate - baseline, per action
    std::vector<double> rel_change_pct;     // (candidate - baseline) / baseline * 100
    /// Mean over actions of (baseline - candidate) / baseline * 100: the
    /// primary "average improvement" definition.
    double mean_rel_improvement_pct = 0.0;
    /// Alternative definition, relative improvement of the table averages:
    /// (baseline_avg - candidate_avg) / baseline_avg * 100.
    double overall_rel_improvement_pct = 0.0;
};

/// Requires identical action sets (order may differ; baseline order is used).
Comparison compare(const EvalTable& baseline, const EvalTable& candidate);

/// Half-even rounding to one decimal, the precision used in text tables.
double round1(double v);

/// Fixed-width text table: one row per version, one column per action plus
/// Average, values at one decimal.
std::string render_table_text(const std::vector<EvalTable>& tables);
std::string render_comparison_text(const Comparison& c);

/// CSV: version,<actions...>,Average with full-precision values.
void save_table_csv(const std::string& path, const std::vector<EvalTable>& tables);
std::vector<EvalTable> load_table_csv(const std::string& path);

/// Comparison CSV adds delta_ and relpct_ column groups plus the two
/// improvement summaries; the baseline row carries zeros in those groups.
void save_comparison_csv(const std::string& path, const Comparison& c);

} // namespace poselift
