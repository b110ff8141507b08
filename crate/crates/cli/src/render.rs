//! Report rendering: conventional detector labels, the human summary table,
//! and the CSV form.

use std::collections::BTreeMap;

use telsim_core::{RunReport, RunReport as Report};

/// Maps canonical detector ids onto the conventional labels used in reports:
/// one particle uses D11/D12/D21/D22, two particles D1..D6, the heralding
/// stage DG1/DG2/DH1/DH2. Larger runs keep the canonical `det.k.j` ids.
pub fn detector_display_map(particles: u32, event_ready: bool) -> BTreeMap<String, String> {
    let mut map = BTreeMap::new();
    match particles {
        1 => {
            map.insert("det.0.1".into(), "D11".into());
            map.insert("det.0.2".into(), "D12".into());
            map.insert("det.1.1".into(), "D21".into());
            map.insert("det.1.2".into(), "D22".into());
        }
        2 => {
            for pair in 0..3u32 {
                for port in 1..=2u32 {
                    map.insert(
                        format!("det.{pair}.{port}"),
                        format!("D{}", 2 * pair + port),
                    );
                }
            }
        }
        _ => {}
    }
    if event_ready {
        map.insert("det.g.1".into(), "DG1".into());
        map.insert("det.g.2".into(), "DG2".into());
        map.insert("det.h.1".into(), "DH1".into());
        map.insert("det.h.2".into(), "DH2".into());
    }
    map
}

/// Clone of the report with detector ids rewritten for display.
pub fn with_display_names(report: &Report, map: &BTreeMap<String, String>) -> Report {
    let mut out = report.clone();
    for row in &mut out.rows {
        row.pattern = row.pattern.renamed(map);
    }
    if let Some(heralding) = &mut out.heralding {
        for row in heralding {
            row.pattern = row.pattern.renamed(map);
        }
    }
    out
}

fn format_option(value: Option<f64>) -> String {
    value
        .map(|v| format!("{v:.9}"))
        .unwrap_or_else(|| "-".into())
}

fn parity_text(row: &telsim_core::OutcomeRow) -> String {
    row.parity
        .map(|p| p.to_string())
        .unwrap_or_else(|| "-".into())
}

/// Human-readable summary: heralding block (when present), per-outcome rows
/// and the aggregate figures.
pub fn table(report: &Report) -> String {
    let mut lines = Vec::new();

    if let Some(heralding) = &report.heralding {
        lines.push("heralding stage".to_string());
        for row in heralding {
            lines.push(format!(
                "  {:<28} p={:<12.9} {}",
                row.pattern.to_string(),
                row.probability,
                if row.accepted { "accepted" } else { "rejected" },
            ));
        }
        lines.push(String::new());
    }

    let width = report
        .rows
        .iter()
        .map(|r| r.pattern.to_string().len())
        .max()
        .unwrap_or(8)
        .max("pattern".len());
    lines.push(format!(
        "{:<width$}  {:>13}  {:<16}  {:<6}  {:>11}",
        "pattern", "probability", "labels", "parity", "fidelity"
    ));
    for row in &report.rows {
        lines.push(format!(
            "{:<width$}  {:>13.9}  {:<16}  {:<6}  {:>11}",
            row.pattern.to_string(),
            row.probability,
            row.labels.join(" "),
            parity_text(row),
            format_option(row.fidelity),
        ));
    }

    lines.push(String::new());
    let agg = &report.aggregates;
    lines.push(format!("success_probability   {}", agg.success_probability));
    lines.push(format!("failure_probability   {}", agg.failure_probability));
    if let Some(f) = agg.mean_success_fidelity {
        lines.push(format!("mean_success_fidelity {f}"));
    }
    if let Some(p) = agg.heralding_probability {
        lines.push(format!("heralding_probability {p}"));
    }
    if let Some(f) = agg.heralded_source_fidelity {
        lines.push(format!("heralded_source_fidelity {f}"));
    }
    if let Some(p) = agg.comparison_success_probability {
        lines.push(format!("sequential_swap_success_probability {p}"));
    }
    if let Some(shots) = agg.shots {
        lines.push(format!("shots                 {shots}"));
        lines.push(format!(
            "success_count         {}",
            agg.success_count.unwrap_or(0)
        ));
        if let Some(se) = agg.success_standard_error {
            lines.push(format!("standard_error        {se}"));
        }
    }
    for warning in &report.warnings {
        lines.push(format!("warning: {warning}"));
    }
    lines.push(String::new());
    lines.join("\n")
}

/// CSV rows: pattern, probability, labels, parity, fidelity. Heralding rows
/// come first when present, labeled as such.
pub fn csv(report: &Report) -> String {
    let mut lines = vec!["pattern,probability,labels,parity,fidelity".to_string()];
    if let Some(heralding) = &report.heralding {
        for row in heralding {
            lines.push(format!(
                "{},{},herald({}),,",
                row.pattern,
                row.probability,
                if row.accepted { "accepted" } else { "rejected" },
            ));
        }
    }
    for row in &report.rows {
        lines.push(format!(
            "{},{},{},{},{}",
            row.pattern,
            row.probability,
            row.labels.join("|"),
            row.parity.map(|p| p.to_string()).unwrap_or_default(),
            row.fidelity.map(|f| f.to_string()).unwrap_or_default(),
        ));
    }
    lines.push(String::new());
    lines.join("\n")
}

/// Side-by-side document for the comparison command.
pub fn comparison_json(direct: &RunReport, sequential: &RunReport) -> serde_json::Value {
    serde_json::json!({
        "config": direct.config,
        "comparison": {
            "total_scheme": direct.aggregates.success_probability,
            "sequential_swap": sequential.aggregates.success_probability,
            "total_scheme_mean_fidelity": direct.aggregates.mean_success_fidelity,
            "sequential_swap_mean_fidelity": sequential.aggregates.mean_success_fidelity,
        },
        "total_scheme": {
            "rows": direct.rows,
            "aggregates": direct.aggregates,
        },
        "sequential_swap": {
            "rows": sequential.rows,
            "aggregates": sequential.aggregates,
        },
        "warnings": direct.warnings,
    })
}

pub fn comparison_table(direct: &Report, sequential: &Report) -> String {
    let mut text = String::new();
    text.push_str("direct scheme\n");
    text.push_str(&table(direct));
    text.push_str("\nsequential swap comparison\n");
    text.push_str(&table(sequential));
    text.push_str(&format!(
        "\ncomparison: total_scheme {} vs sequential_swap {}\n",
        direct.aggregates.success_probability, sequential.aggregates.success_probability
    ));
    text
}
