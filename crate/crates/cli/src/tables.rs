use std::fmt::Write;

use modular_kgqa::generation::GenerationResult;
use modular_kgqa::metrics::StageMetrics;
use modular_kgqa::pipeline::RunReport;
use modular_kgqa::presets::{preset, preset_description, PRESET_COUNT};

pub fn instance_list() -> String {
    let mut out = String::new();
    for id in 0..PRESET_COUNT {
        let cfg = preset(id).expect("built-in preset");
        let [se, pf, pr] = preset_description(id).expect("built-in preset");
        writeln!(out, "{id:>2}  {}  [{se} | {pf} | {pr}]", cfg.name).unwrap();
    }
    out
}

fn seconds(s: f64) -> String {
    if s < 0.01 {
        "<0.01".to_owned()
    } else {
        format!("{s:.2}")
    }
}

fn metric_row(out: &mut String, stage: &str, m: &StageMetrics) {
    writeln!(
        out,
        "| {stage} | {:.4} | {:.4} | {:.4} | {:.4} | {} |",
        m.precision, m.recall, m.f1, m.hit_ratio, m.query_count
    )
    .unwrap();
}

pub fn eval_table(report: &RunReport, generation: Option<&[GenerationResult]>) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "instance {} ({}), seed {}, {} queries, {} failed\n",
        report.instance_id, report.instance_name, report.seed, report.query_count, report.failed_queries
    )
    .unwrap();
    out.push_str("| Stage | Precision | Recall | F1 | HR | Queries |\n|---|---|---|---|---|---|\n");
    metric_row(&mut out, "subgraph", &report.metrics.subgraph);
    metric_row(&mut out, "paths", &report.metrics.paths);
    metric_row(&mut out, "refined", &report.metrics.refined);
    let t = &report.timing;
    writeln!(
        out,
        "\n| SETime | PFTime | PRTime | AllTime |\n|---|---|---|---|\n| {} | {} | {} | {} |",
        seconds(t.se_seconds),
        seconds(t.pf_seconds),
        seconds(t.pr_seconds),
        seconds(t.total_seconds)
    )
    .unwrap();
    let f = &report.scorer_failures;
    if f.se + f.pf + f.pr > 0 {
        writeln!(out, "\nscorer failures: se {} pf {} pr {}", f.se, f.pf, f.pr).unwrap();
    }
    if let Some(gen) = generation {
        let scored: Vec<_> = gen.iter().filter(|g| g.error.is_none()).collect();
        let n = scored.len().max(1) as f64;
        let hr1 = scored.iter().filter(|g| g.hit_at_1).count() as f64 / n;
        let f1 = scored.iter().map(|g| g.f1).sum::<f64>() / n;
        let latency = scored.iter().map(|g| g.latency_s).sum::<f64>() / n;
        writeln!(
            out,
            "\n| HR@1 | Answer F1 | Latency (s) | Answers | Failed |\n|---|---|---|---|---|\n| {hr1:.4} | {f1:.4} | {latency:.3} | {} | {} |",
            scored.len(),
            gen.len() - scored.len()
        )
        .unwrap();
    }
    out
}

fn label(r: &RunReport) -> String {
    format!("({}) {}", r.instance_id, r.instance_name)
}

pub fn comparison_md(reports: &[RunReport]) -> String {
    let mut out = String::from(
        "| Instance | SETime | PFTime | PRTime | AllTime | Refined HR | Refined F1 |\n|---|---|---|---|---|---|---|\n",
    );
    for r in reports {
        let t = &r.timing;
        writeln!(
            out,
            "| {} | {} | {} | {} | {} | {:.4} | {:.4} |",
            label(r),
            seconds(t.se_seconds),
            seconds(t.pf_seconds),
            seconds(t.pr_seconds),
            seconds(t.total_seconds),
            r.metrics.refined.hit_ratio,
            r.metrics.refined.f1
        )
        .unwrap();
    }
    out
}

pub fn comparison_csv(reports: &[RunReport]) -> Result<String, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["instance", "name", "SETime", "PFTime", "PRTime", "AllTime", "refined_hr", "refined_f1"])?;
    for r in reports {
        let t = &r.timing;
        w.write_record([
            r.instance_id.to_string(),
            r.instance_name.clone(),
            t.se_seconds.to_string(),
            t.pf_seconds.to_string(),
            t.pr_seconds.to_string(),
            t.total_seconds.to_string(),
            r.metrics.refined.hit_ratio.to_string(),
            r.metrics.refined.f1.to_string(),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
