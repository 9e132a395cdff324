//! Report files, flat tables and SVG charts.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use stylemill_core::eval::{ComparisonReport, CvReport, Method, Metric, MetricSummary, SweepReport, TTestResult};
use stylemill_core::semisup::RunCounts;
use stylemill_core::Dimension;

use crate::error::{Error, Result};
use crate::store;

/// Everything the pipeline reports for one dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionReport {
    pub dimension: Dimension,
    pub rows: usize,
    pub labeled: usize,
    pub unlabeled: usize,
    /// k-fold CV of the labeling SVM on `L`.
    pub labeling_cv: CvReport,
    pub self_training: RunCounts,
    /// CV of the final model on `D′`.
    pub final_cv: CvReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comparison: Option<ComparisonReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub dimension: Dimension,
    pub labeled: usize,
    pub unlabeled: usize,
    pub labeling_accuracy: f64,
    pub final_accuracy: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub supervised_accuracy: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub self_training_accuracy: Option<f64>,
}

/// Per-dimension headline numbers with their mean and median.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub rows: Vec<SummaryRow>,
    pub mean_labeling_accuracy: f64,
    pub median_labeling_accuracy: f64,
    pub mean_final_accuracy: f64,
    pub median_final_accuracy: f64,
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

impl RunSummary {
    pub fn from_reports(reports: &[DimensionReport]) -> Result<Self> {
        if reports.is_empty() {
            return Err(Error::Data("no dimension reports to summarize".into()));
        }
        let rows: Vec<SummaryRow> = reports
            .iter()
            .map(|r| SummaryRow {
                dimension: r.dimension,
                labeled: r.labeled,
                unlabeled: r.unlabeled,
                labeling_accuracy: r.labeling_cv.pooled.accuracy,
                final_accuracy: r.final_cv.pooled.accuracy,
                supervised_accuracy: r.comparison.as_ref().and_then(|c| method_mean(c, Method::Supervised)),
                self_training_accuracy: r.comparison.as_ref().and_then(|c| method_mean(c, Method::SelfTraining)),
            })
            .collect();
        let mut lab: Vec<f64> = rows.iter().map(|r| r.labeling_accuracy).collect();
        let mut fin: Vec<f64> = rows.iter().map(|r| r.final_accuracy).collect();
        Ok(Self {
            mean_labeling_accuracy: mean(&lab),
            median_labeling_accuracy: median(&mut lab),
            mean_final_accuracy: mean(&fin),
            median_final_accuracy: median(&mut fin),
            rows,
        })
    }
}

fn method_mean(c: &ComparisonReport, m: Method) -> Option<f64> {
    c.summary.get(&m)?.get(&Metric::Accuracy).map(|s| s.mean)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Report {
    Cv(CvReport),
    Sweep(SweepReport),
    Comparison(ComparisonReport),
    TTest(TTestResult),
    Dimension(Box<DimensionReport>),
    Summary(RunSummary),
}

impl Report {
    pub fn kind(&self) -> &'static str {
        match self {
            Report::Cv(_) => "cv_report",
            Report::Sweep(_) => "sweep_report",
            Report::Comparison(_) => "comparison_report",
            Report::TTest(_) => "ttest_report",
            Report::Dimension(_) => "dimension_report",
            Report::Summary(_) => "run_summary",
        }
    }
}

/// The enveloped JSON text of a report.
pub fn report_json(report: &Report) -> String {
    let kind = report.kind();
    match report {
        Report::Cv(r) => store::envelope_string(kind, r),
        Report::Sweep(r) => store::envelope_string(kind, r),
        Report::Comparison(r) => store::envelope_string(kind, r),
        Report::TTest(r) => store::envelope_string(kind, r),
        Report::Dimension(r) => store::envelope_string(kind, r),
        Report::Summary(r) => store::envelope_string(kind, r),
    }
}

pub fn write_report(path: &Path, report: &Report) -> Result<()> {
    store::write_text(path, &report_json(report))
}

pub fn read_report(path: &Path) -> Result<Report> {
    let kind = store::peek_kind(path)?;
    Ok(match kind.as_str() {
        "cv_report" => Report::Cv(store::read_json(path, &kind)?),
        "sweep_report" => Report::Sweep(store::read_json(path, &kind)?),
        "comparison_report" => Report::Comparison(store::read_json(path, &kind)?),
        "ttest_report" => Report::TTest(store::read_json(path, &kind)?),
        "dimension_report" => Report::Dimension(store::read_json(path, &kind)?),
        "run_summary" => Report::Summary(store::read_json(path, &kind)?),
        other => {
            return Err(Error::Data(format!("{}: '{other}' is not a report", path.display())));
        }
    })
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn summary_cells(s: Option<&MetricSummary>) -> [String; 4] {
    match s {
        Some(s) => [s.mean.to_string(), cell(s.stddev), s.min.to_string(), s.max.to_string()],
        None => Default::default(),
    }
}

/// The report as one delimited table.
pub fn to_table(report: &Report) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    match report {
        Report::Cv(r) => {
            w.write_record([
                "fold",
                "n_test",
                "tp",
                "fp",
                "fn",
                "tn",
                "accuracy",
                "precision",
                "recall",
                "specificity",
                "auc",
            ])?;
            for f in &r.folds {
                let cm = f.confusion;
                let mut rec = vec![
                    f.fold.to_string(),
                    f.n_test.to_string(),
                    cm.tp.to_string(),
                    cm.fp.to_string(),
                    cm.fn_.to_string(),
                    cm.tn.to_string(),
                ];
                rec.extend(Metric::ALL.iter().map(|m| cell(f.metrics.get(*m))));
                w.write_record(&rec)?;
            }
            for (label, pick) in [("mean", 0), ("stddev", 1)] {
                let mut rec = vec![
                    label.to_string(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                ];
                rec.extend(
                    Metric::ALL
                        .iter()
                        .map(|m| summary_cells(r.summary.get(m))[pick].clone()),
                );
                w.write_record(&rec)?;
            }
        }
        Report::Sweep(r) => {
            w.write_record([
                "ratio",
                "model",
                "seed",
                "method",
                "accuracy",
                "precision",
                "recall",
                "specificity",
                "auc",
                "self_taught_accuracy",
            ])?;
            for row in &r.rows {
                for (method, res) in [("baseline", &row.baseline), ("self_training", &row.self_training)] {
                    let mut rec = vec![
                        row.ratio.to_string(),
                        row.final_kind.short_name().to_string(),
                        row.seed.to_string(),
                        method.to_string(),
                    ];
                    rec.extend(Metric::ALL.iter().map(|m| cell(res.mean(*m))));
                    rec.push(row.self_taught_accuracy.to_string());
                    w.write_record(&rec)?;
                }
            }
        }
        Report::Comparison(r) => {
            w.write_record([
                "left",
                "right",
                "metric",
                "left_mean",
                "right_mean",
                "t_value",
                "p_value",
                "df",
                "n_pairs",
                "dropped_pairs",
                "error",
            ])?;
            for c in &r.tests {
                let m = |method: Method| cell(r.summary.get(&method).and_then(|s| s.get(&c.metric)).map(|s| s.mean));
                let (t, p, df, n) = match &c.result {
                    Some(t) => (
                        t.t_value.to_string(),
                        t.p_value.to_string(),
                        t.df.to_string(),
                        t.n_pairs.to_string(),
                    ),
                    None => Default::default(),
                };
                w.write_record([
                    c.left.short_name(),
                    c.right.short_name(),
                    c.metric.name(),
                    &m(c.left),
                    &m(c.right),
                    &t,
                    &p,
                    &df,
                    &n,
                    &c.dropped_pairs.to_string(),
                    c.error.as_deref().unwrap_or(""),
                ])?;
            }
        }
        Report::TTest(t) => {
            w.write_record(["t_value", "p_value", "df", "n_pairs"])?;
            w.write_record([
                t.t_value.to_string(),
                t.p_value.to_string(),
                t.df.to_string(),
                t.n_pairs.to_string(),
            ])?;
        }
        Report::Dimension(r) => {
            w.write_record([
                "dimension",
                "stage",
                "model",
                "metric",
                "mean",
                "stddev",
                "min",
                "max",
                "pooled",
            ])?;
            for (stage, cv) in [("labeling", &r.labeling_cv), ("final", &r.final_cv)] {
                for m in Metric::ALL {
                    let [mean, sd, min, max] = summary_cells(cv.summary.get(&m));
                    w.write_record([
                        r.dimension.name(),
                        stage,
                        cv.model.short_name(),
                        m.name(),
                        &mean,
                        &sd,
                        &min,
                        &max,
                        &cell(cv.pooled.get(m)),
                    ])?;
                }
            }
        }
        Report::Summary(s) => {
            w.write_record([
                "dimension",
                "labeled",
                "unlabeled",
                "labeling_accuracy",
                "final_accuracy",
                "supervised_accuracy",
                "self_training_accuracy",
            ])?;
            for row in &s.rows {
                w.write_record([
                    row.dimension.name().to_string(),
                    row.labeled.to_string(),
                    row.unlabeled.to_string(),
                    row.labeling_accuracy.to_string(),
                    row.final_accuracy.to_string(),
                    cell(row.supervised_accuracy),
                    cell(row.self_training_accuracy),
                ])?;
            }
            let blank = String::new();
            for (label, a, b) in [
                ("mean", s.mean_labeling_accuracy, s.mean_final_accuracy),
                ("median", s.median_labeling_accuracy, s.median_final_accuracy),
            ] {
                w.write_record([label, &blank, &blank, &a.to_string(), &b.to_string(), &blank, &blank])?;
            }
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::Data(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ChartKind {
    Bars,
    Lines,
}

/// Data behind a chart, independent of drawing.
#[derive(Debug, Clone, PartialEq)]
pub enum ChartData {
    /// One group per label; one bar per series inside each group.
    Bars {
        groups: Vec<String>,
        series: Vec<String>,
        values: Vec<Vec<Option<f64>>>,
    },
    /// One point per x per series.
    Lines {
        x: Vec<f64>,
        series: Vec<(String, Vec<Option<f64>>)>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    pub title: String,
    pub y_label: String,
    pub data: ChartData,
}

impl Chart {
    pub fn points(&self) -> usize {
        match &self.data {
            ChartData::Bars { values, .. } => values.iter().flatten().filter(|v| v.is_some()).count(),
            ChartData::Lines { series, .. } => series.iter().flat_map(|s| &s.1).filter(|v| v.is_some()).count(),
        }
    }
}

fn sweep_lines(r: &SweepReport) -> ChartData {
    let mut xs: Vec<f64> = r.rows.iter().map(|row| row.ratio).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let mut kinds: Vec<_> = r.rows.iter().map(|row| row.final_kind).collect();
    kinds.dedup();
    let mut uniq = Vec::new();
    for k in kinds {
        if !uniq.contains(&k) {
            uniq.push(k);
        }
    }
    let mut series = Vec::new();
    for kind in uniq {
        for (label, pick_ssl) in [("baseline", false), ("self-training", true)] {
            let ys = xs
                .iter()
                .map(|&x| {
                    let v: Vec<f64> = r
                        .rows
                        .iter()
                        .filter(|row| row.ratio == x && row.final_kind == kind)
                        .filter_map(|row| {
                            let res = if pick_ssl { &row.self_training } else { &row.baseline };
                            res.mean(Metric::Accuracy)
                        })
                        .collect();
                    (!v.is_empty()).then(|| mean(&v))
                })
                .collect();
            series.push((format!("{} {label}", kind.short_name()), ys));
        }
    }
    ChartData::Lines { x: xs, series }
}

fn metric_bars(groups: &[Metric], series: Vec<(String, Vec<Option<f64>>)>) -> ChartData {
    let names = series.iter().map(|s| s.0.clone()).collect();
    let values = (0..groups.len())
        .map(|g| series.iter().map(|s| s.1[g]).collect())
        .collect();
    ChartData::Bars {
        groups: groups.iter().map(|m| m.name().to_string()).collect(),
        series: names,
        values,
    }
}

/// Chooses the chart for a report. `kind` overrides the default shape where
/// both make sense.
pub fn chart_for(report: &Report, kind: Option<ChartKind>) -> Result<Chart> {
    let (title, data) = match report {
        Report::Sweep(r) => {
            let data = sweep_lines(r);
            let data = match (kind, data) {
                (Some(ChartKind::Bars), ChartData::Lines { x, series }) => ChartData::Bars {
                    groups: x.iter().map(|v| v.to_string()).collect(),
                    series: series.iter().map(|s| s.0.clone()).collect(),
                    values: (0..x.len()).map(|i| series.iter().map(|s| s.1[i]).collect()).collect(),
                },
                (_, d) => d,
            };
            (format!("Accuracy by labeled ratio ({})", r.dimension.name()), data)
        }
        Report::Comparison(r) => {
            let metrics = [Metric::Accuracy, Metric::Precision, Metric::Recall];
            let series = r
                .summary
                .iter()
                .map(|(m, s)| {
                    (
                        m.short_name().to_string(),
                        metrics.iter().map(|k| s.get(k).map(|x| x.mean)).collect(),
                    )
                })
                .collect();
            (
                format!("SL vs SSL at ratio {} ({})", r.ratio, r.dimension.name()),
                metric_bars(&metrics, series),
            )
        }
        Report::Cv(r) => {
            let series = vec![(
                r.model.short_name().to_string(),
                Metric::ALL.iter().map(|m| r.summary.get(m).map(|s| s.mean)).collect(),
            )];
            (
                format!("{}-fold cross-validation", r.k),
                metric_bars(&Metric::ALL, series),
            )
        }
        Report::Dimension(r) => {
            let series = [("labeling", &r.labeling_cv), ("final", &r.final_cv)]
                .iter()
                .map(|(name, cv)| {
                    (
                        format!("{name} ({})", cv.model.short_name()),
                        Metric::ALL.iter().map(|m| cv.summary.get(m).map(|s| s.mean)).collect(),
                    )
                })
                .collect();
            (
                format!("Stages ({})", r.dimension.name()),
                metric_bars(&Metric::ALL, series),
            )
        }
        Report::Summary(s) => {
            let mut series: Vec<(String, Vec<Option<f64>>)> = vec![
                (
                    "labeling".into(),
                    s.rows.iter().map(|r| Some(r.labeling_accuracy)).collect(),
                ),
                ("final".into(), s.rows.iter().map(|r| Some(r.final_accuracy)).collect()),
            ];
            if s.rows.iter().any(|r| r.supervised_accuracy.is_some()) {
                series.push(("SL".into(), s.rows.iter().map(|r| r.supervised_accuracy).collect()));
                series.push(("SSL".into(), s.rows.iter().map(|r| r.self_training_accuracy).collect()));
            }
            let groups: Vec<String> = s.rows.iter().map(|r| r.dimension.name().to_string()).collect();
            let values = (0..groups.len())
                .map(|g| series.iter().map(|s| s.1[g]).collect())
                .collect();
            (
                "Accuracy per dimension".to_string(),
                ChartData::Bars {
                    groups,
                    series: series.into_iter().map(|s| s.0).collect(),
                    values,
                },
            )
        }
        Report::TTest(_) => return Err(Error::Config("a single t-test has nothing to chart".into())),
    };
    let chart = Chart {
        title,
        y_label: "value".into(),
        data,
    };
    if chart.points() == 0 {
        return Err(Error::Data("report has no values to chart".into()));
    }
    Ok(chart)
}

const W: f64 = 720.0;
const H: f64 = 420.0;
const LEFT: f64 = 60.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"];

fn esc(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn y_range(chart: &Chart) -> (f64, f64) {
    let vals: Vec<f64> = match &chart.data {
        ChartData::Bars { values, .. } => values.iter().flatten().flatten().copied().collect(),
        ChartData::Lines { series, .. } => series.iter().flat_map(|s| s.1.iter().flatten().copied()).collect(),
    };
    let lo = vals.iter().copied().fold(0.0, f64::min);
    let hi = vals.iter().copied().fold(1.0, f64::max);
    (lo, if hi > lo { hi } else { lo + 1.0 })
}

/// Renders a standalone SVG document. Every data point is one element with
/// class `mark` carrying its exact value in `data-value`.
pub fn render_svg(chart: &Chart) -> String {
    let (lo, hi) = y_range(chart);
    let plot_w = W - LEFT - RIGHT;
    let plot_h = H - TOP - BOTTOM;
    let y_of = |v: f64| TOP + plot_h * (1.0 - (v - lo) / (hi - lo));
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        W / 2.0,
        esc(&chart.title)
    );
    // y axis with five ticks
    let _ = writeln!(
        s,
        r#"<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{}" stroke="black"/>"#,
        TOP + plot_h
    );
    let _ = writeln!(
        s,
        r#"<line x1="{LEFT}" y1="{}" x2="{}" y2="{}" stroke="black"/>"#,
        TOP + plot_h,
        LEFT + plot_w,
        TOP + plot_h
    );
    for i in 0..=4 {
        let v = lo + (hi - lo) * i as f64 / 4.0;
        let y = y_of(v);
        let _ = writeln!(
            s,
            r##"<line x1="{}" y1="{y}" x2="{}" y2="{y}" stroke="#ddd"/>"##,
            LEFT,
            LEFT + plot_w
        );
        let _ = writeln!(
            s,
            r#"<text class="y-tick" x="{}" y="{}" text-anchor="end">{v}</text>"#,
            LEFT - 6.0,
            y + 4.0
        );
    }
    let series_names: Vec<String> = match &chart.data {
        ChartData::Bars { series, .. } => series.clone(),
        ChartData::Lines { series, .. } => series.iter().map(|s| s.0.clone()).collect(),
    };
    match &chart.data {
        ChartData::Bars { groups, series, values } => {
            let gw = plot_w / groups.len() as f64;
            let bw = gw * 0.8 / series.len().max(1) as f64;
            for (g, name) in groups.iter().enumerate() {
                let gx = LEFT + gw * g as f64;
                let _ = writeln!(
                    s,
                    r#"<text class="x-tick" x="{}" y="{}" text-anchor="middle">{}</text>"#,
                    gx + gw / 2.0,
                    TOP + plot_h + 16.0,
                    esc(name)
                );
                for (k, v) in values[g].iter().enumerate() {
                    let Some(v) = v else { continue };
                    let x = gx + gw * 0.1 + bw * k as f64;
                    let (y0, y1) = (y_of(0.0f64.clamp(lo, hi)), y_of(*v));
                    let (top, h) = if y1 < y0 { (y1, y0 - y1) } else { (y0, y1 - y0) };
                    let _ = writeln!(
                        s,
                        r#"<rect class="mark" data-series="{}" data-value="{v}" x="{x}" y="{top}" width="{bw}" height="{h}" fill="{}"><title>{}: {v}</title></rect>"#,
                        esc(&series[k]),
                        PALETTE[k % PALETTE.len()],
                        esc(&series[k])
                    );
                    let _ = writeln!(
                        s,
                        r#"<text class="value" x="{}" y="{}" text-anchor="middle" font-size="8">{v}</text>"#,
                        x + bw / 2.0,
                        top - 3.0
                    );
                }
            }
        }
        ChartData::Lines { x, series } => {
            let (xmin, xmax) = (x.first().copied().unwrap_or(0.0), x.last().copied().unwrap_or(0.0));
            let x_of = |v: f64| {
                if xmax > xmin {
                    LEFT + plot_w * 0.05 + plot_w * 0.9 * (v - xmin) / (xmax - xmin)
                } else {
                    LEFT + plot_w / 2.0
                }
            };
            for &v in x {
                let _ = writeln!(
                    s,
                    r#"<text class="x-tick" x="{}" y="{}" text-anchor="middle">{v}</text>"#,
                    x_of(v),
                    TOP + plot_h + 16.0
                );
            }
            for (k, (name, ys)) in series.iter().enumerate() {
                let color = PALETTE[k % PALETTE.len()];
                let pts: Vec<String> = x
                    .iter()
                    .zip(ys)
                    .filter_map(|(&xv, y)| y.map(|y| format!("{},{}", x_of(xv), y_of(y))))
                    .collect();
                if pts.len() > 1 {
                    let _ = writeln!(
                        s,
                        r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
                        pts.join(" ")
                    );
                }
                for (&xv, y) in x.iter().zip(ys) {
                    let Some(y) = y else { continue };
                    let _ = writeln!(
                        s,
                        r#"<circle class="mark" data-series="{}" data-x="{xv}" data-value="{y}" cx="{}" cy="{}" r="4" fill="{color}"><title>{} at {xv}: {y}</title></circle>"#,
                        esc(name),
                        x_of(xv),
                        y_of(*y),
                        esc(name)
                    );
                }
            }
        }
    }
    for (k, name) in series_names.iter().enumerate() {
        let y = TOP + 10.0 + 18.0 * k as f64;
        let x = W - RIGHT + 15.0;
        let _ = writeln!(
            s,
            r#"<rect x="{x}" y="{}" width="12" height="12" fill="{}"/>"#,
            y - 10.0,
            PALETTE[k % PALETTE.len()]
        );
        let _ = writeln!(s, r#"<text x="{}" y="{y}">{}</text>"#, x + 18.0, esc(name));
    }
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" transform="rotate(-90 16 {})" text-anchor="middle">{}</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0,
        esc(&chart.y_label)
    );
    s.push_str("</svg>\n");
    s
}

/// Renders the chart for `report` and writes it to `out`.
pub fn emit_chart(report: &Report, kind: Option<ChartKind>, out: &Path) -> Result<Chart> {
    let chart = chart_for(report, kind)?;
    store::write_text(out, &render_svg(&chart))?;
    Ok(chart)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_point_chart_has_finite_coordinates() {
        let chart = Chart {
            title: "t".into(),
            y_label: "v".into(),
            data: ChartData::Lines {
                x: vec![0.5],
                series: vec![("a".into(), vec![Some(0.75)])],
            },
        };
        let svg = render_svg(&chart);
        assert_eq!(svg.matches(r#"class="mark""#).count(), 1);
        assert!(!svg.contains("NaN") && !svg.contains("inf"));
        assert!(svg.contains(r#"data-value="0.75""#));
    }

    #[test]
    fn bars_one_mark_per_value() {
        let chart = Chart {
            title: "<b>".into(),
            y_label: "v".into(),
            data: ChartData::Bars {
                groups: vec!["x".into(), "y".into()],
                series: vec!["p".into(), "q".into()],
                values: vec![vec![Some(0.1), Some(0.2)], vec![Some(0.3), None]],
            },
        };
        let svg = render_svg(&chart);
        assert_eq!(svg.matches(r#"class="mark""#).count(), 3);
        assert!(svg.contains("&lt;b&gt;"));
    }

    #[test]
    fn median_of_even_count() {
        assert_eq!(median(&mut [0.4, 0.1, 0.3, 0.2]), 0.25);
        assert_eq!(median(&mut [0.4, 0.1, 0.3]), 0.3);
    }
}
