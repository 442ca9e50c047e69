//! Run aggregation and artifact emission: per-interval metric series, CSV
//! tables, and self-contained SVG line charts comparing policies.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sim::MetricsSample;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("conservation violated: {0}")]
    Conservation(String),
    #[error("report needs at least one {0}")]
    EmptyInput(&'static str),
    #[error("io error writing {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// One sampling interval's aggregated metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalMetrics {
    pub interval_start: f64,
    /// Mean of per-node utilization (busy fraction of the interval).
    pub util_mean: f64,
    /// Population standard deviation of utilization across nodes.
    pub util_std: f64,
    /// Mean response time of requests completed in the interval; 0 when
    /// none completed.
    pub rt_mean: f64,
    /// Nearest-rank 95th percentile response time; 0 when none completed.
    pub rt_p95: f64,
    /// Busy unit-seconds over provisioned unit-seconds for the interval;
    /// 0 when nothing was provisioned.
    pub scaling_efficiency: f64,
}

/// A whole run reduced to its reporting series and totals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub policy: String,
    pub intervals: Vec<IntervalMetrics>,
    pub completed: u64,
    pub rejected: u64,
    pub provisioned_unit_seconds: f64,
    pub busy_unit_seconds: f64,
    /// Provisioned unit-seconds times the configured unit cost rate.
    pub cost: f64,
    /// Every response time observed across the run, in completion order.
    pub response_times: Vec<f64>,
}

impl RunSummary {
    /// Mean response time over all completed requests; 0 if none completed.
    pub fn overall_rt_mean(&self) -> f64 {
        if self.response_times.is_empty() {
            0.0
        } else {
            self.response_times.iter().sum::<f64>() / self.response_times.len() as f64
        }
    }

    /// Nearest-rank p95 over all completed requests; 0 if none completed.
    pub fn overall_rt_p95(&self) -> f64 {
        if self.response_times.is_empty() {
            return 0.0;
        }
        let mut sorted = self.response_times.clone();
        sorted.sort_by(f64::total_cmp);
        nearest_rank(&sorted, 0.95)
    }

    /// Busy over provisioned unit-seconds for the whole run.
    pub fn overall_scaling_efficiency(&self) -> f64 {
        if self.provisioned_unit_seconds > 0.0 {
            (self.busy_unit_seconds / self.provisioned_unit_seconds).min(1.0)
        } else {
            0.0
        }
    }

    /// Mean over intervals of the cross-node utilization variance.
    pub fn mean_utilization_variance(&self) -> f64 {
        if self.intervals.is_empty() {
            return 0.0;
        }
        self.intervals.iter().map(|i| i.util_std * i.util_std).sum::<f64>()
            / self.intervals.len() as f64
    }

    /// Mean over intervals of the mean utilization.
    pub fn mean_utilization(&self) -> f64 {
        if self.intervals.is_empty() {
            return 0.0;
        }
        self.intervals.iter().map(|i| i.util_mean).sum::<f64>() / self.intervals.len() as f64
    }
}

/// Nearest-rank percentile: the value at index `ceil(q·n) − 1` of the
/// sorted slice. No interpolation, so results are exactly reproducible.
pub fn nearest_rank(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "percentile of an empty slice");
    assert!((0.0..=1.0).contains(&q), "quantile {q} out of range");
    let rank = (q * sorted.len() as f64).ceil() as usize;
    sorted[rank.max(1) - 1]
}

fn mean_and_pop_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / values.len() as f64;
    (mean, var.sqrt())
}

/// Reduces a run's snapshot series to a [`RunSummary`].
///
/// Every snapshot is first checked for request conservation
/// (`submitted == completed + queued + in-service + rejected`); a violation
/// means the simulator itself misbehaved and surfaces as a hard error.
pub fn aggregate_run(
    policy: &str,
    samples: &[MetricsSample],
    unit_cost_per_unit_second: f64,
) -> Result<RunSummary, ReportError> {
    let mut intervals = Vec::with_capacity(samples.len());
    let mut response_times = Vec::new();
    let mut provisioned_total = 0.0;
    let mut busy_total = 0.0;
    for (i, s) in samples.iter().enumerate() {
        if !s.is_conserved() {
            return Err(ReportError::Conservation(format!(
                "snapshot {i} at t={}: submitted {} != completed {} + queued {} + in-service {} + rejected {}",
                s.clock, s.submitted, s.completed, s.queued, s.in_service, s.rejected
            )));
        }
        let (util_mean, util_std) = mean_and_pop_std(&s.utilization);
        let (rt_mean, rt_p95) = if s.response_times.is_empty() {
            (0.0, 0.0)
        } else {
            let mut sorted = s.response_times.clone();
            sorted.sort_by(f64::total_cmp);
            let mean = sorted.iter().sum::<f64>() / sorted.len() as f64;
            (mean, nearest_rank(&sorted, 0.95))
        };
        let scaling_efficiency = if s.provisioned_unit_seconds > 0.0 {
            (s.busy_unit_seconds / s.provisioned_unit_seconds).min(1.0)
        } else {
            0.0
        };
        provisioned_total += s.provisioned_unit_seconds;
        busy_total += s.busy_unit_seconds;
        response_times.extend_from_slice(&s.response_times);
        intervals.push(IntervalMetrics {
            interval_start: s.clock - s.interval,
            util_mean,
            util_std,
            rt_mean,
            rt_p95,
            scaling_efficiency,
        });
    }
    let (completed, rejected) = samples.last().map_or((0, 0), |s| (s.completed, s.rejected));
    Ok(RunSummary {
        policy: policy.to_string(),
        intervals,
        completed,
        rejected,
        provisioned_unit_seconds: provisioned_total,
        busy_unit_seconds: busy_total,
        cost: provisioned_total * unit_cost_per_unit_second,
        response_times,
    })
}

/// Renders the per-interval table for any number of runs. Rows are sorted
/// by (policy, interval start); floats carry six decimals.
pub fn csv_string(summaries: &[RunSummary]) -> Result<String, ReportError> {
    if summaries.is_empty() {
        return Err(ReportError::EmptyInput("summary"));
    }
    let mut rows: Vec<(&str, &IntervalMetrics)> = summaries
        .iter()
        .flat_map(|s| s.intervals.iter().map(move |i| (s.policy.as_str(), i)))
        .collect();
    rows.sort_by(|a, b| a.0.cmp(b.0).then(a.1.interval_start.total_cmp(&b.1.interval_start)));
    let mut out = String::from("policy,interval_start,util_mean,util_std,rt_mean,rt_p95,scale_eff\n");
    for (policy, m) in rows {
        writeln!(
            out,
            "{policy},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}",
            m.interval_start, m.util_mean, m.util_std, m.rt_mean, m.rt_p95, m.scaling_efficiency
        )
        .expect("string write cannot fail");
    }
    Ok(out)
}

pub fn emit_csv(summaries: &[RunSummary], path: &Path) -> Result<(), ReportError> {
    let body = csv_string(summaries)?;
    std::fs::write(path, body)
        .map_err(|source| ReportError::Io { path: path.display().to_string(), source })
}

/// Which per-interval series a chart plots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChartMetric {
    Utilization,
    ResponseTime,
    ScalingEfficiency,
}

impl ChartMetric {
    pub const ALL: [ChartMetric; 3] =
        [ChartMetric::Utilization, ChartMetric::ResponseTime, ChartMetric::ScalingEfficiency];

    pub fn id(self) -> &'static str {
        match self {
            ChartMetric::Utilization => "utilization",
            ChartMetric::ResponseTime => "response_time",
            ChartMetric::ScalingEfficiency => "scaling_efficiency",
        }
    }

    pub fn axis_label(self) -> &'static str {
        match self {
            ChartMetric::Utilization => "Mean utilization (fraction busy)",
            ChartMetric::ResponseTime => "Mean response time (seconds)",
            ChartMetric::ScalingEfficiency => "Scaling efficiency (busy / provisioned)",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            ChartMetric::Utilization => "Resource utilization by policy",
            ChartMetric::ResponseTime => "Response time by policy",
            ChartMetric::ScalingEfficiency => "Scaling efficiency by policy",
        }
    }

    fn value(self, m: &IntervalMetrics) -> f64 {
        match self {
            ChartMetric::Utilization => m.util_mean,
            ChartMetric::ResponseTime => m.rt_mean,
            ChartMetric::ScalingEfficiency => m.scaling_efficiency,
        }
    }
}

impl FromStr for ChartMetric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ChartMetric::ALL
            .into_iter()
            .find(|m| m.id() == s)
            .ok_or_else(|| {
                format!(
                    "unknown chart metric {s:?}; expected one of utilization, response_time, scaling_efficiency"
                )
            })
    }
}

const CHART_WIDTH: f64 = 800.0;
const CHART_HEIGHT: f64 = 480.0;
const MARGIN_LEFT: f64 = 80.0;
const MARGIN_RIGHT: f64 = 170.0;
const MARGIN_TOP: f64 = 50.0;
const MARGIN_BOTTOM: f64 = 60.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
];

/// Renders one metric across runs as a self-contained SVG line chart: one
/// polyline per policy (in input order), legend, labeled axes. Pure
/// function of its inputs — identical summaries give identical bytes.
pub fn svg_string(summaries: &[RunSummary], metric: ChartMetric) -> Result<String, ReportError> {
    if summaries.is_empty() {
        return Err(ReportError::EmptyInput("summary"));
    }
    let plot_w = CHART_WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = CHART_HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let mut svg = String::new();
    writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{CHART_WIDTH}\" height=\"{CHART_HEIGHT}\" viewBox=\"0 0 {CHART_WIDTH} {CHART_HEIGHT}\">"
    )
    .unwrap();
    writeln!(svg, "  <rect width=\"{CHART_WIDTH}\" height=\"{CHART_HEIGHT}\" fill=\"white\"/>").unwrap();
    writeln!(
        svg,
        "  <text x=\"{:.1}\" y=\"28\" font-family=\"sans-serif\" font-size=\"18\" text-anchor=\"middle\">{}</text>",
        MARGIN_LEFT + plot_w / 2.0,
        metric.title()
    )
    .unwrap();

    // axes
    let x0 = MARGIN_LEFT;
    let y0 = MARGIN_TOP + plot_h;
    writeln!(
        svg,
        "  <line x1=\"{x0:.1}\" y1=\"{y0:.1}\" x2=\"{:.1}\" y2=\"{y0:.1}\" stroke=\"black\"/>",
        x0 + plot_w
    )
    .unwrap();
    writeln!(
        svg,
        "  <line x1=\"{x0:.1}\" y1=\"{:.1}\" x2=\"{x0:.1}\" y2=\"{y0:.1}\" stroke=\"black\"/>",
        MARGIN_TOP
    )
    .unwrap();
    writeln!(
        svg,
        "  <text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">Time (seconds)</text>",
        x0 + plot_w / 2.0,
        CHART_HEIGHT - 14.0
    )
    .unwrap();
    writeln!(
        svg,
        "  <text x=\"20\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 20 {:.1})\">{}</text>",
        MARGIN_TOP + plot_h / 2.0,
        MARGIN_TOP + plot_h / 2.0,
        metric.axis_label()
    )
    .unwrap();

    let series: Vec<(&str, Vec<(f64, f64)>)> = summaries
        .iter()
        .map(|s| {
            let pts: Vec<(f64, f64)> =
                s.intervals.iter().map(|m| (m.interval_start, metric.value(m))).collect();
            (s.policy.as_str(), pts)
        })
        .collect();
    let total_points: usize = series.iter().map(|(_, p)| p.len()).sum();
    if total_points == 0 {
        writeln!(
            svg,
            "  <text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"16\" text-anchor=\"middle\" fill=\"#666\">no data</text>",
            x0 + plot_w / 2.0,
            MARGIN_TOP + plot_h / 2.0
        )
        .unwrap();
        writeln!(svg, "</svg>").unwrap();
        return Ok(svg);
    }

    let mut x_min = f64::INFINITY;
    let mut x_max = f64::NEG_INFINITY;
    let mut y_max = f64::NEG_INFINITY;
    for (_, pts) in &series {
        for &(x, y) in pts {
            x_min = x_min.min(x);
            x_max = x_max.max(x);
            y_max = y_max.max(y);
        }
    }
    if x_max <= x_min {
        x_max = x_min + 1.0;
    }
    let y_min = 0.0;
    if y_max <= y_min {
        y_max = y_min + 1.0;
    }
    let sx = |x: f64| x0 + (x - x_min) / (x_max - x_min) * plot_w;
    let sy = |y: f64| y0 - (y - y_min) / (y_max - y_min) * plot_h;

    // tick marks and labels
    for k in 0..=4 {
        let fx = x_min + (x_max - x_min) * k as f64 / 4.0;
        let px = sx(fx);
        writeln!(
            svg,
            "  <line x1=\"{px:.1}\" y1=\"{y0:.1}\" x2=\"{px:.1}\" y2=\"{:.1}\" stroke=\"#999\"/>",
            y0 + 5.0
        )
        .unwrap();
        writeln!(
            svg,
            "  <text x=\"{px:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">{fx:.1}</text>",
            y0 + 18.0
        )
        .unwrap();
        let fy = y_min + (y_max - y_min) * k as f64 / 4.0;
        let py = sy(fy);
        writeln!(
            svg,
            "  <line x1=\"{:.1}\" y1=\"{py:.1}\" x2=\"{x0:.1}\" y2=\"{py:.1}\" stroke=\"#999\"/>",
            x0 - 5.0
        )
        .unwrap();
        writeln!(
            svg,
            "  <text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">{fy:.3}</text>",
            x0 - 8.0,
            py + 4.0
        )
        .unwrap();
    }

    for (idx, (policy, pts)) in series.iter().enumerate() {
        let color = PALETTE[idx % PALETTE.len()];
        if !pts.is_empty() {
            let mut attr = String::new();
            for &(x, y) in pts {
                write!(attr, "{:.2},{:.2} ", sx(x), sy(y)).unwrap();
            }
            writeln!(
                svg,
                "  <polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"2\" points=\"{}\"/>",
                attr.trim_end()
            )
            .unwrap();
        }
        // legend entry
        let ly = MARGIN_TOP + 10.0 + idx as f64 * 20.0;
        let lx = MARGIN_LEFT + plot_w + 16.0;
        writeln!(
            svg,
            "  <line x1=\"{lx:.1}\" y1=\"{ly:.1}\" x2=\"{:.1}\" y2=\"{ly:.1}\" stroke=\"{color}\" stroke-width=\"2\"/>",
            lx + 22.0
        )
        .unwrap();
        writeln!(
            svg,
            "  <text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"12\">{policy}</text>",
            lx + 28.0,
            ly + 4.0
        )
        .unwrap();
    }
    writeln!(svg, "</svg>").unwrap();
    Ok(svg)
}

pub fn emit_svg_chart(
    summaries: &[RunSummary],
    metric: ChartMetric,
    path: &Path,
) -> Result<(), ReportError> {
    let body = svg_string(summaries, metric)?;
    std::fs::write(path, body)
        .map_err(|source| ReportError::Io { path: path.display().to_string(), source })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(
        clock: f64,
        interval: f64,
        utilization: Vec<f64>,
        response_times: Vec<f64>,
        provisioned: f64,
        busy: f64,
        completed: u64,
    ) -> MetricsSample {
        let n = utilization.len();
        MetricsSample {
            clock,
            interval,
            utilization,
            loads: vec![0; n],
            units: vec![1; n],
            in_flight: vec![0; n],
            arrivals: 0,
            arrival_rate: 0.0,
            response_times,
            submitted: completed,
            completed,
            queued: 0,
            in_service: 0,
            rejected: 0,
            provisioned_unit_seconds: provisioned,
            busy_unit_seconds: busy,
        }
    }

    #[test]
    fn saturated_interval_scores_full_efficiency() {
        let s = sample(5.0, 5.0, vec![1.0], vec![5.0], 5.0, 5.0, 1);
        let summary = aggregate_run("rr", &[s], 1.0).unwrap();
        assert_eq!(summary.intervals[0].scaling_efficiency, 1.0);
        assert_eq!(summary.completed, 1);
        assert_eq!(summary.cost, 5.0);
    }

    #[test]
    fn idle_interval_scores_zero_efficiency() {
        let s = sample(5.0, 5.0, vec![0.0, 0.0], vec![], 10.0, 0.0, 0);
        let summary = aggregate_run("rr", &[s], 1.0).unwrap();
        let m = &summary.intervals[0];
        assert_eq!(m.scaling_efficiency, 0.0);
        assert_eq!(m.rt_mean, 0.0);
        assert_eq!(m.rt_p95, 0.0);
    }

    #[test]
    fn nearest_rank_p95_by_hand() {
        let s = sample(5.0, 5.0, vec![0.5], vec![1.0, 3.0], 5.0, 4.0, 2);
        let summary = aggregate_run("rr", &[s], 1.0).unwrap();
        let m = &summary.intervals[0];
        assert_eq!(m.rt_mean, 2.0);
        // ceil(0.95 * 2) = 2 → second-smallest of [1, 3]
        assert_eq!(m.rt_p95, 3.0);
        assert!(m.rt_p95 >= m.rt_mean);
        assert_eq!(summary.overall_rt_p95(), 3.0);
    }

    #[test]
    fn nearest_rank_edge_ranks() {
        assert_eq!(nearest_rank(&[7.0], 0.95), 7.0);
        let v: Vec<f64> = (1..=100).map(f64::from).collect();
        assert_eq!(nearest_rank(&v, 0.95), 95.0);
        assert_eq!(nearest_rank(&v, 0.0), 1.0);
        assert_eq!(nearest_rank(&v, 1.0), 100.0);
    }

    #[test]
    fn conservation_violation_is_a_hard_error() {
        let mut s = sample(5.0, 5.0, vec![0.5], vec![], 5.0, 1.0, 3);
        s.submitted = 4; // one request unaccounted for
        let err = aggregate_run("rr", &[s], 1.0).unwrap_err();
        assert!(matches!(err, ReportError::Conservation(_)));
        assert!(err.to_string().contains("snapshot 0"));
    }

    #[test]
    fn interval_start_is_clock_minus_interval() {
        let s1 = sample(5.0, 5.0, vec![0.2], vec![], 5.0, 1.0, 0);
        let s2 = sample(10.0, 5.0, vec![0.4], vec![], 5.0, 2.0, 0);
        let summary = aggregate_run("lc", &[s1, s2], 2.0).unwrap();
        assert_eq!(summary.intervals[0].interval_start, 0.0);
        assert_eq!(summary.intervals[1].interval_start, 5.0);
        assert_eq!(summary.provisioned_unit_seconds, 10.0);
        assert_eq!(summary.cost, 20.0);
    }

    fn two_policy_summaries() -> Vec<RunSummary> {
        let mk = |policy: &str, bump: f64| {
            let samples = [
                sample(5.0, 5.0, vec![0.25 + bump, 0.75], vec![1.0, 3.0], 10.0, 5.0, 2),
                sample(10.0, 5.0, vec![0.5 + bump, 0.5], vec![2.0], 10.0, 5.0, 3),
            ];
            aggregate_run(policy, &samples, 1.0).unwrap()
        };
        vec![mk("zeta", 0.0), mk("alpha", 0.1)]
    }

    #[test]
    fn csv_layout_sorted_and_six_decimals() {
        let summaries = two_policy_summaries();
        let body = csv_string(&summaries).unwrap();
        let lines: Vec<&str> = body.lines().collect();
        assert_eq!(
            lines[0],
            "policy,interval_start,util_mean,util_std,rt_mean,rt_p95,scale_eff"
        );
        assert_eq!(lines.len(), 5);
        // sorted by policy: alpha rows precede zeta rows, intervals ascending
        assert!(lines[1].starts_with("alpha,0.000000,"));
        assert!(lines[2].starts_with("alpha,5.000000,"));
        assert!(lines[3].starts_with("zeta,0.000000,"));
        assert!(lines[4].starts_with("zeta,5.000000,"));
        assert_eq!(csv_string(&summaries).unwrap(), body, "emission must be deterministic");
    }

    #[test]
    fn csv_roundtrip_reconstructs_series_at_six_decimals() {
        let summaries = two_policy_summaries();
        let body = csv_string(&summaries).unwrap();
        let mut reader = csv::Reader::from_reader(body.as_bytes());
        let mut rows = Vec::new();
        for record in reader.records() {
            let r = record.unwrap();
            rows.push((
                r[0].to_string(),
                r[1].parse::<f64>().unwrap(),
                [
                    r[2].parse::<f64>().unwrap(),
                    r[3].parse::<f64>().unwrap(),
                    r[4].parse::<f64>().unwrap(),
                    r[5].parse::<f64>().unwrap(),
                    r[6].parse::<f64>().unwrap(),
                ],
            ));
        }
        let six = |v: f64| (v * 1e6).round() / 1e6;
        let mut expected = Vec::new();
        let mut ordered = summaries.clone();
        ordered.sort_by(|a, b| a.policy.cmp(&b.policy));
        for s in &ordered {
            for m in &s.intervals {
                expected.push((
                    s.policy.clone(),
                    six(m.interval_start),
                    [
                        six(m.util_mean),
                        six(m.util_std),
                        six(m.rt_mean),
                        six(m.rt_p95),
                        six(m.scaling_efficiency),
                    ],
                ));
            }
        }
        assert_eq!(rows, expected);
    }

    #[test]
    fn csv_requires_a_summary() {
        assert!(matches!(csv_string(&[]), Err(ReportError::EmptyInput(_))));
    }

    #[test]
    fn chart_metric_parsing() {
        assert_eq!("utilization".parse::<ChartMetric>().unwrap(), ChartMetric::Utilization);
        assert_eq!("response_time".parse::<ChartMetric>().unwrap(), ChartMetric::ResponseTime);
        assert_eq!(
            "scaling_efficiency".parse::<ChartMetric>().unwrap(),
            ChartMetric::ScalingEfficiency
        );
        assert!("latency".parse::<ChartMetric>().is_err());
    }

    #[test]
    fn empty_chart_is_valid_svg_with_no_data_label() {
        let empty = RunSummary {
            policy: "rr".into(),
            intervals: vec![],
            completed: 0,
            rejected: 0,
            provisioned_unit_seconds: 0.0,
            busy_unit_seconds: 0.0,
            cost: 0.0,
            response_times: vec![],
        };
        let svg = svg_string(&[empty], ChartMetric::Utilization).unwrap();
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert!(svg.contains("no data"));
        assert_eq!(svg.matches("<polyline").count(), 0);
    }

    #[test]
    fn chart_emits_one_polyline_per_policy() {
        let summaries: Vec<RunSummary> = (0..5)
            .map(|k| {
                let samples = [sample(
                    5.0,
                    5.0,
                    vec![0.1 * k as f64],
                    vec![1.0 + k as f64],
                    5.0,
                    k as f64,
                    1,
                )];
                aggregate_run(&format!("policy-{k}"), &samples, 1.0).unwrap()
            })
            .collect();
        let svg = svg_string(&summaries, ChartMetric::ResponseTime).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 5);
        for k in 0..5 {
            assert!(svg.contains(&format!("policy-{k}")), "legend entry for policy-{k}");
        }
        assert!(svg.contains("Response time"));
        assert!(svg.contains("Time (seconds)"));
        assert_eq!(
            svg_string(&summaries, ChartMetric::ResponseTime).unwrap(),
            svg,
            "chart emission must be byte-deterministic"
        );
    }

    #[test]
    fn files_written_to_disk() {
        let dir = tempfile::tempdir().unwrap();
        let summaries = two_policy_summaries();
        let csv_path = dir.path().join("metrics.csv");
        let svg_path = dir.path().join("util.svg");
        emit_csv(&summaries, &csv_path).unwrap();
        emit_svg_chart(&summaries, ChartMetric::Utilization, &svg_path).unwrap();
        assert_eq!(std::fs::read_to_string(&csv_path).unwrap(), csv_string(&summaries).unwrap());
        let svg = std::fs::read_to_string(&svg_path).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 2);
    }
}
