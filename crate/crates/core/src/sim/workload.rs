//! Synthetic request streams and trace ingestion.
//!
//! Synthetic arrivals are a nonhomogeneous Poisson process generated by
//! Lewis–Shedler thinning against the profile's peak rate, so any rate shape
//! (steady, diurnal, bursty) uses one code path and stays deterministic for
//! a given seed. Traces are minimal CSVs mapped onto [`Request`]s.

use std::f64::consts::TAU;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::Request;
use crate::rng::substream;

/// Distribution of per-request service cost.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostDistribution {
    Constant(f64),
    Uniform { min: f64, max: f64 },
}

impl CostDistribution {
    fn sample(&self, rng: &mut rand_chacha::ChaCha8Rng) -> f64 {
        match self {
            CostDistribution::Constant(c) => *c,
            CostDistribution::Uniform { min, max } => {
                if max > min {
                    rng.random_range(*min..*max)
                } else {
                    *min
                }
            }
        }
    }

    fn validate(&self) -> Result<(), String> {
        match self {
            CostDistribution::Constant(c) if *c > 0.0 => Ok(()),
            CostDistribution::Constant(c) => Err(format!("constant cost must be positive, got {c}")),
            CostDistribution::Uniform { min, max } => {
                if *min > 0.0 && max >= min {
                    Ok(())
                } else {
                    Err(format!("uniform cost bounds must satisfy 0 < min <= max, got [{min}, {max}]"))
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WorkloadKind {
    SteadyPoisson,
    Diurnal,
    Bursty,
}

pub(crate) fn default_period() -> f64 {
    600.0
}

/// Shape of a synthetic request stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorkloadProfile {
    pub kind: WorkloadKind,
    /// Mean arrivals per second (the carrier rate for diurnal/bursty kinds).
    pub base_rate: f64,
    /// Diurnal swing as a fraction of base_rate; rate is clamped at zero.
    #[serde(default)]
    pub amplitude: f64,
    #[serde(default = "default_period")]
    pub period: f64,
    /// Extra arrivals per second while a burst is active.
    #[serde(default)]
    pub burst_rate: f64,
    #[serde(default)]
    pub burst_duration: f64,
    /// Time from one burst start to the next.
    #[serde(default)]
    pub burst_spacing: f64,
    pub cost_distribution: CostDistribution,
    /// Length of the generated stream in seconds.
    pub duration: f64,
    pub seed: u64,
}

impl WorkloadProfile {
    /// Instantaneous arrival rate at time `t`, always ≥ 0.
    pub fn rate_at(&self, t: f64) -> f64 {
        match self.kind {
            WorkloadKind::SteadyPoisson => self.base_rate,
            WorkloadKind::Diurnal => {
                (self.base_rate * (1.0 + self.amplitude * (TAU * t / self.period).sin())).max(0.0)
            }
            WorkloadKind::Bursty => {
                let in_burst = self.burst_spacing > 0.0
                    && t.rem_euclid(self.burst_spacing) < self.burst_duration;
                self.base_rate + if in_burst { self.burst_rate } else { 0.0 }
            }
        }
    }

    /// Upper bound on [`WorkloadProfile::rate_at`] over all t, used as the
    /// thinning envelope.
    pub fn peak_rate(&self) -> f64 {
        match self.kind {
            WorkloadKind::SteadyPoisson => self.base_rate,
            WorkloadKind::Diurnal => self.base_rate * (1.0 + self.amplitude.abs()),
            WorkloadKind::Bursty => self.base_rate + self.burst_rate.max(0.0),
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.duration > 0.0) {
            return Err(format!("duration must be positive, got {}", self.duration));
        }
        for (name, v) in [
            ("base_rate", self.base_rate),
            ("burst_rate", self.burst_rate),
            ("burst_duration", self.burst_duration),
            ("burst_spacing", self.burst_spacing),
        ] {
            if !(v >= 0.0) {
                return Err(format!("{name} must be nonnegative, got {v}"));
            }
        }
        if self.kind == WorkloadKind::Diurnal && !(self.period > 0.0) {
            return Err(format!("period must be positive, got {}", self.period));
        }
        self.cost_distribution.validate()
    }
}

/// Draws the request stream for a profile. Deterministic for a given seed;
/// request ids are assigned in arrival order.
pub fn generate_workload(profile: &WorkloadProfile) -> Vec<Request> {
    let peak = profile.peak_rate();
    if peak <= 0.0 {
        return Vec::new();
    }
    let mut arrivals = substream(profile.seed, "workload-arrivals");
    let mut costs = substream(profile.seed, "workload-costs");
    let mut requests = Vec::new();
    let mut t = 0.0_f64;
    loop {
        // Exp(peak) gap; 1 - U keeps the argument of ln strictly positive.
        let u: f64 = arrivals.random();
        t += -(1.0 - u).ln() / peak;
        if t >= profile.duration {
            break;
        }
        let accept: f64 = arrivals.random();
        if accept * peak <= profile.rate_at(t) {
            let cost = profile.cost_distribution.sample(&mut costs);
            requests.push(Request::new(requests.len() as u64, t, cost));
        }
    }
    requests
}

/// Why trace ingestion failed.
#[derive(Debug, Error)]
pub enum TraceError {
    #[error("cannot read trace: {0}")]
    Io(#[from] std::io::Error),
    #[error("trace is not valid CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("trace header must contain columns {expected:?}, found {found:?}")]
    Header { expected: Vec<String>, found: Vec<String> },
    #[error(
        "{malformed} of {total} trace rows are malformed (>10%); first offenders: {}",
        format_offenders(.rows)
    )]
    TooManyMalformed {
        malformed: usize,
        total: usize,
        rows: Vec<(u64, String)>,
    },
}

fn format_offenders(rows: &[(u64, String)]) -> String {
    rows.iter()
        .take(10)
        .map(|(line, why)| format!("line {line}: {why}"))
        .collect::<Vec<_>>()
        .join("; ")
}

/// Result of parsing a trace file: the usable requests plus a description of
/// every row that had to be dropped.
#[derive(Debug, Clone)]
pub struct TraceLoad {
    pub requests: Vec<Request>,
    /// (1-based file line, reason) for each malformed row.
    pub malformed: Vec<(u64, String)>,
}

#[derive(Debug, Deserialize)]
struct TraceRow {
    timestamp_s: String,
    cpu_request: String,
    duration_s: String,
    #[serde(default)]
    #[allow(dead_code)] // parsed for schema compatibility, intentionally unused
    memory_request: Option<String>,
}

fn parse_row(row: &TraceRow) -> Result<(f64, f64, f64), String> {
    let ts: f64 = row
        .timestamp_s
        .trim()
        .parse()
        .map_err(|_| format!("timestamp_s {:?} is not a number", row.timestamp_s))?;
    let cpu: f64 = row
        .cpu_request
        .trim()
        .parse()
        .map_err(|_| format!("cpu_request {:?} is not a number", row.cpu_request))?;
    let dur: f64 = row
        .duration_s
        .trim()
        .parse()
        .map_err(|_| format!("duration_s {:?} is not a number", row.duration_s))?;
    if !ts.is_finite() || ts < 0.0 {
        return Err(format!("timestamp_s {ts} is negative or non-finite"));
    }
    if !cpu.is_finite() || cpu <= 0.0 {
        return Err(format!("cpu_request {cpu} is not positive"));
    }
    if !dur.is_finite() || dur <= 0.0 {
        return Err(format!("duration_s {dur} is not positive"));
    }
    Ok((ts, cpu, dur))
}

/// Reads a request trace CSV with header
/// `timestamp_s,cpu_request,duration_s[,memory_request]`. Each row becomes a
/// request with cost `cpu_request × duration_s × cost_scale`, sorted by
/// timestamp. Malformed rows are dropped and reported; more than 10% of them
/// is an error.
pub fn load_trace(path: &Path, cost_scale: f64) -> Result<TraceLoad, TraceError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(false)
        .from_path(path)?;
    let headers = reader.headers()?.clone();
    let expected = ["timestamp_s", "cpu_request", "duration_s"];
    if !expected.iter().all(|c| headers.iter().any(|h| h == *c)) {
        return Err(TraceError::Header {
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: headers.iter().map(|s| s.to_string()).collect(),
        });
    }

    let mut requests = Vec::new();
    let mut malformed: Vec<(u64, String)> = Vec::new();
    let mut total = 0usize;
    for result in reader.deserialize::<TraceRow>() {
        total += 1;
        // data rows start on line 2, after the header
        let line = (total + 1) as u64;
        match result {
            Err(e) => malformed.push((line, e.to_string())),
            Ok(row) => match parse_row(&row) {
                Err(why) => malformed.push((line, why)),
                Ok((ts, cpu, dur)) => {
                    requests.push(Request::new(0, ts, cpu * dur * cost_scale));
                }
            },
        }
    }

    if total > 0 && malformed.len() * 10 > total {
        return Err(TraceError::TooManyMalformed {
            malformed: malformed.len(),
            total,
            rows: malformed,
        });
    }

    requests.sort_by(|a, b| a.arrival_time.total_cmp(&b.arrival_time));
    for (i, r) in requests.iter_mut().enumerate() {
        r.request_id = i as u64;
    }
    Ok(TraceLoad { requests, malformed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write as _;

    fn steady(rate: f64, duration: f64, seed: u64) -> WorkloadProfile {
        WorkloadProfile {
            kind: WorkloadKind::SteadyPoisson,
            base_rate: rate,
            amplitude: 0.0,
            period: 600.0,
            burst_rate: 0.0,
            burst_duration: 0.0,
            burst_spacing: 0.0,
            cost_distribution: CostDistribution::Constant(1.0),
            duration,
            seed,
        }
    }

    #[test]
    fn zero_rate_generates_nothing() {
        assert!(generate_workload(&steady(0.0, 100.0, 1)).is_empty());
    }

    #[test]
    fn steady_poisson_count_concentrates_and_replays() {
        // rate 10/s over 1000 s: mean 10_000, std = 100; +/-1000 is 10 sigma.
        let profile = steady(10.0, 1000.0, 42);
        let first = generate_workload(&profile);
        assert!(
            (9000..=11000).contains(&first.len()),
            "count {} outside Poisson concentration band",
            first.len()
        );
        let second = generate_workload(&profile);
        assert_eq!(first, second);
        for pair in first.windows(2) {
            assert!(pair[0].arrival_time <= pair[1].arrival_time);
        }
    }

    #[test]
    fn distinct_seeds_give_distinct_streams() {
        let a = generate_workload(&steady(5.0, 100.0, 1));
        let b = generate_workload(&steady(5.0, 100.0, 2));
        assert_ne!(a, b);
    }

    #[test]
    fn diurnal_trough_clamps_to_zero() {
        let mut profile = steady(4.0, 100.0, 1);
        profile.kind = WorkloadKind::Diurnal;
        profile.amplitude = 1.0;
        profile.period = 100.0;
        // sin(2π · 0.75) = −1 → rate 0
        assert_eq!(profile.rate_at(75.0), 0.0);
        assert!((profile.rate_at(25.0) - 8.0).abs() < 1e-12);
        assert_eq!(profile.peak_rate(), 8.0);
    }

    #[test]
    fn bursty_rate_switches_with_schedule() {
        let mut profile = steady(2.0, 100.0, 1);
        profile.kind = WorkloadKind::Bursty;
        profile.burst_rate = 10.0;
        profile.burst_duration = 5.0;
        profile.burst_spacing = 20.0;
        assert_eq!(profile.rate_at(1.0), 12.0);
        assert_eq!(profile.rate_at(6.0), 2.0);
        assert_eq!(profile.rate_at(21.0), 12.0);
        assert_eq!(profile.peak_rate(), 12.0);
    }

    #[test]
    fn diurnal_mean_rate_tracks_base() {
        // Over whole periods the sin term averages out; the realized count
        // should hover near base_rate x duration.
        let mut profile = steady(6.0, 1000.0, 9);
        profile.kind = WorkloadKind::Diurnal;
        profile.amplitude = 0.8;
        profile.period = 100.0;
        let n = generate_workload(&profile).len() as f64;
        assert!((n - 6000.0).abs() < 600.0, "count {n} far from 6000");
    }

    fn write_temp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f.flush().unwrap();
        f
    }

    #[test]
    fn empty_trace_with_header_is_empty() {
        let f = write_temp("timestamp_s,cpu_request,duration_s\n");
        let loaded = load_trace(f.path(), 1.0).unwrap();
        assert!(loaded.requests.is_empty());
        assert!(loaded.malformed.is_empty());
    }

    #[test]
    fn trace_rows_sort_by_timestamp() {
        let f = write_temp(
            "timestamp_s,cpu_request,duration_s\n1.0,1.0,1.0\n3.0,1.0,1.0\n2.0,1.0,1.0\n",
        );
        let loaded = load_trace(f.path(), 1.0).unwrap();
        let times: Vec<f64> = loaded.requests.iter().map(|r| r.arrival_time).collect();
        assert_eq!(times, vec![1.0, 2.0, 3.0]);
        let ids: Vec<u64> = loaded.requests.iter().map(|r| r.request_id).collect();
        assert_eq!(ids, vec![0, 1, 2]);
    }

    #[test]
    fn cost_scales_with_cpu_duration_product() {
        let f = write_temp("timestamp_s,cpu_request,duration_s,memory_request\n0.0,0.5,4.0,9.9\n");
        let loaded = load_trace(f.path(), 2.0).unwrap();
        assert_eq!(loaded.requests[0].cost, 4.0); // 0.5 * 4.0 * 2.0
    }

    #[test]
    fn negative_duration_is_malformed_but_tolerated() {
        let mut content = String::from("timestamp_s,cpu_request,duration_s\n");
        for i in 0..20 {
            content.push_str(&format!("{i}.0,1.0,1.0\n"));
        }
        content.push_str("99.0,1.0,-3.0\n");
        let f = write_temp(&content);
        let loaded = load_trace(f.path(), 1.0).unwrap();
        assert_eq!(loaded.requests.len(), 20);
        assert_eq!(loaded.malformed.len(), 1);
        assert_eq!(loaded.malformed[0].0, 22); // header on line 1
        assert!(loaded.malformed[0].1.contains("duration_s"));
    }

    #[test]
    fn too_many_malformed_rows_is_an_error_naming_lines() {
        let f = write_temp(
            "timestamp_s,cpu_request,duration_s\n0.0,1.0,1.0\nbogus,1.0,1.0\n1.0,oops,1.0\n",
        );
        let err = load_trace(f.path(), 1.0).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("2 of 3"), "message was: {msg}");
        assert!(msg.contains("line 3") && msg.contains("line 4"), "message was: {msg}");
    }

    #[test]
    fn missing_column_is_a_header_error() {
        let f = write_temp("timestamp_s,cpu\n0.0,1.0\n");
        let err = load_trace(f.path(), 1.0).unwrap_err();
        assert!(matches!(err, TraceError::Header { .. }));
    }
}
