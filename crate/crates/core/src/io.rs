//! Initial-curve descriptors, the run echo, and the CSV/JSON output formats.
//!
//! Floats are written in Rust's shortest round-trip form, so every value read
//! back from `series.csv`, `snap_<i>.csv` or `summary.json` is bit-identical
//! to the in-memory one.

use std::f64::consts::PI;
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::diagnostics::MonitorReport;
use crate::error::IoError;
use crate::flow::{
    BlowUpEstimate, FlowConfig, FlowScheme, InitialProfile, Snapshot, SnapshotCadence, StepStats, StopReason,
    Trajectory,
};
use crate::geometry::{self, CurvatureProfile, GeometrySummary, SupportProfile};
use crate::oracle;
use crate::spectral::{AngleGrid, DiffScheme};
use crate::speed_law::{HypothesisReport, SpeedLaw};

/// Column order of `series.csv`.
pub const SERIES_HEADER: [&str; 12] = [
    "t",
    "L",
    "A",
    "iso_ratio",
    "r_in",
    "r_out",
    "k_min",
    "k_max",
    "bonnesen_gap",
    "gage_deficit",
    "hausdorff",
    "closure_residual",
];

/// Column order of `snap_<i>.csv`, after the `# t=<t> n=<n>` line.
pub const SNAPSHOT_HEADER: [&str; 5] = ["theta", "k", "h", "x", "y"];

/// Initial curve: `circle:R`, `ellipse:a,b`, or `fourier:m:amp,m:amp,...`
/// (the unit circle's support function plus `Σ amp·cos(mθ + φ_m)` with
/// seeded random phases, modes `m ≥ 2`).
#[derive(Debug, Clone, PartialEq)]
pub enum CurveDescriptor {
    Circle { r: f64 },
    Ellipse { a: f64, b: f64 },
    Fourier { modes: Vec<(u32, f64)> },
}

fn parse_positive(s: &str, what: &str) -> Result<f64, IoError> {
    let v: f64 = s.trim().parse().map_err(|_| IoError::Format(format!("bad {what} '{s}'")))?;
    if !(v > 0.0) || !v.is_finite() {
        return Err(IoError::Format(format!("{what} must be positive and finite, got {s}")));
    }
    Ok(v)
}

impl FromStr for CurveDescriptor {
    type Err = IoError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (kind, rest) = s
            .split_once(':')
            .ok_or_else(|| IoError::Format(format!("curve '{s}' must look like kind:params")))?;
        match kind {
            "circle" => Ok(CurveDescriptor::Circle { r: parse_positive(rest, "radius")? }),
            "ellipse" => {
                let (a, b) = rest
                    .split_once(',')
                    .ok_or_else(|| IoError::Format(format!("ellipse needs a,b, got '{rest}'")))?;
                let (a, b) = (parse_positive(a, "semi-axis")?, parse_positive(b, "semi-axis")?);
                if a < b {
                    return Err(IoError::Format(format!("ellipse needs a >= b, got {a},{b}")));
                }
                Ok(CurveDescriptor::Ellipse { a, b })
            }
            "fourier" => {
                let mut modes = Vec::new();
                for term in rest.split(',') {
                    let (m, amp) = term
                        .split_once(':')
                        .ok_or_else(|| IoError::Format(format!("fourier term '{term}' must be mode:amplitude")))?;
                    let m: u32 = m.trim().parse().map_err(|_| IoError::Format(format!("bad mode '{m}'")))?;
                    if m < 2 {
                        return Err(IoError::Format(format!("fourier modes must be >= 2, got {m}")));
                    }
                    let amp: f64 = amp.trim().parse().map_err(|_| IoError::Format(format!("bad amplitude '{amp}'")))?;
                    if !amp.is_finite() {
                        return Err(IoError::Format(format!("amplitude must be finite, got {amp}")));
                    }
                    modes.push((m, amp));
                }
                Ok(CurveDescriptor::Fourier { modes })
            }
            other => Err(IoError::Format(format!("unknown curve kind '{other}' (circle|ellipse|fourier)"))),
        }
    }
}

impl fmt::Display for CurveDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CurveDescriptor::Circle { r } => write!(f, "circle:{r:?}"),
            CurveDescriptor::Ellipse { a, b } => write!(f, "ellipse:{a:?},{b:?}"),
            CurveDescriptor::Fourier { modes } => {
                f.write_str("fourier:")?;
                for (i, (m, amp)) in modes.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{m}:{amp:?}")?;
                }
                Ok(())
            }
        }
    }
}

impl CurveDescriptor {
    /// Samples the curve on `grid`. Fourier phases come from a ChaCha8
    /// stream seeded with `seed`, one uniform draw in `[0, 2π)` per term.
    pub fn build(&self, grid: AngleGrid, seed: u64) -> Result<InitialProfile, IoError> {
        match *self {
            CurveDescriptor::Circle { r } => Ok(InitialProfile::Curvature(CurvatureProfile::constant(grid, 1.0 / r, 0.0)?)),
            CurveDescriptor::Ellipse { a, b } => Ok(InitialProfile::Curvature(oracle::ellipse_profile(a, b, grid)?)),
            CurveDescriptor::Fourier { ref modes } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let terms: Vec<(f64, f64, f64)> =
                    modes.iter().map(|&(m, amp)| (m as f64, amp, rng.random_range(0.0..2.0 * PI))).collect();
                let sp = SupportProfile::from_fn(grid, 0.0, |t| {
                    1.0 + terms.iter().map(|&(m, a, phase)| a * (m * t + phase).cos()).sum::<f64>()
                })?;
                geometry::k_from_support(&sp).map_err(|e| {
                    IoError::Format(format!("fourier amplitudes too large for a convex curve ({e})"))
                })?;
                Ok(InitialProfile::Support(sp))
            }
        }
    }
}

/// Everything needed to reproduce a run; written into `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunEcho {
    pub law: String,
    pub curve: String,
    pub n: usize,
    pub scheme: FlowScheme,
    pub diff: DiffScheme,
    pub c_cfl: f64,
    pub area_floor: f64,
    pub k_cap: Option<f64>,
    pub max_steps: u64,
    pub cadence: SnapshotCadence,
    pub dealias: bool,
    pub allow_out_of_hypothesis: bool,
    pub seed: u64,
}

impl RunEcho {
    pub fn new(law: &str, curve: &str, n: usize) -> Self {
        Self {
            law: law.to_string(),
            curve: curve.to_string(),
            n,
            scheme: FlowScheme::Curvature,
            diff: DiffScheme::Fourier,
            c_cfl: 0.8,
            area_floor: 1e-3,
            k_cap: None,
            max_steps: 100_000_000,
            cadence: SnapshotCadence::default(),
            dealias: false,
            allow_out_of_hypothesis: false,
            seed: 0,
        }
    }

    pub fn flow_config(&self) -> Result<FlowConfig, IoError> {
        let law = SpeedLaw::parse(&self.law)?;
        let grid = AngleGrid::new(self.n)?;
        let initial = self.curve.parse::<CurveDescriptor>()?.build(grid, self.seed)?;
        let mut cfg = FlowConfig::new(law, initial);
        cfg.scheme = self.scheme;
        cfg.diff = self.diff;
        cfg.c_cfl = self.c_cfl;
        cfg.area_floor = self.area_floor;
        cfg.k_cap = self.k_cap;
        cfg.max_steps = self.max_steps;
        cfg.cadence = self.cadence;
        cfg.dealias = self.dealias;
        cfg.require_hypotheses = !self.allow_out_of_hypothesis;
        Ok(cfg)
    }
}

/// Contents of `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub config: RunEcho,
    pub law: String,
    pub stop_reason: StopReason,
    pub omega: Option<BlowUpEstimate>,
    pub steps: StepStats,
    pub out_of_hypothesis: bool,
    pub hypotheses: Option<HypothesisReport>,
    pub snapshots: Vec<GeometrySummary>,
    /// Per-snapshot `sup |k_curvature − k_support|`, present for scheme `both`.
    pub scheme_gaps: Option<Vec<f64>>,
    pub monitors: Vec<MonitorReport>,
}

impl RunSummary {
    pub fn new(config: RunEcho, traj: &Trajectory, monitors: Vec<MonitorReport>) -> Self {
        let gaps: Vec<Option<f64>> = traj.snapshots.iter().map(|s| s.scheme_gap).collect();
        Self {
            config,
            law: traj.law.clone(),
            stop_reason: traj.stop_reason,
            omega: traj.omega.clone(),
            steps: traj.steps,
            out_of_hypothesis: traj.out_of_hypothesis,
            hypotheses: traj.hypotheses.clone(),
            snapshots: traj.summaries().cloned().collect(),
            scheme_gaps: gaps.iter().all(Option::is_some).then(|| gaps.into_iter().flatten().collect()),
            monitors,
        }
    }
}

pub fn write_summary<W: Write>(mut w: W, summary: &RunSummary) -> Result<(), IoError> {
    serde_json::to_writer_pretty(&mut w, summary)?;
    writeln!(w)?;
    Ok(())
}

pub fn parse_summary(text: &str) -> Result<RunSummary, IoError> {
    Ok(serde_json::from_str(text)?)
}

/// One row of `series.csv`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesRow(pub [f64; 12]);

impl SeriesRow {
    pub fn from_summary(s: &GeometrySummary) -> Self {
        SeriesRow([
            s.t,
            s.length,
            s.area,
            s.iso_ratio,
            s.r_in,
            s.r_out,
            s.k_min,
            s.k_max,
            s.bonnesen_gap,
            s.gage_deficit,
            s.hausdorff,
            s.closure_residual,
        ])
    }

    pub fn get(&self, column: &str) -> Option<f64> {
        SERIES_HEADER.iter().position(|c| *c == column).map(|i| self.0[i])
    }
}

fn float(x: f64) -> String {
    format!("{x:?}")
}

fn parse_float(s: &str) -> Result<f64, IoError> {
    s.trim().parse().map_err(|_| IoError::Format(format!("bad number '{s}'")))
}

pub fn write_series<'a, W: Write>(w: W, rows: impl IntoIterator<Item = &'a GeometrySummary>) -> Result<(), IoError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(SERIES_HEADER)?;
    for s in rows {
        out.write_record(SeriesRow::from_summary(s).0.map(float))?;
    }
    out.flush()?;
    Ok(())
}

pub fn parse_series(text: &str) -> Result<Vec<SeriesRow>, IoError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let header = rdr.headers()?;
    if header.iter().ne(SERIES_HEADER.iter().copied()) {
        return Err(IoError::Format(format!("unexpected series header '{}'", header.iter().collect::<Vec<_>>().join(","))));
    }
    let mut rows = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let mut row = [0.0; 12];
        for (slot, field) in row.iter_mut().zip(record.iter()) {
            *slot = parse_float(field)?;
        }
        rows.push(SeriesRow(row));
    }
    Ok(rows)
}

/// A snapshot file read back from disk.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotRecord {
    pub t: f64,
    pub theta: Vec<f64>,
    pub k: Vec<f64>,
    pub h: Vec<f64>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

/// Writes `# t=<t> n=<n>`, the header, and one row per grid node. `(x, y)`
/// is the curve point with outward normal at angle `θ`, `h·n + h′·τ`.
pub fn write_snapshot<W: Write>(mut w: W, snap: &Snapshot) -> Result<(), IoError> {
    let grid = snap.support.grid();
    writeln!(w, "# t={} n={}", float(snap.t()), grid.len())?;
    let curve = geometry::support_to_curve(&snap.support);
    let mut out = csv::Writer::from_writer(w);
    out.write_record(SNAPSHOT_HEADER)?;
    for (j, p) in curve.points().iter().enumerate() {
        out.write_record([grid.theta(j), snap.curvature.values()[j], snap.support.values()[j], p[0], p[1]].map(float))?;
    }
    out.flush()?;
    Ok(())
}

pub fn parse_snapshot(text: &str) -> Result<SnapshotRecord, IoError> {
    let (first, body) = text.split_once('\n').ok_or_else(|| IoError::Format("snapshot file is empty".into()))?;
    let meta = first
        .strip_prefix("# ")
        .ok_or_else(|| IoError::Format("snapshot must start with '# t=<t> n=<n>'".into()))?;
    let mut t = None;
    let mut n = None;
    for field in meta.split_whitespace() {
        match field.split_once('=') {
            Some(("t", v)) => t = Some(parse_float(v)?),
            Some(("n", v)) => n = Some(v.parse::<usize>().map_err(|_| IoError::Format(format!("bad n '{v}'")))?),
            _ => return Err(IoError::Format(format!("unexpected field '{field}' in snapshot comment"))),
        }
    }
    let (t, n) = match (t, n) {
        (Some(t), Some(n)) => (t, n),
        _ => return Err(IoError::Format("snapshot comment needs t and n".into())),
    };
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(body.as_bytes());
    let header = rdr.headers()?;
    if header.iter().ne(SNAPSHOT_HEADER.iter().copied()) {
        return Err(IoError::Format("unexpected snapshot header".into()));
    }
    let mut rec = SnapshotRecord { t, theta: Vec::new(), k: Vec::new(), h: Vec::new(), x: Vec::new(), y: Vec::new() };
    for record in rdr.records() {
        let record = record?;
        let cols = [&mut rec.theta, &mut rec.k, &mut rec.h, &mut rec.x, &mut rec.y];
        for (col, field) in cols.into_iter().zip(record.iter()) {
            col.push(parse_float(field)?);
        }
    }
    if rec.theta.len() != n {
        return Err(IoError::Format(format!("snapshot declares n={n} but has {} rows", rec.theta.len())));
    }
    Ok(rec)
}

/// Writes `series.csv`, `snap_<i>.csv` for every snapshot, and
/// `summary.json` into `dir` (created if missing). Nothing is written for an
/// empty trajectory. Returns the paths written.
pub fn emit_timeseries(dir: &Path, traj: &Trajectory, summary: &RunSummary) -> Result<Vec<PathBuf>, IoError> {
    if traj.snapshots.is_empty() {
        return Err(IoError::EmptyTrajectory);
    }
    fs::create_dir_all(dir)?;
    let mut written = Vec::with_capacity(traj.snapshots.len() + 2);

    let path = dir.join("series.csv");
    write_series(std::io::BufWriter::new(fs::File::create(&path)?), traj.summaries())?;
    written.push(path);

    for (i, snap) in traj.snapshots.iter().enumerate() {
        let path = dir.join(format!("snap_{i}.csv"));
        write_snapshot(std::io::BufWriter::new(fs::File::create(&path)?), snap)?;
        written.push(path);
    }

    let path = dir.join("summary.json");
    write_summary(std::io::BufWriter::new(fs::File::create(&path)?), summary)?;
    written.push(path);
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{circle_trajectory, CircleSolution};

    #[test]
    fn descriptors_round_trip() {
        for s in ["circle:1.0", "ellipse:2.0,1.0", "fourier:3:0.05,5:0.01"] {
            let d: CurveDescriptor = s.parse().unwrap();
            assert_eq!(d.to_string(), s);
        }
        assert_eq!("circle:2".parse::<CurveDescriptor>().unwrap(), CurveDescriptor::Circle { r: 2.0 });
        for bad in ["circle", "circle:-1", "ellipse:1,2", "ellipse:2", "fourier:1:0.1", "fourier:3", "square:1", "circle:nan"] {
            assert!(bad.parse::<CurveDescriptor>().is_err(), "{bad}");
        }
    }

    #[test]
    fn fourier_curves_are_seeded_and_validated() {
        let grid = AngleGrid::new(128).unwrap();
        let d: CurveDescriptor = "fourier:3:0.05,4:0.02".parse().unwrap();
        let a = d.build(grid, 7).unwrap();
        assert_eq!(a, d.build(grid, 7).unwrap());
        assert_ne!(a, d.build(grid, 8).unwrap());
        // h″ + h = 1 − 8·0.2·cos(3θ + φ) goes negative
        let d: CurveDescriptor = "fourier:3:0.2".parse().unwrap();
        assert!(matches!(d.build(grid, 0), Err(IoError::Format(_))));
    }

    #[test]
    fn echo_builds_config() {
        let mut echo = RunEcho::new("power:2", "ellipse:1.5,1", 64);
        echo.area_floor = 0.1;
        let cfg = echo.flow_config().unwrap();
        assert_eq!(cfg.law.label(), "power:2");
        assert_eq!(cfg.area_floor, 0.1);
        assert!(matches!(cfg.initial, InitialProfile::Curvature(_)));
        echo.n = 100;
        assert!(echo.flow_config().is_err());
    }

    fn circle() -> Trajectory {
        let sol = CircleSolution::new(1.0, 1.0).unwrap();
        circle_trajectory(&sol, AngleGrid::new(32).unwrap(), 0.5, 2f64.powi(-9)).unwrap()
    }

    #[test]
    fn series_round_trips_bit_exactly() {
        let traj = circle();
        let mut buf = Vec::new();
        write_series(&mut buf, traj.summaries()).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,L,A,iso_ratio,r_in,r_out,k_min,k_max,bonnesen_gap,gage_deficit,hausdorff,closure_residual\n"));
        let rows = parse_series(&text).unwrap();
        assert_eq!(rows.len(), traj.snapshots.len());
        for (row, s) in rows.iter().zip(traj.summaries()) {
            assert_eq!(row.0.map(f64::to_bits), SeriesRow::from_summary(s).0.map(f64::to_bits));
        }
        assert!(parse_series("t,L\n1,2\n").is_err());
    }

    #[test]
    fn snapshot_round_trips() {
        let traj = circle();
        let snap = &traj.snapshots[3];
        let mut buf = Vec::new();
        write_snapshot(&mut buf, snap).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let rec = parse_snapshot(&text).unwrap();
        assert_eq!(rec.t.to_bits(), snap.t().to_bits());
        assert_eq!(rec.k, snap.curvature.values());
        assert_eq!(rec.h, snap.support.values());
        assert!(parse_snapshot("theta,k,h,x,y\n").is_err());
        assert!(parse_snapshot("# t=0 n=2\ntheta,k,h,x,y\n0,1,1,0,-1\n").is_err());
    }

    #[test]
    fn emit_writes_every_file() {
        let traj = circle();
        assert_eq!(traj.snapshots.len(), 10);
        let dir = tempfile::tempdir().unwrap();
        let summary = RunSummary::new(RunEcho::new("power:1", "circle:1", 32), &traj, Vec::new());
        let written = emit_timeseries(dir.path(), &traj, &summary).unwrap();
        assert_eq!(written.len(), 12);
        for i in 0..10 {
            assert!(dir.path().join(format!("snap_{i}.csv")).exists());
        }
        let rows = parse_series(&fs::read_to_string(dir.path().join("series.csv")).unwrap()).unwrap();
        assert_eq!(rows.len(), 10);
        let back = parse_summary(&fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
        assert_eq!(back, summary);
    }

    #[test]
    fn empty_trajectory_writes_nothing() {
        let mut traj = circle();
        traj.snapshots.clear();
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("out");
        let summary = RunSummary::new(RunEcho::new("power:1", "circle:1", 32), &traj, Vec::new());
        assert!(matches!(emit_timeseries(&out, &traj, &summary), Err(IoError::EmptyTrajectory)));
        assert!(!out.exists());
    }
}
