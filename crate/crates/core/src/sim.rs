//! Monte Carlo BER/FER simulation over BPSK-AWGN.
//!
//! Every frame draws its message and noise from a ChaCha8 stream keyed by
//! `(seed, frame_index)`, so results do not depend on how frames are spread
//! over worker threads. Frames run in parallel batches and are accumulated in
//! frame order, which keeps the `min_frame_errors` cut-off exact.

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::channel::awgn_llr;
use crate::config::SimConfig;
use crate::coupled::{global_decode, lg_encode, local_decode, CoupledConfig};
use crate::error::{Error, Result};
use crate::polar::{construct_reliability, partition_channels, CodeConfig};
use crate::bp::bp_decode;
use crate::systematic::{systematic_encode, systematic_extract};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Each subblock decoded on its own.
    Local,
    /// Joint decoding of all subblocks and the outer code.
    Global,
    /// A single systematic polar code of size `(conv_n, conv_k)`.
    Conventional,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Local => "local",
            Mode::Global => "global",
            Mode::Conventional => "conventional",
        })
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "local" => Ok(Mode::Local),
            "global" => Ok(Mode::Global),
            "conventional" => Ok(Mode::Conventional),
            _ => Err(Error::InvalidScenario(format!("unknown mode `{s}`"))),
        }
    }
}

/// Parses `start:step:stop` (inclusive) or a single value into Eb/N0 points.
pub fn parse_ebno_range(text: &str) -> Result<Vec<f64>> {
    let bad = || Error::InvalidScenario(format!("invalid Eb/N0 range `{text}`"));
    let parts: Vec<f64> = text
        .split(':')
        .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_>>()?;
    if parts.iter().any(|v| !v.is_finite()) {
        return Err(bad());
    }
    match parts.as_slice() {
        [single] => Ok(vec![*single]),
        [start, step, stop] if *step > 0.0 && stop >= start => {
            let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
            Ok((0..count)
                .map(|i| ((start + i as f64 * step) * 1e9).round() / 1e9)
                .collect())
        }
        _ => Err(bad()),
    }
}

/// One simulation campaign: a code, a decoding mode and an Eb/N0 sweep.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub config: SimConfig,
    pub mode: Mode,
    pub ebno_db: Vec<f64>,
    pub max_frames: u64,
    /// Stop a point once this many frame errors are seen; 0 disables.
    pub min_frame_errors: u64,
    pub seed: u64,
}

impl Scenario {
    pub fn new(config: SimConfig, mode: Mode, ebno_db: Vec<f64>, max_frames: u64) -> Result<Self> {
        let scenario = Self {
            config,
            mode,
            ebno_db,
            max_frames,
            min_frame_errors: 0,
            seed: 0,
        };
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_min_frame_errors(mut self, min_frame_errors: u64) -> Self {
        self.min_frame_errors = min_frame_errors;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.ebno_db.is_empty() {
            return Err(Error::InvalidScenario("Eb/N0 list is empty".into()));
        }
        if self.max_frames == 0 {
            return Err(Error::InvalidScenario("max_frames must be at least 1".into()));
        }
        if self.ebno_db.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidScenario("Eb/N0 values must be finite".into()));
        }
        self.config.params.validate()?;
        Ok(())
    }
}

/// Error counts for one decoding unit (frame or subblock).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ErrorStats {
    /// Decoded units.
    pub frames: u64,
    /// Payload bits per unit.
    pub payload_bits: u64,
    pub bit_errors: u64,
    pub frame_errors: u64,
    /// Sum of iterations over all units.
    pub iterations: u64,
    /// Sum of squared per-unit bit error counts.
    pub bit_errors_sq: u64,
}

impl ErrorStats {
    fn new(payload_bits: u64) -> Self {
        Self {
            payload_bits,
            ..Self::default()
        }
    }

    fn record(&mut self, unit: &UnitOutcome) {
        self.frames += 1;
        self.bit_errors += unit.bit_errors;
        self.bit_errors_sq += unit.bit_errors * unit.bit_errors;
        self.frame_errors += u64::from(unit.bit_errors > 0);
        self.iterations += unit.iterations;
    }

    pub fn ber(&self) -> f64 {
        if self.frames == 0 {
            return 0.0;
        }
        self.bit_errors as f64 / (self.frames * self.payload_bits) as f64
    }

    pub fn fer(&self) -> f64 {
        if self.frames == 0 {
            return 0.0;
        }
        self.frame_errors as f64 / self.frames as f64
    }

    pub fn avg_iterations(&self) -> f64 {
        if self.frames == 0 {
            return 0.0;
        }
        self.iterations as f64 / self.frames as f64
    }

    /// Standard error of the BER estimate, treating units (not bits) as the
    /// independent samples.
    pub fn ber_std_error(&self) -> f64 {
        if self.frames < 2 {
            return 0.0;
        }
        let n = self.frames as f64;
        let k = self.payload_bits as f64;
        let mean = self.bit_errors as f64 / n;
        let var = (self.bit_errors_sq as f64 / n - mean * mean).max(0.0) * n / (n - 1.0);
        (var / n).sqrt() / k
    }
}

/// Results of one (scenario, Eb/N0) point.
#[derive(Clone, Debug, PartialEq)]
pub struct SimResult {
    pub setting: String,
    pub mode: Mode,
    pub ebno_db: f64,
    /// Transmitted frames.
    pub frames: u64,
    /// Aggregate statistics. In local mode every subblock decode is one unit.
    pub overall: ErrorStats,
    /// Per-subblock statistics (local mode only).
    pub subblocks: Vec<ErrorStats>,
    /// `joint_failures[i][j]`: frames in which subblocks `i` and `j` both failed
    /// (local mode only).
    pub joint_failures: Vec<Vec<u64>>,
}

impl SimResult {
    /// Pearson correlation of the failure indicators of subblocks `i` and `j`.
    ///
    /// `None` when either indicator has zero variance.
    pub fn failure_correlation(&self, i: usize, j: usize) -> Option<f64> {
        let n = self.frames as f64;
        let pi = self.subblocks.get(i)?.frame_errors as f64 / n;
        let pj = self.subblocks.get(j)?.frame_errors as f64 / n;
        let pij = self.joint_failures[i][j] as f64 / n;
        let denom = (pi * (1.0 - pi) * pj * (1.0 - pj)).sqrt();
        (denom > 0.0).then(|| (pij - pi * pj) / denom)
    }
}

#[derive(Clone, Copy, Debug)]
struct UnitOutcome {
    bit_errors: u64,
    iterations: u64,
}

enum Codec {
    Coupled(Box<CoupledConfig>),
    Conventional(CodeConfig),
}

/// Encodes, transmits and decodes single frames for a scenario.
struct FrameRunner {
    codec: Codec,
    mode: Mode,
    rate: f64,
    seed: u64,
    opts: crate::bp::BpOptions,
}

fn random_bits(rng: &mut ChaCha8Rng, len: usize) -> Vec<u8> {
    (0..len).map(|_| u8::from(rng.gen::<bool>())).collect()
}

fn count_errors(a: &[u8], b: &[u8]) -> u64 {
    a.iter().zip(b).filter(|(x, y)| x != y).count() as u64
}

impl FrameRunner {
    fn new(scenario: &Scenario) -> Result<Self> {
        let params = &scenario.config.params;
        let (codec, rate) = match scenario.mode {
            Mode::Conventional => {
                let (n, k) = (scenario.config.conv_n, scenario.config.conv_k);
                let rate = k as f64 / n as f64;
                let z = construct_reliability(n, params.design_ebno_db, rate)?;
                (Codec::Conventional(partition_channels(&z, k, 0)?), rate)
            }
            Mode::Local | Mode::Global => {
                let cfg = CoupledConfig::new(params.clone())?;
                let r = cfg.rates().total;
                let rate = *r.numer() as f64 / *r.denom() as f64;
                (Codec::Coupled(Box::new(cfg)), rate)
            }
        };
        Ok(Self {
            codec,
            mode: scenario.mode,
            rate,
            seed: scenario.seed,
            opts: params.bp_options(),
        })
    }

    fn units(&self) -> usize {
        match (&self.codec, self.mode) {
            (Codec::Coupled(cfg), Mode::Local) => cfg.m(),
            _ => 1,
        }
    }

    fn payload_bits(&self) -> u64 {
        match (&self.codec, self.mode) {
            (Codec::Conventional(code), _) => code.info_set().len() as u64,
            (Codec::Coupled(cfg), Mode::Local) => (cfg.ka_per_block() + cfg.kb_per_block()) as u64,
            (Codec::Coupled(cfg), _) => (cfg.params().ka + cfg.params().kb) as u64,
        }
    }

    fn frame_rng(&self, frame_index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(frame_index);
        rng
    }

    fn run_frame(&self, frame_index: u64, ebno_db: f64) -> Vec<UnitOutcome> {
        let mut rng = self.frame_rng(frame_index);
        match &self.codec {
            Codec::Conventional(code) => {
                let v = random_bits(&mut rng, code.info_set().len());
                let cw = systematic_encode(&v, code).expect("message length matches code");
                let llr = awgn_llr(&cw.x, ebno_db, self.rate, &mut rng);
                let out = bp_decode(&llr, code, &self.opts);
                let v_hat = systematic_extract(&out.x_hat, code);
                vec![UnitOutcome {
                    bit_errors: count_errors(&v, &v_hat),
                    iterations: out.iterations_used as u64,
                }]
            }
            Codec::Coupled(cfg) => {
                let params = cfg.params();
                let v_a = random_bits(&mut rng, params.ka);
                let v_b = random_bits(&mut rng, params.kb);
                let x = lg_encode(&v_a, &v_b, cfg).expect("message lengths match config");
                let llr = awgn_llr(&x, ebno_db, self.rate, &mut rng);
                if self.mode == Mode::Global {
                    let out = global_decode(&llr, cfg).expect("llr length matches config");
                    let errors = count_errors(&v_a, &out.ka_hat) + count_errors(&v_b, &out.kb_hat);
                    return vec![UnitOutcome {
                        bit_errors: errors,
                        iterations: out.iterations_used as u64,
                    }];
                }
                let (ka_i, kb_i, ni) = (cfg.ka_per_block(), cfg.kb_per_block(), params.ni);
                (0..cfg.m())
                    .map(|i| {
                        let out = local_decode(&llr[i * ni..(i + 1) * ni], i, cfg)
                            .expect("subblock index and length match config");
                        let errors = count_errors(&v_a[i * ka_i..(i + 1) * ka_i], &out.ka_hat)
                            + count_errors(&v_b[i * kb_i..(i + 1) * kb_i], &out.kb_hat);
                        UnitOutcome {
                            bit_errors: errors,
                            iterations: out.outcome.iterations_used as u64,
                        }
                    })
                    .collect()
            }
        }
    }
}

const BATCH_PER_THREAD: usize = 8;

fn run_point_with(runner: &FrameRunner, scenario: &Scenario, ebno_db: f64) -> SimResult {
    let units = runner.units();
    let payload = runner.payload_bits();
    let mut overall = ErrorStats::new(payload);
    let mut subblocks = if scenario.mode == Mode::Local {
        vec![ErrorStats::new(payload); units]
    } else {
        Vec::new()
    };
    let mut joint = if scenario.mode == Mode::Local {
        vec![vec![0u64; units]; units]
    } else {
        Vec::new()
    };
    let batch = (rayon::current_num_threads() * BATCH_PER_THREAD) as u64;
    let mut frames = 0u64;
    let mut next = 0u64;
    'outer: while next < scenario.max_frames {
        let end = (next + batch).min(scenario.max_frames);
        let outcomes: Vec<Vec<UnitOutcome>> = (next..end)
            .into_par_iter()
            .map(|f| runner.run_frame(f, ebno_db))
            .collect();
        next = end;
        for frame in outcomes {
            frames += 1;
            for (i, unit) in frame.iter().enumerate() {
                overall.record(unit);
                if let Some(stats) = subblocks.get_mut(i) {
                    stats.record(unit);
                }
            }
            if !joint.is_empty() {
                for (i, a) in frame.iter().enumerate() {
                    for (j, b) in frame.iter().enumerate() {
                        joint[i][j] += u64::from(a.bit_errors > 0 && b.bit_errors > 0);
                    }
                }
            }
            if scenario.min_frame_errors > 0 && overall.frame_errors >= scenario.min_frame_errors {
                break 'outer;
            }
        }
    }
    SimResult {
        setting: scenario.config.name.clone(),
        mode: scenario.mode,
        ebno_db,
        frames,
        overall,
        subblocks,
        joint_failures: joint,
    }
}

/// Simulates one Eb/N0 point of `scenario`.
pub fn run_point(scenario: &Scenario, ebno_db: f64) -> Result<SimResult> {
    scenario.validate()?;
    let runner = FrameRunner::new(scenario)?;
    Ok(run_point_with(&runner, scenario, ebno_db))
}

/// Simulates every Eb/N0 point of `scenario` in order.
pub fn run_scenario(scenario: &Scenario) -> Result<Vec<SimResult>> {
    scenario.validate()?;
    let runner = FrameRunner::new(scenario)?;
    Ok(scenario
        .ebno_db
        .iter()
        .map(|&ebno| run_point_with(&runner, scenario, ebno))
        .collect())
}

pub const CSV_HEADER: &str = "setting,mode,ebno_db,frames,bit_errors,frame_errors,ber,fer,avg_iterations";

fn write_row<W: Write>(out: &mut W, r: &SimResult, stats: &ErrorStats, subblock: Option<&str>) -> std::io::Result<()> {
    write!(
        out,
        "{},{},{},{},{},{},{:.6e},{:.6e},{:.4}",
        r.setting,
        r.mode,
        r.ebno_db,
        stats.frames,
        stats.bit_errors,
        stats.frame_errors,
        stats.ber(),
        stats.fer(),
        stats.avg_iterations()
    )?;
    if let Some(label) = subblock {
        write!(out, ",{label}")?;
    }
    writeln!(out)
}

/// Writes results as CSV.
///
/// When any result is in local mode a trailing `subblock` column is added:
/// one row per subblock (1-based) followed by an `all` row whose units are
/// individual subblock decodes.
pub fn write_csv<W: Write>(results: &[SimResult], mut out: W) -> std::io::Result<()> {
    let local = results.iter().any(|r| r.mode == Mode::Local);
    if local {
        writeln!(out, "{CSV_HEADER},subblock")?;
    } else {
        writeln!(out, "{CSV_HEADER}")?;
    }
    for r in results {
        if r.mode == Mode::Local {
            for (i, stats) in r.subblocks.iter().enumerate() {
                write_row(&mut out, r, stats, Some(&(i + 1).to_string()))?;
            }
            write_row(&mut out, r, &r.overall, Some("all"))?;
        } else {
            write_row(&mut out, r, &r.overall, local.then_some(""))?;
        }
    }
    out.flush()
}

/// Writes results as CSV to `path`.
pub fn emit_csv(results: &[SimResult], path: impl AsRef<Path>) -> Result<()> {
    let file = File::create(path)?;
    write_csv(results, BufWriter::new(file))?;
    Ok(())
}
