//! Coupled local-global polar codes.
//!
//! `M` inner polar codes of length `N_i` each reserve `S` semipolarized
//! bit-channels. A systematic outer polar code of length `N_0 = M·S` protects
//! them: its codeword `[P_a, K_a]` is split into `M` partitions, partition `i`
//! holding the `i`-th chunk of parity bits and the `i`-th chunk of systematic
//! bits, and a partitioned interleaver writes partition `i` onto the
//! semipolarized inputs of inner code `i` only. Each subblock can therefore be
//! decoded on its own ([`local_decode`]), or all codes can be decoded jointly
//! on the combined factor graph ([`global_decode`]).

use num_rational::Ratio;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bp::{bp_decode, g_matrix_check, BpOptions, CheckRule, DecodeOutcome, MessageGrid};
use crate::error::{Error, Result};
use crate::polar::{construct_reliability, partition_channels, polar_transform, polar_transform_in_place, CodeConfig};
use crate::systematic::{systematic_encode, systematic_extract, SystematicCodeword};

/// Sizes and decoder settings of a coupled code.
#[derive(Clone, Debug, PartialEq)]
pub struct CouplingParams {
    /// Number of subblocks `M`.
    pub m: usize,
    /// Outer code length `N_0`.
    pub n0: usize,
    /// Outer information bits `K_a` (all subblocks).
    pub ka: usize,
    /// Inner information bits `K_b` (all subblocks).
    pub kb: usize,
    /// Semipolarized channels per inner code.
    pub s: usize,
    /// Inner code length `N_i`.
    pub ni: usize,
    pub max_iterations: usize,
    pub early_stop: bool,
    /// Eb/N0 at which the Bhattacharyya construction is evaluated.
    pub design_ebno_db: f64,
    /// Seed of the within-partition permutations; 0 means identity.
    pub interleaver_seed: u64,
    pub rule: CheckRule,
}

/// Exact code rates of a coupled configuration.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RateReport {
    /// `(K_a + K_b) / N`
    pub total: Ratio<u64>,
    /// `K_a / N_0`
    pub outer: Ratio<u64>,
    /// `(K_b_i + S_i) / N_i`
    pub inner: Ratio<u64>,
    /// `(K_b_i + K_a_i) / N_i`
    pub subblock: Ratio<u64>,
}

fn coupling_err(msg: String) -> Error {
    Error::InvalidCoupling(msg)
}

impl CouplingParams {
    /// Checks every size identity of the coupling and returns the four rates.
    pub fn validate(&self) -> Result<RateReport> {
        let CouplingParams {
            m, n0, ka, kb, s, ni, ..
        } = *self;
        if m == 0 {
            return Err(coupling_err("m must be at least 1".into()));
        }
        for (name, len) in [("n0", n0), ("ni", ni)] {
            if len < 2 || !len.is_power_of_two() {
                return Err(coupling_err(format!("{name} ({len}) must be a power of two >= 2")));
            }
        }
        if ka > n0 {
            return Err(coupling_err(format!("ka ({ka}) exceeds n0 ({n0})")));
        }
        if n0 % m != 0 {
            return Err(coupling_err(format!("n0 ({n0}) is not divisible by m ({m})")));
        }
        if s != n0 / m {
            return Err(coupling_err(format!(
                "s ({s}) != n0 / m ({n0} / {m} = {})",
                n0 / m
            )));
        }
        if ka % m != 0 {
            return Err(coupling_err(format!("ka ({ka}) is not divisible by m ({m})")));
        }
        if (n0 - ka) % m != 0 {
            return Err(coupling_err(format!(
                "parity count n0 - ka ({}) is not divisible by m ({m})",
                n0 - ka
            )));
        }
        if kb % m != 0 {
            return Err(coupling_err(format!("kb ({kb}) is not divisible by m ({m})")));
        }
        if kb / m + s > ni {
            return Err(coupling_err(format!(
                "kb / m + s ({} + {s}) exceeds ni ({ni})",
                kb / m
            )));
        }
        if self.max_iterations == 0 {
            return Err(coupling_err("max_iterations must be at least 1".into()));
        }
        if !self.design_ebno_db.is_finite() {
            return Err(coupling_err("design_ebno_db must be finite".into()));
        }
        let r = |num: usize, den: usize| Ratio::new(num as u64, den as u64);
        Ok(RateReport {
            total: r(ka + kb, m * ni),
            outer: r(ka, n0),
            inner: r(kb / m + s, ni),
            subblock: r(kb / m + ka / m, ni),
        })
    }

    /// Total transmitted length `N = M·N_i`.
    pub fn total_len(&self) -> usize {
        self.m * self.ni
    }

    pub fn bp_options(&self) -> BpOptions {
        BpOptions {
            max_iterations: self.max_iterations,
            early_stop: self.early_stop,
            rule: self.rule,
        }
    }
}

/// Position of an outer codeword bit inside the inner codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Slot {
    pub subblock: usize,
    /// Index into the (ascending) semipolarized set of that subblock's code.
    pub slot: usize,
}

/// Partitioned interleaver between the outer codeword and the inner
/// semipolarized channels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InterleaverMap {
    forward: Vec<Slot>,
    inverse: Vec<Vec<usize>>,
    systematic_slots: Vec<Vec<usize>>,
}

impl InterleaverMap {
    /// Outer position -> (subblock, semi slot).
    pub fn forward(&self, outer_index: usize) -> Slot {
        self.forward[outer_index]
    }

    /// (subblock, semi slot) -> outer position.
    pub fn inverse(&self, slot: Slot) -> usize {
        self.inverse[slot.subblock][slot.slot]
    }

    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forward.is_empty()
    }

    /// Semi slots of `subblock` carrying its systematic outer bits `K_a_i`,
    /// in ascending outer-position order.
    pub fn systematic_slots(&self, subblock: usize) -> &[usize] {
        &self.systematic_slots[subblock]
    }

    /// Outer positions assigned to `subblock`, indexed by semi slot.
    pub fn partition(&self, subblock: usize) -> &[usize] {
        &self.inverse[subblock]
    }
}

/// Builds the partitioned interleaver for `outer` split over `m` subblocks.
///
/// Partition `i` is `[parity chunk i, systematic chunk i]`, each chunk taken
/// as contiguous runs of ascending positions. Seed 0 keeps partition order;
/// any other seed shuffles each partition with a ChaCha8 stream.
pub fn build_interleaver(outer: &CodeConfig, m: usize, seed: u64) -> InterleaverMap {
    let parity = outer.frozen_set();
    let systematic = outer.info_set();
    let pa_i = parity.len() / m;
    let ka_i = systematic.len() / m;
    let s = pa_i + ka_i;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut forward = vec![Slot { subblock: 0, slot: 0 }; outer.len()];
    let mut inverse = vec![vec![0; s]; m];
    let mut systematic_slots = Vec::with_capacity(m);
    for i in 0..m {
        let members: Vec<usize> = parity[i * pa_i..(i + 1) * pa_i]
            .iter()
            .chain(&systematic[i * ka_i..(i + 1) * ka_i])
            .copied()
            .collect();
        let mut perm: Vec<usize> = (0..s).collect();
        if seed != 0 {
            perm.shuffle(&mut rng);
        }
        for (&pos, &slot) in members.iter().zip(&perm) {
            forward[pos] = Slot { subblock: i, slot };
            inverse[i][slot] = pos;
        }
        systematic_slots.push(perm[pa_i..].to_vec());
    }
    InterleaverMap {
        forward,
        inverse,
        systematic_slots,
    }
}

/// A validated coupled code: outer code, `M` inner codes and the interleaver.
#[derive(Clone, Debug)]
pub struct CoupledConfig {
    params: CouplingParams,
    rates: RateReport,
    outer: CodeConfig,
    inners: Vec<CodeConfig>,
    interleaver: InterleaverMap,
}

impl CoupledConfig {
    /// Validates `params` and constructs all component codes.
    ///
    /// Every code is designed by the Bhattacharyya recursion at
    /// `params.design_ebno_db` with the combined rate as design rate.
    pub fn new(params: CouplingParams) -> Result<Self> {
        let rates = params.validate()?;
        let design_rate = *rates.total.numer() as f64 / *rates.total.denom() as f64;

        let z_outer = construct_reliability(params.n0, params.design_ebno_db, design_rate)?;
        let outer = partition_channels(&z_outer, params.ka, 0)?;

        let z_inner = construct_reliability(params.ni, params.design_ebno_db, design_rate)?;
        let inner = partition_channels(&z_inner, params.kb / params.m, params.s)?;
        let inners = vec![inner; params.m];

        let interleaver = build_interleaver(&outer, params.m, params.interleaver_seed);
        Ok(Self {
            params,
            rates,
            outer,
            inners,
            interleaver,
        })
    }

    pub fn params(&self) -> &CouplingParams {
        &self.params
    }

    pub fn rates(&self) -> RateReport {
        self.rates
    }

    pub fn m(&self) -> usize {
        self.params.m
    }

    pub fn outer(&self) -> &CodeConfig {
        &self.outer
    }

    pub fn inner(&self, subblock: usize) -> &CodeConfig {
        &self.inners[subblock]
    }

    pub fn interleaver(&self) -> &InterleaverMap {
        &self.interleaver
    }

    pub fn total_len(&self) -> usize {
        self.params.total_len()
    }

    /// `K_a_i`, systematic outer bits per subblock.
    pub fn ka_per_block(&self) -> usize {
        self.params.ka / self.params.m
    }

    /// `K_b_i`, inner information bits per subblock.
    pub fn kb_per_block(&self) -> usize {
        self.params.kb / self.params.m
    }
}

/// Re-checks the configuration and reports its rates.
pub fn validate_config(cfg: &CoupledConfig) -> Result<RateReport> {
    cfg.params().validate()
}

/// All intermediate words of a coupled encoding.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoupledCodeword {
    pub outer: SystematicCodeword,
    /// Transform-domain input of each inner code.
    pub inner_u: Vec<Vec<u8>>,
    /// Concatenated inner codewords, length `N`.
    pub x: Vec<u8>,
}

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::InvalidMessageLength { expected, got });
    }
    Ok(())
}

/// Encodes `(v_a, v_b)` and keeps the intermediate words.
pub fn lg_encode_parts(v_a: &[u8], v_b: &[u8], cfg: &CoupledConfig) -> Result<CoupledCodeword> {
    check_len(cfg.params.ka, v_a.len())?;
    check_len(cfg.params.kb, v_b.len())?;
    let outer = systematic_encode(v_a, &cfg.outer)?;
    let kb_i = cfg.kb_per_block();
    let mut inner_u = Vec::with_capacity(cfg.m());
    let mut x = Vec::with_capacity(cfg.total_len());
    for i in 0..cfg.m() {
        let code = cfg.inner(i);
        let mut u = vec![0u8; code.len()];
        for (&pos, &bit) in code.info_set().iter().zip(&v_b[i * kb_i..(i + 1) * kb_i]) {
            u[pos] = bit & 1;
        }
        for (slot, &pos) in code.semi_set().iter().enumerate() {
            u[pos] = outer.x[cfg.interleaver.inverse(Slot { subblock: i, slot })];
        }
        let mut xi = u.clone();
        polar_transform_in_place(&mut xi)?;
        x.extend_from_slice(&xi);
        inner_u.push(u);
    }
    Ok(CoupledCodeword { outer, inner_u, x })
}

/// Encodes outer bits `v_a` (length `K_a`) and inner bits `v_b` (length `K_b`)
/// into the length-`N` transmitted word.
pub fn lg_encode(v_a: &[u8], v_b: &[u8], cfg: &CoupledConfig) -> Result<Vec<u8>> {
    Ok(lg_encode_parts(v_a, v_b, cfg)?.x)
}

/// Result of decoding one subblock in isolation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalDecodeResult {
    /// Estimated `K_a_i`.
    pub ka_hat: Vec<u8>,
    /// Estimated `K_b_i`.
    pub kb_hat: Vec<u8>,
    pub outcome: DecodeOutcome,
}

/// BP-decodes subblock `subblock` from its own `N_i` channel LLRs.
///
/// Semipolarized channels are treated as unknown information; the parity part
/// of the outer partition is discarded.
pub fn local_decode(llr_i: &[f64], subblock: usize, cfg: &CoupledConfig) -> Result<LocalDecodeResult> {
    if subblock >= cfg.m() {
        return Err(coupling_err(format!(
            "subblock {subblock} out of range for m = {}",
            cfg.m()
        )));
    }
    let code = cfg.inner(subblock);
    check_len(code.len(), llr_i.len())?;
    let outcome = bp_decode(llr_i, code, &cfg.params.bp_options());
    let kb_hat = code.info_set().iter().map(|&p| outcome.u_hat[p]).collect();
    let semi = code.semi_set();
    let ka_hat = cfg
        .interleaver
        .systematic_slots(subblock)
        .iter()
        .map(|&slot| outcome.u_hat[semi[slot]])
        .collect();
    Ok(LocalDecodeResult {
        ka_hat,
        kb_hat,
        outcome,
    })
}

/// Messages and stopping flags of a global decoder run.
#[derive(Clone, Debug)]
pub struct GlobalDecoderState {
    pub inner_grids: Vec<MessageGrid>,
    pub outer_grid: MessageGrid,
    pub inner_converged: Vec<bool>,
    pub outer_converged: bool,
    pub global_iteration: usize,
}

impl GlobalDecoderState {
    /// Channel LLRs on each inner graph, frozen priors on every code; the
    /// outer graph starts with zero channel-side messages.
    pub fn new(llr: &[f64], cfg: &CoupledConfig) -> Self {
        let ni = cfg.params.ni;
        let inner_grids = (0..cfg.m())
            .map(|i| MessageGrid::for_code(&llr[i * ni..(i + 1) * ni], cfg.inner(i)))
            .collect();
        let outer_grid = MessageGrid::for_code(&vec![0.0; cfg.params.n0], cfg.outer());
        Self {
            inner_grids,
            outer_grid,
            inner_converged: vec![false; cfg.m()],
            outer_converged: false,
            global_iteration: 0,
        }
    }

    /// Runs one global iteration. Returns whether all `M + 1` checks passed.
    pub fn step(&mut self, cfg: &CoupledConfig) -> bool {
        let rule = cfg.params.rule;
        let map = cfg.interleaver();

        for (i, grid) in self.inner_grids.iter_mut().enumerate() {
            grid.sweep_right(rule);
            grid.sweep_left(rule);
            self.inner_converged[i] = g_matrix_check(&grid.hard_u(), &grid.hard_x());
        }

        // inner stage-1 L-messages on the semipolarized channels, deinterleaved
        for k in 0..map.len() {
            let slot = map.forward(k);
            let pos = cfg.inner(slot.subblock).semi_set()[slot.slot];
            let msg = self.inner_grids[slot.subblock].l(0)[pos];
            self.outer_grid.set_channel_at(k, msg);
        }

        self.outer_grid.iterate(rule);
        self.outer_converged =
            g_matrix_check(&self.outer_grid.hard_u(), &self.outer_grid.hard_x());

        // outer rightmost R-messages become inner stage-1 priors
        let right = self.outer_grid.stages() - 1;
        for k in 0..map.len() {
            let slot = map.forward(k);
            let pos = cfg.inner(slot.subblock).semi_set()[slot.slot];
            let msg = self.outer_grid.r(right)[k];
            self.inner_grids[slot.subblock].set_prior_at(pos, msg);
        }

        self.global_iteration += 1;
        self.outer_converged && self.inner_converged.iter().all(|&c| c)
    }

    /// Final estimates `(K̂_a, K̂_b)`.
    pub fn estimates(&self, cfg: &CoupledConfig) -> (Vec<u8>, Vec<u8>) {
        let y_hat = self.outer_grid.hard_u();
        let outer_x = polar_transform(&y_hat).expect("outer length is a power of two");
        let ka_hat = systematic_extract(&outer_x, cfg.outer());
        let mut kb_hat = Vec::with_capacity(cfg.params.kb);
        for (i, grid) in self.inner_grids.iter().enumerate() {
            let u_hat = grid.hard_u();
            kb_hat.extend(cfg.inner(i).info_set().iter().map(|&p| u_hat[p]));
        }
        (ka_hat, kb_hat)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GlobalDecodeResult {
    pub ka_hat: Vec<u8>,
    pub kb_hat: Vec<u8>,
    pub iterations_used: usize,
    /// All inner and outer G-matrix checks passed in the last global iteration.
    pub converged: bool,
}

/// Joint BP decoding of all subblocks and the outer code.
pub fn global_decode(llr: &[f64], cfg: &CoupledConfig) -> Result<GlobalDecodeResult> {
    check_len(cfg.total_len(), llr.len())?;
    let mut state = GlobalDecoderState::new(llr, cfg);
    let mut converged = false;
    while state.global_iteration < cfg.params.max_iterations {
        converged = state.step(cfg);
        if converged && cfg.params.early_stop {
            break;
        }
    }
    let (ka_hat, kb_hat) = state.estimates(cfg);
    Ok(GlobalDecodeResult {
        ka_hat,
        kb_hat,
        iterations_used: state.global_iteration,
        converged,
    })
}
