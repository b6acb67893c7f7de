//! Belief-propagation decoding on the encoder factor graph.
//!
//! The graph has `n + 1` stages of `N` nodes. Stage 0 is the `u` side, stage `n`
//! the channel side, and the butterflies between stage `s` and `s + 1` pair rows
//! `j` and `j + 2^s`. Every butterfly applies the four substructure updates
//!
//! ```text
//! L_out,1 = L_in,1 ⊞ (L_in,2 + R_in,2)
//! R_out,1 = R_in,1 ⊞ (L_in,2 + R_in,2)
//! L_out,2 = (R_in,1 ⊞ L_in,1) + L_in,2
//! R_out,2 = (R_in,1 ⊞ L_in,1) + R_in,2
//! ```
//!
//! All messages are clamped to `±LLR_MAX`; a frozen bit's infinite prior is
//! represented by `+LLR_MAX`.

use crate::polar::{polar_transform_in_place, CodeConfig};

/// Saturation magnitude for every LLR message.
pub const LLR_MAX: f64 = 40.0;

/// Check-node combining rule.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum CheckRule {
    /// Exact `ln((1 + e^{a+b}) / (e^a + e^b))`.
    #[default]
    BoxPlus,
    /// `sign(a) sign(b) min(|a|, |b|)`, unscaled.
    MinSum,
}

impl CheckRule {
    #[inline]
    pub fn combine(self, a: f64, b: f64) -> f64 {
        match self {
            CheckRule::BoxPlus => box_plus(a, b),
            CheckRule::MinSum => min_sum(a, b),
        }
    }
}

#[inline]
fn clamp(v: f64) -> f64 {
    v.clamp(-LLR_MAX, LLR_MAX)
}

/// `ln(1 + e^{-t})` for `t >= 0`; below f64 resolution past `t = 37`.
#[inline]
fn log1p_exp_neg(t: f64) -> f64 {
    if t > 37.0 {
        0.0
    } else {
        (-t).exp().ln_1p()
    }
}

#[inline]
fn signed_min(a: f64, b: f64) -> f64 {
    let m = a.abs().min(b.abs());
    if (a < 0.0) != (b < 0.0) {
        -m
    } else {
        m
    }
}

/// Box-plus in the stable form `sign·min + ln(1+e^{-|a+b|}) - ln(1+e^{-|a-b|})`.
#[inline]
pub fn box_plus(a: f64, b: f64) -> f64 {
    signed_min(a, b) + log1p_exp_neg((a + b).abs()) - log1p_exp_neg((a - b).abs())
}

#[inline]
pub fn min_sum(a: f64, b: f64) -> f64 {
    signed_min(a, b)
}

/// The four substructure updates, split by sweep direction. Arguments are
/// `(L_in,1, L_in,2, R_in,1, R_in,2)`; results are `(out,1, out,2)`, clamped.
trait Butterfly {
    fn left(l1: f64, l2: f64, r1: f64, r2: f64) -> (f64, f64);
    fn right(l1: f64, l2: f64, r1: f64, r2: f64) -> (f64, f64);
}

/// Exact box-plus as `ln((1 + e^a e^b) / (e^a + e^b))` with the exponentials
/// shared between both outputs. Inputs lie in `±LLR_MAX`, so every
/// intermediate stays finite.
struct ExpDomainBoxPlus;

#[inline(always)]
fn box_plus_exp(ea: f64, eb: f64) -> f64 {
    ((1.0 + ea * eb) / (ea + eb)).ln()
}

impl Butterfly for ExpDomainBoxPlus {
    #[inline(always)]
    fn left(l1: f64, l2: f64, r1: f64, r2: f64) -> (f64, f64) {
        let (e_l1, e_r1, e_c) = (l1.exp(), r1.exp(), clamp(l2 + r2).exp());
        (
            clamp(box_plus_exp(e_l1, e_c)),
            clamp(box_plus_exp(e_r1, e_l1) + l2),
        )
    }

    #[inline(always)]
    fn right(l1: f64, l2: f64, r1: f64, r2: f64) -> (f64, f64) {
        let (e_l1, e_r1, e_c) = (l1.exp(), r1.exp(), clamp(l2 + r2).exp());
        (
            clamp(box_plus_exp(e_r1, e_c)),
            clamp(box_plus_exp(e_r1, e_l1) + r2),
        )
    }
}

struct MinSumKernel;

impl Butterfly for MinSumKernel {
    #[inline(always)]
    fn left(l1: f64, l2: f64, r1: f64, r2: f64) -> (f64, f64) {
        (
            clamp(min_sum(l1, clamp(l2 + r2))),
            clamp(min_sum(r1, l1) + l2),
        )
    }

    #[inline(always)]
    fn right(l1: f64, l2: f64, r1: f64, r2: f64) -> (f64, f64) {
        (
            clamp(min_sum(r1, clamp(l2 + r2))),
            clamp(min_sum(r1, l1) + r2),
        )
    }
}

/// L- and R-messages for every stage of one code's factor graph.
#[derive(Clone, Debug, PartialEq)]
pub struct MessageGrid {
    log_n: usize,
    l: Vec<Vec<f64>>,
    r: Vec<Vec<f64>>,
}

impl MessageGrid {
    /// All-zero grid for a code of length `2^log_n`.
    pub fn zeros(log_n: u32) -> Self {
        let n = 1usize << log_n;
        let stages = log_n as usize + 1;
        Self {
            log_n: log_n as usize,
            l: vec![vec![0.0; n]; stages],
            r: vec![vec![0.0; n]; stages],
        }
    }

    /// Grid initialized for decoding: channel LLRs on the right, `+LLR_MAX` on
    /// frozen positions of the left R-messages, zero elsewhere.
    pub fn for_code(llr_ch: &[f64], config: &CodeConfig) -> Self {
        let mut grid = Self::zeros(config.log_len());
        grid.set_channel(llr_ch);
        for &i in config.frozen_set() {
            grid.r[0][i] = LLR_MAX;
        }
        grid
    }

    pub fn len(&self) -> usize {
        self.l[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.l[0].is_empty()
    }

    pub fn stages(&self) -> usize {
        self.log_n + 1
    }

    /// L-messages at `stage` (0 = leftmost).
    pub fn l(&self, stage: usize) -> &[f64] {
        &self.l[stage]
    }

    /// R-messages at `stage` (0 = leftmost).
    pub fn r(&self, stage: usize) -> &[f64] {
        &self.r[stage]
    }

    /// Overwrites the rightmost L-messages (clamped).
    pub fn set_channel(&mut self, llr_ch: &[f64]) {
        for (dst, &v) in self.l[self.log_n].iter_mut().zip(llr_ch) {
            *dst = clamp(v);
        }
    }

    /// Sets one rightmost L-message (clamped).
    pub fn set_channel_at(&mut self, index: usize, value: f64) {
        self.l[self.log_n][index] = clamp(value);
    }

    /// Sets one leftmost R-message (clamped).
    pub fn set_prior_at(&mut self, index: usize, value: f64) {
        self.r[0][index] = clamp(value);
    }

    /// Propagates L-messages from the rightmost stage down to stage 0.
    pub fn sweep_left(&mut self, rule: CheckRule) {
        match rule {
            CheckRule::BoxPlus => self.sweep_left_with::<ExpDomainBoxPlus>(),
            CheckRule::MinSum => self.sweep_left_with::<MinSumKernel>(),
        }
    }

    /// Propagates R-messages from stage 0 up to the rightmost stage.
    pub fn sweep_right(&mut self, rule: CheckRule) {
        match rule {
            CheckRule::BoxPlus => self.sweep_right_with::<ExpDomainBoxPlus>(),
            CheckRule::MinSum => self.sweep_right_with::<MinSumKernel>(),
        }
    }

    fn sweep_left_with<K: Butterfly>(&mut self) {
        for s in (0..self.log_n).rev() {
            let h = 1usize << s;
            let (l_lo, l_hi) = self.l.split_at_mut(s + 1);
            let l_out = &mut l_lo[s];
            let l_in = &l_hi[0];
            let r_in = &self.r[s];
            for base in (0..l_in.len()).step_by(2 * h) {
                for j in base..base + h {
                    let (top, bottom) = K::left(l_in[j], l_in[j + h], r_in[j], r_in[j + h]);
                    l_out[j] = top;
                    l_out[j + h] = bottom;
                }
            }
        }
    }

    fn sweep_right_with<K: Butterfly>(&mut self) {
        for s in 0..self.log_n {
            let h = 1usize << s;
            let (r_lo, r_hi) = self.r.split_at_mut(s + 1);
            let r_in = &r_lo[s];
            let r_out = &mut r_hi[0];
            let l_in = &self.l[s + 1];
            for base in (0..l_in.len()).step_by(2 * h) {
                for j in base..base + h {
                    let (top, bottom) = K::right(l_in[j], l_in[j + h], r_in[j], r_in[j + h]);
                    r_out[j] = top;
                    r_out[j + h] = bottom;
                }
            }
        }
    }

    /// One flooding iteration: full L-sweep, then full R-sweep.
    pub fn iterate(&mut self, rule: CheckRule) {
        self.sweep_left(rule);
        self.sweep_right(rule);
    }

    fn hard_decision(&self, stage: usize) -> Vec<u8> {
        self.l[stage]
            .iter()
            .zip(&self.r[stage])
            .map(|(l, r)| u8::from(l + r < 0.0))
            .collect()
    }

    /// Hard decision on `u`: sign of L + R at stage 0, ties decide 0.
    pub fn hard_u(&self) -> Vec<u8> {
        self.hard_decision(0)
    }

    /// Hard decision on `x`: sign of L + R at the rightmost stage, ties decide 0.
    pub fn hard_x(&self) -> Vec<u8> {
        self.hard_decision(self.log_n)
    }
}

/// One BP iteration on `grid`; see [`MessageGrid::iterate`].
pub fn bp_iterate(grid: &mut MessageGrid, rule: CheckRule) {
    grid.iterate(rule);
}

/// G-matrix early-stopping criterion: `u_hat G_N == x_hat`.
pub fn g_matrix_check(u_hat: &[u8], x_hat: &[u8]) -> bool {
    if u_hat.len() != x_hat.len() {
        return false;
    }
    let mut x = u_hat.to_vec();
    if polar_transform_in_place(&mut x).is_err() {
        return false;
    }
    x == x_hat
}

/// Iteration limit, stopping and check-node choices for BP decoding.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BpOptions {
    pub max_iterations: usize,
    pub early_stop: bool,
    pub rule: CheckRule,
}

impl Default for BpOptions {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            early_stop: true,
            rule: CheckRule::BoxPlus,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecodeOutcome {
    pub u_hat: Vec<u8>,
    pub x_hat: Vec<u8>,
    pub iterations_used: usize,
    /// Whether `u_hat` and `x_hat` passed the G-matrix check after the last iteration.
    pub converged: bool,
}

/// BP decoding of a single polar code from channel LLRs.
///
/// Decoding failure shows up as `converged == false` and/or wrong bits.
pub fn bp_decode(llr_ch: &[f64], config: &CodeConfig, opts: &BpOptions) -> DecodeOutcome {
    let mut grid = MessageGrid::for_code(llr_ch, config);
    let max_iterations = opts.max_iterations.max(1);
    let mut iterations_used = 0;
    let mut converged = false;
    while iterations_used < max_iterations {
        grid.iterate(opts.rule);
        iterations_used += 1;
        if opts.early_stop || iterations_used == max_iterations {
            converged = g_matrix_check(&grid.hard_u(), &grid.hard_x());
            if opts.early_stop && converged {
                break;
            }
        }
    }
    DecodeOutcome {
        u_hat: grid.hard_u(),
        x_hat: grid.hard_x(),
        iterations_used,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polar::{partition_channels, polar_transform, reliability_from_z0};

    #[test]
    fn exp_domain_kernel_matches_reference() {
        let grid: Vec<f64> = (-80..=80).map(|k| k as f64 * 0.5).collect();
        for &a in &grid {
            for &b in &grid {
                let fast = box_plus_exp(a.exp(), b.exp());
                assert!((fast - box_plus(a, b)).abs() < 1e-9, "{a} {b}: {fast} vs {}", box_plus(a, b));
            }
        }
        let (l, r) = (ExpDomainBoxPlus::left(1.5, -2.0, 0.3, 0.7), ExpDomainBoxPlus::right(1.5, -2.0, 0.3, 0.7));
        assert!((l.0 - box_plus(1.5, -1.3)).abs() < 1e-12);
        assert!((l.1 - (box_plus(0.3, 1.5) - 2.0)).abs() < 1e-12);
        assert!((r.0 - box_plus(0.3, -1.3)).abs() < 1e-12);
        assert!((r.1 - (box_plus(0.3, 1.5) + 0.7)).abs() < 1e-12);
    }

    #[test]
    fn box_plus_values() {
        // reference values from direct evaluation of ln((1+e^{a+b})/(e^a+e^b))
        assert!((box_plus(2.0, 2.0) - 1.3250027473578645).abs() < 1e-12);
        assert!((box_plus(1.0, 2.0) - 0.7353256640555194).abs() < 1e-12);
        assert!((box_plus(3.0, -1.5) - -1.3096344668658413).abs() < 1e-12);
        assert!((box_plus(5.0, LLR_MAX) - 5.0).abs() < 1e-12);
        for a in [-40.0, -3.0, 0.0, 0.7, 12.0] {
            assert_eq!(box_plus(a, 0.0), 0.0);
        }
    }

    #[test]
    fn min_sum_values() {
        assert_eq!(min_sum(2.0, -3.0), -2.0);
        assert_eq!(min_sum(-2.0, -0.5), 0.5);
    }

    #[test]
    fn single_butterfly() {
        let cfg = CodeConfig::from_sets(2, &[0, 1], &[]).unwrap();
        let mut grid = MessageGrid::for_code(&[1.0, 2.0], &cfg);
        grid.sweep_left(CheckRule::BoxPlus);
        assert!((grid.l(0)[0] - 0.7353256640555194).abs() < 1e-12);
        assert!((grid.l(0)[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn zero_is_a_fixed_point() {
        let cfg = CodeConfig::from_sets(8, &(0..8).collect::<Vec<_>>(), &[]).unwrap();
        let mut grid = MessageGrid::for_code(&[0.0; 8], &cfg);
        let start = grid.clone();
        for _ in 0..5 {
            grid.iterate(CheckRule::BoxPlus);
        }
        assert_eq!(grid, start);
    }

    #[test]
    fn noiseless_n4_one_iteration() {
        let cfg = partition_channels(&reliability_from_z0(4, 0.5).unwrap(), 2, 0).unwrap();
        let u = vec![0, 0, 1, 1];
        let x = polar_transform(&u).unwrap();
        let llr: Vec<f64> = x.iter().map(|&b| if b == 0 { LLR_MAX } else { -LLR_MAX }).collect();
        let mut grid = MessageGrid::for_code(&llr, &cfg);
        grid.iterate(CheckRule::BoxPlus);
        assert_eq!(grid.hard_u(), u);
        assert_eq!(grid.hard_x(), x);
    }

    #[test]
    fn g_matrix_examples() {
        assert!(g_matrix_check(&[0; 4], &[0; 4]));
        assert!(g_matrix_check(&[0, 0, 1, 0], &[1, 0, 1, 0]));
        assert!(!g_matrix_check(&[0, 0, 1, 0], &[1, 0, 1, 1]));
        assert!(!g_matrix_check(&[0, 0, 1], &[1, 0, 1]));
    }

    #[test]
    fn iteration_bound_without_early_stop() {
        let cfg = partition_channels(&reliability_from_z0(8, 0.5).unwrap(), 4, 0).unwrap();
        let opts = BpOptions {
            max_iterations: 1,
            early_stop: false,
            rule: CheckRule::BoxPlus,
        };
        let out = bp_decode(&[1.0; 8], &cfg, &opts);
        assert_eq!(out.iterations_used, 1);
        let opts = BpOptions {
            max_iterations: 7,
            ..opts
        };
        assert_eq!(bp_decode(&[1.0; 8], &cfg, &opts).iterations_used, 7);
    }

    #[test]
    fn frozen_prior_and_channel_are_never_overwritten() {
        let cfg = partition_channels(&reliability_from_z0(16, 0.6).unwrap(), 8, 0).unwrap();
        let llr: Vec<f64> = (0..16).map(|i| (i as f64 - 7.5) * 0.9).collect();
        let mut grid = MessageGrid::for_code(&llr, &cfg);
        let right = grid.l(4).to_vec();
        let left = grid.r(0).to_vec();
        for _ in 0..10 {
            grid.iterate(CheckRule::BoxPlus);
        }
        assert_eq!(grid.l(4), right.as_slice());
        assert_eq!(grid.r(0), left.as_slice());
        for &i in cfg.frozen_set() {
            assert_eq!(grid.r(0)[i], LLR_MAX);
        }
    }
}
