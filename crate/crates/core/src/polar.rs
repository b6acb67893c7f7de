//! Polar transform, Bhattacharyya construction and bit-channel classification.
//!
//! The generator matrix is `G_N = F^{⊗n}` with `F = [[1, 0], [1, 1]]`, in natural
//! order (no bit-reversal). All indices in this crate are 0-based; index `i`
//! here is bit-channel `i + 1` in the usual 1-based notation.

use crate::error::{Error, Result};

/// Role of a single bit-channel within a code.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ChannelKind {
    /// Reliable channel carrying a payload bit.
    Info,
    /// Intermediate-reliability channel, fed by an outer codeword when coupled.
    Semi,
    /// Unreliable channel fixed to zero.
    Frozen,
}

/// One polar code of length `N = 2^n`, with its bit-channel partition.
///
/// `info_set`, `semi_set` and `frozen_set` are sorted ascending, disjoint and
/// together cover `0..N`.
#[derive(Clone, Debug, PartialEq)]
pub struct CodeConfig {
    n_bits: usize,
    log_n: u32,
    info_set: Vec<usize>,
    semi_set: Vec<usize>,
    frozen_set: Vec<usize>,
    reliability: Vec<f64>,
    kinds: Vec<ChannelKind>,
}

impl CodeConfig {
    /// Builds a configuration from explicit (0-based) info and semipolarized sets.
    ///
    /// Everything else is frozen. The stored reliability is a class indicator
    /// (0 for info, 0.5 for semi, 1 for frozen) so the ordering invariant holds.
    pub fn from_sets(n_bits: usize, info: &[usize], semi: &[usize]) -> Result<Self> {
        let log_n = check_code_length(n_bits)?;
        let mut kinds = vec![ChannelKind::Frozen; n_bits];
        for (set, kind) in [(info, ChannelKind::Info), (semi, ChannelKind::Semi)] {
            for &i in set {
                if i >= n_bits || kinds[i] != ChannelKind::Frozen {
                    return Err(Error::InvalidPartition {
                        good: info.len(),
                        semi: semi.len(),
                        len: n_bits,
                    });
                }
                kinds[i] = kind;
            }
        }
        let reliability = kinds
            .iter()
            .map(|k| match k {
                ChannelKind::Info => 0.0,
                ChannelKind::Semi => 0.5,
                ChannelKind::Frozen => 1.0,
            })
            .collect();
        Ok(Self::from_kinds(log_n, kinds, reliability))
    }

    fn from_kinds(log_n: u32, kinds: Vec<ChannelKind>, reliability: Vec<f64>) -> Self {
        let collect = |want: ChannelKind| -> Vec<usize> {
            kinds
                .iter()
                .enumerate()
                .filter(|(_, &k)| k == want)
                .map(|(i, _)| i)
                .collect()
        };
        Self {
            n_bits: kinds.len(),
            log_n,
            info_set: collect(ChannelKind::Info),
            semi_set: collect(ChannelKind::Semi),
            frozen_set: collect(ChannelKind::Frozen),
            reliability,
            kinds,
        }
    }

    /// Code length `N`.
    pub fn len(&self) -> usize {
        self.n_bits
    }

    pub fn is_empty(&self) -> bool {
        self.n_bits == 0
    }

    /// `n = log2(N)`, the number of butterfly stages.
    pub fn log_len(&self) -> u32 {
        self.log_n
    }

    pub fn info_set(&self) -> &[usize] {
        &self.info_set
    }

    pub fn semi_set(&self) -> &[usize] {
        &self.semi_set
    }

    pub fn frozen_set(&self) -> &[usize] {
        &self.frozen_set
    }

    /// Bhattacharyya parameter of every bit-channel, in index order.
    pub fn reliability(&self) -> &[f64] {
        &self.reliability
    }

    pub fn kind(&self, index: usize) -> ChannelKind {
        self.kinds[index]
    }

    pub fn is_frozen(&self, index: usize) -> bool {
        self.kinds[index] == ChannelKind::Frozen
    }

    /// Non-frozen positions (info and semipolarized), ascending.
    pub fn unfrozen_set(&self) -> Vec<usize> {
        (0..self.n_bits).filter(|&i| !self.is_frozen(i)).collect()
    }
}

fn check_code_length(n_bits: usize) -> Result<u32> {
    if n_bits < 2 || !n_bits.is_power_of_two() {
        return Err(Error::InvalidLength(n_bits));
    }
    Ok(n_bits.trailing_zeros())
}

/// Applies `x = u F^{⊗n}` in place over GF(2).
///
/// Butterfly spans grow from 1 (leftmost stage) to `N/2` (rightmost stage).
pub fn polar_transform_in_place(bits: &mut [u8]) -> Result<()> {
    let n = bits.len();
    if !n.is_power_of_two() {
        return Err(Error::InvalidLength(n));
    }
    let mut half = 1;
    while half < n {
        for block in bits.chunks_exact_mut(2 * half) {
            let (top, bottom) = block.split_at_mut(half);
            for (t, b) in top.iter_mut().zip(bottom.iter()) {
                *t ^= *b;
            }
        }
        half *= 2;
    }
    Ok(())
}

/// Returns `u F^{⊗n}` for a bit vector whose length is a power of two.
pub fn polar_transform(u: &[u8]) -> Result<Vec<u8>> {
    let mut x = u.to_vec();
    polar_transform_in_place(&mut x)?;
    Ok(x)
}

/// Bhattacharyya parameter of the BPSK-AWGN channel, `exp(-Es/N0)` with
/// `Es/N0 = rate * 10^(ebno_db / 10)`.
pub fn awgn_bhattacharyya(design_ebno_db: f64, design_rate: f64) -> f64 {
    (-design_rate * 10f64.powf(design_ebno_db / 10.0)).exp()
}

/// Bit-channel Bhattacharyya parameters for length `n_bits` designed at
/// `design_ebno_db` for a code of rate `design_rate`.
pub fn construct_reliability(n_bits: usize, design_ebno_db: f64, design_rate: f64) -> Result<Vec<f64>> {
    reliability_from_z0(n_bits, awgn_bhattacharyya(design_ebno_db, design_rate))
}

/// Runs the recursion `Z -> (2Z - Z², Z²)` `log2(n_bits)` times from `z0`.
///
/// At each level channel `i` spawns `2i` (the degraded, upper-bounded branch)
/// and `2i + 1` (the upgraded branch), which yields natural index order.
pub fn reliability_from_z0(n_bits: usize, z0: f64) -> Result<Vec<f64>> {
    if n_bits == 0 || !n_bits.is_power_of_two() {
        return Err(Error::InvalidLength(n_bits));
    }
    let mut z = vec![z0.clamp(0.0, 1.0)];
    while z.len() < n_bits {
        z = z
            .iter()
            .flat_map(|&zi| [(2.0 * zi - zi * zi).clamp(0.0, 1.0), zi * zi])
            .collect();
    }
    Ok(z)
}

/// Classifies channels by rank: the `n_good` lowest-Z channels carry info,
/// the next `n_semi` are semipolarized, the rest are frozen.
///
/// Ties in Z are broken by ascending index.
pub fn partition_channels(reliability: &[f64], n_good: usize, n_semi: usize) -> Result<CodeConfig> {
    let n_bits = reliability.len();
    let log_n = check_code_length(n_bits)?;
    if n_good + n_semi > n_bits {
        return Err(Error::InvalidPartition {
            good: n_good,
            semi: n_semi,
            len: n_bits,
        });
    }
    let mut order: Vec<usize> = (0..n_bits).collect();
    order.sort_by(|&a, &b| reliability[a].total_cmp(&reliability[b]).then(a.cmp(&b)));

    let mut kinds = vec![ChannelKind::Frozen; n_bits];
    for (rank, &i) in order.iter().enumerate() {
        if rank < n_good {
            kinds[i] = ChannelKind::Info;
        } else if rank < n_good + n_semi {
            kinds[i] = ChannelKind::Semi;
        }
    }
    Ok(CodeConfig::from_kinds(log_n, kinds, reliability.to_vec()))
}

/// Largest length accepted by [`ml_oracle_decode`].
pub const ML_ORACLE_MAX_LEN: usize = 16;

/// Exhaustive maximum-likelihood decoding over all `u` with `u_F = 0`.
///
/// Maximizes the correlation `Σ llr_k (1 - 2 x_k)`. Candidates are visited in
/// lexicographic order of `u` and only a strictly better metric replaces the
/// incumbent, so a total tie returns the lexicographically smallest `u`.
/// Intended as a test oracle for small codes.
pub fn ml_oracle_decode(llr: &[f64], config: &CodeConfig) -> Result<Vec<u8>> {
    let n = config.len();
    if n > ML_ORACLE_MAX_LEN {
        return Err(Error::OracleScale {
            max: ML_ORACLE_MAX_LEN,
            got: n,
        });
    }
    if llr.len() != n {
        return Err(Error::InvalidMessageLength {
            expected: n,
            got: llr.len(),
        });
    }
    let free = config.unfrozen_set();
    let mut best_u = vec![0u8; n];
    let mut best_metric = f64::NEG_INFINITY;
    for pattern in 0u32..(1u32 << free.len()) {
        let mut u = vec![0u8; n];
        // first free position is the most significant bit of the counter
        for (rank, &pos) in free.iter().enumerate() {
            u[pos] = ((pattern >> (free.len() - 1 - rank)) & 1) as u8;
        }
        let x = polar_transform(&u)?;
        let metric: f64 = x
            .iter()
            .zip(llr)
            .map(|(&b, &l)| if b == 0 { l } else { -l })
            .sum();
        if metric > best_metric {
            best_metric = metric;
            best_u = u;
        }
    }
    Ok(best_u)
}
