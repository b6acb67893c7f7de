//! Systematic polar encoding.
//!
//! Solves `x = u G_N` subject to `u_F = 0` and `x_A = v`. Because `G_N` is lower
//! triangular with a unit diagonal the solution always exists and is unique.
//! The solver walks the encoding graph recursively: with
//! `G_N = [[G, 0], [G, G]]` the lower half is a standalone half-length problem,
//! after which the upper half becomes a half-length problem on `u_top ⊕ u_bottom`.

use crate::error::{Error, Result};
use crate::polar::{ChannelKind, CodeConfig};

/// A systematic codeword together with its transform-domain input.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SystematicCodeword {
    /// Transform-domain word, zero on the frozen set.
    pub u: Vec<u8>,
    /// Channel word `u G_N`; equals the message on the info set.
    pub x: Vec<u8>,
}

/// Encodes `v` so that it appears verbatim at `config.info_set()` in `x`.
pub fn systematic_encode(v: &[u8], config: &CodeConfig) -> Result<SystematicCodeword> {
    let info = config.info_set();
    if v.len() != info.len() {
        return Err(Error::InvalidMessageLength {
            expected: info.len(),
            got: v.len(),
        });
    }
    let n = config.len();
    let systematic: Vec<bool> = (0..n).map(|i| config.kind(i) == ChannelKind::Info).collect();
    // x-values on systematic positions, u-values (zero) elsewhere
    let mut known = vec![0u8; n];
    for (&pos, &bit) in info.iter().zip(v) {
        known[pos] = bit & 1;
    }
    let mut u = vec![0u8; n];
    let mut x = vec![0u8; n];
    solve(&systematic, &mut known, &mut u, &mut x);
    Ok(SystematicCodeword { u, x })
}

fn solve(systematic: &[bool], known: &mut [u8], u: &mut [u8], x: &mut [u8]) {
    let n = systematic.len();
    if n == 1 {
        u[0] = known[0];
        x[0] = known[0];
        return;
    }
    let h = n / 2;
    let (sys_top, sys_bottom) = systematic.split_at(h);
    let (known_top, known_bottom) = known.split_at_mut(h);
    let (u_top, u_bottom) = u.split_at_mut(h);
    let (x_top, x_bottom) = x.split_at_mut(h);

    solve(sys_bottom, known_bottom, u_bottom, x_bottom);

    // top half sees a = u_top ⊕ u_bottom through G_{N/2}
    for j in 0..h {
        if !sys_top[j] {
            known_top[j] ^= u_bottom[j];
        }
    }
    solve(sys_top, known_top, u_top, x_top);
    for j in 0..h {
        u_top[j] ^= u_bottom[j];
    }
}

/// Reads the message back from a (decoded) codeword: `x_hat` at the info set.
pub fn systematic_extract(x_hat: &[u8], config: &CodeConfig) -> Vec<u8> {
    config.info_set().iter().map(|&i| x_hat[i]).collect()
}
