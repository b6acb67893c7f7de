//! BPSK over AWGN.

use rand::Rng;
use rand_distr::StandardNormal;

/// Noise variance per real dimension for unit-energy BPSK at `Eb/N0 = ebno_db`
/// and code rate `rate`: `σ² = 1 / (2 · rate · 10^(ebno_db/10))`.
pub fn noise_variance(ebno_db: f64, rate: f64) -> f64 {
    1.0 / (2.0 * rate * 10f64.powf(ebno_db / 10.0))
}

/// Channel LLR `2y/σ²` of a received BPSK sample.
#[inline]
pub fn llr_from_sample(y: f64, sigma2: f64) -> f64 {
    2.0 * y / sigma2
}

/// Maps bit 0 to +1 and bit 1 to -1, adds Gaussian noise drawn from `rng` and
/// returns the channel LLRs.
pub fn awgn_llr<R: Rng + ?Sized>(bits: &[u8], ebno_db: f64, rate: f64, rng: &mut R) -> Vec<f64> {
    let sigma2 = noise_variance(ebno_db, rate);
    let sigma = sigma2.sqrt();
    bits.iter()
        .map(|&b| {
            let symbol = if b == 0 { 1.0 } else { -1.0 };
            let noise: f64 = rng.sample(StandardNormal);
            llr_from_sample(symbol + sigma * noise, sigma2)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn variance_and_llr() {
        assert!((noise_variance(0.0, 0.5) - 1.0).abs() < 1e-15);
        assert_eq!(llr_from_sample(1.0, 0.5), 4.0);
        assert_eq!(llr_from_sample(-0.25, 1.0), -0.5);
    }

    #[test]
    fn high_snr_signs_follow_bits() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let bits: Vec<u8> = (0..500).map(|i| (i % 3 == 0) as u8).collect();
        let llr = awgn_llr(&bits, 30.0, 0.5, &mut rng);
        for (b, l) in bits.iter().zip(&llr) {
            assert_eq!(*b == 1, *l < 0.0);
        }
    }

    #[test]
    fn empirical_noise_variance() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let sigma2 = noise_variance(1.0, 0.5);
        let llr = awgn_llr(&vec![0u8; 200_000], 1.0, 0.5, &mut rng);
        let ys: Vec<f64> = llr.iter().map(|l| l * sigma2 / 2.0).collect();
        let mean = ys.iter().sum::<f64>() / ys.len() as f64;
        let var = ys.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / ys.len() as f64;
        assert!((mean - 1.0).abs() < 0.01);
        assert!((var / sigma2 - 1.0).abs() < 0.02);
    }
}
