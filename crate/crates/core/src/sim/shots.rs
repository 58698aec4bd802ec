use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

/// Deterministic random stream keyed by `(master seed, stream id)`.
#[derive(Debug, Clone)]
pub struct RngStream {
    master: u64,
    stream: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(master: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(master);
        rng.set_stream(stream);
        RngStream {
            master,
            stream,
            rng,
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master
    }

    pub fn stream_id(&self) -> u64 {
        self.stream
    }

    /// An independent stream derived from this one's key.
    pub fn substream(&self, salt: u64) -> RngStream {
        let mixed = self
            .stream
            .wrapping_mul(0x9E37_79B9_7F4A_7C15)
            .rotate_left(17)
            ^ salt.wrapping_mul(0xD1B5_4A32_D192_ED03);
        RngStream::new(self.master ^ 0xA076_1D64_78BD_642F, mixed)
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// Outcome counts from `total` shots.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotRecord {
    pub counts: Vec<u64>,
    pub total: u64,
    pub master_seed: u64,
    pub stream_id: u64,
}

impl ShotRecord {
    pub fn frequencies(&self) -> Vec<f64> {
        if self.total == 0 {
            return vec![0.0; self.counts.len()];
        }
        self.counts
            .iter()
            .map(|&c| c as f64 / self.total as f64)
            .collect()
    }
}

/// Multinomial draw by sequential conditional binomials.
pub fn multinomial<R: Rng + ?Sized>(p: &[f64], shots: u64, rng: &mut R) -> Vec<u64> {
    let mut counts = vec![0u64; p.len()];
    let mut left = shots;
    let mut mass: f64 = p.iter().map(|v| v.max(0.0)).sum();
    for (k, &pk) in p.iter().enumerate() {
        if left == 0 {
            break;
        }
        let pk = pk.max(0.0);
        if k + 1 == p.len() || mass <= pk {
            counts[k] = left;
            break;
        }
        let q = (pk / mass).clamp(0.0, 1.0);
        let c = if q == 0.0 {
            0
        } else {
            Binomial::new(left, q).expect("valid binomial").sample(rng)
        };
        counts[k] = c;
        left -= c;
        mass -= pk;
    }
    counts
}

pub fn sample_shots(p: &[f64], shots: u64, stream: &mut RngStream) -> ShotRecord {
    ShotRecord {
        counts: multinomial(p, shots, stream),
        total: shots,
        master_seed: stream.master_seed(),
        stream_id: stream.stream_id(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_shots() {
        let mut s = RngStream::new(1, 0);
        let r = sample_shots(&[0.5, 0.5], 0, &mut s);
        assert_eq!(r.counts, vec![0, 0]);
    }

    #[test]
    fn point_mass() {
        let mut s = RngStream::new(1, 0);
        let r = sample_shots(&[1.0, 0.0, 0.0, 0.0], 100, &mut s);
        assert_eq!(r.counts, vec![100, 0, 0, 0]);
    }

    #[test]
    fn streams_are_deterministic_and_distinct() {
        let p = [0.1, 0.2, 0.3, 0.4];
        let a = sample_shots(&p, 1000, &mut RngStream::new(7, 3));
        let b = sample_shots(&p, 1000, &mut RngStream::new(7, 3));
        let c = sample_shots(&p, 1000, &mut RngStream::new(7, 4));
        assert_eq!(a, b);
        assert_ne!(a.counts, c.counts);
        assert_eq!(a.counts.iter().sum::<u64>(), 1000);
    }

    #[test]
    fn frequencies_concentrate() {
        let p = [0.09, 0.81, 0.01, 0.09];
        let n = 1_000_000u64;
        let mut ok = 0;
        for seed in 0..100 {
            let r = sample_shots(&p, n, &mut RngStream::new(seed, 0));
            let f = r.frequencies();
            let inside = p
                .iter()
                .zip(&f)
                .all(|(pk, fk)| (pk - fk).abs() <= 3.0 * (pk * (1.0 - pk) / n as f64).sqrt());
            ok += inside as usize;
        }
        assert!(ok >= 95, "{ok}/100 seeds inside the 3-sigma band");
    }
}
