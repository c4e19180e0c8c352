//! Counter-based lattice weights.
//!
//! A weight `a_n` is a pure function of `(seed, distribution, n)`: the seed is
//! hashed with SHA-256 into a ChaCha12 key, the row index `n2` selects the
//! ChaCha stream and the column index `n1` selects a position in that stream.
//! Any window of the infinite lattice can therefore be generated on its own,
//! in any order, with bit-identical results.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::OnceLock;

use rand_chacha::ChaCha12Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::geom::Point2;

/// Weight distribution. Both have mean 0, variance 1 and `|a| <= √3`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Distribution {
    /// `±1` with equal probability.
    Rademacher,
    /// Uniform on `[-√3, √3]`.
    UniformSym,
}

impl Distribution {
    pub fn name(self) -> &'static str {
        match self {
            Distribution::Rademacher => "rademacher",
            Distribution::UniformSym => "uniform_sym",
        }
    }

    /// Largest possible `|a_n|`.
    pub fn bound(self) -> f64 {
        match self {
            Distribution::Rademacher => 1.0,
            Distribution::UniformSym => 3f64.sqrt(),
        }
    }

    /// Number of weights drawn from one 64-word ChaCha window.
    fn per_block(self) -> i64 {
        match self {
            Distribution::Rademacher => 64 * 32,
            Distribution::UniformSym => 32,
        }
    }
}

impl std::str::FromStr for Distribution {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "rademacher" => Ok(Distribution::Rademacher),
            "uniform_sym" | "uniform" => Ok(Distribution::UniformSym),
            other => Err(format!("unknown distribution '{other}'")),
        }
    }
}

/// Anything that can hand out lattice weights row segment by row segment.
pub trait WeightSource: Sync {
    /// Writes `a_(n1_start + j, n2)` into `out[j]`.
    fn fill_row(&self, n2: i64, n1_start: i64, out: &mut [f64]);

    fn weight(&self, n1: i64, n2: i64) -> f64 {
        let mut out = [0.0];
        self.fill_row(n2, n1, &mut out);
        out[0]
    }
}

const WORDS_PER_BLOCK: usize = 64;
const BLOCK_OFFSET: i64 = 1 << 61;

/// Deterministic i.i.d. weights on the integer lattice.
#[derive(Clone)]
pub struct WeightLattice {
    seed: u64,
    distribution: Distribution,
    prototype: ChaCha12Rng,
}

impl fmt::Debug for WeightLattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WeightLattice")
            .field("seed", &self.seed)
            .field("distribution", &self.distribution)
            .finish()
    }
}

impl PartialEq for WeightLattice {
    fn eq(&self, other: &Self) -> bool {
        self.seed == other.seed && self.distribution == other.distribution
    }
}

impl WeightLattice {
    pub fn new(seed: u64, distribution: Distribution) -> Self {
        let mut hasher = Sha256::new();
        hasher.update(b"randvort/lattice-weights/v1");
        hasher.update(distribution.name().as_bytes());
        hasher.update(seed.to_le_bytes());
        let key: [u8; 32] = hasher.finalize().into();
        Self { seed, distribution, prototype: ChaCha12Rng::from_seed(key) }
    }

    pub fn rademacher(seed: u64) -> Self {
        Self::new(seed, Distribution::Rademacher)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn distribution(&self) -> Distribution {
        self.distribution
    }

    fn block(&self, n2: i64, block: i64) -> [u32; WORDS_PER_BLOCK] {
        let mut rng = self.prototype.clone();
        rng.set_stream(n2 as u64);
        let pos = (block + BLOCK_OFFSET) as u64 as u128;
        rng.set_word_pos(pos * WORDS_PER_BLOCK as u128);
        let mut words = [0u32; WORDS_PER_BLOCK];
        for w in words.iter_mut() {
            *w = rng.next_u32();
        }
        words
    }

    /// The weight on the cell containing `x`.
    pub fn vorticity(&self, x: Point2) -> f64 {
        let (n1, n2) = x.cell();
        self.weight(n1, n2)
    }
}

fn sign_bit(words: &[u32; WORDS_PER_BLOCK], idx: usize) -> f64 {
    if (words[idx >> 5] >> (idx & 31)) & 1 == 1 {
        1.0
    } else {
        -1.0
    }
}

/// Signs for each byte value, least significant bit first.
fn sign_table() -> &'static [[f64; 8]; 256] {
    static TABLE: OnceLock<Box<[[f64; 8]; 256]>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = Box::new([[0.0; 8]; 256]);
        for (byte, row) in t.iter_mut().enumerate() {
            for (b, v) in row.iter_mut().enumerate() {
                *v = if (byte >> b) & 1 == 1 { 1.0 } else { -1.0 };
            }
        }
        t
    })
}

/// Bit `first + k` of the block becomes `dst[k]`: set -> +1, clear -> -1.
fn decode_signs(words: &[u32; WORDS_PER_BLOCK], first: usize, dst: &mut [f64]) {
    let table = sign_table();
    let mut k = 0;
    while k < dst.len() && (first + k) % 8 != 0 {
        dst[k] = sign_bit(words, first + k);
        k += 1;
    }
    while k + 8 <= dst.len() {
        let idx = first + k;
        let byte = (words[idx >> 5] >> (idx & 31)) as u8;
        dst[k..k + 8].copy_from_slice(&table[byte as usize]);
        k += 8;
    }
    while k < dst.len() {
        dst[k] = sign_bit(words, first + k);
        k += 1;
    }
}

fn decode_uniform(words: &[u32; WORDS_PER_BLOCK], idx: usize) -> f64 {
    let bits = (words[2 * idx] as u64) | ((words[2 * idx + 1] as u64) << 32);
    let unit = (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    3f64.sqrt() * (2.0 * unit - 1.0)
}

impl WeightSource for WeightLattice {
    fn fill_row(&self, n2: i64, n1_start: i64, out: &mut [f64]) {
        let per = self.distribution.per_block();
        let mut j = 0usize;
        while j < out.len() {
            let n1 = n1_start + j as i64;
            let block = n1.div_euclid(per);
            let first = n1.rem_euclid(per) as usize;
            let words = self.block(n2, block);
            let take = (per as usize - first).min(out.len() - j);
            let dst = &mut out[j..j + take];
            match self.distribution {
                Distribution::Rademacher => decode_signs(&words, first, dst),
                Distribution::UniformSym => {
                    for (k, o) in dst.iter_mut().enumerate() {
                        *o = decode_uniform(&words, first + k);
                    }
                }
            }
            j += take;
        }
    }
}

/// Weights forced to given values on finitely many sites and zero elsewhere.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ForcedWeights {
    sites: BTreeMap<(i64, i64), f64>,
}

impl ForcedWeights {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, n1: i64, n2: i64, a: f64) -> Self {
        self.sites.insert((n1, n2), a);
        self
    }

    pub fn set(&mut self, n1: i64, n2: i64, a: f64) {
        self.sites.insert((n1, n2), a);
    }
}

impl WeightSource for ForcedWeights {
    fn fill_row(&self, n2: i64, n1_start: i64, out: &mut [f64]) {
        out.fill(0.0);
        let end = n1_start + out.len() as i64;
        for (&(n1, _), &a) in self.sites.range((n1_start, n2)..(end, n2)).filter(|(k, _)| k.1 == n2) {
            out[(n1 - n1_start) as usize] = a;
        }
    }
}

/// Weights `a_n` of the lattice at the site `n`.
pub fn weight(lattice: &WeightLattice, n1: i64, n2: i64) -> f64 {
    lattice.weight(n1, n2)
}

/// `ω0(x) = a_⌊x⌋`.
pub fn vorticity(lattice: &WeightLattice, x: Point2) -> f64 {
    lattice.vorticity(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pure_and_bit_exact() {
        let l = WeightLattice::rademacher(42);
        let a = l.weight(-17, 3);
        let b = WeightLattice::rademacher(42).weight(-17, 3);
        assert_eq!(a.to_bits(), b.to_bits());
        assert!(a == 1.0 || a == -1.0);
    }

    #[test]
    fn windows_agree_on_overlap() {
        for dist in [Distribution::Rademacher, Distribution::UniformSym] {
            let l = WeightLattice::new(7, dist);
            let mut a = vec![0.0; 5000];
            let mut b = vec![0.0; 3000];
            l.fill_row(-4, -2500, &mut a);
            l.fill_row(-4, -1000, &mut b);
            for j in 0..3000 {
                assert_eq!(a[1500 + j].to_bits(), b[j].to_bits());
            }
            for j in [0usize, 77, 2499, 4999] {
                assert_eq!(a[j].to_bits(), l.weight(-2500 + j as i64, -4).to_bits());
            }
        }
    }

    #[test]
    fn seeds_and_rows_differ() {
        let mut a = vec![0.0; 256];
        let mut b = vec![0.0; 256];
        WeightLattice::rademacher(1).fill_row(0, 0, &mut a);
        WeightLattice::rademacher(2).fill_row(0, 0, &mut b);
        assert_ne!(a, b);
        WeightLattice::rademacher(1).fill_row(1, 0, &mut b);
        assert_ne!(a, b);
    }

    #[test]
    fn uniform_is_bounded() {
        let l = WeightLattice::new(3, Distribution::UniformSym);
        let mut a = vec![0.0; 10_000];
        l.fill_row(5, -5000, &mut a);
        assert!(a.iter().all(|x| x.abs() <= 3f64.sqrt()));
    }

    #[test]
    fn vorticity_uses_floor() {
        let l = WeightLattice::rademacher(9);
        assert_eq!(l.vorticity(Point2::new(0.5, 0.5)), l.weight(0, 0));
        assert_eq!(l.vorticity(Point2::new(-0.5, 2.3)), l.weight(-1, 2));
    }

    #[test]
    fn forced_weights() {
        let f = ForcedWeights::new().with(0, 0, 1.0).with(3, -2, -0.5);
        assert_eq!(f.weight(0, 0), 1.0);
        assert_eq!(f.weight(3, -2), -0.5);
        assert_eq!(f.weight(3, 0), 0.0);
        let mut row = vec![9.0; 6];
        f.fill_row(-2, 0, &mut row);
        assert_eq!(row, vec![0.0, 0.0, 0.0, -0.5, 0.0, 0.0]);
    }

    #[test]
    fn distribution_parse() {
        assert_eq!("rademacher".parse::<Distribution>().unwrap(), Distribution::Rademacher);
        assert_eq!("uniform_sym".parse::<Distribution>().unwrap(), Distribution::UniformSym);
        assert!("gaussian".parse::<Distribution>().is_err());
    }
}
