//! Sums of a scalar function over the integer lattice.
//!
//! Direct summation is used near a short list of singular centers; elsewhere
//! boxes are summed with a tensor product of 8-point discrete Gauss rules once
//! they are well separated from every center. The whole-lattice mode covers
//! `[-2^40, 2^40)^2`, far beyond where any decaying summand used here matters.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::geom::{KahanSum, Point2};
use crate::quadrature::{discrete_gauss, Rule};

/// Which lattice points a sum runs over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LatticeRange {
    /// `|n| <= M`, summed term by term.
    Disk(u32),
    /// `max(|n1|, |n2|) <= M`.
    Square(u32),
    /// All of the lattice.
    Whole,
}

impl LatticeRange {
    pub fn label(&self) -> String {
        match self {
            LatticeRange::Disk(m) => format!("disk:{m}"),
            LatticeRange::Square(m) => format!("square:{m}"),
            LatticeRange::Whole => "whole".to_string(),
        }
    }
}

impl std::str::FromStr for LatticeRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("whole") {
            return Ok(LatticeRange::Whole);
        }
        let (kind, m) = s.split_once(':').unwrap_or(("disk", s));
        let m: u32 = m.trim().parse().map_err(|_| format!("bad lattice range '{s}'"))?;
        match kind.trim() {
            "disk" => Ok(LatticeRange::Disk(m)),
            "square" => Ok(LatticeRange::Square(m)),
            _ => Err(format!("bad lattice range '{s}'")),
        }
    }
}

const RULE_POINTS: usize = 8;
const SEPARATION: f64 = 2.0;
const DIRECT_SIDE: u64 = 8;
const ROOT_HALF: i64 = 1 << 40;

/// Row layout of the disk `|n| <= m`: for each `n2` in `-m..=m`, the
/// half-width `w` such that the row is `-w..=w`.
pub fn disk_rows(m: u32) -> impl Iterator<Item = (i64, i64)> {
    let m = m as i64;
    (-m..=m).map(move |n2| (n2, ((m * m - n2 * n2) as u64).isqrt() as i64))
}

/// Number of lattice points with `|n| <= m`.
pub fn disk_count(m: u32) -> usize {
    disk_rows(m).map(|(_, w)| (2 * w + 1) as usize).sum()
}

#[derive(Debug, Clone, Copy)]
struct Block {
    lo1: i64,
    lo2: i64,
    len1: u64,
    len2: u64,
}

impl Block {
    fn center(&self) -> Point2 {
        Point2::new(
            self.lo1 as f64 + 0.5 * (self.len1 as f64 - 1.0),
            self.lo2 as f64 + 0.5 * (self.len2 as f64 - 1.0),
        )
    }

    fn side(&self) -> f64 {
        self.len1.max(self.len2) as f64
    }

    fn split(&self) -> Vec<Block> {
        let h1 = self.len1 / 2;
        let h2 = self.len2 / 2;
        let parts1: Vec<(i64, u64)> = if h1 == 0 {
            vec![(self.lo1, self.len1)]
        } else {
            vec![(self.lo1, h1), (self.lo1 + h1 as i64, self.len1 - h1)]
        };
        let parts2: Vec<(i64, u64)> = if h2 == 0 {
            vec![(self.lo2, self.len2)]
        } else {
            vec![(self.lo2, h2), (self.lo2 + h2 as i64, self.len2 - h2)]
        };
        let mut out = Vec::with_capacity(4);
        for &(lo2, len2) in &parts2 {
            for &(lo1, len1) in &parts1 {
                out.push(Block { lo1, lo2, len1, len2 });
            }
        }
        out
    }
}

struct Engine<'a, F> {
    f: &'a F,
    centers: &'a [Point2],
    pad: f64,
    rules: HashMap<u64, Rule>,
    acc: KahanSum,
}

impl<F: Fn(Point2) -> f64> Engine<'_, F> {
    fn rule(&mut self, len: u64) -> Rule {
        self.rules.entry(len).or_insert_with(|| discrete_gauss(RULE_POINTS, len)).clone()
    }

    fn separated(&self, b: &Block) -> bool {
        let c = b.center();
        let need = SEPARATION * b.side() + self.pad;
        self.centers.iter().all(|s| c.dist(*s) >= need)
    }

    fn visit(&mut self, b: Block) {
        if self.separated(&b) {
            let r1 = self.rule(b.len1);
            let r2 = self.rule(b.len2);
            let mut s = 0.0;
            for (t2, w2) in r2.nodes.iter().zip(&r2.weights) {
                let mut row = 0.0;
                for (t1, w1) in r1.nodes.iter().zip(&r1.weights) {
                    row += w1 * (self.f)(Point2::new(b.lo1 as f64 + t1, b.lo2 as f64 + t2));
                }
                s += w2 * row;
            }
            self.acc.add(s);
        } else if b.len1 <= DIRECT_SIDE && b.len2 <= DIRECT_SIDE {
            for j in 0..b.len2 as i64 {
                for i in 0..b.len1 as i64 {
                    self.acc.add((self.f)(Point2::lattice(b.lo1 + i, b.lo2 + j)));
                }
            }
        } else {
            for child in b.split() {
                self.visit(child);
            }
        }
    }
}

/// `Σ_n f(n)` over `range`.
///
/// `f` must be smooth (analytic) away from the discs of radius `pad` around
/// `centers` and decay fast enough for the whole-lattice sum to converge.
pub fn lattice_sum<F: Fn(Point2) -> f64>(
    f: &F,
    centers: &[Point2],
    pad: f64,
    range: LatticeRange,
) -> f64 {
    match range {
        LatticeRange::Disk(m) => {
            let mut acc = KahanSum::new();
            for (n2, w) in disk_rows(m) {
                for n1 in -w..=w {
                    acc.add(f(Point2::lattice(n1, n2)));
                }
            }
            acc.value()
        }
        LatticeRange::Square(m) => {
            let m = m as i64;
            let len = (2 * m + 1) as u64;
            run(f, centers, pad, Block { lo1: -m, lo2: -m, len1: len, len2: len })
        }
        LatticeRange::Whole => {
            let len = 2 * ROOT_HALF as u64;
            run(f, centers, pad, Block { lo1: -ROOT_HALF, lo2: -ROOT_HALF, len1: len, len2: len })
        }
    }
}

fn run<F: Fn(Point2) -> f64>(f: &F, centers: &[Point2], pad: f64, root: Block) -> f64 {
    let mut e = Engine { f, centers, pad, rules: HashMap::new(), acc: KahanSum::new() };
    e.visit(root);
    e.acc.value()
}
