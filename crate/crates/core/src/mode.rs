//! Integer wave vectors and the truncated lattice box that houses them.

use std::fmt;
use std::ops::{Add, Neg, Sub};

use crate::error::{Error, Result};

/// Maximum supported spatial dimension.
pub const MAX_DIM: usize = 3;

/// An integer wave vector `k ∈ ℤᵈ`, `d ≤ 3`.
///
/// Unused trailing components are zero, so the derived `Ord` is the
/// lexicographic order used for every enumeration and reduction.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Mode(pub [i64; MAX_DIM]);

impl Mode {
    pub const ZERO: Mode = Mode([0; MAX_DIM]);

    pub fn new(components: &[i64]) -> Result<Self> {
        if components.is_empty() || components.len() > MAX_DIM {
            return Err(Error::UnsupportedDimension(components.len()));
        }
        let mut k = [0; MAX_DIM];
        k[..components.len()].copy_from_slice(components);
        Ok(Mode(k))
    }

    pub fn d1(a: i64) -> Self {
        Mode([a, 0, 0])
    }

    pub fn d2(a: i64, b: i64) -> Self {
        Mode([a, b, 0])
    }

    pub fn d3(a: i64, b: i64, c: i64) -> Self {
        Mode([a, b, c])
    }

    pub fn components(&self, dim: usize) -> &[i64] {
        &self.0[..dim]
    }

    pub fn is_zero(&self) -> bool {
        self.0 == [0; MAX_DIM]
    }

    pub fn max_norm(&self) -> u64 {
        self.0.iter().map(|c| c.unsigned_abs()).max().unwrap_or(0)
    }

    pub fn norm2(&self) -> i64 {
        self.0.iter().map(|c| c * c).sum()
    }

    pub fn scale(&self, c: i64) -> Mode {
        Mode([self.0[0] * c, self.0[1] * c, self.0[2] * c])
    }

    /// The primitive integer vector with the same direction (`k / gcd(k)`).
    pub fn reduced(&self) -> Mode {
        let g = self.0.iter().fold(0u64, |g, &c| gcd(g, c.unsigned_abs())) as i64;
        if g <= 1 {
            return *self;
        }
        Mode([self.0[0] / g, self.0[1] / g, self.0[2] / g])
    }

    pub fn as_f64(&self) -> [f64; MAX_DIM] {
        [self.0[0] as f64, self.0[1] as f64, self.0[2] as f64]
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl Neg for Mode {
    type Output = Mode;
    fn neg(self) -> Mode {
        Mode([-self.0[0], -self.0[1], -self.0[2]])
    }
}

impl Add for Mode {
    type Output = Mode;
    fn add(self, o: Mode) -> Mode {
        Mode([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl Sub for Mode {
    type Output = Mode;
    fn sub(self, o: Mode) -> Mode {
        Mode([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}

impl fmt::Debug for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.0[0], self.0[1], self.0[2])
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// The box of modes `{k ∈ ℤᵈ : |k|∞ ≤ K}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Lattice {
    dim: usize,
    trunc: usize,
}

impl Lattice {
    pub fn new(dim: usize, trunc: usize) -> Result<Self> {
        if !(1..=MAX_DIM).contains(&dim) {
            return Err(Error::UnsupportedDimension(dim));
        }
        if trunc == 0 {
            return Err(Error::InvalidArgument("lattice truncation must be >= 1".into()));
        }
        Ok(Lattice { dim, trunc })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn trunc(&self) -> usize {
        self.trunc
    }

    pub fn with_trunc(&self, trunc: usize) -> Result<Self> {
        Lattice::new(self.dim, trunc)
    }

    /// Whether `k` lies inside the box and has no components beyond `dim`.
    pub fn contains(&self, k: &Mode) -> bool {
        k.0[self.dim..].iter().all(|&c| c == 0) && k.max_norm() <= self.trunc as u64
    }

    /// All modes of the box in lexicographic order.
    pub fn modes(&self) -> Vec<Mode> {
        box_modes(self.dim, self.trunc as i64)
    }
}

/// Modes with `|k|∞ ≤ radius` in lexicographic order.
pub fn box_modes(dim: usize, radius: i64) -> Vec<Mode> {
    let r = radius;
    let mut out = Vec::new();
    match dim {
        1 => (-r..=r).for_each(|a| out.push(Mode::d1(a))),
        2 => {
            for a in -r..=r {
                for b in -r..=r {
                    out.push(Mode::d2(a, b));
                }
            }
        }
        _ => {
            for a in -r..=r {
                for b in -r..=r {
                    for c in -r..=r {
                        out.push(Mode::d3(a, b, c));
                    }
                }
            }
        }
    }
    out
}
