//! Sparse multivectors in the real Clifford algebra Cl(m) with eᵢ² = +1.
//!
//! Blades are bitmasks over the generators: bit `i` set means `e_i` is a
//! factor, generators ordered by increasing index.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::numkit::Vector;

pub const MAX_DIMENSION: usize = 12;

pub type Blade = u32;

#[derive(Debug, Clone, PartialEq)]
pub struct CliffordElement {
    dim: usize,
    coeffs: BTreeMap<Blade, f64>,
}

/// Sign of `e_A · e_B` relative to `e_{A xor B}`, by counting transpositions.
fn reorder_sign(a: Blade, b: Blade) -> f64 {
    let mut a = a >> 1;
    let mut swaps = 0u32;
    while a != 0 {
        swaps += (a & b).count_ones();
        a >>= 1;
    }
    if swaps.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

impl CliffordElement {
    pub fn zero(dim: usize) -> Self {
        assert!(
            dim <= MAX_DIMENSION,
            "Cl({dim}) exceeds supported dimension"
        );
        CliffordElement {
            dim,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn scalar(dim: usize, value: f64) -> Self {
        let mut e = Self::zero(dim);
        e.set(0, value);
        e
    }

    /// The generator `e_i` (zero-based).
    pub fn generator(dim: usize, i: usize) -> Self {
        assert!(i < dim);
        let mut e = Self::zero(dim);
        e.set(1 << i, 1.0);
        e
    }

    pub fn from_terms(dim: usize, terms: impl IntoIterator<Item = (Blade, f64)>) -> Self {
        let mut e = Self::zero(dim);
        for (blade, c) in terms {
            assert!(blade < (1 << dim), "blade outside Cl({dim})");
            *e.coeffs.entry(blade).or_insert(0.0) += c;
        }
        e.coeffs.retain(|_, c| *c != 0.0);
        e
    }

    /// Rotor `cos(θ/2) − sin(θ/2)·e_a e_b` of the plane rotation taking `e_a`
    /// towards `e_b` by θ.
    pub fn plane_rotor(dim: usize, a: usize, b: usize, angle: f64) -> Self {
        assert!(a < b && b < dim);
        let (s, c) = (0.5 * angle).sin_cos();
        Self::from_terms(dim, [(0, c), ((1 << a) | (1 << b), -s)])
    }

    fn set(&mut self, blade: Blade, value: f64) {
        if value == 0.0 {
            self.coeffs.remove(&blade);
        } else {
            self.coeffs.insert(blade, value);
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coefficient(&self, blade: Blade) -> f64 {
        self.coeffs.get(&blade).copied().unwrap_or(0.0)
    }

    pub fn scalar_part(&self) -> f64 {
        self.coefficient(0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (Blade, f64)> + '_ {
        self.coeffs.iter().map(|(b, c)| (*b, *c))
    }

    pub fn blade_count(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_even(&self) -> bool {
        self.coeffs.keys().all(|b| b.count_ones() % 2 == 0)
    }

    /// Reversion: a grade-k blade picks up (−1)^{k(k−1)/2}.
    pub fn reverse(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .map(|(b, c)| {
                let k = b.count_ones();
                let sign = if (k * k.saturating_sub(1) / 2) % 2 == 0 {
                    1.0
                } else {
                    -1.0
                };
                (*b, sign * c)
            })
            .collect();
        CliffordElement {
            dim: self.dim,
            coeffs,
        }
    }

    pub fn scale(&self, factor: f64) -> Self {
        CliffordElement {
            dim: self.dim,
            coeffs: self.coeffs.iter().map(|(b, c)| (*b, c * factor)).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let mut out = self.clone();
        for (b, c) in &other.coeffs {
            let v = out.coefficient(*b) + c;
            out.set(*b, v);
        }
        Ok(out)
    }

    /// Euclidean norm of the coefficient vector.
    pub fn coefficient_norm(&self) -> f64 {
        self.coeffs.values().map(|c| c * c).sum::<f64>().sqrt()
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: other.dim,
            });
        }
        Ok(())
    }

    pub(crate) fn mul_unchecked(&self, other: &Self) -> Self {
        let mut out: BTreeMap<Blade, f64> = BTreeMap::new();
        for (a, ca) in &self.coeffs {
            for (b, cb) in &other.coeffs {
                let v = reorder_sign(*a, *b) * ca * cb;
                *out.entry(a ^ b).or_insert(0.0) += v;
            }
        }
        out.retain(|_, c| *c != 0.0);
        CliffordElement {
            dim: self.dim,
            coeffs: out,
        }
    }

    /// Drop coefficients with magnitude at most `eps`.
    pub fn pruned(mut self, eps: f64) -> Self {
        self.coeffs.retain(|_, c| c.abs() > eps);
        self
    }

    /// Sandwich action `v ↦ r v r̃` on a vector of ℝᵐ.
    pub fn sandwich(&self, v: &Vector) -> Result<Vector> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: v.len(),
            });
        }
        let vec =
            CliffordElement::from_terms(self.dim, v.iter().enumerate().map(|(i, c)| (1 << i, *c)));
        let image = self.mul_unchecked(&vec).mul_unchecked(&self.reverse());
        Ok(Vector::from_fn(self.dim, |i, _| image.coefficient(1 << i)))
    }
}

/// Bilinear Clifford product.
pub fn geometric_product(a: &CliffordElement, b: &CliffordElement) -> Result<CliffordElement> {
    a.check_dim(b)?;
    Ok(a.mul_unchecked(b))
}

impl fmt::Display for CliffordElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        for (n, (blade, c)) in self.coeffs.iter().enumerate() {
            if n > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c}")?;
            for i in 0..self.dim {
                if blade & (1 << i) != 0 {
                    write!(f, "e{}", i + 1)?;
                }
            }
        }
        Ok(())
    }
}
