//! Classification of loops in SO(m) by lifting through Spin(m) ⊂ Cl(m).
//!
//! A loop of rotations lifts to a path of rotors. The path closes on `+1`
//! exactly when the loop is null-homotopic, so the endpoint sign is the class
//! in π₁(SO(m)) ≅ ℤ₂ for m ≥ 3.

mod clifford;
mod quaternion;

use std::sync::Arc;

pub use clifford::{geometric_product, Blade, CliffordElement, MAX_DIMENSION};
pub use quaternion::quaternion_loop_class;

use crate::error::{Error, Result};
use crate::numkit::{check_special_orthogonal, givens_factorization, Matrix, Tolerances};
use crate::z2::Z2;

/// Produces the loop's matrix at any parameter in `[0, 1)`.
pub type MatrixRefiner = Arc<dyn Fn(f64) -> Result<Matrix> + Send + Sync>;

/// Deepest bisection of a single segment before giving up.
pub const MAX_REFINEMENT_DEPTH: usize = 24;

const RENORMALIZE_EVERY: usize = 64;

/// A closed loop of special orthogonal matrices sampled at increasing
/// parameters in `[0, 1)`, read cyclically.
#[derive(Clone)]
pub struct RotationLoop {
    samples: Vec<Matrix>,
    params: Vec<f64>,
    refiner: Option<MatrixRefiner>,
}

impl std::fmt::Debug for RotationLoop {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RotationLoop")
            .field("dim", &self.dim())
            .field("samples", &self.samples.len())
            .field("refiner", &self.refiner.is_some())
            .finish()
    }
}

impl RotationLoop {
    /// Samples at uniformly spaced parameters, no refiner.
    pub fn new(samples: Vec<Matrix>) -> Result<Self> {
        let n = samples.len();
        let params = (0..n).map(|k| k as f64 / n as f64).collect();
        Self::with_params(samples, params, None)
    }

    /// Samples a loop given as a function of the parameter; the function is
    /// kept as the refiner.
    pub fn from_fn<F>(n: usize, f: F) -> Result<Self>
    where
        F: Fn(f64) -> Result<Matrix> + Send + Sync + 'static,
    {
        let samples = (0..n)
            .map(|k| f(k as f64 / n as f64))
            .collect::<Result<Vec<_>>>()?;
        let params = (0..n).map(|k| k as f64 / n as f64).collect();
        Self::with_params(samples, params, Some(Arc::new(f)))
    }

    pub fn with_params(
        samples: Vec<Matrix>,
        params: Vec<f64>,
        refiner: Option<MatrixRefiner>,
    ) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::validation("non-empty loop", "no samples"));
        }
        if params.len() != samples.len() {
            return Err(Error::DimensionMismatch {
                expected: samples.len(),
                actual: params.len(),
            });
        }
        let m = samples[0].nrows();
        for r in &samples {
            if r.nrows() != m || r.ncols() != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    actual: r.nrows().max(r.ncols()),
                });
            }
            check_special_orthogonal(r, 1e-8)?;
        }
        Ok(RotationLoop {
            samples,
            params,
            refiner,
        })
    }

    pub fn dim(&self) -> usize {
        self.samples[0].nrows()
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[Matrix] {
        &self.samples
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn has_refiner(&self) -> bool {
        self.refiner.is_some()
    }

    pub fn without_refiner(&self) -> Self {
        RotationLoop {
            refiner: None,
            ..self.clone()
        }
    }

    /// The loop `t ↦ P·ℓ(t)`.
    pub fn left_translate(&self, p: &Matrix) -> Result<Self> {
        check_special_orthogonal(p, 1e-8)?;
        if p.nrows() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: p.nrows(),
            });
        }
        let samples = self.samples.iter().map(|r| p * r).collect();
        let refiner = self.refiner.clone().map(|f| {
            let p = p.clone();
            Arc::new(move |s: f64| Ok(&p * f(s)?)) as MatrixRefiner
        });
        Self::with_params(samples, self.params.clone(), refiner)
    }

    /// Traverse `first` and then `second`; both must start at the same matrix
    /// (parameter 0).
    pub fn concatenate(first: &Self, second: &Self) -> Result<Self> {
        if first.dim() != second.dim() {
            return Err(Error::DimensionMismatch {
                expected: first.dim(),
                actual: second.dim(),
            });
        }
        let base_gap = (&first.samples[0] - &second.samples[0]).norm();
        if first.params[0] != 0.0 || second.params[0] != 0.0 || base_gap > 1e-9 {
            return Err(Error::validation(
                "common base point",
                format!("loops start {base_gap:.3e} apart"),
            ));
        }
        let mut samples = first.samples.clone();
        samples.extend(second.samples.iter().cloned());
        let mut params: Vec<f64> = first.params.iter().map(|s| 0.5 * s).collect();
        params.extend(second.params.iter().map(|s| 0.5 + 0.5 * s));
        let refiner = match (&first.refiner, &second.refiner) {
            (Some(f), Some(g)) => {
                let (f, g) = (f.clone(), g.clone());
                Some(Arc::new(move |s: f64| {
                    if s < 0.5 {
                        f(2.0 * s)
                    } else {
                        g(2.0 * s - 1.0)
                    }
                }) as MatrixRefiner)
            }
            _ => None,
        };
        Self::with_params(samples, params, refiner)
    }

    /// Parameter of the sample following `k`, unwrapped to exceed `params[k]`.
    fn next_param(&self, k: usize) -> f64 {
        let mut s = self.params[(k + 1) % self.len()];
        while s <= self.params[k] {
            s += 1.0;
        }
        s
    }
}

/// Frobenius distance from the identity allowed for a single lift step.
///
/// A rotation with principal angles θᵢ has ‖R − I‖² = Σ 8 sin²(θᵢ/2), so
/// staying under this bound keeps every angle below `lift_angle_max`.
pub fn step_bound(tol: &Tolerances) -> f64 {
    2.0 * std::f64::consts::SQRT_2 * (0.5 * tol.lift_angle_max).sin()
}

/// The rotor with positive scalar part lifting a near-identity rotation.
pub fn rotor_from_rotation(r: &Matrix, _tol: &Tolerances) -> Result<CliffordElement> {
    let m = r.nrows();
    if m == 0 || m > MAX_DIMENSION || r.ncols() != m {
        return Err(Error::DimensionMismatch {
            expected: m.clamp(1, MAX_DIMENSION),
            actual: r.ncols(),
        });
    }
    let factors = givens_factorization(r)?;
    let mut rotor = CliffordElement::scalar(m, 1.0);
    for g in &factors {
        rotor = rotor.mul_unchecked(&CliffordElement::plane_rotor(m, g.a, g.b, g.angle));
    }
    if rotor.scalar_part() < 0.0 {
        rotor = rotor.scale(-1.0);
    }
    if rotor.scalar_part() < 0.1 {
        return Err(Error::NotNearIdentity {
            scalar: rotor.scalar_part(),
        });
    }
    Ok(rotor)
}

/// Diagnostics of a lift.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LiftOutcome {
    pub class: Z2,
    /// Number of relative rotations lifted, after refinement.
    pub steps: usize,
    /// Deepest bisection used on any segment.
    pub max_depth: usize,
    /// Coefficient distance of the final rotor from ±1.
    pub closure_error: f64,
}

struct Lifter<'a> {
    loop_: &'a RotationLoop,
    tol: &'a Tolerances,
    bound: f64,
    acc: CliffordElement,
    steps: usize,
    max_depth: usize,
}

impl Lifter<'_> {
    fn lift_segment(
        &mut self,
        from: (&Matrix, f64),
        to: (&Matrix, f64),
        depth: usize,
    ) -> Result<()> {
        let relative = to.0 * from.0.transpose();
        let m = relative.nrows();
        if (&relative - Matrix::identity(m, m)).norm() <= self.bound {
            let d = rotor_from_rotation(&relative, self.tol)?;
            // R_next = D·R_prev, so the lift is multiplied on the left.
            self.acc = d.mul_unchecked(&self.acc).pruned(1e-16);
            self.steps += 1;
            if self.steps.is_multiple_of(RENORMALIZE_EVERY) {
                let n2 = self.acc.mul_unchecked(&self.acc.reverse()).scalar_part();
                self.acc = self.acc.scale(1.0 / n2.sqrt());
            }
            self.max_depth = self.max_depth.max(depth);
            return Ok(());
        }
        let refiner = match &self.loop_.refiner {
            Some(f) if depth < MAX_REFINEMENT_DEPTH => f.clone(),
            _ => {
                return Err(Error::RefinementExhausted {
                    from: from.1,
                    to: to.1,
                })
            }
        };
        let mid = 0.5 * (from.1 + to.1);
        let mid_matrix = refiner(mid.rem_euclid(1.0))?;
        check_special_orthogonal(&mid_matrix, 1e-8)?;
        self.lift_segment(from, (&mid_matrix, mid), depth + 1)?;
        self.lift_segment((&mid_matrix, mid), to, depth + 1)
    }
}

/// Class of the loop in π₁(SO(m)), with lift diagnostics.
pub fn lift_loop(loop_: &RotationLoop, tol: &Tolerances) -> Result<LiftOutcome> {
    let m = loop_.dim();
    if m < 3 {
        return Err(Error::DimensionMismatch {
            expected: 3,
            actual: m,
        });
    }
    let mut lifter = Lifter {
        loop_,
        tol,
        bound: step_bound(tol),
        acc: CliffordElement::scalar(m, 1.0),
        steps: 0,
        max_depth: 0,
    };
    let n = loop_.len();
    for k in 0..n {
        let next = loop_.next_param(k);
        lifter.lift_segment(
            (&loop_.samples[k], loop_.params[k]),
            (&loop_.samples[(k + 1) % n], next),
            0,
        )?;
    }
    let g = lifter.acc;
    let one = CliffordElement::scalar(m, 1.0);
    let to_plus = g.add(&one.scale(-1.0))?.coefficient_norm();
    let to_minus = g.add(&one)?.coefficient_norm();
    let closure_error = to_plus.min(to_minus);
    if closure_error > 1e-4 {
        return Err(Error::LiftInconsistent { to_plus, to_minus });
    }
    Ok(LiftOutcome {
        class: Z2::from(to_minus < to_plus),
        steps: lifter.steps,
        max_depth: lifter.max_depth,
        closure_error,
    })
}

/// Class of the loop in π₁(SO(m)) ≅ ℤ₂.
pub fn loop_class(loop_: &RotationLoop, tol: &Tolerances) -> Result<Z2> {
    lift_loop(loop_, tol).map(|o| o.class)
}

/// Block-embed every sample as `diag(R, I)` in SO(target).
pub fn stabilize_loop(loop_: &RotationLoop, target: usize) -> Result<RotationLoop> {
    let m = loop_.dim();
    if target < m || target > MAX_DIMENSION {
        return Err(Error::DimensionMismatch {
            expected: m.max(target.min(MAX_DIMENSION)),
            actual: target,
        });
    }
    let embed = move |r: &Matrix| {
        let mut big = Matrix::identity(target, target);
        big.view_mut((0, 0), (m, m)).copy_from(r);
        big
    };
    let samples = loop_.samples.iter().map(embed).collect();
    let refiner = loop_
        .refiner
        .clone()
        .map(|f| Arc::new(move |s: f64| Ok(embed(&f(s)?))) as MatrixRefiner);
    RotationLoop::with_params(samples, loop_.params.clone(), refiner)
}
