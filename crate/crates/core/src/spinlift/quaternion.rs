//! Independent classification for m = 3 using unit quaternions (Spin(3) = S³).
//!
//! Every sample is lifted to a unit quaternion whose sign is chosen nearest to
//! the previous lift; the loop is non-trivial when the lift returns to the
//! antipode of where it started.

use super::{RotationLoop, MAX_REFINEMENT_DEPTH};
use crate::error::{Error, Result};
use crate::numkit::{check_special_orthogonal, Matrix, Tolerances};
use crate::z2::Z2;

#[derive(Debug, Clone, Copy, PartialEq)]
struct Quat([f64; 4]);

impl Quat {
    fn dot(&self, other: &Quat) -> f64 {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| a * b).sum()
    }

    fn neg(self) -> Quat {
        Quat(self.0.map(|c| -c))
    }

    /// One of the two unit quaternions of a rotation acting on column vectors.
    fn from_rotation(r: &Matrix) -> Quat {
        let m = |i: usize, j: usize| r[(i, j)];
        let trace = m(0, 0) + m(1, 1) + m(2, 2);
        let q = if trace > 0.0 {
            let s = 2.0 * (trace + 1.0).sqrt();
            [
                0.25 * s,
                (m(2, 1) - m(1, 2)) / s,
                (m(0, 2) - m(2, 0)) / s,
                (m(1, 0) - m(0, 1)) / s,
            ]
        } else if m(0, 0) > m(1, 1) && m(0, 0) > m(2, 2) {
            let s = 2.0 * (1.0 + m(0, 0) - m(1, 1) - m(2, 2)).sqrt();
            [
                (m(2, 1) - m(1, 2)) / s,
                0.25 * s,
                (m(0, 1) + m(1, 0)) / s,
                (m(0, 2) + m(2, 0)) / s,
            ]
        } else if m(1, 1) > m(2, 2) {
            let s = 2.0 * (1.0 + m(1, 1) - m(0, 0) - m(2, 2)).sqrt();
            [
                (m(0, 2) - m(2, 0)) / s,
                (m(0, 1) + m(1, 0)) / s,
                0.25 * s,
                (m(1, 2) + m(2, 1)) / s,
            ]
        } else {
            let s = 2.0 * (1.0 + m(2, 2) - m(0, 0) - m(1, 1)).sqrt();
            [
                (m(1, 0) - m(0, 1)) / s,
                (m(0, 2) + m(2, 0)) / s,
                (m(1, 2) + m(2, 1)) / s,
                0.25 * s,
            ]
        };
        let norm = q.iter().map(|c| c * c).sum::<f64>().sqrt();
        Quat(q.map(|c| c / norm))
    }

    fn nearest_to(self, previous: &Quat) -> Quat {
        if self.dot(previous) < 0.0 {
            self.neg()
        } else {
            self
        }
    }
}

struct Walker<'a> {
    loop_: &'a RotationLoop,
    min_dot: f64,
}

impl Walker<'_> {
    /// Carries the lift from `from` to the sample at parameter `to_s`.
    fn walk(&self, from: (Quat, f64), to: (&Matrix, f64), depth: usize) -> Result<Quat> {
        let candidate = Quat::from_rotation(to.0).nearest_to(&from.0);
        if candidate.dot(&from.0) >= self.min_dot {
            return Ok(candidate);
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
        let q_mid = self.walk(from, (&mid_matrix, mid), depth + 1)?;
        self.walk((q_mid, mid), to, depth + 1)
    }
}

/// Class of a loop in π₁(SO(3)), computed with unit quaternions only.
pub fn quaternion_loop_class(loop_: &RotationLoop, tol: &Tolerances) -> Result<Z2> {
    if loop_.dim() != 3 {
        return Err(Error::DimensionMismatch {
            expected: 3,
            actual: loop_.dim(),
        });
    }
    let walker = Walker {
        loop_,
        min_dot: (0.5 * tol.lift_angle_max).cos(),
    };
    let n = loop_.len();
    let start = Quat::from_rotation(&loop_.samples[0]);
    let mut q = start;
    for k in 0..n {
        let next = loop_.next_param(k);
        q = walker.walk((q, loop_.params[k]), (&loop_.samples[(k + 1) % n], next), 0)?;
    }
    let d = q.dot(&start);
    if (d.abs() - 1.0).abs() > 1e-4 {
        return Err(Error::LiftInconsistent {
            to_plus: 1.0 - d,
            to_minus: 1.0 + d,
        });
    }
    Ok(Z2::from(d < 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::Givens;
    use std::f64::consts::PI;

    fn turn_loop(turns: f64) -> RotationLoop {
        RotationLoop::from_fn(64, move |s| {
            Ok(Givens {
                a: 0,
                b: 1,
                angle: 2.0 * PI * turns * s,
            }
            .matrix(3))
        })
        .unwrap()
    }

    #[test]
    fn constant_loop() {
        let l = RotationLoop::new(vec![Matrix::identity(3, 3); 10]).unwrap();
        assert_eq!(
            quaternion_loop_class(&l, &Tolerances::default()).unwrap(),
            Z2::ZERO
        );
    }

    #[test]
    fn full_turn_ends_at_antipode() {
        assert_eq!(
            quaternion_loop_class(&turn_loop(1.0), &Tolerances::default()).unwrap(),
            Z2::ONE
        );
        assert_eq!(
            quaternion_loop_class(&turn_loop(2.0), &Tolerances::default()).unwrap(),
            Z2::ZERO
        );
    }

    #[test]
    fn turn_and_return_is_trivial() {
        // 2π rotation followed by its reverse.
        let l = RotationLoop::from_fn(128, |s| {
            let angle = if s < 0.5 {
                4.0 * PI * s
            } else {
                4.0 * PI * (1.0 - s)
            };
            Ok(Givens { a: 0, b: 1, angle }.matrix(3))
        })
        .unwrap();
        assert_eq!(
            quaternion_loop_class(&l, &Tolerances::default()).unwrap(),
            Z2::ZERO
        );
    }

    #[test]
    fn quaternion_matches_rotation() {
        // q = cos(θ/2) + sin(θ/2)·k for a rotation about the third axis.
        let theta = 1.2_f64;
        let q = Quat::from_rotation(
            &Givens {
                a: 0,
                b: 1,
                angle: theta,
            }
            .matrix(3),
        );
        assert!((q.0[0] - (0.5 * theta).cos()).abs() < 1e-14);
        assert!((q.0[3] - (0.5 * theta).sin()).abs() < 1e-14);
    }

    #[test]
    fn rejects_other_dimensions() {
        let l = RotationLoop::new(vec![Matrix::identity(4, 4); 4]).unwrap();
        assert!(quaternion_loop_class(&l, &Tolerances::default()).is_err());
    }
}
